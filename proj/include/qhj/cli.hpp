#pragma once

#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qhj/io.hpp"
#include "qhj/qhj.hpp"

/// Command-line front end. run_cli is the whole program (the binary's main
/// only forwards), so every subcommand is testable in-process.
///
/// Exit codes: 0 success, 1 verification failure (or internal error),
/// 2 invalid input, 3 inconsistent constants record.
namespace qhj {

namespace detail_cli {

struct CliValues {
    double U = 2.0;
    double Ex = 1.0;
    double E = 2.0;
    double ky = 0.0;
    double q = 1.0;
    int level = 0;
    double a = 1.0, b = 1.0, c = 0.0;
    double hbar = 1.0, mass = 1.0;
    std::string scenario_path, format, out_path, grid;
    double tol = 1e-6;
    bool json = false;
    bool inject = false;
    std::uint64_t seed = 0x51a7eULL;
    int scenarios = 6;
};

struct OptRefs {
    CLI::Option* U = nullptr;
    CLI::Option* Ex = nullptr;
    CLI::Option* E = nullptr;
    CLI::Option* ky = nullptr;
    CLI::Option* q = nullptr;
    CLI::Option* level = nullptr;
    CLI::Option* a = nullptr;
    CLI::Option* b = nullptr;
    CLI::Option* c = nullptr;
    CLI::Option* hbar = nullptr;
    CLI::Option* mass = nullptr;
};

inline OptRefs add_scenario_options(CLI::App* cmd, CliValues& v, bool with_Ex, bool with_E,
                                    bool with_ky, bool with_well) {
    OptRefs o;
    o.U = cmd->add_option("--U", v.U, "Barrier height / well depth");
    if (with_Ex) o.Ex = cmd->add_option("--Ex", v.Ex, "Normal kinetic energy (barrier)");
    if (with_E) o.E = cmd->add_option("--E", v.E, "Total energy (oblique)");
    if (with_ky) o.ky = cmd->add_option("--ky", v.ky, "Transverse wavenumber");
    if (with_well) {
        o.q = cmd->add_option("--q", v.q, "Well half-width");
        o.level = cmd->add_option("--level", v.level, "Symmetric level index n >= 0");
    }
    o.a = cmd->add_option("--a", v.a, "Microstate coefficient a");
    o.b = cmd->add_option("--b", v.b, "Microstate coefficient b");
    o.c = cmd->add_option("--c", v.c, "Microstate coefficient c");
    o.hbar = cmd->add_option("--hbar", v.hbar, "Reduced Planck constant");
    o.mass = cmd->add_option("--mass", v.mass, "Particle mass");
    cmd->add_option("--scenario", v.scenario_path, "Scenario/record JSON file (flags override)");
    cmd->add_option("--out", v.out_path, "Write output to this file instead of stdout");
    return o;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open scenario file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::vector<double> parse_grid(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("grid must be min:max:n, got \"" + spec + "\"");
    double lo = 0.0, hi = 0.0;
    long long n = 0;
    try {
        std::size_t used = 0;
        lo = std::stod(spec.substr(0, c1));
        hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        const std::string ntext = spec.substr(c2 + 1);
        n = std::stoll(ntext, &used);
        if (used != ntext.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw std::invalid_argument("grid must be min:max:n with numeric fields, got \"" + spec +
                                    "\"");
    }
    if (!(hi > lo)) throw std::invalid_argument("grid: max must exceed min");
    if (n < 2 || n > 2000000) throw std::invalid_argument("grid: n must be in [2, 2000000]");
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i)
        xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1.0);
    return xs;
}

inline int emit(const std::string& text, const std::string& out_path, std::ostream& out,
                std::ostream& err) {
    if (out_path.empty()) {
        out << text;
        return 0;
    }
    std::ofstream f(out_path);
    if (!f) {
        err << "qhj: cannot open output file " << out_path << "\n";
        return 2;
    }
    f << text;
    return 0;
}

inline Microstate resolve_microstate(const CliValues& v, const OptRefs& o, const ScenarioFile* sf) {
    Microstate ms;
    if (sf && sf->has_microstate) ms = sf->microstate;
    if (o.a && o.a->count()) ms.a = v.a;
    if (o.b && o.b->count()) ms.b = v.b;
    if (o.c && o.c->count()) ms.c = v.c;
    validate_microstate(ms);
    return ms;
}

inline UnitSystem resolve_units(const CliValues& v, const OptRefs& o, const UnitSystem& base) {
    UnitSystem un = base;
    if (o.hbar && o.hbar->count()) un.hbar = v.hbar;
    if (o.mass && o.mass->count()) un.mass = v.mass;
    return un;
}

inline BarrierScenario resolve_barrier(const CliValues& v, const OptRefs& o,
                                       const ScenarioFile* sf) {
    BarrierScenario s;
    if (sf) s = sf->barrier;
    if (o.U && o.U->count()) s.U = v.U;
    if (o.Ex && o.Ex->count()) s.Ex = v.Ex;
    s.units = resolve_units(v, o, s.units);
    validate_scenario(s);
    return s;
}

inline ObliqueScenario resolve_oblique(const CliValues& v, const OptRefs& o,
                                       const ScenarioFile* sf) {
    ObliqueScenario s;
    if (sf) s = sf->oblique;
    if (o.U && o.U->count()) s.U = v.U;
    if (o.E && o.E->count()) s.E = v.E;
    if (o.ky && o.ky->count()) s.ky = v.ky;
    s.units = resolve_units(v, o, s.units);
    validate_scenario(s);
    return s;
}

inline WellScenario resolve_well(const CliValues& v, const OptRefs& o, const ScenarioFile* sf) {
    WellScenario s;
    if (sf) s = sf->type == "duct" ? sf->duct.well : sf->well;
    if (o.U && o.U->count()) s.U = v.U;
    if (o.q && o.q->count()) s.q = v.q;
    if (o.level && o.level->count()) s.level = v.level;
    s.units = resolve_units(v, o, s.units);
    validate_scenario(s);
    return s;
}

inline DuctScenario resolve_duct(const CliValues& v, const OptRefs& o, const ScenarioFile* sf) {
    DuctScenario s;
    if (sf) s = sf->duct;
    s.well = resolve_well(v, o, sf);
    if (o.ky && o.ky->count()) s.ky = v.ky;
    validate_scenario(s);
    return s;
}

inline JsonNode trajectory_rows_json(const std::vector<TrajectoryPoint>& rows) {
    JsonNode arr = JsonNode::array();
    for (const TrajectoryPoint& r : rows)
        arr.push(JsonNode::object()
                     .add("x", JsonNode::number(r.x))
                     .add("t_minus_tau", JsonNode::number(r.t_rel))
                     .add("y_minus_y0", JsonNode::number(r.y_rel))
                     .add("p", JsonNode::number(r.p))
                     .add("W", JsonNode::number(r.W)));
    return arr;
}

}  // namespace detail_cli

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using namespace detail_cli;
    CLI::App app{"Trajectory observables of quantum reflection: semi-infinite barriers, square "
                 "wells, and square-well ducts"};
    app.name("qhj");
    app.require_subcommand(1);

    CliValues v;

    CLI::App* reflect = app.add_subcommand(
        "reflect", "Reflection time (and oblique transverse displacement) for one microstate");
    OptRefs ro = add_scenario_options(reflect, v, true, true, true, false);
    std::string reflect_fmt = "json";
    reflect->add_option("--format", reflect_fmt, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* trace = app.add_subcommand(
        "trace", "Tabulate the trajectory (t - tau, y - y0, p, W) over an x grid");
    OptRefs to = add_scenario_options(trace, v, true, true, true, true);
    std::string trace_fmt = "csv";
    trace->add_option("--format", trace_fmt, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    trace->add_option("--grid", v.grid, "Sample grid min:max:n")->required();

    CLI::App* well = app.add_subcommand(
        "well", "Bound level of the square well with its microstate observables");
    OptRefs wo = add_scenario_options(well, v, false, false, false, true);
    std::string well_fmt = "json";
    well->add_option("--format", well_fmt, "Output format")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* duct = app.add_subcommand(
        "duct", "Constants-of-motion record of one duct microstate (consumed by invert)");
    OptRefs dopt = add_scenario_options(duct, v, false, false, true, true);
    std::string duct_fmt = "json";
    duct->add_option("--format", duct_fmt, "Output format")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* invert = app.add_subcommand(
        "invert", "Recover (a, b, c) from a duct record and check overdetermination");
    std::string invert_fmt = "json";
    invert->add_option("--scenario", v.scenario_path, "Duct record JSON (from `duct --format json`)")
        ->required();
    invert->add_option("--format", invert_fmt, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    invert->add_option("--out", v.out_path, "Write output to this file instead of stdout");
    invert->add_option("--tol", v.tol, "Relative consistency tolerance")
        ->envname("QHJ_DEFAULT_TOL");

    CLI::App* verify = app.add_subcommand(
        "verify", "Run the self-verification suite (closed forms vs numerical oracles)");
    verify->add_flag("--json", v.json, "Emit the report as JSON");
    verify->add_flag("--inject-theta-misprint", v.inject,
                     "Debug: evaluate the well with a wrongly anchored theta tail; the interface "
                     "checks must then fail");
    verify->add_option("--seed", v.seed, "Random scenario seed");
    verify->add_option("--scenarios", v.scenarios, "Scenarios per check")
        ->check(CLI::Range(1, 64));
    verify->add_option("--out", v.out_path, "Write output to this file instead of stdout");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("qhj");
    for (const std::string& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        ScenarioFile sf;
        const ScenarioFile* file = nullptr;
        if (!v.scenario_path.empty()) {
            sf = parse_scenario_text(read_file(v.scenario_path));
            file = &sf;
        }

        if (reflect->parsed()) {
            const bool oblique = file ? sf.type == "oblique"
                                      : (ro.E->count() > 0 || ro.ky->count() > 0);
            if (file && sf.type != "barrier" && sf.type != "oblique")
                throw std::invalid_argument("reflect requires a barrier or oblique scenario, got \"" +
                                            sf.type + "\"");
            const Microstate ms = resolve_microstate(v, ro, file);
            std::ostringstream body;
            if (!oblique) {
                const BarrierScenario s = resolve_barrier(v, ro, file);
                const Wavenumbers wn = derive_wavenumbers(s);
                const double tR = reflection_time(s, ms);
                if (reflect_fmt == "csv") {
                    body << "t_R\n" << fmt17(tR) << "\n";
                } else {
                    body << JsonNode::object()
                                .add("type", JsonNode::string("barrier"))
                                .add("U", JsonNode::number(s.U))
                                .add("Ex", JsonNode::number(s.Ex))
                                .add("units", units_json(s.units))
                                .add("microstate", microstate_json(ms))
                                .add("wavenumbers", JsonNode::object()
                                                        .add("kx", JsonNode::number(wn.kx))
                                                        .add("kappa", JsonNode::number(wn.kappa)))
                                .add("observables",
                                     JsonNode::object().add("t_R", JsonNode::number(tR)))
                                .dump();
                }
            } else {
                const ObliqueScenario s = resolve_oblique(v, ro, file);
                const Wavenumbers wn = derive_wavenumbers(s);
                const double tR = reflection_time(s, ms);
                const double dy = gh_displacement(s, ms);
                if (reflect_fmt == "csv") {
                    body << "t_R,dy\n" << fmt17(tR) << ',' << fmt17(dy) << "\n";
                } else {
                    body << JsonNode::object()
                                .add("type", JsonNode::string("oblique"))
                                .add("U", JsonNode::number(s.U))
                                .add("E", JsonNode::number(s.E))
                                .add("ky", JsonNode::number(s.ky))
                                .add("units", units_json(s.units))
                                .add("microstate", microstate_json(ms))
                                .add("wavenumbers", JsonNode::object()
                                                        .add("kx", JsonNode::number(wn.kx))
                                                        .add("kappa", JsonNode::number(wn.kappa)))
                                .add("observables", JsonNode::object()
                                                        .add("t_R", JsonNode::number(tR))
                                                        .add("dy", JsonNode::number(dy)))
                                .dump();
                }
            }
            return emit(body.str(), v.out_path, out, err);
        }

        if (trace->parsed()) {
            const std::vector<double> xs = parse_grid(v.grid);
            std::string type;
            if (file) {
                type = sf.type;
            } else if (to.q->count() > 0 || to.level->count() > 0) {
                type = to.ky->count() > 0 ? "duct" : "well";
            } else if (to.E->count() > 0 || to.ky->count() > 0) {
                type = "oblique";
            } else {
                type = "barrier";
            }
            const Microstate ms = resolve_microstate(v, to, file);
            std::vector<TrajectoryPoint> rows;
            if (type == "barrier") rows = sample_trajectory(xs, resolve_barrier(v, to, file), ms);
            else if (type == "oblique") rows = sample_trajectory(xs, resolve_oblique(v, to, file), ms);
            else if (type == "well") rows = sample_trajectory(xs, resolve_well(v, to, file), ms);
            else rows = sample_trajectory(xs, resolve_duct(v, to, file), ms);
            std::ostringstream body;
            if (trace_fmt == "csv") {
                write_trajectory_csv(body, rows);
            } else {
                body << JsonNode::object()
                            .add("type", JsonNode::string(type))
                            .add("rows", trajectory_rows_json(rows))
                            .dump();
            }
            return emit(body.str(), v.out_path, out, err);
        }

        if (well->parsed()) {
            if (file && sf.type != "well")
                throw std::invalid_argument("well requires a well scenario, got \"" + sf.type + "\"");
            const WellScenario s = resolve_well(v, wo, file);
            const Microstate ms = resolve_microstate(v, wo, file);
            const BoundLevel lv = solve_level(s);
            const WellReflectionTimes t = reflection_times_well(lv, ms, s.units);
            const double lib = libration_period(lv, ms, s.units);
            const double J = action_variable(lv, ms, s.units);
            const double erma = ermakov_invariant(ms);
            const double w2 = wronskian_sq(ms, s.units);
            std::ostringstream body;
            if (well_fmt == "csv") {
                body << "n,kx,kappa,Ex,residual,t_plus,t_minus,t_libration,action,ermakov,w_squared\n"
                     << lv.n << ',' << fmt17(lv.kx) << ',' << fmt17(lv.kappa) << ',' << fmt17(lv.Ex)
                     << ',' << fmt17(lv.residual) << ',' << fmt17(t.t_plus) << ','
                     << fmt17(t.t_minus) << ',' << fmt17(lib) << ',' << fmt17(J) << ','
                     << fmt17(erma) << ',' << fmt17(w2) << "\n";
            } else {
                body << JsonNode::object()
                            .add("type", JsonNode::string("well"))
                            .add("U", JsonNode::number(s.U))
                            .add("q", JsonNode::number(s.q))
                            .add("level", JsonNode::integer(s.level))
                            .add("units", units_json(s.units))
                            .add("microstate", microstate_json(ms))
                            .add("level_data", level_json(lv))
                            .add("observables", JsonNode::object()
                                                    .add("t_plus", JsonNode::number(t.t_plus))
                                                    .add("t_minus", JsonNode::number(t.t_minus))
                                                    .add("t_libration", JsonNode::number(lib))
                                                    .add("action", JsonNode::number(J))
                                                    .add("ermakov", JsonNode::number(erma))
                                                    .add("w_squared", JsonNode::number(w2)))
                            .dump();
            }
            return emit(body.str(), v.out_path, out, err);
        }

        if (duct->parsed()) {
            if (file && sf.type != "duct")
                throw std::invalid_argument("duct requires a duct scenario, got \"" + sf.type + "\"");
            const DuctScenario s = resolve_duct(v, dopt, file);
            const Microstate ms = resolve_microstate(v, dopt, file);
            const BoundLevel lv = solve_level(s.well);
            const MotionConstants mc = motion_constants(s, lv, ms);
            std::ostringstream body;
            if (duct_fmt == "csv") {
                body << "w_squared,ermakov,t_plus,t_minus,t_libration,dy_plus,dy_minus,"
                        "dy_libration,action,energy\n"
                     << fmt17(mc.w_squared) << ',' << fmt17(mc.ermakov) << ',' << fmt17(mc.t_plus)
                     << ',' << fmt17(mc.t_minus) << ',' << fmt17(mc.t_libration) << ','
                     << fmt17(mc.dy_plus) << ',' << fmt17(mc.dy_minus) << ','
                     << fmt17(mc.dy_libration) << ',' << fmt17(mc.action) << ','
                     << fmt17(mc.energy) << "\n";
            } else {
                body << duct_record_json(s, lv, ms, mc).dump();
            }
            return emit(body.str(), v.out_path, out, err);
        }

        if (invert->parsed()) {
            if (!file) throw std::invalid_argument("invert requires --scenario");
            if (sf.type != "duct")
                throw std::invalid_argument("invert requires a duct record, got \"" + sf.type + "\"");
            if (!sf.has_constants)
                throw std::invalid_argument("invert: record carries no \"constants\" object");
            const OverdeterminationReport rep =
                overdetermination_check(sf.constants, sf.duct, v.tol);
            std::ostringstream body;
            if (invert_fmt == "csv") {
                body << "a,b,c,rel_discrepancy,consistent\n"
                     << fmt17(rep.recovered.a) << ',' << fmt17(rep.recovered.b) << ','
                     << fmt17(rep.recovered.c) << ',' << fmt17(rep.rel_discrepancy) << ','
                     << (rep.consistent ? "true" : "false") << "\n";
            } else {
                JsonNode doc = JsonNode::object();
                doc.add("recovered", microstate_json(rep.recovered));
                if (sf.has_microstate) {
                    const Microstate& ref = sf.microstate;
                    const double worst =
                        std::max({std::abs(rep.recovered.a / ref.a - 1.0),
                                  std::abs(rep.recovered.b / ref.b - 1.0),
                                  std::abs(rep.recovered.c - ref.c) / std::sqrt(ref.a * ref.b)});
                    doc.add("reference", microstate_json(ref));
                    doc.add("max_coefficient_error", JsonNode::number(worst));
                }
                doc.add("rel_discrepancy", JsonNode::number(rep.rel_discrepancy));
                doc.add("predicted_dy_libration", JsonNode::number(rep.predicted_dy_libration));
                doc.add("tolerance", JsonNode::number(v.tol));
                doc.add("consistent", JsonNode::boolean(rep.consistent));
                body << doc.dump();
            }
            const int rc = emit(body.str(), v.out_path, out, err);
            if (rc != 0) return rc;
            return rep.consistent ? 0 : 3;
        }

        if (verify->parsed()) {
            VerifyOptions vo;
            vo.seed = v.seed;
            vo.scenario_count = v.scenarios;
            vo.inject_theta_misprint = v.inject;
            const std::vector<CheckResult> results = run_verification(vo);
            bool all = true;
            std::ostringstream body;
            if (v.json) {
                body << verify_report_json(results).dump();
                for (const CheckResult& r : results) all = all && r.pass;
            } else {
                for (const CheckResult& r : results) {
                    all = all && r.pass;
                    body << (r.pass ? "PASS " : "FAIL ") << r.name << " (measured "
                         << fmt17(r.measured) << ", tol " << fmt17(r.tolerance) << ")\n";
                }
                body << (all ? "verification passed" : "verification FAILED") << " ("
                     << results.size() << " checks)\n";
            }
            const int rc = emit(body.str(), v.out_path, out, err);
            if (rc != 0) return rc;
            return all ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        err << "qhj: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "qhj: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "qhj: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace qhj

#pragma once

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qhj/core.hpp"
#include "qhj/hj.hpp"
#include "qhj/observables.hpp"
#include "qhj/oracle.hpp"
#include "qhj/quantization.hpp"

/// Serialization: 17-significant-digit number formatting (round-trip exact
/// for doubles), an insertion-ordered JSON writer for records, the trajectory
/// CSV table, and parsing of scenario/record files.
namespace qhj {

/// Shortest distinguishing decimal form, always round-trip exact.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Minimal JSON document builder preserving insertion order (the standard
/// parsers reorder object keys; records read better in field order).
class JsonNode {
  public:
    static JsonNode number(double v) { return JsonNode(Kind::scalar, fmt17(v)); }
    static JsonNode integer(long long v) { return JsonNode(Kind::scalar, std::to_string(v)); }
    static JsonNode boolean(bool v) { return JsonNode(Kind::scalar, v ? "true" : "false"); }
    static JsonNode string(const std::string& v) { return JsonNode(Kind::scalar, quote(v)); }
    static JsonNode object() { return JsonNode(Kind::object, {}); }
    static JsonNode array() { return JsonNode(Kind::array, {}); }

    JsonNode& add(const std::string& key, JsonNode v) {
        members_.emplace_back(key, std::move(v));
        return *this;
    }
    JsonNode& push(JsonNode v) {
        items_.push_back(std::move(v));
        return *this;
    }

    std::string dump(int indent = 2) const {
        std::string out;
        write(out, indent, 0);
        out.push_back('\n');
        return out;
    }

  private:
    enum class Kind { scalar, object, array };

    JsonNode(Kind k, std::string s) : kind_(k), scalar_(std::move(s)) {}

    static std::string quote(const std::string& v) {
        std::string out = "\"";
        for (char ch : v) {
            switch (ch) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(ch) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                        out += buf;
                    } else {
                        out.push_back(ch);
                    }
            }
        }
        out.push_back('"');
        return out;
    }

    void write(std::string& out, int indent, int depth) const {
        const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
        const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
        switch (kind_) {
            case Kind::scalar:
                out += scalar_;
                break;
            case Kind::object: {
                if (members_.empty()) {
                    out += "{}";
                    break;
                }
                out += "{\n";
                for (std::size_t i = 0; i < members_.size(); ++i) {
                    out += pad + quote(members_[i].first) + ": ";
                    members_[i].second.write(out, indent, depth + 1);
                    out += (i + 1 < members_.size()) ? ",\n" : "\n";
                }
                out += close_pad + "}";
                break;
            }
            case Kind::array: {
                if (items_.empty()) {
                    out += "[]";
                    break;
                }
                out += "[\n";
                for (std::size_t i = 0; i < items_.size(); ++i) {
                    out += pad;
                    items_[i].write(out, indent, depth + 1);
                    out += (i + 1 < items_.size()) ? ",\n" : "\n";
                }
                out += close_pad + "]";
                break;
            }
        }
    }

    Kind kind_;
    std::string scalar_;
    std::vector<std::pair<std::string, JsonNode>> members_;
    std::vector<JsonNode> items_;
};

/// Trajectory table CSV: fixed header, 17-significant-digit cells.
inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& rows) {
    os << "x,t_minus_tau,y_minus_y0,p,W\n";
    for (const TrajectoryPoint& r : rows)
        os << fmt17(r.x) << ',' << fmt17(r.t_rel) << ',' << fmt17(r.y_rel) << ',' << fmt17(r.p)
           << ',' << fmt17(r.W) << '\n';
}

inline JsonNode units_json(const UnitSystem& un) {
    return JsonNode::object().add("hbar", JsonNode::number(un.hbar)).add("mass", JsonNode::number(un.mass));
}

inline JsonNode microstate_json(const Microstate& ms) {
    return JsonNode::object()
        .add("a", JsonNode::number(ms.a))
        .add("b", JsonNode::number(ms.b))
        .add("c", JsonNode::number(ms.c));
}

inline JsonNode level_json(const BoundLevel& lv) {
    return JsonNode::object()
        .add("n", JsonNode::integer(lv.n))
        .add("kx", JsonNode::number(lv.kx))
        .add("kappa", JsonNode::number(lv.kappa))
        .add("Ex", JsonNode::number(lv.Ex))
        .add("residual", JsonNode::number(lv.residual));
}

inline JsonNode constants_json(const MotionConstants& mc) {
    return JsonNode::object()
        .add("w_squared", JsonNode::number(mc.w_squared))
        .add("ermakov", JsonNode::number(mc.ermakov))
        .add("t_plus", JsonNode::number(mc.t_plus))
        .add("t_minus", JsonNode::number(mc.t_minus))
        .add("t_libration", JsonNode::number(mc.t_libration))
        .add("dy_plus", JsonNode::number(mc.dy_plus))
        .add("dy_minus", JsonNode::number(mc.dy_minus))
        .add("dy_libration", JsonNode::number(mc.dy_libration))
        .add("action", JsonNode::number(mc.action))
        .add("energy", JsonNode::number(mc.energy));
}

/// The record `duct --format json` emits and `invert --scenario` consumes.
inline JsonNode duct_record_json(const DuctScenario& scen, const BoundLevel& lv,
                                 const Microstate& ms, const MotionConstants& mc) {
    return JsonNode::object()
        .add("type", JsonNode::string("duct"))
        .add("U", JsonNode::number(scen.well.U))
        .add("q", JsonNode::number(scen.well.q))
        .add("level", JsonNode::integer(scen.well.level))
        .add("ky", JsonNode::number(scen.ky))
        .add("units", units_json(scen.well.units))
        .add("microstate", microstate_json(ms))
        .add("level_data", level_json(lv))
        .add("constants", constants_json(mc));
}

inline JsonNode verify_report_json(const std::vector<CheckResult>& results) {
    JsonNode arr = JsonNode::array();
    bool all = true;
    for (const CheckResult& r : results) {
        all = all && r.pass;
        arr.push(JsonNode::object()
                     .add("name", JsonNode::string(r.name))
                     .add("pass", JsonNode::boolean(r.pass))
                     .add("measured", JsonNode::number(r.measured))
                     .add("tolerance", JsonNode::number(r.tolerance)));
    }
    return JsonNode::object().add("all_pass", JsonNode::boolean(all)).add("checks", std::move(arr));
}

/// Parsed scenario (or record) file. `type` selects which member is loaded;
/// microstate and constants travel along when present.
struct ScenarioFile {
    std::string type;
    BarrierScenario barrier{};
    ObliqueScenario oblique{};
    WellScenario well{};
    DuctScenario duct{};
    bool has_microstate = false;
    Microstate microstate{};
    bool has_constants = false;
    MotionConstants constants{};
};

namespace detail {

inline double json_num(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw std::invalid_argument(std::string("scenario file: missing or non-numeric field \"") +
                                    key + "\"");
    return j.at(key).get<double>();
}

inline double json_num_or(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw std::invalid_argument(std::string("scenario file: non-numeric field \"") + key + "\"");
    return j.at(key).get<double>();
}

inline UnitSystem json_units(const nlohmann::json& j) {
    UnitSystem un;
    if (j.contains("units")) {
        const auto& u = j.at("units");
        if (!u.is_object()) throw std::invalid_argument("scenario file: \"units\" must be an object");
        un.hbar = json_num_or(u, "hbar", 1.0);
        un.mass = json_num_or(u, "mass", 1.0);
    }
    return un;
}

}  // namespace detail

inline ScenarioFile parse_scenario_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw std::invalid_argument("scenario file: top-level object with a string \"type\" required");
    ScenarioFile f;
    f.type = j.at("type").get<std::string>();
    const UnitSystem un = detail::json_units(j);
    if (f.type == "barrier") {
        f.barrier.U = detail::json_num(j, "U");
        f.barrier.Ex = detail::json_num(j, "Ex");
        f.barrier.units = un;
    } else if (f.type == "oblique") {
        f.oblique.U = detail::json_num(j, "U");
        f.oblique.E = detail::json_num(j, "E");
        f.oblique.ky = detail::json_num_or(j, "ky", 0.0);
        f.oblique.units = un;
    } else if (f.type == "well" || f.type == "duct") {
        WellScenario w;
        w.U = detail::json_num(j, "U");
        w.q = detail::json_num(j, "q");
        w.units = un;
        if (j.contains("level")) {
            if (!j.at("level").is_number_integer())
                throw std::invalid_argument("scenario file: \"level\" must be an integer");
            w.level = j.at("level").get<int>();
        }
        if (f.type == "well") {
            f.well = w;
        } else {
            f.duct.well = w;
            f.duct.ky = detail::json_num_or(j, "ky", 0.0);
        }
    } else {
        throw std::invalid_argument("scenario file: unknown type \"" + f.type +
                                    "\" (expected barrier, oblique, well, or duct)");
    }
    if (j.contains("microstate")) {
        const auto& m = j.at("microstate");
        if (!m.is_object()) throw std::invalid_argument("scenario file: \"microstate\" must be an object");
        f.microstate.a = detail::json_num(m, "a");
        f.microstate.b = detail::json_num(m, "b");
        f.microstate.c = detail::json_num_or(m, "c", 0.0);
        f.has_microstate = true;
    }
    if (j.contains("constants")) {
        const auto& c = j.at("constants");
        if (!c.is_object()) throw std::invalid_argument("scenario file: \"constants\" must be an object");
        f.constants.w_squared = detail::json_num(c, "w_squared");
        f.constants.ermakov = detail::json_num(c, "ermakov");
        f.constants.t_plus = detail::json_num(c, "t_plus");
        f.constants.t_minus = detail::json_num(c, "t_minus");
        f.constants.t_libration = detail::json_num(c, "t_libration");
        f.constants.dy_plus = detail::json_num(c, "dy_plus");
        f.constants.dy_minus = detail::json_num(c, "dy_minus");
        f.constants.dy_libration = detail::json_num(c, "dy_libration");
        f.constants.action = detail::json_num(c, "action");
        f.constants.energy = detail::json_num(c, "energy");
        f.has_constants = true;
    }
    return f;
}

}  // namespace qhj

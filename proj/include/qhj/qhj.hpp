#pragma once

/// Convenience umbrella for the whole library. The command-line layer
/// (cli.hpp, io.hpp) is left out so that numerical users do not pull in
/// CLI11 or the JSON machinery.
#include "qhj/basis.hpp"
#include "qhj/core.hpp"
#include "qhj/hj.hpp"
#include "qhj/observables.hpp"
#include "qhj/oracle.hpp"
#include "qhj/quantization.hpp"

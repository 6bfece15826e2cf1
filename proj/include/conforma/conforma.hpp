#pragma once

// Umbrella header for the conforma library: statistical verification of
// probabilistic conformance between grey-box stochastic systems against
// monotonically parameterized STL formulas.

#include "conforma/common.hpp"
#include "conforma/config.hpp"
#include "conforma/critical.hpp"
#include "conforma/engine.hpp"
#include "conforma/formula.hpp"
#include "conforma/monitor.hpp"
#include "conforma/parser.hpp"
#include "conforma/report.hpp"
#include "conforma/rng.hpp"
#include "conforma/stats.hpp"
#include "conforma/systems.hpp"
#include "conforma/trace.hpp"

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "conforma/monitor.hpp"

namespace conforma {

// Per-trace reduction of a monotone parameter: the set of parameter values
// whose instance a given trace satisfies is a half-line, so the trace is
// fully described by the half-line's boundary. critical_parameter locates
// that boundary by bisection over the declared bracket; the distribution of
// these values across random traces is exactly the object the conformance
// test compares.

constexpr double kDefaultTol = 1e-6;

/// Boundary value c* for parameter `i` on one trace, holding the other
/// parameters at `others` (bracket midpoints when empty):
///   Increasing: satisfied for d > c*, unsatisfied for d < c*.
///   Decreasing: satisfied for d < c*, unsatisfied for d > c*.
/// Returns +inf when no value in the bracket satisfies, -inf when every
/// value does. A satisfaction pattern contradicting the declared direction
/// raises an error naming the trace.
inline double critical_parameter(const ParameterizedFormula& pf,
                                 const Trace& trace, std::size_t i,
                                 double tol = kDefaultTol,
                                 std::span<const double> others = {}) {
  if (pf.params.empty()) throw Error("critical_parameter: formula has no parameters");
  if (i >= pf.params.size()) throw Error("critical_parameter: parameter index out of range");
  if (!(tol > 0.0)) throw Error("critical_parameter: tolerance must be positive");

  std::vector<double> values(pf.params.size());
  for (std::size_t k = 0; k < pf.params.size(); ++k)
    values[k] = (pf.params[k].bracket_lo + pf.params[k].bracket_hi) / 2.0;
  if (!others.empty()) {
    if (others.size() != pf.params.size())
      throw Error("critical_parameter: wrong number of fixed parameter values");
    for (std::size_t k = 0; k < pf.params.size(); ++k) values[k] = others[k];
  }

  const ParamDecl& decl = pf.params[i];
  double lo = decl.bracket_lo;
  double hi = decl.bracket_hi;
  if (!(lo < hi)) throw Error("critical_parameter: empty bracket for '" + decl.name + "'");

  Monitor monitor(pf.signature, trace);
  auto sat = [&](double d) {
    values[i] = d;
    return monitor.evaluate(pf.formula, 0.0, values);
  };

  const bool increasing = decl.direction == Monotonicity::Increasing;
  const bool sat_lo = sat(lo);
  const bool sat_hi = sat(hi);

  if (increasing) {
    if (sat_lo && !sat_hi)
      throw Error("monotonicity violation for parameter '" + decl.name +
                  "' on trace '" + trace.id() +
                  "': satisfied at bracket low but not at bracket high; "
                  "the increasing declaration looks wrong");
    if (sat_lo) return -std::numeric_limits<double>::infinity();
    if (!sat_hi) return std::numeric_limits<double>::infinity();
  } else {
    if (!sat_lo && sat_hi)
      throw Error("monotonicity violation for parameter '" + decl.name +
                  "' on trace '" + trace.id() +
                  "': satisfied at bracket high but not at bracket low; "
                  "the decreasing declaration looks wrong");
    if (sat_hi) return std::numeric_limits<double>::infinity();
    if (!sat_lo) return -std::numeric_limits<double>::infinity();
  }

  // Invariant: satisfaction differs at lo and hi.
  while (hi - lo > tol) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    if (sat(mid) == increasing)
      hi = mid;
    else
      lo = mid;
  }
  return lo + (hi - lo) / 2.0;
}

/// Vector of per-parameter critical values, each computed with the other
/// parameters held at their bracket midpoints. With `spot_check` the first
/// component set is recomputed at two alternative settings of the other
/// parameters; a disagreement means the parameters are not separable and the
/// per-trace reduction does not apply.
inline std::vector<double> critical_vector(const Trace& trace,
                                           const ParameterizedFormula& pf,
                                           double tol = kDefaultTol,
                                           bool spot_check = false) {
  const std::size_t k = pf.params.size();
  if (k == 0) throw Error("critical_vector: formula has no parameters");
  if (k > 3) throw Error("critical_vector: more than 3 parameters is unsupported");

  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i)
    out[i] = critical_parameter(pf, trace, i, tol);

  if (spot_check && k >= 2) {
    for (std::size_t i = 0; i < k; ++i) {
      for (double frac : {0.25, 0.75}) {
        std::vector<double> others(k);
        for (std::size_t j = 0; j < k; ++j)
          others[j] = pf.params[j].bracket_lo +
                      frac * (pf.params[j].bracket_hi - pf.params[j].bracket_lo);
        const double alt = critical_parameter(pf, trace, i, tol, others);
        const bool both_inf = std::isinf(out[i]) && std::isinf(alt) &&
                              std::signbit(out[i]) == std::signbit(alt);
        if (!both_inf && !(std::abs(alt - out[i]) <= 4.0 * tol))
          throw Error(
              "parameter '" + pf.params[i].name +
              "' is not separable: its critical value depends on the other "
              "parameters (trace '" + trace.id() +
              "'); the per-trace reduction does not apply and no grid "
              "fallback is implemented");
      }
    }
  }
  return out;
}

/// Empirical monotonicity diagnostic: satisfaction is evaluated on a grid of
/// parameter values across each bracket; any pattern with more than one
/// switch (or a single switch against the declared direction) is reported.
struct MonotonicityReport {
  struct Finding {
    std::size_t trace_index;
    std::string trace_id;
    std::size_t param_index;
    std::string param_name;
    std::vector<double> switch_points;  // grid values where satisfaction flips
    bool wrong_direction;
  };
  std::vector<Finding> findings;
  std::size_t traces_checked = 0;
  std::size_t grid = 0;

  bool monotone() const { return findings.empty(); }
};

inline MonotonicityReport check_monotonicity(const ParameterizedFormula& pf,
                                             const std::vector<Trace>& traces,
                                             std::size_t grid) {
  if (grid < 2) throw Error("check_monotonicity: grid must be at least 2");
  MonotonicityReport report;
  report.traces_checked = traces.size();
  report.grid = grid;

  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    Monitor monitor(pf.signature, traces[ti]);
    for (std::size_t pi = 0; pi < pf.params.size(); ++pi) {
      std::vector<double> values(pf.params.size());
      for (std::size_t k = 0; k < pf.params.size(); ++k)
        values[k] = (pf.params[k].bracket_lo + pf.params[k].bracket_hi) / 2.0;
      const double lo = pf.params[pi].bracket_lo;
      const double hi = pf.params[pi].bracket_hi;
      std::vector<double> switches;
      bool prev = false;
      for (std::size_t g = 0; g < grid; ++g) {
        const double d =
            lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid - 1);
        values[pi] = d;
        const bool cur = monitor.evaluate(pf.formula, 0.0, values);
        if (g > 0 && cur != prev) switches.push_back(d);
        prev = cur;
      }
      bool wrong_direction = false;
      if (switches.size() == 1) {
        // One switch: check its orientation against the declaration.
        values[pi] = hi;
        const bool sat_hi = monitor.evaluate(pf.formula, 0.0, values);
        const bool increasing = pf.params[pi].direction == Monotonicity::Increasing;
        wrong_direction = (sat_hi != increasing);
      }
      if (switches.size() > 1 || wrong_direction)
        report.findings.push_back({ti, traces[ti].id(), pi,
                                   pf.params[pi].name, std::move(switches),
                                   wrong_direction});
    }
  }
  return report;
}

}  // namespace conforma

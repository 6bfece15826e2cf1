#pragma once

// Test-only oracles, kept independent of the library's implementation paths:
// a brute-force dense-grid STL monitor working purely in sample indices, the
// naive double-loop KS statistics, and a high-precision evaluation of the
// KS series. Agreement between these and the production code is what the
// correctness suites assert.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "conforma/formula.hpp"
#include "conforma/trace.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Dense-grid monitor.
//
// For a trace uniformly sampled at step h, the signal is expanded onto a grid
// ten times denser and every temporal quantifier ranges over all grid points.
// All arithmetic is integer index arithmetic: dense index g holds the value
// of trace row g / 10, a window bound of k * h seconds spans 10 * k dense
// steps. With sample times and interval endpoints that are exact multiples of
// a binary-fraction h, this evaluates the same real-time semantics as the
// production monitor with no floating-point time comparisons at all.

struct DenseMonitor {
  static constexpr int kFactor = 10;

  const conforma::Trace& trace;
  double step;
  std::size_t grid_size;  // (samples - 1) * kFactor + 1

  DenseMonitor(const conforma::Trace& t, double h)
      : trace(t), step(h), grid_size((t.size() - 1) * kFactor + 1) {}

  std::vector<char> satisfaction(const conforma::Formula& f) const {
    using conforma::Formula;
    switch (f.kind) {
      case Formula::Kind::Atom: {
        std::vector<char> out(grid_size);
        for (std::size_t g = 0; g < grid_size; ++g) {
          const auto row = trace.row(g / kFactor);
          out[g] = f.atom.eval(row, {}) > 0.0;
        }
        return out;
      }
      case Formula::Kind::Not: {
        auto out = satisfaction(f.kids[0]);
        for (auto& v : out) v = !v;
        return out;
      }
      case Formula::Kind::And: {
        auto a = satisfaction(f.kids[0]);
        const auto b = satisfaction(f.kids[1]);
        for (std::size_t g = 0; g < grid_size; ++g) a[g] = a[g] && b[g];
        return a;
      }
      case Formula::Kind::Until: {
        const double t1 = f.lo.value;
        const double t2 = f.hi.value;
        if (t2 < t1 || t1 < 0.0 || t2 < 0.0)
          return std::vector<char>(grid_size, 0);
        const auto lo = static_cast<std::size_t>(
            std::llround(t1 / step * kFactor));
        const auto hi = static_cast<std::size_t>(
            std::llround(t2 / step * kFactor));
        const auto s1 = satisfaction(f.kids[0]);
        const auto s2 = satisfaction(f.kids[1]);
        // next_false1[g]: first index >= g where s1 fails (grid_size = none);
        // next_true2[g]: first index >= g where s2 holds.
        std::vector<std::size_t> next_false1(grid_size + 1, grid_size);
        std::vector<std::size_t> next_true2(grid_size + 1, grid_size);
        for (std::size_t g = grid_size; g-- > 0;) {
          next_false1[g] = s1[g] ? next_false1[g + 1] : g;
          next_true2[g] = s2[g] ? g : next_true2[g + 1];
        }
        std::vector<char> out(grid_size);
        for (std::size_t u = 0; u < grid_size; ++u) {
          const std::size_t wlo = u + lo;
          if (wlo >= grid_size) {
            out[u] = 0;
            continue;
          }
          // Witness s needs s2[s], s in [u+lo, u+hi], the trace domain, and
          // s <= first failure of s1 at or after u (prefix is half-open).
          std::size_t cut = std::min(u + hi, grid_size - 1);
          cut = std::min(cut, next_false1[u]);
          out[u] = wlo <= cut && next_true2[wlo] <= cut;
        }
        return out;
      }
    }
    throw conforma::Error("corrupt formula node");
  }

  bool evaluate(const conforma::Formula& f, std::size_t sample_index) const {
    return satisfaction(f)[sample_index * kFactor] != 0;
  }
};

// ---------------------------------------------------------------------------
// Random (formula, trace) pair generation for the monitor equivalence suite.
// The step is a binary fraction and every interval endpoint is an integer
// multiple of it, so both monitors decide the same real-time semantics.

struct RandomFormulaConfig {
  double step = 0.125;
  int max_depth = 4;
  double bad_interval_rate = 0.15;  // empty or negative windows (convention)
};

inline conforma::Expr random_atom_expr(std::mt19937_64& rng,
                                       std::size_t signals) {
  using conforma::Expr;
  std::uniform_int_distribution<int> pick_signal(0, static_cast<int>(signals) - 1);
  std::uniform_real_distribution<double> threshold(-1.2, 1.2);
  std::uniform_int_distribution<int> shape(0, 4);
  const Expr x = Expr::signal(pick_signal(rng));
  const Expr y = Expr::signal(pick_signal(rng));
  const Expr c = Expr::lit(threshold(rng));
  switch (shape(rng)) {
    case 0:
      return Expr::binary(Expr::Kind::Sub, x, c);  // x > c
    case 1:
      return Expr::binary(Expr::Kind::Sub, c, x);  // x < c
    case 2:
      return Expr::binary(Expr::Kind::Sub, Expr::unary(Expr::Kind::Abs, x), c);
    case 3:
      return Expr::binary(
          Expr::Kind::Sub, c,
          Expr::unary(Expr::Kind::Abs, Expr::binary(Expr::Kind::Sub, x, y)));
    default:
      return Expr::binary(Expr::Kind::Sub,
                          Expr::binary(Expr::Kind::Add, x,
                                       Expr::binary(Expr::Kind::Mul,
                                                    Expr::lit(0.5), y)),
                          c);
  }
}

inline conforma::Formula random_formula(std::mt19937_64& rng,
                                        const RandomFormulaConfig& cfg,
                                        std::size_t signals, int depth) {
  using conforma::Endpoint;
  using conforma::Formula;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (depth >= cfg.max_depth || unit(rng) < 0.35)
    return Formula::atom_gt0(random_atom_expr(rng, signals));

  auto interval = [&]() -> std::pair<Endpoint, Endpoint> {
    std::uniform_int_distribution<int> lo_steps(0, 6);
    std::uniform_int_distribution<int> len_steps(0, 8);
    int a = lo_steps(rng);
    int b = a + len_steps(rng);
    if (unit(rng) < cfg.bad_interval_rate) {
      // Exercise the convention: empty or negative windows.
      if (unit(rng) < 0.5)
        b = a - 1 - len_steps(rng);  // b < a
      else
        a = -1 - a;  // t1 < 0
    }
    return {Endpoint::lit(a * cfg.step), Endpoint::lit(b * cfg.step)};
  };

  std::uniform_int_distribution<int> op(0, 5);
  switch (op(rng)) {
    case 0:
      return Formula::negation(random_formula(rng, cfg, signals, depth + 1));
    case 1:
      return Formula::conjunction(random_formula(rng, cfg, signals, depth + 1),
                                  random_formula(rng, cfg, signals, depth + 1));
    case 2:
      return Formula::disjunction(random_formula(rng, cfg, signals, depth + 1),
                                  random_formula(rng, cfg, signals, depth + 1));
    case 3: {
      auto [lo, hi] = interval();
      return Formula::finally(lo, hi, random_formula(rng, cfg, signals, depth + 1));
    }
    case 4: {
      auto [lo, hi] = interval();
      return Formula::globally(lo, hi, random_formula(rng, cfg, signals, depth + 1));
    }
    default: {
      auto [lo, hi] = interval();
      return Formula::until(lo, hi, random_formula(rng, cfg, signals, depth + 1),
                            random_formula(rng, cfg, signals, depth + 1));
    }
  }
}

/// Random-walk trace on a uniform binary-fraction grid.
inline conforma::Trace random_trace(std::mt19937_64& rng, double step,
                                    std::size_t samples, std::size_t signals) {
  std::normal_distribution<double> bump(0.0, 0.45);
  std::vector<double> ts, vs;
  std::vector<double> state(signals, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    ts.push_back(static_cast<double>(i) * step);
    for (auto& s : state) {
      s = 0.8 * s + bump(rng);
      vs.push_back(s);
    }
  }
  std::vector<std::string> names;
  for (std::size_t k = 0; k < signals; ++k)
    names.push_back(std::string(1, static_cast<char>('x' + k)));
  return conforma::Trace(std::move(names), std::move(ts), std::move(vs));
}

// ---------------------------------------------------------------------------
// Statistics oracles.

/// Naive scalar two-sample statistic: evaluate both ECDFs by counting at
/// every merged breakpoint; O(n m (n + m)) overall usage. Queries are finite
/// reals, so +inf breakpoints are not themselves queried.
inline double naive_delta_scalar(const std::vector<double>& xs,
                                 const std::vector<double>& ys) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> queries;
  for (double v : xs)
    if (v != inf) queries.push_back(v);
  for (double v : ys)
    if (v != inf) queries.push_back(v);
  double delta = 0.0;
  for (double q : queries) {
    std::size_t cx = 0, cy = 0;
    for (double v : xs) cx += v <= q;
    for (double v : ys) cy += v <= q;
    delta = std::max(delta, std::abs(static_cast<double>(cx) / xs.size() -
                                     static_cast<double>(cy) / ys.size()));
  }
  return delta;
}

/// Hand-enumerated corner oracle for K = 2: loop over the four sign choices
/// and every sample point as the orthant corner. The finite-query rule is
/// restated here: a +inf coordinate never lies inside a "+inf corner".
inline double corner_delta_2d(const std::vector<std::array<double, 2>>& xs,
                              const std::vector<std::array<double, 2>>& ys) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto inside = [](double v, double q) {
    if (v == inf && q == inf) return false;
    return v <= q;
  };
  double delta = 0.0;
  for (double s0 : {1.0, -1.0}) {
    for (double s1 : {1.0, -1.0}) {
      auto sweep = [&](const std::vector<std::array<double, 2>>& corners) {
        for (const auto& q : corners) {
          std::size_t cx = 0, cy = 0;
          for (const auto& p : xs)
            cx += inside(s0 * p[0], s0 * q[0]) && inside(s1 * p[1], s1 * q[1]);
          for (const auto& p : ys)
            cy += inside(s0 * p[0], s0 * q[0]) && inside(s1 * p[1], s1 * q[1]);
          delta = std::max(delta,
                           std::abs(static_cast<double>(cx) / xs.size() -
                                    static_cast<double>(cy) / ys.size()));
        }
      };
      sweep(xs);
      sweep(ys);
    }
  }
  return delta;
}

/// High-precision KS series in long double with a far smaller truncation
/// threshold than the production code.
inline long double ks_cdf_reference(long double x) {
  if (x <= 0.0L) return 0.0L;
  long double sum = 0.0L;
  long double sign = 1.0L;
  for (int i = 1; i < 100000; ++i) {
    const long double term = std::exp(-2.0L * i * i * x * x);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-30L && i > 8) break;
  }
  const long double h = 1.0L - 2.0L * sum;
  return h < 0.0L ? 0.0L : h;
}

/// Smallest z with ks_cdf_reference(z) >= p, by bisection.
inline double ks_quantile_reference(double p) {
  long double lo = 0.05L, hi = 5.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2.0L;
    if (ks_cdf_reference(mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  return static_cast<double>(hi);
}

}  // namespace oracles

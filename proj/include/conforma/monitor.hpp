#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "conforma/formula.hpp"
#include "conforma/trace.hpp"

namespace conforma {

// Boolean monitoring of STL over sampled traces. Signals are interpolated
// piecewise-constant (value held from the previous sample), which makes the
// satisfaction of every subformula a piecewise-constant function of the
// shift time. Each operator is evaluated exactly on that representation, so
// the monitor needs no time discretization beyond the samples themselves.
//
// Until follows the semantics block it implements verbatim:
//   sigma |= phi1 U_[t1,t2] phi2  iff  exists t in [t1, t2] with
//   sigma^(t) |= phi2 and phi1 holding on all of [0, t)  --  note the
//   prefix starts at 0, not at t1, which differs from several other STL
//   monitoring tools.
// An interval with t2 < t1, t1 < 0, or t2 < 0 makes the Until false.

/// Piecewise-constant boolean signal on [0, end]: value(u) = values[i] for
/// u in [times[i], times[i+1]), with the last piece closed at end.
struct BoolSignal {
  std::vector<double> times;  // times[0] == 0, strictly increasing
  std::vector<char> values;
  double end = 0.0;

  std::size_t piece_at(double u) const {
    auto it = std::upper_bound(times.begin(), times.end(), u);
    return static_cast<std::size_t>(it - times.begin()) - 1;
  }

  bool value_at(double u) const { return values[piece_at(u)] != 0; }

  void coalesce() {
    std::size_t out = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (out > 0 && values[i] == values[out - 1]) continue;
      times[out] = times[i];
      values[out] = values[i];
      ++out;
    }
    times.resize(out);
    values.resize(out);
  }

  static BoolSignal constant(bool v, double end) {
    return {{0.0}, {static_cast<char>(v)}, end};
  }
};

namespace detail {

inline BoolSignal and_merge(const BoolSignal& a, const BoolSignal& b) {
  BoolSignal out;
  out.end = a.end;
  std::size_t i = 0, j = 0;
  while (i < a.times.size() || j < b.times.size()) {
    double t;
    if (j >= b.times.size() || (i < a.times.size() && a.times[i] <= b.times[j]))
      t = a.times[i];
    else
      t = b.times[j];
    while (i < a.times.size() && a.times[i] == t) ++i;
    while (j < b.times.size() && b.times[j] == t) ++j;
    out.times.push_back(t);
    out.values.push_back(static_cast<char>(a.values[i - 1] && b.values[j - 1]));
  }
  out.coalesce();
  return out;
}

/// First time >= u (and <= cap) where the signal is false; +inf if none.
inline double first_false(const BoolSignal& s, double u, double cap) {
  std::size_t i = s.piece_at(u);
  if (!s.values[i]) return u;
  for (++i; i < s.times.size() && s.times[i] <= cap; ++i)
    if (!s.values[i]) return s.times[i];
  return std::numeric_limits<double>::infinity();
}

/// Whether some s in the closed interval [lo, hi] satisfies the signal.
inline bool exists_true(const BoolSignal& s, double lo, double hi) {
  std::size_t i = s.piece_at(lo);
  if (s.values[i]) return true;
  for (++i; i < s.times.size() && s.times[i] <= hi; ++i)
    if (s.values[i]) return true;
  return false;
}

inline bool until_at(double u, double t1, double t2, const BoolSignal& s1,
                     const BoolSignal& s2, double end) {
  const double lo = u + t1;
  if (lo > end) return false;
  const double hi = std::min(u + t2, end);
  const double cut = std::min(hi, first_false(s1, u, hi));
  if (lo > cut) return false;
  return exists_true(s2, lo, cut);
}

}  // namespace detail

/// Evaluates formulas against one trace. Binding a monitor resolves the
/// formula signature against the trace's columns once and caches the sample
/// rows in signature order, so repeated evaluation (bisection probes) stays
/// cheap. Parameter slots are resolved through `params` without rewriting
/// the AST.
class Monitor {
 public:
  Monitor(const std::vector<std::string>& signature, const Trace& trace) {
    width_ = signature.size();
    end_ = trace.end_time();
    std::vector<std::size_t> columns;
    columns.reserve(width_);
    for (const auto& name : signature) columns.push_back(trace.column(name));
    const std::size_t n = trace.size();
    times_.resize(n);
    rows_.resize(n * width_);
    for (std::size_t i = 0; i < n; ++i) {
      times_[i] = trace.time(i);
      const auto row = trace.row(i);
      for (std::size_t k = 0; k < width_; ++k)
        rows_[i * width_ + k] = row[columns[k]];
    }
  }

  double end_time() const { return end_; }

  double horizon(const Formula& f, std::span<const double> params = {}) const {
    return resolved_horizon(f, params);
  }

  bool evaluate(const Formula& f, double t0,
                std::span<const double> params = {}) const {
    if (t0 < 0.0 || t0 > end_)
      throw Error("evaluate: t0 outside the trace domain");
    const double h = resolved_horizon(f, params);
    if (t0 + h > end_)
      throw Error("evaluate: trace too short for the formula horizon (needs " +
                  std::to_string(t0 + h) + ", trace ends at " +
                  std::to_string(end_) + ")");
    return signal(f, params).value_at(t0);
  }

  /// Satisfaction of `f` as a function of the shift time, exact for the
  /// piecewise-constant interpolation.
  BoolSignal signal(const Formula& f, std::span<const double> params = {}) const {
    switch (f.kind) {
      case Formula::Kind::Atom: {
        BoolSignal out;
        out.end = end_;
        out.times = times_;
        out.values.resize(times_.size());
        for (std::size_t i = 0; i < times_.size(); ++i) {
          const std::span<const double> row{rows_.data() + i * width_, width_};
          out.values[i] = static_cast<char>(f.atom.eval(row, params) > 0.0);
        }
        out.coalesce();
        return out;
      }
      case Formula::Kind::Not: {
        BoolSignal out = signal(f.kids[0], params);
        for (auto& v : out.values) v = static_cast<char>(!v);
        return out;
      }
      case Formula::Kind::And:
        return detail::and_merge(signal(f.kids[0], params),
                                 signal(f.kids[1], params));
      case Formula::Kind::Until: {
        const double t1 = f.lo.resolve(params);
        const double t2 = f.hi.resolve(params);
        if (t2 < t1 || t1 < 0.0 || t2 < 0.0)
          return BoolSignal::constant(false, end_);
        const BoolSignal s1 = signal(f.kids[0], params);
        const BoolSignal s2 = signal(f.kids[1], params);
        // Candidate breakpoints of the result: child breakpoints and child
        // breakpoints shifted by each window edge.
        std::vector<double> cand;
        cand.reserve(3 * (s1.times.size() + s2.times.size()) + 1);
        cand.push_back(0.0);
        for (const auto* src : {&s1, &s2}) {
          for (double b : src->times) {
            if (b <= end_) cand.push_back(b);
            const double u1 = b - t1;
            if (u1 > 0.0 && u1 <= end_) cand.push_back(u1);
            const double u2 = b - t2;
            if (u2 > 0.0 && u2 <= end_) cand.push_back(u2);
          }
        }
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        BoolSignal out;
        out.end = end_;
        out.times = std::move(cand);
        out.values.resize(out.times.size());
        for (std::size_t i = 0; i < out.times.size(); ++i)
          out.values[i] = static_cast<char>(
              detail::until_at(out.times[i], t1, t2, s1, s2, end_));
        out.coalesce();
        return out;
      }
    }
    throw Error("corrupt formula node");
  }

 private:
  double resolved_horizon(const Formula& f, std::span<const double> params) const {
    switch (f.kind) {
      case Formula::Kind::Atom:
        return 0.0;
      case Formula::Kind::Not:
        return resolved_horizon(f.kids[0], params);
      case Formula::Kind::And:
        return std::max(resolved_horizon(f.kids[0], params),
                        resolved_horizon(f.kids[1], params));
      case Formula::Kind::Until: {
        const double t1 = f.lo.resolve(params);
        const double t2 = f.hi.resolve(params);
        if (std::isinf(t1) || std::isinf(t2))
          throw Error("unbounded-time formula not supported");
        if (t2 < t1 || t1 < 0.0 || t2 < 0.0) return 0.0;
        return t2 + std::max(resolved_horizon(f.kids[0], params),
                             resolved_horizon(f.kids[1], params));
      }
    }
    throw Error("corrupt formula node");
  }

  std::size_t width_;
  double end_;
  std::vector<double> times_;
  std::vector<double> rows_;
};

/// One-shot evaluation of a literal (fully instantiated) formula.
inline bool evaluate(const Formula& f, const std::vector<std::string>& signature,
                     const Trace& trace, double t0 = 0.0) {
  if (f.has_param())
    throw Error("evaluate: formula has uninstantiated parameters");
  return Monitor(signature, trace).evaluate(f, t0);
}

inline bool evaluate(const ParameterizedFormula& pf, const Trace& trace,
                     double t0 = 0.0, std::span<const double> params = {}) {
  if (params.size() != pf.params.size())
    throw Error("evaluate: expected " + std::to_string(pf.params.size()) +
                " parameter values");
  return Monitor(pf.signature, trace).evaluate(pf.formula, t0, params);
}

}  // namespace conforma

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "conforma/common.hpp"

namespace conforma {

// Empirical-distribution machinery for the two-sample test: ECDFs with
// alternations (complementary CDFs), the Kolmogorov-Smirnov limit
// distribution, the sup-norm test statistic, and the confidence level of the
// approximate-equality assertion.

/// CDF of the Kolmogorov-Smirnov distribution,
///   H(x) = 1 - 2 * sum_{i>=1} (-1)^(i-1) * exp(-2 i^2 x^2),
/// truncated once the next term drops below 1e-12. The series converges too
/// slowly below x ~ 0.05; H there is smaller than 1e-50, so this returns an
/// exact 0 for x <= 0.05 (documented floor). Results under the 1e-10
/// truncation accuracy also round to exactly 0, keeping the tail monotone.
inline double ks_cdf(double x) {
  if (x < 0.0) throw Error("ks_cdf: argument must be non-negative");
  if (x <= 0.05) return 0.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int i = 1; i <= 400; ++i) {
    const double term = std::exp(-2.0 * i * i * x * x);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  const double h = std::clamp(1.0 - 2.0 * sum, 0.0, 1.0);
  return h < 1e-10 ? 0.0 : h;
}

/// Immutable set of K-dimensional sample points, row-major. +inf/-inf entries
/// are allowed: they carry the mass of never/always-satisfied traces.
class SampleSet {
 public:
  explicit SampleSet(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error("SampleSet: dimension must be at least 1");
  }

  SampleSet(std::size_t dim, std::vector<double> flat)
      : dim_(dim), flat_(std::move(flat)) {
    if (dim == 0) throw Error("SampleSet: dimension must be at least 1");
    if (flat_.size() % dim_ != 0) throw Error("SampleSet: ragged data");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return flat_.size() / dim_; }
  bool empty() const { return flat_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {flat_.data() + i * dim_, dim_};
  }

  void push(std::span<const double> p) {
    if (p.size() != dim_) throw Error("SampleSet: wrong point dimension");
    flat_.insert(flat_.end(), p.begin(), p.end());
  }

  const std::vector<double>& flat() const { return flat_; }

 private:
  std::size_t dim_;
  std::vector<double> flat_;
};

/// Coordinate-wise sign flip; bit k of `mask` set flips coordinate k.
/// The 2^K alternations turn one CDF into the full family of CDFs and
/// complementary CDFs the multidimensional statistic needs.
struct Alternation {
  unsigned mask = 0;
  std::size_t dim = 1;

  double sign(std::size_t k) const { return (mask >> k) & 1u ? -1.0 : 1.0; }
  static std::size_t count(std::size_t dim) { return std::size_t{1} << dim; }
};

namespace detail {

/// Indicator of x <= q for the limit of finite queries: a +inf sample never
/// satisfies a finite query, so q = +inf (meaning "arbitrarily large finite")
/// excludes x = +inf. IEEE comparison handles every other case.
inline bool le_query(double x, double q) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (x == inf && q == inf) return false;
  return x <= q;
}

}  // namespace detail

/// Empirical CDF of a sample set, evaluated under any alternation.
class Ecdf {
 public:
  explicit Ecdf(const SampleSet& samples) : samples_(samples) {
    if (samples.empty()) throw Error("Ecdf: empty sample set");
    if (samples.dim() == 1) {
      sorted_ = samples.flat();
      std::sort(sorted_.begin(), sorted_.end());
    }
  }

  std::size_t dim() const { return samples_.dim(); }

  /// F(a) = #{X <= a} / n for scalar samples (identity alternation).
  double value(double a) const {
    if (dim() != 1) throw Error("Ecdf: scalar query on multidimensional ECDF");
    const auto hi = std::upper_bound(sorted_.begin(), sorted_.end(), a);
    std::size_t count = static_cast<std::size_t>(hi - sorted_.begin());
    // Exclude +inf samples from a query at +inf (finite-query limit).
    if (a == std::numeric_limits<double>::infinity())
      while (count > 0 && sorted_[count - 1] == a) --count;
    return static_cast<double>(count) / static_cast<double>(sorted_.size());
  }

  /// F^pi(a) = #{ pi(X) <= pi(a) componentwise } / n.
  double value(const Alternation& pi, std::span<const double> a) const {
    if (a.size() != dim() || pi.dim != dim())
      throw Error("Ecdf: query dimension mismatch");
    std::size_t count = 0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto p = samples_.point(i);
      bool inside = true;
      for (std::size_t k = 0; k < dim() && inside; ++k)
        inside = detail::le_query(pi.sign(k) * p[k], pi.sign(k) * a[k]);
      count += inside;
    }
    return static_cast<double>(count) / static_cast<double>(samples_.size());
  }

 private:
  SampleSet samples_;
  std::vector<double> sorted_;
};

/// Exact sup-norm distance of two scalar ECDFs over pre-sorted samples:
/// one merged sweep over the breakpoints, evaluating just after each.
/// Queries are finite, so a breakpoint at +inf is not itself evaluated;
/// the plateau before it is covered by the largest finite breakpoint.
inline double delta_sorted_scalar(std::span<const double> xs,
                                  std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw Error("delta: empty sample set");
  const double n = static_cast<double>(xs.size());
  const double m = static_cast<double>(ys.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::size_t i = 0, j = 0;
  double delta = 0.0;
  while (i < xs.size() || j < ys.size()) {
    double v;
    if (j >= ys.size() || (i < xs.size() && xs[i] <= ys[j]))
      v = xs[i];
    else
      v = ys[j];
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    if (v == inf) break;
    delta = std::max(delta,
                     std::abs(static_cast<double>(i) / n -
                              static_cast<double>(j) / m));
  }
  return delta;
}

/// Two-sample KS statistic delta = sup_a |F_X(a) - G_Y(a)| for scalar
/// samples; O((n+m) log(n+m)).
inline double delta_scalar(std::span<const double> xs,
                           std::span<const double> ys) {
  std::vector<double> sx(xs.begin(), xs.end());
  std::vector<double> sy(ys.begin(), ys.end());
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());
  return delta_sorted_scalar(sx, sy);
}

inline double delta_scalar(const SampleSet& x, const SampleSet& y) {
  if (x.dim() != 1 || y.dim() != 1)
    throw Error("delta_scalar: sample sets must be one-dimensional");
  return delta_scalar(std::span<const double>(x.flat()),
                      std::span<const double>(y.flat()));
}

/// Multidimensional statistic: max over all 2^K alternations of the sup of
/// |F^pi_X - G^pi_Y| over the combined sample points (each sample point as
/// the corner of a closed orthant). Brute force, O(2^K (n+m)^2); K <= 3.
inline double delta_multi(const SampleSet& x, const SampleSet& y) {
  if (x.dim() != y.dim()) throw Error("delta_multi: dimension mismatch");
  if (x.empty() || y.empty()) throw Error("delta: empty sample set");
  const std::size_t dim = x.dim();
  if (dim > 3)
    throw Error("delta_multi: dimension " + std::to_string(dim) +
                " is unsupported (K <= 3)");
  if (dim == 1) return delta_scalar(x, y);

  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  double delta = 0.0;
  for (unsigned mask = 0; mask < Alternation::count(dim); ++mask) {
    const Alternation pi{mask, dim};
    auto sweep = [&](const SampleSet& corners) {
      for (std::size_t c = 0; c < corners.size(); ++c) {
        const auto q = corners.point(c);
        std::size_t cx = 0, cy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const auto p = x.point(i);
          bool inside = true;
          for (std::size_t k = 0; k < dim && inside; ++k)
            inside = detail::le_query(pi.sign(k) * p[k], pi.sign(k) * q[k]);
          cx += inside;
        }
        for (std::size_t i = 0; i < y.size(); ++i) {
          const auto p = y.point(i);
          bool inside = true;
          for (std::size_t k = 0; k < dim && inside; ++k)
            inside = detail::le_query(pi.sign(k) * p[k], pi.sign(k) * q[k]);
          cy += inside;
        }
        delta = std::max(delta, std::abs(static_cast<double>(cx) / n -
                                         static_cast<double>(cy) / m));
      }
    };
    sweep(x);
    sweep(y);
  }
  return delta;
}

/// Confidence level of the assertion after observing statistic `delta`:
/// alpha >= H(|delta - c| * sqrt(n m / (n + m))).
inline double confidence_level(double delta, double c, std::size_t n,
                               std::size_t m) {
  if (n == 0 || m == 0) throw Error("confidence_level: need samples on both sides");
  if (!(c > 0.0)) throw Error("confidence_level: c must be positive");
  if (delta == c) return 0.0;
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return ks_cdf(std::abs(delta - c) * std::sqrt(nn * mm / (nn + mm)));
}

enum class Hypothesis { H0Conform, H1NonConform };

/// delta < c supports approximate equality (H0); delta > c rejects it.
/// The measure-zero tie delta == c is broken conservatively to H1.
inline Hypothesis assert_hypothesis(double delta, double c) {
  return delta < c ? Hypothesis::H0Conform : Hypothesis::H1NonConform;
}

}  // namespace conforma

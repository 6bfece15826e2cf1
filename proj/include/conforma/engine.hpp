#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "conforma/critical.hpp"
#include "conforma/stats.hpp"
#include "conforma/systems.hpp"

namespace conforma {

// The sequential approximate-equality test: draw batches from both sources,
// recompute the sup-norm statistic and its confidence level, and stop once
// the requested confidence is reached. Conformance verification is the same
// loop where each draw is a simulated path reduced to its critical-value
// vector, turning the empirical satisfaction functions into plain ECDFs.

struct TestConfig {
  double c = 0.1;                  // approximate-equality threshold
  double alpha_d = 0.95;           // desired confidence level
  std::size_t k1 = 1, k2 = 1;      // per-iteration batch sizes
  std::size_t max_samples = 100000;  // cap per side; exceeding it is Inconclusive
  std::uint64_t master_seed = 0;
  double tol = kDefaultTol;        // bisection tolerance
  double horizon = 1.0;            // simulation horizon, s
  double step = 0.01;              // simulation step, s
  unsigned threads = 1;

  void validate() const {
    if (!(c > 0.0 && c < 1.0)) throw Error("config: c must be in (0, 1)");
    if (!(alpha_d > 0.0 && alpha_d < 1.0))
      throw Error("config: alpha_d must be in (0, 1)");
    if (k1 < 1 || k2 < 1) throw Error("config: batch sizes must be at least 1");
    if (max_samples < 1) throw Error("config: max_samples must be at least 1");
    if (!(tol > 0.0)) throw Error("config: tol must be positive");
    if (!(horizon > 0.0)) throw Error("config: horizon must be positive");
    if (!(step > 0.0)) throw Error("config: step must be positive");
    if (threads < 1) throw Error("config: threads must be at least 1");
  }
};

enum class Assertion { Conform, NonConform, Inconclusive };

inline const char* to_string(Assertion a) {
  switch (a) {
    case Assertion::Conform: return "conform";
    case Assertion::NonConform: return "nonconform";
    case Assertion::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Distribution summary of one side's drawn values (first coordinate for
/// multidimensional samples). Order statistics cover the finite values;
/// infinities are counted separately.
struct SideSummary {
  std::size_t count = 0;
  std::size_t pos_inf = 0;
  std::size_t neg_inf = 0;
  std::optional<double> min, median, max;
};

struct ConformanceReport {
  Assertion assertion = Assertion::Inconclusive;
  double delta = 0.0;
  std::size_t n = 0, m = 0;
  double alpha = 0.0;
  std::size_t dim = 1;
  double sim_time_s = 0.0;   // sampling: simulation + critical-value reduction
  double test_time_s = 0.0;  // statistic and confidence updates
  double wall_time_s = 0.0;
  std::string inconclusive_reason;
  SideSummary side1, side2;
};

/// Source of K-dimensional sample vectors, deterministic in the draw index.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> draw(std::uint64_t index) = 0;
};

/// Adapts any index-deterministic callable to a Sampler.
class FunctionSampler : public Sampler {
 public:
  using Fn = std::function<std::vector<double>(std::uint64_t)>;
  FunctionSampler(std::size_t dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}
  std::size_t dim() const override { return dim_; }
  std::vector<double> draw(std::uint64_t index) override { return fn_(index); }

 private:
  std::size_t dim_;
  Fn fn_;
};

namespace detail {

template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)  // lowest index wins, independent of thread timing
    if (e) std::rethrow_exception(e);
}

inline SideSummary summarize(const std::vector<double>& first_coords) {
  SideSummary s;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> finite;
  finite.reserve(first_coords.size());
  for (double v : first_coords) {
    ++s.count;
    if (v == inf)
      ++s.pos_inf;
    else if (v == -inf)
      ++s.neg_inf;
    else
      finite.push_back(v);
  }
  if (!finite.empty()) {
    std::sort(finite.begin(), finite.end());
    s.min = finite.front();
    s.max = finite.back();
    const std::size_t h = finite.size() / 2;
    s.median = finite.size() % 2 == 1 ? finite[h]
                                      : (finite[h - 1] + finite[h]) / 2.0;
  }
  return s;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - mark_).count();
    mark_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point mark_ =
      std::chrono::steady_clock::now();
};

}  // namespace detail

/// Sequential two-sample test for approximate distribution equality.
/// Terminates with probability 1 when the true distance differs from c; the
/// per-side max_samples cap turns an overrunning test into Inconclusive.
inline ConformanceReport run_equality_test(Sampler& sampler_x, Sampler& sampler_y,
                                           const TestConfig& cfg) {
  cfg.validate();
  if (sampler_x.dim() != sampler_y.dim())
    throw Error("samplers disagree on dimension");
  const std::size_t dim = sampler_x.dim();
  if (dim == 0 || dim > 3)
    throw Error("sample dimension " + std::to_string(dim) +
                " is unsupported (1 <= K <= 3)");

  ConformanceReport report;
  report.dim = dim;
  detail::Stopwatch wall;
  detail::Stopwatch phase;

  std::vector<double> sorted_x, sorted_y;  // K = 1 path
  SampleSet set_x(dim), set_y(dim);        // K > 1 path
  std::vector<double> first_x, first_y;    // first coordinates, for summaries

  auto draw_batch = [&](Sampler& sampler, std::size_t start, std::size_t count,
                        std::vector<double>& sorted, SampleSet& set,
                        std::vector<double>& firsts) {
    std::vector<std::vector<double>> batch(count);
    detail::parallel_for(count, cfg.threads, [&](std::size_t i) {
      batch[i] = sampler.draw(start + i);
    });
    for (const auto& p : batch) {
      if (p.size() != dim) throw Error("sampler returned wrong dimension");
      firsts.push_back(p[0]);
      if (dim == 1)
        sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), p[0]),
                      p[0]);
      else
        set.push(p);
    }
  };

  std::size_t n = 0, m = 0;
  double delta = 0.0, alpha = 0.0;
  std::string stop_reason;

  while (alpha < cfg.alpha_d) {
    if (n + cfg.k1 > cfg.max_samples || m + cfg.k2 > cfg.max_samples) {
      stop_reason = "sample budget exhausted (max_samples = " +
                    std::to_string(cfg.max_samples) + ")";
      break;
    }
    try {
      draw_batch(sampler_x, n, cfg.k1, sorted_x, set_x, first_x);
      draw_batch(sampler_y, m, cfg.k2, sorted_y, set_y, first_y);
    } catch (const PoolExhausted& e) {
      stop_reason = e.what();
      break;
    }
    n += cfg.k1;
    m += cfg.k2;
    report.sim_time_s += phase.lap();
    delta = dim == 1 ? delta_sorted_scalar(sorted_x, sorted_y)
                     : delta_multi(set_x, set_y);
    alpha = confidence_level(delta, cfg.c, n, m);
    report.test_time_s += phase.lap();
    log(LogLevel::Debug, "n=", n, " m=", m, " delta=", delta,
        " alpha=", alpha);
  }

  report.n = n;
  report.m = m;
  report.delta = delta;
  report.alpha = alpha;
  if (alpha >= cfg.alpha_d) {
    report.assertion = assert_hypothesis(delta, cfg.c) == Hypothesis::H0Conform
                           ? Assertion::Conform
                           : Assertion::NonConform;
  } else {
    report.assertion = Assertion::Inconclusive;
    report.inconclusive_reason = stop_reason;
  }
  report.side1 = detail::summarize(first_x);
  report.side2 = detail::summarize(first_y);
  report.wall_time_s = wall.lap();
  return report;
}

namespace detail {

/// Draws one path from a grey-box system and reduces it to its
/// critical-value vector. Path i of source j uses the stream keyed
/// (master_seed, j, i), so parallel sampling reproduces serial results.
class ConformanceSampler : public Sampler {
 public:
  ConformanceSampler(const GreyBoxSystem& system, const InputMap& input,
                     const ParameterizedFormula& pf, const TestConfig& cfg,
                     std::uint64_t source_id)
      : system_(system), input_(input), pf_(pf), cfg_(cfg),
        source_id_(source_id) {}

  std::size_t dim() const override { return pf_.dimension(); }

  std::vector<double> draw(std::uint64_t index) override {
    const std::uint64_t seed =
        derive_seed(cfg_.master_seed, source_id_, index);
    Trace trace =
        system_.sample_path(input_, seed, cfg_.horizon, cfg_.step);
    // Separability of multi-parameter templates is spot-checked on the
    // first path only; per-path checks would double the monitoring cost.
    const bool spot_check = index == 0 && pf_.dimension() >= 2;
    return critical_vector(trace, pf_, cfg_.tol, spot_check);
  }

 private:
  const GreyBoxSystem& system_;
  const InputMap& input_;
  const ParameterizedFormula& pf_;
  const TestConfig& cfg_;
  std::uint64_t source_id_;
};

}  // namespace detail

/// Largest horizon the template can demand over its brackets, evaluated at
/// every bracket corner.
inline double max_formula_horizon(const ParameterizedFormula& pf) {
  const std::size_t k = pf.dimension();
  if (k == 0) return formula_horizon(pf.formula);
  double worst = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << k); ++corner) {
    std::vector<double> values(k);
    for (std::size_t i = 0; i < k; ++i)
      values[i] = (corner >> i) & 1 ? pf.params[i].bracket_hi
                                    : pf.params[i].bracket_lo;
    worst = std::max(worst, formula_horizon(instantiate(pf, values)));
  }
  return worst;
}

/// Statistical conformance verification of two grey-box systems under the
/// same input for a monotone parameterized formula.
inline ConformanceReport run_conformance(const GreyBoxSystem& sys1,
                                         const GreyBoxSystem& sys2,
                                         const InputMap& input,
                                         const ParameterizedFormula& pf,
                                         const TestConfig& cfg) {
  cfg.validate();
  if (pf.dimension() == 0)
    throw Error("conformance needs a parameterized formula (K >= 1)");
  if (pf.dimension() > 3)
    throw Error("more than 3 formula parameters is unsupported");
  for (const auto& p : pf.params)
    if (!(p.bracket_lo < p.bracket_hi))
      throw Error("parameter '" + p.name + "' has an empty bracket");
  const double needed = max_formula_horizon(pf);
  if (needed > cfg.horizon)
    throw Error("config horizon " + std::to_string(cfg.horizon) +
                " s is shorter than the formula horizon " +
                std::to_string(needed) + " s over the parameter brackets");

  detail::ConformanceSampler sx(sys1, input, pf, cfg, 0);
  detail::ConformanceSampler sy(sys2, input, pf, cfg, 1);
  return run_equality_test(sx, sy, cfg);
}

}  // namespace conforma

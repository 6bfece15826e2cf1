#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "conforma/rng.hpp"
#include "conforma/trace.hpp"

namespace conforma {

// Grey-box sampling interface: a system is anything that turns (input, seed,
// horizon, step) into one trace, deterministically in the seed. The built-in
// simulators are desk-scale stochastic systems with analytically known
// behavior, used both as verification subjects and as test oracles.

/// Named input channel: a constant or a tabulated signal held
/// piecewise-constant between its breakpoints.
class InputSignal {
 public:
  static InputSignal constant(double value) {
    InputSignal s;
    s.constant_ = value;
    return s;
  }

  static InputSignal table(std::vector<double> times, std::vector<double> values) {
    if (times.empty() || times.size() != values.size())
      throw Error("input table: need matching, non-empty times and values");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw Error("input table: times must be strictly increasing");
    InputSignal s;
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    return s;
  }

  double value_at(double t) const {
    if (times_.empty()) return constant_;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return values_.front();
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
  }

 private:
  double constant_ = 0.0;
  std::vector<double> times_, values_;
};

class InputMap {
 public:
  void set(const std::string& name, InputSignal signal) {
    for (auto& [n, s] : entries_)
      if (n == name) {
        s = std::move(signal);
        return;
      }
    entries_.emplace_back(name, std::move(signal));
  }

  double value_or(const std::string& name, double t, double fallback) const {
    for (const auto& [n, s] : entries_)
      if (n == name) return s.value_at(t);
    return fallback;
  }

  bool empty() const { return entries_.empty(); }

 private:
  std::vector<std::pair<std::string, InputSignal>> entries_;
};

class GreyBoxSystem {
 public:
  virtual ~GreyBoxSystem() = default;
  virtual std::string name() const = 0;
  /// Produces one trace with timestamps 0, step, 2*step, ..., horizon
  /// (event-driven systems insert extra event timestamps). Bit-identical for
  /// identical arguments.
  virtual Trace sample_path(const InputMap& input, std::uint64_t seed,
                            double horizon, double step) const = 0;
};

inline Trace sample_path(const GreyBoxSystem& sys, const InputMap& input,
                         std::uint64_t seed, double horizon, double step) {
  if (!(horizon > 0.0)) throw Error("sample_path: horizon must be positive");
  if (!(step > 0.0)) throw Error("sample_path: step must be positive");
  return sys.sample_path(input, seed, horizon, step);
}

namespace detail {

/// Regular grid 0, step, ..., plus the exact horizon as the final timestamp.
inline std::vector<double> sample_grid(double horizon, double step) {
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(horizon / step + 1e-9);
  grid.reserve(count + 2);
  for (std::size_t k = 0; k <= count; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t > horizon) break;
    grid.push_back(t);
  }
  if (grid.back() < horizon - 1e-12) grid.push_back(horizon);
  return grid;
}

/// Merges event timestamps into a grid, keeping strict monotonicity
/// (points closer than 1e-12 collapse onto the earlier one).
inline std::vector<double> merge_events(std::vector<double> grid,
                                        const std::vector<double>& events) {
  grid.insert(grid.end(), events.begin(), events.end());
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid)
    if (out.empty() || t - out.back() > 1e-12) out.push_back(t);
  return out;
}

}  // namespace detail

/// Bouncing ball with gravity drawn once per path from N(g0, sigma^2).
/// Ballistic arcs are integrated in closed form and bounce times are located
/// analytically, so there is no numeric drift; bounce instants appear as
/// extra event timestamps carrying the post-impact state.
struct BouncingBallParams {
  double x0 = 1.0;          // initial height, m
  double g0 = 9.8;          // mean gravity, m/s^2
  double sigma = 0.0;       // gravity std, m/s^2
  double restitution = 1.0; // in (0, 1]; 1 = lossless bounce
};

class BouncingBallSystem : public GreyBoxSystem {
 public:
  explicit BouncingBallSystem(BouncingBallParams p) : p_(p) {
    if (!(p.x0 > 0.0)) throw Error("bouncing ball: x0 must be positive");
    if (!(p.g0 > 0.0)) throw Error("bouncing ball: g0 must be positive");
    if (!(p.sigma >= 0.0)) throw Error("bouncing ball: sigma must be non-negative");
    if (!(p.restitution > 0.0 && p.restitution <= 1.0))
      throw Error("bouncing ball: restitution must be in (0, 1]");
  }

  std::string name() const override { return "bouncing_ball"; }

  Trace sample_path(const InputMap&, std::uint64_t seed, double horizon,
                    double step) const override {
    const double g = draw_gravity(seed);

    // Arc k starts at time start[k] with height x[k] and upward velocity
    // v[k]; within an arc, x(dt) = x + v dt - g dt^2 / 2.
    struct Arc {
      double start, x, v;
    };
    std::vector<Arc> arcs{{0.0, p_.x0, 0.0}};
    std::vector<double> events;
    bool at_rest = false;
    while (!at_rest) {
      const Arc& a = arcs.back();
      const double disc = a.v * a.v + 2.0 * g * a.x;
      const double dt_bounce = (a.v + std::sqrt(disc)) / g;
      const double t_bounce = a.start + dt_bounce;
      if (t_bounce > horizon) break;
      if (dt_bounce < 1e-9) {
        // Restitution < 1 accumulates bounces; park the ball.
        arcs.push_back({t_bounce, 0.0, 0.0});
        at_rest = true;
        break;
      }
      const double v_impact = a.v - g * dt_bounce;  // negative
      events.push_back(t_bounce);
      arcs.push_back({t_bounce, 0.0, -p_.restitution * v_impact});
    }

    const auto times =
        detail::merge_events(detail::sample_grid(horizon, step), events);
    std::vector<double> values;
    values.reserve(times.size() * 2);
    std::size_t arc = 0;
    for (double t : times) {
      while (arc + 1 < arcs.size() && arcs[arc + 1].start <= t) ++arc;
      const Arc& a = arcs[arc];
      const double dt = t - a.start;
      const double x = std::max(0.0, a.x + a.v * dt - 0.5 * g * dt * dt);
      const double v = a.v - g * dt;
      values.push_back(x);
      values.push_back(x == 0.0 && a.v == 0.0 ? 0.0 : v);
    }
    return Trace({"x", "v"}, std::vector<double>(times), std::move(values),
                 "bouncing_ball_" + std::to_string(seed));
  }

  /// Gravity draw with deterministic rejection of non-positive values.
  double draw_gravity(std::uint64_t seed) const {
    RngStream stream(seed, /*stream=*/0);
    for (int tries = 0; tries < 100; ++tries) {
      const double g = p_.g0 + p_.sigma * stream.next_normal();
      if (g > 0.0) return g;
    }
    throw Error("bouncing ball: drew non-positive gravity 100 times");
  }

 private:
  BouncingBallParams p_;
};

/// Scalar event-time model: the output signal holds `before` and drops to
/// `after` exactly at a random time T, so the per-trace critical value of a
/// hitting-time template equals T by construction and the satisfaction CDF is
/// the configured distribution in closed form.
struct HittingModelParams {
  enum class Dist { Uniform, Normal, Fixed };
  Dist dist = Dist::Uniform;
  double a = 0.0, b = 1.0;  // Uniform bounds
  double mu = 0.5, sd = 0.1;
  double value = 0.5;       // Fixed
  double shift = 0.0;       // added to the drawn time (shifted copy)
  double before = 1.0;
  double after = 0.0;
  std::string signal = "x";
};

class HittingModelSystem : public GreyBoxSystem {
 public:
  explicit HittingModelSystem(HittingModelParams p) : p_(std::move(p)) {
    if (p_.dist == HittingModelParams::Dist::Uniform && !(p_.a <= p_.b))
      throw Error("hitting model: uniform bounds must satisfy a <= b");
    if (p_.dist == HittingModelParams::Dist::Normal && !(p_.sd >= 0.0))
      throw Error("hitting model: sd must be non-negative");
  }

  std::string name() const override { return "hitting"; }

  double event_time(std::uint64_t seed, double horizon) const {
    RngStream stream(seed, /*stream=*/0);
    double t = 0.0;
    switch (p_.dist) {
      case HittingModelParams::Dist::Uniform:
        t = stream.next_uniform(p_.a, p_.b);
        break;
      case HittingModelParams::Dist::Normal:
        t = p_.mu + p_.sd * stream.next_normal();
        break;
      case HittingModelParams::Dist::Fixed:
        t = p_.value;
        break;
    }
    return std::clamp(t + p_.shift, 0.0, horizon);
  }

  Trace sample_path(const InputMap&, std::uint64_t seed, double horizon,
                    double step) const override {
    const double T = event_time(seed, horizon);
    const auto times =
        detail::merge_events(detail::sample_grid(horizon, step), {T});
    std::vector<double> values;
    values.reserve(times.size());
    for (double t : times) values.push_back(t < T ? p_.before : p_.after);
    return Trace({p_.signal}, std::vector<double>(times), std::move(values),
                 "hitting_" + std::to_string(seed));
  }

 private:
  HittingModelParams p_;
};

/// Second-order unit-step tracker y'' = wn^2 (gain*u + w - y) - 2 zeta wn y',
/// integrated with fixed-step RK4; the actuation noise w is redrawn each step
/// and held constant across it. Outputs y, the tracking error e = y - u(t),
/// and an in_band indicator |e| < band.
struct SecondOrderParams {
  double wn = 2.0;        // natural frequency, rad/s
  double zeta = 0.7;      // damping ratio
  double noise_sd = 0.0;  // actuation noise std
  double band = 0.05;     // settling band for the in_band output
  double gain = 1.0;      // DC gain multiplying the input
};

class SecondOrderSystem : public GreyBoxSystem {
 public:
  explicit SecondOrderSystem(SecondOrderParams p) : p_(p) {
    if (!(p.wn > 0.0)) throw Error("second order: wn must be positive");
    if (!(p.zeta > 0.0)) throw Error("second order: zeta must be positive");
    if (!(p.noise_sd >= 0.0)) throw Error("second order: noise_sd must be non-negative");
    if (!(p.band > 0.0)) throw Error("second order: band must be positive");
  }

  std::string name() const override { return "second_order"; }

  Trace sample_path(const InputMap& input, std::uint64_t seed, double horizon,
                    double step) const override {
    const auto times = detail::sample_grid(horizon, step);
    RngStream noise(seed, /*stream=*/1);

    double y = 0.0, dy = 0.0;
    std::vector<double> values;
    values.reserve(times.size() * 3);
    auto emit = [&](double t) {
      const double e = y - input.value_or("u", t, 1.0);
      values.push_back(y);
      values.push_back(e);
      values.push_back(std::abs(e) < p_.band ? 1.0 : 0.0);
    };
    emit(times[0]);
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double t0 = times[k - 1];
      const double h = times[k] - t0;
      const double u = input.value_or("u", t0, 1.0);
      const double drive = p_.gain * u + p_.noise_sd * noise.next_normal();
      auto accel = [&](double yy, double vv) {
        return p_.wn * p_.wn * (drive - yy) - 2.0 * p_.zeta * p_.wn * vv;
      };
      const double k1y = dy, k1v = accel(y, dy);
      const double k2y = dy + 0.5 * h * k1v, k2v = accel(y + 0.5 * h * k1y, dy + 0.5 * h * k1v);
      const double k3y = dy + 0.5 * h * k2v, k3v = accel(y + 0.5 * h * k2y, dy + 0.5 * h * k2v);
      const double k4y = dy + h * k3v, k4v = accel(y + h * k3y, dy + h * k3v);
      y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
      dy += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      emit(times[k]);
    }
    return Trace({"y", "e", "in_band"}, std::vector<double>(times),
                 std::move(values), "second_order_" + std::to_string(seed));
  }

 private:
  SecondOrderParams p_;
};

/// Replays recorded traces in a seed-derived random order without
/// replacement. The pool is internally synchronized; which pooled trace lands
/// on which concurrent draw is unspecified, but the multiset drawn by any
/// batch is fixed by the permutation seed. Exhaustion raises PoolExhausted,
/// which the engine maps to an Inconclusive outcome.
class TraceReplaySystem : public GreyBoxSystem {
 public:
  TraceReplaySystem(std::vector<Trace> traces, std::uint64_t permutation_seed,
                    std::string name = "replay")
      : name_(std::move(name)) {
    if (traces.empty()) throw Error("trace replay: empty trace list");
    std::vector<std::size_t> order(traces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    RngStream stream(permutation_seed, /*stream=*/2);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[stream.next_u64() % i]);  // Fisher-Yates
    for (std::size_t i : order) pool_.push_back(traces[i]);
  }

  std::string name() const override { return name_; }

  Trace sample_path(const InputMap&, std::uint64_t, double, double) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= pool_.size())
      throw PoolExhausted("trace pool exhausted (need more recorded samples)");
    return pool_[next_++];
  }

  std::size_t remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return pool_.size() - next_;
  }

 private:
  std::string name_;
  std::vector<Trace> pool_;
  mutable std::mutex mutex_;
  mutable std::size_t next_ = 0;
};

inline std::shared_ptr<GreyBoxSystem> trace_replay_system(
    std::vector<Trace> traces, std::uint64_t permutation_seed,
    std::string name = "replay") {
  return std::make_shared<TraceReplaySystem>(std::move(traces),
                                             permutation_seed, std::move(name));
}

}  // namespace conforma

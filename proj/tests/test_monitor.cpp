#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "conforma/monitor.hpp"
#include "conforma/parser.hpp"
#include "oracles.hpp"

using namespace conforma;

namespace {

Trace sampled(double step, double end, auto&& fn) {
  std::vector<double> ts, vs;
  for (double t = 0.0; t <= end + 1e-12; t += step) {
    ts.push_back(t);
    vs.push_back(fn(t));
  }
  return Trace({"x"}, std::move(ts), std::move(vs));
}

}  // namespace

TEST_CASE("finally detects a crossing on a ramp") {
  // x(t) = t - 0.5, sampled at 0.01 s: positive from t = 0.51 onward.
  const auto trace = sampled(0.01, 2.0, [](double t) { return t - 0.5; });
  const auto pf = parse_formula("F[0, 1](x > 0)", {"x"});
  CHECK(evaluate(pf.formula, pf.signature, trace, 0.0));

  const auto never = parse_formula("F[0, 0.4](x > 0)", {"x"});
  CHECK_FALSE(evaluate(never.formula, never.signature, trace, 0.0));
}

TEST_CASE("the interval convention makes bad windows false") {
  const auto trace = sampled(0.1, 1.0, [](double) { return 1.0; });
  for (const char* text : {"(x > 0) U[2, 1] (x > 0)",
                           "(x > 0) U[-1, 1] (x > 0)",
                           "F[3, 2](x > 0)", "G[1, 0.5](x > 0)"}) {
    const auto pf = parse_formula(text, {"x"});
    INFO(text);
    // G over a bad window desugars to !F over it, so it is constantly true.
    const bool expect = std::string(text).starts_with("G");
    CHECK(evaluate(pf.formula, pf.signature, trace, 0.0) == expect);
  }
}

TEST_CASE("globally holds on a constant trace") {
  const auto trace = sampled(0.05, 3.0, [](double) { return 1.0; });
  const auto pf = parse_formula("G[0, 2](x > 0)", {"x"});
  CHECK(evaluate(pf.formula, pf.signature, trace, 0.0));
  CHECK(evaluate(pf.formula, pf.signature, trace, 1.0));  // t0 shift
}

TEST_CASE("until requires the prefix from time zero") {
  // The semantics demand phi1 on [0, t), not just [t1, t). Build a trace
  // where phi1 fails before the window opens.
  //   x = 1 on [0, 0.3), x = 0 on [0.3, 0.6), x = 1 afterwards; y rises at 1.
  std::vector<double> ts, vs;
  for (double t = 0.0; t <= 2.0 + 1e-12; t += 0.1) {
    ts.push_back(t);
    const double x = (t < 0.3 || t >= 0.6) ? 1.0 : 0.0;
    const double y = t >= 1.0 ? 1.0 : 0.0;
    vs.push_back(x);
    vs.push_back(y);
  }
  const Trace trace({"x", "y"}, std::move(ts), std::move(vs));
  const auto pf = parse_formula("(x > 0) U[1, 2] (y > 0)", {"x", "y"});
  // y holds from 1.0, inside the window, but x already failed at 0.3.
  CHECK_FALSE(evaluate(pf.formula, pf.signature, trace, 0.0));

  // With the gap removed the same formula holds.
  const auto ok = sampled(0.1, 2.0, [](double) { return 1.0; });
  std::vector<double> ts2, vs2;
  for (double t = 0.0; t <= 2.0 + 1e-12; t += 0.1) {
    ts2.push_back(t);
    vs2.push_back(1.0);
    vs2.push_back(t >= 1.0 ? 1.0 : 0.0);
  }
  const Trace trace2({"x", "y"}, std::move(ts2), std::move(vs2));
  CHECK(evaluate(pf.formula, pf.signature, trace2, 0.0));
}

TEST_CASE("evaluate validates the horizon and signals") {
  const auto trace = sampled(0.1, 1.0, [](double) { return 1.0; });
  const auto pf = parse_formula("F[0, 2](x > 0)", {"x"});
  CHECK_THROWS_WITH(evaluate(pf.formula, pf.signature, trace, 0.0),
                    Catch::Matchers::ContainsSubstring("too short"));

  const auto wrong = parse_formula("q > 0", {"q"});
  CHECK_THROWS_WITH(evaluate(wrong.formula, wrong.signature, trace, 0.0),
                    Catch::Matchers::ContainsSubstring("missing"));
}

TEST_CASE("desugaring identities hold on random formulas and traces") {
  std::mt19937_64 rng(2026'08'09);
  const oracles::RandomFormulaConfig cfg;
  for (int round = 0; round < 60; ++round) {
    const auto trace = oracles::random_trace(rng, cfg.step, 64, 2);
    const Formula child = oracles::random_formula(rng, cfg, 2, 2);
    std::uniform_int_distribution<int> steps(0, 8);
    const auto lo = Endpoint::lit(steps(rng) * cfg.step);
    const auto hi = Endpoint::lit(lo.value + steps(rng) * cfg.step);

    const Formula fin = Formula::finally(lo, hi, child);
    const Formula until_form = Formula::until(lo, hi, Formula::truth(), child);
    const Formula glob = Formula::globally(lo, hi, child);
    const Formula neg_fin_neg =
        Formula::negation(Formula::finally(lo, hi, Formula::negation(child)));

    const double h = formula_horizon(fin);
    if (h > trace.end_time()) continue;
    Monitor monitor({"x", "y"}, trace);
    CHECK(monitor.evaluate(fin, 0.0) == monitor.evaluate(until_form, 0.0));
    CHECK(monitor.evaluate(glob, 0.0) == monitor.evaluate(neg_fin_neg, 0.0));
  }
}

TEST_CASE("monitor matches the dense-grid oracle on random pairs") {
  std::mt19937_64 rng(42);
  const oracles::RandomFormulaConfig cfg;
  int checked = 0;
  int convention_cases = 0;
  while (checked < 120) {
    const std::size_t samples = 48;
    const auto trace = oracles::random_trace(rng, cfg.step, samples, 2);
    const Formula f = oracles::random_formula(rng, cfg, 2, 0);
    const double h = formula_horizon(f);
    if (h > trace.end_time() * 0.75) continue;
    ++checked;

    const oracles::DenseMonitor dense(trace, cfg.step);
    const Monitor monitor({"x", "y"}, trace);
    const auto signal = monitor.signal(f, {});
    // Compare at every sample-aligned shift with a valid horizon.
    for (std::size_t i = 0; i < samples; ++i) {
      const double t0 = static_cast<double>(i) * cfg.step;
      if (t0 + h > trace.end_time()) break;
      INFO("pair " << checked << " at t0 = " << t0);
      REQUIRE(signal.value_at(t0) == dense.evaluate(f, i));
    }
  }
  // The generator must actually have produced convention cases; count them
  // in a fresh stream to document the mix.
  std::mt19937_64 rng2(42);
  for (int i = 0; i < 200; ++i) {
    const Formula f = oracles::random_formula(rng2, cfg, 2, 0);
    struct Walk {
      int bad = 0;
      void visit(const Formula& g) {
        if (g.kind == Formula::Kind::Until &&
            (g.hi.value < g.lo.value || g.lo.value < 0.0))
          ++bad;
        for (const auto& k : g.kids) visit(k);
      }
    } walk;
    walk.visit(f);
    convention_cases += walk.bad;
  }
  CHECK(convention_cases > 20);
}

TEST_CASE("boolean signals coalesce and stay canonical") {
  const auto trace = sampled(0.25, 3.0, [](double t) { return t < 1.5 ? 1.0 : -1.0; });
  Monitor monitor({"x"}, trace);
  const auto pf = parse_formula("x > 0", {"x"});
  const auto sig = monitor.signal(pf.formula, {});
  REQUIRE(sig.times.size() == 2);
  CHECK(sig.times[0] == 0.0);
  CHECK(sig.times[1] == 1.5);
  CHECK(sig.value_at(0.0));
  CHECK(sig.value_at(1.49));
  CHECK_FALSE(sig.value_at(1.5));
  CHECK_FALSE(sig.value_at(3.0));
}

#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "conforma/config.hpp"
#include "conforma/engine.hpp"

namespace conforma {

// Machine-readable run reports. Key order is alphabetical (nlohmann object
// semantics) and doubles serialize shortest-round-trip, so identical runs
// produce byte-identical JSON apart from the three *_time_s fields.

namespace detail {

inline nlohmann::json side_json(const SideSummary& s) {
  nlohmann::json j;
  j["count"] = s.count;
  j["pos_inf"] = s.pos_inf;
  j["neg_inf"] = s.neg_inf;
  j["min"] = s.min ? nlohmann::json(*s.min) : nlohmann::json();
  j["median"] = s.median ? nlohmann::json(*s.median) : nlohmann::json();
  j["max"] = s.max ? nlohmann::json(*s.max) : nlohmann::json();
  return j;
}

inline nlohmann::json echo_json(const SystemSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.system ? spec.system->name() : spec.kind;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : spec.echo) cfg[k] = v;
  j["config"] = cfg;
  return j;
}

}  // namespace detail

inline nlohmann::json report_json(const ConformanceReport& r,
                                  const TestConfig& cfg,
                                  const std::string& formula,
                                  const std::vector<ParamDecl>& params,
                                  const nlohmann::json& system1,
                                  const nlohmann::json& system2) {
  nlohmann::json j;
  j["assertion"] = to_string(r.assertion);
  j["delta"] = r.delta;
  j["n"] = r.n;
  j["m"] = r.m;
  j["samples_total"] = r.n + r.m;
  j["alpha"] = r.alpha;
  j["alpha_d"] = cfg.alpha_d;
  j["c"] = cfg.c;
  j["dim"] = r.dim;
  j["seed"] = cfg.master_seed;
  j["k1"] = cfg.k1;
  j["k2"] = cfg.k2;
  j["max_samples"] = cfg.max_samples;
  j["horizon"] = cfg.horizon;
  j["step"] = cfg.step;
  j["tol"] = cfg.tol;
  j["threads"] = cfg.threads;
  j["formula"] = formula.empty() ? nlohmann::json() : nlohmann::json(formula);
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : params) {
    nlohmann::json pj;
    pj["name"] = p.name;
    pj["direction"] = to_string(p.direction);
    pj["bracket"] = {p.bracket_lo, p.bracket_hi};
    ps.push_back(pj);
  }
  j["params"] = ps;
  j["side1"] = detail::side_json(r.side1);
  j["side2"] = detail::side_json(r.side2);
  j["system1"] = system1;
  j["system2"] = system2;
  j["inconclusive_reason"] = r.inconclusive_reason.empty()
                                 ? nlohmann::json()
                                 : nlohmann::json(r.inconclusive_reason);
  j["sim_time_s"] = r.sim_time_s;
  j["test_time_s"] = r.test_time_s;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

inline nlohmann::json report_json(const ConformanceReport& r, const RunConfig& rc) {
  return report_json(r, rc.test, rc.pf.source, rc.pf.params,
                     detail::echo_json(rc.system1), detail::echo_json(rc.system2));
}

inline void write_report(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open report for writing");
  out << j.dump(2) << "\n";
  if (!out) throw Error(path + ": report write failed");
}

/// One-line human summary mirroring the result-table columns.
inline std::string report_summary_line(const ConformanceReport& r,
                                       const TestConfig& cfg) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%s: delta=%.4g n=%zu m=%zu alpha=%.4g (c=%.4g, alpha_d=%.4g) "
                "sim %.3gs + test %.3gs",
                to_string(r.assertion), r.delta, r.n, r.m, r.alpha, cfg.c,
                cfg.alpha_d, r.sim_time_s, r.test_time_s);
  std::string line(buf);
  if (!r.inconclusive_reason.empty()) line += " [" + r.inconclusive_reason + "]";
  return line;
}

}  // namespace conforma

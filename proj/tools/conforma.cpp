// Command-line front end: conformance verification runs, the raw two-sample
// test, formula monitoring, and trace generation.
//
// Exit codes: 0 conform / formula true, 1 nonconform / formula false,
// 2 inconclusive, 64 configuration or usage error, 70 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conforma/conforma.hpp"

namespace {

constexpr int kExitConform = 0;
constexpr int kExitNonConform = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitConfig = 64;
constexpr int kExitRuntime = 70;

int assertion_exit(conforma::Assertion a) {
  switch (a) {
    case conforma::Assertion::Conform: return kExitConform;
    case conforma::Assertion::NonConform: return kExitNonConform;
    case conforma::Assertion::Inconclusive: return kExitInconclusive;
  }
  return kExitRuntime;
}

int cmd_verify(const std::string& config_path, unsigned threads_override,
               const std::string& output_override) {
  conforma::RunConfig rc;
  try {
    rc = conforma::load_run_config(config_path);
  } catch (const conforma::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (threads_override > 0) rc.test.threads = threads_override;
  if (!output_override.empty()) rc.output_path = output_override;
  if (rc.seed_was_random)
    conforma::log(conforma::LogLevel::Info,
                  "seed drawn from OS entropy: ", rc.test.master_seed);

  const auto report =
      conforma::run_conformance(*rc.system1.system, *rc.system2.system,
                                rc.input, rc.pf, rc.test);
  const auto j = conforma::report_json(report, rc);
  conforma::write_report(j, rc.output_path);
  std::cout << conforma::report_summary_line(report, rc.test) << "\n";
  return assertion_exit(report.assertion);
}

/// Reads one sample vector per line; values separated by commas or blanks.
std::vector<std::vector<double>> load_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw conforma::Error(path + ": cannot open file");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream iss(line);
    std::vector<double> row;
    std::string tok;
    while (iss >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw conforma::Error(path + ": line " + std::to_string(lineno) +
                              ": not a number: '" + tok + "'");
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw conforma::Error(path + ": line " + std::to_string(lineno) +
                            ": ragged sample dimension");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw conforma::Error(path + ": no samples");
  return rows;
}

class FileSampler : public conforma::Sampler {
 public:
  FileSampler(std::string path, std::vector<std::vector<double>> rows)
      : path_(std::move(path)), rows_(std::move(rows)) {}
  std::size_t dim() const override { return rows_.front().size(); }
  std::vector<double> draw(std::uint64_t index) override {
    if (index >= rows_.size())
      throw conforma::PoolExhausted(path_ + ": samples exhausted after " +
                                    std::to_string(rows_.size()) + " draws");
    return rows_[index];
  }

 private:
  std::string path_;
  std::vector<std::vector<double>> rows_;
};

int cmd_test_dist(const std::string& file_x, const std::string& file_y,
                  const conforma::TestConfig& cfg, const std::string& out) {
  FileSampler sx(file_x, load_sample_file(file_x));
  FileSampler sy(file_y, load_sample_file(file_y));
  const auto report = conforma::run_equality_test(sx, sy, cfg);
  nlohmann::json s1, s2;
  s1["name"] = file_x;
  s2["name"] = file_y;
  const auto j = conforma::report_json(report, cfg, "", {}, s1, s2);
  if (!out.empty()) conforma::write_report(j, out);
  std::cout << conforma::report_summary_line(report, cfg) << "\n";
  return assertion_exit(report.assertion);
}

int cmd_monitor(const std::string& formula_text, const std::string& trace_path,
                const std::vector<std::string>& param_args, double t0) {
  std::vector<conforma::ParamDecl> decls;
  std::vector<double> values;
  for (const auto& arg : param_args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos)
      throw conforma::Error("--param expects name=value, got '" + arg + "'");
    conforma::ParamDecl d;
    d.name = arg.substr(0, eq);
    values.push_back(std::stod(arg.substr(eq + 1)));
    decls.push_back(std::move(d));
  }
  const auto traces = conforma::load_traces_csv(trace_path);
  const auto& trace = traces.front();
  const auto pf = conforma::parse_formula(formula_text, trace.variables(),
                                          std::move(decls));
  const bool sat = conforma::evaluate(pf, trace, t0, values);
  std::cout << (sat ? "true" : "false") << "\n";
  return sat ? 0 : 1;
}

int cmd_simulate(const std::string& config_path, std::size_t n,
                 std::uint64_t seed, bool seed_given,
                 const std::string& out_dir, double horizon_override,
                 double step_override) {
  const conforma::ConfigFile file(config_path);
  std::uint64_t master = seed;
  if (!seed_given) {
    if (auto s = file.get("", "seed")) master = std::stoull(*s);
  }
  double horizon = horizon_override;
  if (horizon <= 0.0) {
    const auto h = file.get("", "horizon");
    if (!h) throw conforma::Error(config_path + ": missing 'horizon'");
    horizon = std::stod(*h);
  }
  double step = step_override;
  if (step <= 0.0) {
    const auto s = file.get("", "step");
    step = s ? std::stod(*s) : 0.01;
  }
  const std::string section =
      file.get("system1", "type") ? "system1" : "system";
  const auto spec = conforma::build_system(file, section, master, 0);
  const auto input = conforma::build_input(file);

  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < n; ++i) {
    const auto path_seed = conforma::derive_seed(master, 0, i);
    const auto trace =
        spec.system->sample_path(input, path_seed, horizon, step);
    char name[64];
    std::snprintf(name, sizeof name, "trace_%04zu.csv", i);
    conforma::write_trace_csv(trace,
                              (std::filesystem::path(out_dir) / name).string());
  }
  std::cout << "wrote " << n << " trace(s) to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistical verification of probabilistic conformance for "
               "grey-box stochastic systems"};
  app.require_subcommand(1);

  // verify
  std::string verify_config;
  unsigned verify_threads = 0;
  std::string verify_output;
  auto* verify = app.add_subcommand(
      "verify", "run the conformance verification described by a config file");
  verify->add_option("config", verify_config, "run configuration file")
      ->required();
  verify->add_option("--threads", verify_threads,
                     "worker thread cap (does not change results)");
  verify->add_option("--output", verify_output, "report JSON path override");

  // test-dist
  std::string dist_x, dist_y, dist_out;
  conforma::TestConfig dist_cfg;
  auto* test_dist = app.add_subcommand(
      "test-dist",
      "sequential approximate-equality test on raw sample files");
  test_dist->add_option("fileX", dist_x, "samples of X, one vector per line")
      ->required();
  test_dist->add_option("fileY", dist_y, "samples of Y, one vector per line")
      ->required();
  test_dist->add_option("--c", dist_cfg.c, "approximate-equality threshold")
      ->required();
  test_dist->add_option("--alpha", dist_cfg.alpha_d, "desired confidence")
      ->required();
  test_dist->add_option("--k1", dist_cfg.k1, "X draws per iteration");
  test_dist->add_option("--k2", dist_cfg.k2, "Y draws per iteration");
  test_dist->add_option("--max-samples", dist_cfg.max_samples,
                        "per-side sample cap");
  test_dist->add_option("--out", dist_out, "report JSON path");

  // monitor
  std::string mon_formula, mon_trace;
  std::vector<std::string> mon_params;
  double mon_t0 = 0.0;
  auto* monitor = app.add_subcommand(
      "monitor", "evaluate an STL formula on one recorded trace");
  monitor->add_option("formula", mon_formula, "formula text")->required();
  monitor->add_option("trace", mon_trace, "trace CSV")->required();
  monitor->add_option("--param", mon_params,
                      "parameter value as name=value (repeatable)");
  monitor->add_option("--t0", mon_t0, "evaluation shift time");

  // simulate
  std::string sim_config, sim_out_dir;
  std::size_t sim_n = 1;
  std::uint64_t sim_seed = 0;
  double sim_horizon = 0.0, sim_step = 0.0;
  auto* simulate = app.add_subcommand(
      "simulate", "sample traces from the config's [system1] into CSV files");
  simulate->add_option("config", sim_config, "run configuration file")
      ->required();
  simulate->add_option("--n", sim_n, "number of paths")->required();
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "master seed");
  simulate->add_option("--out-dir", sim_out_dir, "output directory")
      ->required();
  simulate->add_option("--horizon", sim_horizon, "horizon override, s");
  simulate->add_option("--step", sim_step, "step override, s");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed())
      return cmd_verify(verify_config, verify_threads, verify_output);
    if (test_dist->parsed()) {
      dist_cfg.validate();
      return cmd_test_dist(dist_x, dist_y, dist_cfg, dist_out);
    }
    if (monitor->parsed())
      return cmd_monitor(mon_formula, mon_trace, mon_params, mon_t0);
    if (simulate->parsed())
      return cmd_simulate(sim_config, sim_n, sim_seed, seed_opt->count() > 0,
                          sim_out_dir, sim_horizon, sim_step);
  } catch (const conforma::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const conforma::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

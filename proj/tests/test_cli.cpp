#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "conforma/trace.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CONFORMA_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  std::array<char, 512> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) output += buf.data();
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), output};
}

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "conforma_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const auto path = work_dir() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

std::string config_path(const std::string& name) {
  return (fs::path(CONFORMA_CONFIG_DIR) / name).string();
}

}  // namespace

TEST_CASE("verify: disjoint systems exit 1 with delta 1.00 in the report") {
  const auto report_path = (work_dir() / "powertrain.json").string();
  const auto r = run_cli("verify " + config_path("powertrain_analogue.conf") +
                         " --output " + report_path);
  INFO(r.output);
  CHECK(r.exit_code == 1);
  CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("nonconform"));

  const auto j = nlohmann::json::parse(read_file(report_path));
  CHECK(j["assertion"] == "nonconform");
  CHECK(j["delta"] == 1.0);
  CHECK(j["c"] == 0.40);
  CHECK(j["alpha_d"] == 0.99);
  CHECK(j["samples_total"].get<int>() >= 20);
  CHECK(j["samples_total"].get<int>() <= 78);
  CHECK(j["formula"] == "F[0.22, tau](abs(e) < 0.05)");
  CHECK(j["side1"]["count"].get<int>() == j["n"].get<int>());
  CHECK(j["sim_time_s"].is_number());
}

TEST_CASE("verify: self-conformance exits 0") {
  const auto report_path = (work_dir() / "selfconf.json").string();
  const auto r = run_cli("verify " + config_path("self_conformance.conf") +
                         " --output " + report_path);
  INFO(r.output);
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(read_file(report_path));
  CHECK(j["assertion"] == "conform");
}

TEST_CASE("verify: an undersized replay pool exits 2") {
  const auto pool_dir = work_dir() / "replay_pool";
  fs::remove_all(pool_dir);
  const auto sim = run_cli("simulate " + config_path("self_conformance.conf") +
                           " --n 6 --seed 5 --out-dir " + pool_dir.string());
  REQUIRE(sim.exit_code == 0);

  const auto cfg = write_file("replay.conf",
                              "formula = F[0, tau](x < 0.5)\n"
                              "signals = x\n"
                              "param = tau increasing 0.0 1.5\n"
                              "c = 0.05\nalpha_d = 0.99\nseed = 3\n"
                              "horizon = 1.5\nstep = 0.05\n"
                              "output = " + (work_dir() / "replay.json").string() + "\n"
                              "[system1]\ntype = replay\npath = " + pool_dir.string() + "\n"
                              "[system2]\ntype = replay\npath = " + pool_dir.string() + "\n");
  const auto r = run_cli("verify " + cfg);
  INFO(r.output);
  CHECK(r.exit_code == 2);
  CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("exhausted"));
  const auto j = nlohmann::json::parse(read_file(work_dir() / "replay.json"));
  CHECK(j["assertion"] == "inconclusive");
  CHECK_THAT(j["inconclusive_reason"].get<std::string>(),
             Catch::Matchers::ContainsSubstring("trace pool exhausted"));
}

TEST_CASE("verify: config errors exit 64") {
  const auto missing = run_cli("verify /nonexistent/path.conf");
  CHECK(missing.exit_code == 64);

  const auto bad = write_file("bad.conf", "formula = F[0, tau](x < 0.5)\n");
  const auto r = run_cli("verify " + bad);
  CHECK(r.exit_code == 64);
  CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("config error"));

  const auto bad_formula = write_file(
      "bad_formula.conf",
      "formula = F[0, tau](q < 0.5)\nsignals = x\n"
      "param = tau increasing 0 1\nc = 0.1\nalpha_d = 0.9\nhorizon = 1\n"
      "[system1]\ntype = hitting\n[system2]\ntype = hitting\n");
  const auto r2 = run_cli("verify " + bad_formula);
  CHECK(r2.exit_code == 64);
  CHECK_THAT(r2.output, Catch::Matchers::ContainsSubstring("undeclared"));
}

TEST_CASE("test-dist: identical files conform with delta 0") {
  const auto fx = write_file("same_x.txt", "0.1\n0.4\n0.7\n0.9\n0.2\n0.5\n");
  const auto r = run_cli("test-dist " + fx + " " + fx + " --c 0.5 --alpha 0.9");
  INFO(r.output);
  CHECK(r.exit_code == 0);
  CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("delta=0"));
}

TEST_CASE("test-dist: disjoint supports refute equality") {
  std::string xs, ys;
  for (int i = 0; i < 20; ++i) {
    xs += std::to_string(0.05 * i) + "\n";       // in [0, 1)
    ys += std::to_string(2.0 + 0.05 * i) + "\n"; // in [2, 3)
  }
  const auto fx = write_file("disjoint_x.txt", xs);
  const auto fy = write_file("disjoint_y.txt", ys);
  const auto report_path = (work_dir() / "dist.json").string();
  const auto r = run_cli("test-dist " + fx + " " + fy +
                         " --c 0.4 --alpha 0.95 --out " + report_path);
  INFO(r.output);
  CHECK(r.exit_code == 1);
  const auto j = nlohmann::json::parse(read_file(report_path));
  CHECK(j["delta"] == 1.0);
  CHECK(j["assertion"] == "nonconform");
  CHECK(j["formula"].is_null());
}

TEST_CASE("test-dist: five lines cannot reach alpha 0.99") {
  // Even a saturated statistic delta = 1 gives
  // H(0.95 * sqrt(25/10)) = H(1.502) ~ 0.978 < 0.99 at n = m = 5.
  const auto fx = write_file("five_x.txt", "0\n0\n0\n0\n0\n");
  const auto fy = write_file("five_y.txt", "1\n1\n1\n1\n1\n");
  const auto r = run_cli("test-dist " + fx + " " + fy + " --c 0.05 --alpha 0.99");
  INFO(r.output);
  CHECK(r.exit_code == 2);
  CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("exhausted"));
}

TEST_CASE("test-dist: input validation") {
  const auto empty = write_file("empty.txt", "");
  const auto good = write_file("good.txt", "1\n2\n");
  CHECK(run_cli("test-dist " + empty + " " + good + " --c 0.1 --alpha 0.9")
            .exit_code == 70);
  const auto ragged = write_file("ragged.txt", "1 2\n3\n");
  CHECK(run_cli("test-dist " + ragged + " " + good + " --c 0.1 --alpha 0.9")
            .exit_code == 70);
}

TEST_CASE("monitor: evaluates formulas against a trace csv") {
  std::string csv = "time,x\n";
  for (int i = 0; i <= 200; ++i)
    csv += std::to_string(0.01 * i) + "," + std::to_string(0.01 * i - 0.5) + "\n";
  const auto trace = write_file("ramp.csv", csv);

  const auto yes = run_cli("monitor \"F[0, 1](x > 0)\" " + trace);
  CHECK(yes.exit_code == 0);
  CHECK_THAT(yes.output, Catch::Matchers::ContainsSubstring("true"));

  const auto no = run_cli("monitor \"G[0, 1](x > 0)\" " + trace);
  CHECK(no.exit_code == 1);
  CHECK_THAT(no.output, Catch::Matchers::ContainsSubstring("false"));

  const auto param = run_cli("monitor \"F[0, tau](x > 0)\" " + trace +
                             " --param tau=1.5");
  CHECK(param.exit_code == 0);

  const auto missing = run_cli("monitor \"F[0, 1](y > 0)\" " + trace);
  CHECK(missing.exit_code == 64);  // undeclared signal: parse-level error

  const auto shifted = run_cli("monitor \"x > 0\" " + trace + " --t0 0.9");
  CHECK(shifted.exit_code == 0);
}

TEST_CASE("simulate: byte-identical outputs for identical seeds") {
  const auto dir_a = work_dir() / "sim_a";
  const auto dir_b = work_dir() / "sim_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  const auto cfg = config_path("bouncing_ball.conf");
  REQUIRE(run_cli("simulate " + cfg + " --n 3 --seed 7 --out-dir " +
                  dir_a.string()).exit_code == 0);
  REQUIRE(run_cli("simulate " + cfg + " --n 3 --seed 7 --out-dir " +
                  dir_b.string()).exit_code == 0);
  for (int i = 0; i < 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trace_%04d.csv", i);
    const auto a = read_file(dir_a / name);
    const auto b = read_file(dir_b / name);
    CHECK(!a.empty());
    CHECK(a == b);
  }
  // Different seed, different traces.
  const auto dir_c = work_dir() / "sim_c";
  fs::remove_all(dir_c);
  REQUIRE(run_cli("simulate " + cfg + " --n 1 --seed 8 --out-dir " +
                  dir_c.string()).exit_code == 0);
  CHECK(read_file(dir_a / "trace_0000.csv") !=
        read_file(dir_c / "trace_0000.csv"));

  // The generated traces load back cleanly.
  const auto traces = conforma::load_traces_csv(dir_a.string());
  CHECK(traces.size() == 3);
}

TEST_CASE("usage errors exit with the configured code") {
  CHECK(run_cli("").exit_code != 0);
  CHECK(run_cli("frobnicate x").exit_code != 0);
}

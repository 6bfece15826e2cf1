#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conforma/engine.hpp"
#include "conforma/parser.hpp"
#include "conforma/systems.hpp"

namespace conforma {

// Flat key-value run configuration:
//
//   formula   = F[0.22, tau](abs(e) < 0.05)
//   signals   = e
//   param     = tau increasing 0.22 4.0
//   c         = 0.40
//   alpha_d   = 0.99
//   horizon   = 4.0
//   seed      = 20260809
//   [system1]
//   type = hitting
//   dist = uniform 0.3 0.8
//   signal = e
//   [system2]
//   ...
//   [input]
//   u = constant 1.0
//
// '#' starts a comment; keys may repeat (param). Sections name the two
// systems and the shared input.

struct ConfigEntry {
  std::string section;  // "" for top level
  std::string key;
  std::string value;
  int line;
};

class ConfigFile {
 public:
  explicit ConfigFile(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) throw Error(path_ + ": cannot open config");
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto pos = line.find('#'); pos != std::string::npos)
        line = line.substr(0, pos);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw Error(path_ + ":" + std::to_string(lineno) + ": bad section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw Error(path_ + ":" + std::to_string(lineno) + ": expected key = value");
      entries_.push_back({section, trim(line.substr(0, eq)),
                          trim(line.substr(eq + 1)), lineno});
    }
  }

  const std::string& path() const { return path_; }
  const std::vector<ConfigEntry>& entries() const { return entries_; }

  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) const {
    for (const auto& e : entries_)
      if (e.section == section && e.key == key) return e.value;
    return std::nullopt;
  }

  std::vector<std::string> get_all(const std::string& section,
                                   const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
      if (e.section == section && e.key == key) out.push_back(e.value);
    return out;
  }

  std::vector<const ConfigEntry*> section_entries(const std::string& section) const {
    std::vector<const ConfigEntry*> out;
    for (const auto& e : entries_)
      if (e.section == section) out.push_back(&e);
    return out;
  }

 private:
  std::string path_;
  std::vector<ConfigEntry> entries_;
};

namespace detail {

inline double config_number(const std::string& value, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw Error(where + ": not a number: '" + value + "'");
  return v;
}

inline std::vector<std::string> config_words(const std::string& value) {
  std::istringstream iss(value);
  std::vector<std::string> out;
  std::string w;
  while (iss >> w) out.push_back(w);
  return out;
}

}  // namespace detail

/// One system section resolved into a factory plus its raw echo entries.
struct SystemSpec {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> echo;
  std::shared_ptr<GreyBoxSystem> system;
};

inline SystemSpec build_system(const ConfigFile& file,
                               const std::string& section,
                               std::uint64_t master_seed,
                               std::uint64_t side_id) {
  const auto where = file.path() + " [" + section + "]";
  SystemSpec spec;
  for (const auto* e : file.section_entries(section))
    spec.echo.emplace_back(e->key, e->value);
  const auto type = file.get(section, "type");
  if (!type) throw Error(where + ": missing 'type'");
  spec.kind = *type;

  auto num = [&](const std::string& key,
                 std::optional<double> fallback = {}) -> double {
    if (auto v = file.get(section, key))
      return detail::config_number(*v, where + " " + key);
    if (fallback) return *fallback;
    throw Error(where + ": missing '" + key + "'");
  };

  if (*type == "bouncing_ball") {
    BouncingBallParams p;
    p.x0 = num("x0", p.x0);
    p.g0 = num("g0", p.g0);
    p.sigma = num("sigma", p.sigma);
    p.restitution = num("restitution", p.restitution);
    spec.system = std::make_shared<BouncingBallSystem>(p);
  } else if (*type == "hitting") {
    HittingModelParams p;
    if (auto d = file.get(section, "dist")) {
      const auto words = detail::config_words(*d);
      if (words.empty()) throw Error(where + ": empty dist");
      if (words[0] == "uniform" && words.size() == 3) {
        p.dist = HittingModelParams::Dist::Uniform;
        p.a = detail::config_number(words[1], where);
        p.b = detail::config_number(words[2], where);
      } else if (words[0] == "normal" && words.size() == 3) {
        p.dist = HittingModelParams::Dist::Normal;
        p.mu = detail::config_number(words[1], where);
        p.sd = detail::config_number(words[2], where);
      } else if (words[0] == "fixed" && words.size() == 2) {
        p.dist = HittingModelParams::Dist::Fixed;
        p.value = detail::config_number(words[1], where);
      } else {
        throw Error(where + ": dist must be 'uniform a b', 'normal mu sd', "
                    "or 'fixed t'");
      }
    }
    p.shift = num("shift", p.shift);
    p.before = num("before", p.before);
    p.after = num("after", p.after);
    if (auto s = file.get(section, "signal")) p.signal = *s;
    spec.system = std::make_shared<HittingModelSystem>(p);
  } else if (*type == "second_order") {
    SecondOrderParams p;
    p.wn = num("wn", p.wn);
    p.zeta = num("zeta", p.zeta);
    p.noise_sd = num("noise_sd", p.noise_sd);
    p.band = num("band", p.band);
    p.gain = num("gain", p.gain);
    spec.system = std::make_shared<SecondOrderSystem>(p);
  } else if (*type == "replay") {
    const auto path = file.get(section, "path");
    if (!path) throw Error(where + ": replay needs 'path'");
    // The pool order is a pure function of the config seed and the side.
    spec.system = trace_replay_system(load_traces_csv(*path),
                                      derive_seed(master_seed, 100 + side_id, 0),
                                      "replay:" + *path);
  } else {
    throw Error(where + ": unknown system type '" + *type + "'");
  }
  return spec;
}

inline InputMap build_input(const ConfigFile& file) {
  InputMap input;
  for (const auto* e : file.section_entries("input")) {
    const auto words = detail::config_words(e->value);
    const auto where = file.path() + " [input] " + e->key;
    if (words.size() == 2 && (words[0] == "constant" || words[0] == "const")) {
      input.set(e->key, InputSignal::constant(detail::config_number(words[1], where)));
    } else if (words.size() == 2 && words[0] == "table") {
      const auto traces = load_traces_csv_file(words[1]);
      const Trace& t = traces.front();
      const std::size_t col = t.column(e->key);
      std::vector<double> times, values;
      for (std::size_t i = 0; i < t.size(); ++i) {
        times.push_back(t.time(i));
        values.push_back(t.row(i)[col]);
      }
      input.set(e->key, InputSignal::table(std::move(times), std::move(values)));
    } else {
      throw Error(where + ": expected 'constant <value>' or 'table <csv>'");
    }
  }
  return input;
}

/// Full verification run description.
struct RunConfig {
  ParameterizedFormula pf;
  TestConfig test;
  bool seed_was_random = false;
  SystemSpec system1, system2;
  InputMap input;
  std::string output_path = "report.json";
};

inline RunConfig load_run_config(const std::string& path) {
  const ConfigFile file(path);
  RunConfig rc;

  const auto formula = file.get("", "formula");
  if (!formula) throw Error(path + ": missing 'formula'");
  const auto signals = file.get("", "signals");
  if (!signals) throw Error(path + ": missing 'signals'");
  std::vector<std::string> signature;
  {
    std::string s = *signals;
    std::replace(s.begin(), s.end(), ',', ' ');
    signature = detail::config_words(s);
  }
  std::vector<ParamDecl> params;
  for (const auto& line : file.get_all("", "param")) {
    const auto words = detail::config_words(line);
    if (words.size() != 4)
      throw Error(path + ": param needs 'name increasing|decreasing lo hi'");
    ParamDecl d;
    d.name = words[0];
    if (words[1] == "increasing" || words[1] == "inc")
      d.direction = Monotonicity::Increasing;
    else if (words[1] == "decreasing" || words[1] == "dec")
      d.direction = Monotonicity::Decreasing;
    else
      throw Error(path + ": param direction must be increasing or decreasing");
    d.bracket_lo = detail::config_number(words[2], path + " param " + d.name);
    d.bracket_hi = detail::config_number(words[3], path + " param " + d.name);
    params.push_back(std::move(d));
  }
  rc.pf = parse_formula(*formula, std::move(signature), std::move(params));

  auto top = [&](const char* key, double fallback) {
    if (auto v = file.get("", key)) return detail::config_number(*v, path);
    return fallback;
  };
  rc.test.c = top("c", rc.test.c);
  rc.test.alpha_d = top("alpha_d", rc.test.alpha_d);
  rc.test.k1 = static_cast<std::size_t>(top("k1", 1));
  rc.test.k2 = static_cast<std::size_t>(top("k2", 1));
  rc.test.max_samples =
      static_cast<std::size_t>(top("max_samples", 100000));
  rc.test.tol = top("tol", rc.test.tol);
  const auto horizon = file.get("", "horizon");
  if (!horizon) throw Error(path + ": missing 'horizon'");
  rc.test.horizon = detail::config_number(*horizon, path + " horizon");
  rc.test.step = top("step", rc.test.step);
  rc.test.threads = static_cast<unsigned>(top("threads", 1));
  if (auto seed = file.get("", "seed")) {
    rc.test.master_seed = std::stoull(*seed);
  } else {
    rc.test.master_seed =
        (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^
        std::random_device{}();
    rc.seed_was_random = true;
  }
  if (auto out = file.get("", "output")) rc.output_path = *out;

  rc.system1 = build_system(file, "system1", rc.test.master_seed, 0);
  rc.system2 = build_system(file, "system2", rc.test.master_seed, 1);
  rc.input = build_input(file);
  rc.test.validate();
  return rc;
}

}  // namespace conforma

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conforma/common.hpp"

namespace conforma {

/// A finite sampled path: strictly increasing timestamps starting at 0 and
/// one real-valued row per timestamp. Values are held piecewise-constant
/// between samples (the row at the greatest timestamp <= t). Traces are
/// immutable after construction; shift() returns a zero-copy suffix view.
class Trace {
 public:
  Trace() = default;

  Trace(std::vector<std::string> variables, std::vector<double> timestamps,
        std::vector<double> values, std::string id = {}) {
    auto data = std::make_shared<Data>();
    data->variables = std::move(variables);
    data->timestamps = std::move(timestamps);
    data->values = std::move(values);
    data->id = std::move(id);
    validate(*data);
    data_ = std::move(data);
  }

  const std::vector<std::string>& variables() const {
    return data_->variables;
  }
  const std::string& id() const { return data_->id; }

  std::size_t size() const { return data_->timestamps.size() - first_; }
  std::size_t width() const { return data_->variables.size(); }

  /// Timestamp of sample `i` in the local (shifted) timeline.
  double time(std::size_t i) const {
    if (i >= size()) throw Error("trace: sample index out of range");
    return i == 0 ? 0.0 : data_->timestamps[first_ + i] - offset_;
  }

  double end_time() const { return data_->timestamps.back() - offset_; }

  std::span<const double> row(std::size_t i) const {
    if (i >= size()) throw Error("trace: sample index out of range");
    return {data_->values.data() + (first_ + i) * width(), width()};
  }

  /// Index of the sample held at local time t (greatest timestamp <= t).
  std::size_t index_at(double t) const {
    if (t < 0.0 || t > end_time())
      throw Error("trace: time " + std::to_string(t) +
                  " outside domain [0, " + std::to_string(end_time()) + "]");
    const auto& ts = data_->timestamps;
    auto it = std::upper_bound(ts.begin() + static_cast<std::ptrdiff_t>(first_),
                               ts.end(), t + offset_);
    return static_cast<std::size_t>(it - ts.begin()) - 1 - first_;
  }

  /// Piecewise-constant sample: the row at the greatest timestamp <= t.
  std::span<const double> sample_at(double t) const { return row(index_at(t)); }

  std::size_t column(const std::string& variable) const {
    const auto& vars = data_->variables;
    auto it = std::find(vars.begin(), vars.end(), variable);
    if (it == vars.end())
      throw Error("trace" + (data_->id.empty() ? "" : " '" + data_->id + "'") +
                  ": signal variable '" + variable + "' missing");
    return static_cast<std::size_t>(it - vars.begin());
  }

  double value_at(double t, std::size_t column) const {
    return sample_at(t)[column];
  }

  /// Suffix view re-based so local time 0 maps to current local time t.
  Trace shift(double t) const {
    if (t < 0.0 || t > end_time())
      throw Error("trace: shift time outside domain");
    Trace out = *this;
    const double absolute = offset_ + t;
    const auto& ts = data_->timestamps;
    auto it = std::upper_bound(ts.begin(), ts.end(), absolute);
    out.first_ = static_cast<std::size_t>(it - ts.begin()) - 1;
    out.offset_ = absolute;
    return out;
  }

 private:
  struct Data {
    std::vector<std::string> variables;
    std::vector<double> timestamps;
    std::vector<double> values;  // row-major, size == timestamps * variables
    std::string id;
  };

  static void validate(const Data& d) {
    if (d.variables.empty()) throw Error("trace: no signal variables");
    if (d.timestamps.empty()) throw Error("trace: no samples");
    if (d.timestamps.front() != 0.0)
      throw Error("trace" + (d.id.empty() ? "" : " '" + d.id + "'") +
                  ": first timestamp must be 0");
    for (std::size_t i = 1; i < d.timestamps.size(); ++i) {
      if (!(d.timestamps[i] > d.timestamps[i - 1]))
        throw Error("trace" + (d.id.empty() ? "" : " '" + d.id + "'") +
                    ": non-increasing timestamp at sample " +
                    std::to_string(i));
    }
    if (d.values.size() != d.timestamps.size() * d.variables.size())
      throw Error("trace: ragged value rows");
    for (double v : d.timestamps)
      if (!std::isfinite(v)) throw Error("trace: non-finite timestamp");
    for (double v : d.values)
      if (!std::isfinite(v)) throw Error("trace: non-finite value");
  }

  std::shared_ptr<const Data> data_;
  std::size_t first_ = 0;
  double offset_ = 0.0;
};

namespace csv {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    const auto a = f.find_first_not_of(" \t");
    const auto b = f.find_last_not_of(" \t");
    f = (a == std::string::npos) ? std::string() : f.substr(a, b - a + 1);
  }
  return out;
}

inline double parse_number(const std::string& field, const std::string& file,
                           std::size_t row) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0')
    throw Error(file + ": row " + std::to_string(row) +
                ": not a number: '" + field + "'");
  return v;
}

}  // namespace csv

/// Loads traces from one CSV file. Header must be `time,<vars...>[,trace_id]`;
/// rows with the same trace_id form one trace (the whole file is one trace
/// when the column is absent). Timestamps must be strictly increasing within
/// each trace and start at 0.
inline std::vector<Trace> load_traces_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty file");
  auto header = csv::split_line(line);
  if (header.empty() || header.front() != "time")
    throw Error(path + ": header must start with 'time'");
  bool has_id = !header.empty() && header.back() == "trace_id";
  const std::size_t width = header.size() - 1 - (has_id ? 1 : 0);
  if (width == 0) throw Error(path + ": no signal columns");
  std::vector<std::string> variables(header.begin() + 1,
                                     header.begin() + 1 + width);

  struct Builder {
    std::vector<double> timestamps;
    std::vector<double> values;
  };
  std::vector<std::pair<std::string, Builder>> groups;  // insertion order
  auto group = [&](const std::string& id) -> Builder& {
    for (auto& [gid, b] : groups)
      if (gid == id) return b;
    groups.emplace_back(id, Builder{});
    return groups.back().second;
  };

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto fields = csv::split_line(line);
    if (fields.size() != header.size())
      throw Error(path + ": row " + std::to_string(row) + ": expected " +
                  std::to_string(header.size()) + " fields, got " +
                  std::to_string(fields.size()));
    const std::string id = has_id ? fields.back() : std::string();
    Builder& b = group(id);
    const double t = csv::parse_number(fields[0], path, row);
    if (!std::isfinite(t))
      throw Error(path + ": row " + std::to_string(row) +
                  ": non-finite timestamp" +
                  (id.empty() ? "" : " in trace '" + id + "'"));
    if (!b.timestamps.empty() && !(t > b.timestamps.back()))
      throw Error(path + ": non-increasing timestamp at row " +
                  std::to_string(row) +
                  (id.empty() ? "" : " in trace '" + id + "'"));
    b.timestamps.push_back(t);
    for (std::size_t k = 0; k < width; ++k) {
      const double v = csv::parse_number(fields[k + 1], path, row);
      if (!std::isfinite(v))
        throw Error(path + ": row " + std::to_string(row) +
                    ": non-finite value in column '" + variables[k] + "'" +
                    (id.empty() ? "" : " in trace '" + id + "'"));
      b.values.push_back(v);
    }
  }
  if (groups.empty()) throw Error(path + ": no data rows");

  std::vector<Trace> out;
  out.reserve(groups.size());
  for (auto& [id, b] : groups) {
    try {
      out.emplace_back(variables, std::move(b.timestamps), std::move(b.values),
                       id.empty() ? std::filesystem::path(path).stem().string()
                                  : id);
    } catch (const Error& e) {
      throw Error(path + ": " + e.what());
    }
  }
  return out;
}

/// Loads traces from a CSV file or from every *.csv in a directory
/// (lexicographic file order).
inline std::vector<Trace> load_traces_csv(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(path + ": no .csv files in directory");
    std::vector<Trace> out;
    for (const auto& f : files) {
      auto part = load_traces_csv_file(f.string());
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    return out;
  }
  return load_traces_csv_file(path);
}

/// Writes one trace as CSV. %.17g keeps finite doubles bit-exact on reload.
inline void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open for writing");
  out << "time";
  for (const auto& v : trace.variables()) out << "," << v;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", trace.time(i));
    out << buf;
    for (double v : trace.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw Error(path + ": write failed");
}

}  // namespace conforma

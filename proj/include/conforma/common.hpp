#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace conforma {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Formula text could not be parsed; carries 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// A trace pool ran dry before the test reached the requested confidence.
/// The engine maps this to an Inconclusive outcome instead of a failure.
class PoolExhausted : public Error {
 public:
  using Error::Error;
};

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

namespace detail {

inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("CONFORMA_LOG");
    if (env == nullptr) return LogLevel::Quiet;
    std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Quiet;
  }();
  return level;
}

inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Writes a log line to stderr when CONFORMA_LOG admits `level`.
template <typename... Args>
void log(LogLevel level, Args&&... args) {
  if (static_cast<int>(level) > static_cast<int>(detail::log_level())) return;
  std::ostringstream oss;
  (oss << ... << args);
  std::lock_guard<std::mutex> lock(detail::log_mutex());
  std::cerr << "[conforma] " << oss.str() << "\n";
}

}  // namespace conforma

#pragma once

#include <stdexcept>
#include <string>

namespace lpwfcm {

enum class ErrorKind {
  argument,
  parse,
  schema,
  value,
  stats,
  generation,
  estimation,
  insufficient_data,
  undefined_metric,
  undefined_correlation,
  io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::argument: return "argument error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::value: return "value error";
    case ErrorKind::stats: return "stats error";
    case ErrorKind::generation: return "generation error";
    case ErrorKind::estimation: return "estimation error";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::undefined_metric: return "undefined metric";
    case ErrorKind::undefined_correlation: return "undefined correlation";
    case ErrorKind::io: return "i/o error";
  }
  return "error";
}

/// Single exception type for the library; `kind()` tells callers (and the
/// CLI exit-code mapping) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix; used when re-throwing with added context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::argument, what);
}

}  // namespace lpwfcm

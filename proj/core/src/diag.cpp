#include "peq/diag.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace peq {

Int floor_div(const Int& a, const Int& d) {
  if (d == 0)
    throw Error(Error::Kind::Eval, "division by zero");
  Int q = a / d; // truncates toward zero
  if (a % d != 0 && ((a < 0) != (d < 0)))
    q -= 1;
  return q;
}

Int floor_mod(const Int& a, const Int& d) {
  return a - d * floor_div(a, d);
}

Int ceil_div(const Int& a, const Int& d) {
  return -floor_div(-a, d);
}

Error::Error(Kind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
      m_kind(kind) {}

const char* error_kind_name(Error::Kind kind) {
  switch (kind) {
  case Error::Kind::Parse: return "parse error";
  case Error::Kind::Validation: return "validation error";
  case Error::Kind::Eval: return "evaluation error";
  case Error::Kind::NonInjectiveRename: return "non-injective rename";
  case Error::Kind::LengthMismatch: return "length mismatch";
  case Error::Kind::NotJointlyUnsat: return "not jointly unsat";
  case Error::Kind::Io: return "io error";
  case Error::Kind::Usage: return "usage error";
  case Error::Kind::Internal: return "internal error";
  }
  return "error";
}

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("PEQC_LOG");
    if (!env)
      return LogLevel::Off;
    std::string s(env);
    if (s == "debug")
      return LogLevel::Debug;
    if (s == "info")
      return LogLevel::Info;
    return LogLevel::Off;
  }();
  return level;
}

bool log_enabled(LogLevel level) {
  return static_cast<int>(log_level()) >= static_cast<int>(level);
}

void log_line(LogLevel level, const std::string& msg) {
  if (!log_enabled(level))
    return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[peqc] " << msg << "\n";
}

} // namespace peq

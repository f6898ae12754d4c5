#pragma once

// Shared numeric types, the error type, and stderr logging.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace peq {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Floor division and the matching remainder. For d > 0 the remainder is
// always in [0, d), which is the semantics of '/' and '%' in programs.
Int floor_div(const Int& a, const Int& d);
Int floor_mod(const Int& a, const Int& d);
Int ceil_div(const Int& a, const Int& d);

class Error : public std::runtime_error {
public:
  enum class Kind {
    Parse,
    Validation,
    Eval,
    NonInjectiveRename,
    LengthMismatch,
    NotJointlyUnsat,
    Io,
    Usage,
    Internal,
  };

  Error(Kind kind, const std::string& message);
  Kind kind() const { return m_kind; }

private:
  Kind m_kind;
};

const char* error_kind_name(Error::Kind kind);

enum class LogLevel { Off = 0, Info = 1, Debug = 2 };

// Level comes from the PEQC_LOG environment variable (off/info/debug),
// read once per process. Messages go to stderr.
LogLevel log_level();
bool log_enabled(LogLevel level);
void log_line(LogLevel level, const std::string& msg);

} // namespace peq

#pragma once

#include <stdexcept>
#include <string>

namespace mage {

// Error taxonomy shared by the whole library. The kind determines the
// process exit code at the CLI boundary: config/data/shape problems exit
// with 2, numeric failures with 3.
enum class ErrorKind {
    Shape,      // tensor/graph dimension mismatch
    Data,       // invalid or inconsistent input data
    Parameter,  // invalid parameter value (p >= 1, k < 1, ...)
    Config,     // run-config problems (unknown keys, bad types)
    Io,         // file system failures
    Numeric,    // NaN/Inf or failed numeric invariant
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_shape(const std::string& msg) { throw Error(ErrorKind::Shape, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void throw_param(const std::string& msg) { throw Error(ErrorKind::Parameter, msg); }
[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorKind::Io, msg); }
[[noreturn]] inline void throw_numeric(const std::string& msg) { throw Error(ErrorKind::Numeric, msg); }

}  // namespace mage

#pragma once

#include <stdexcept>
#include <string>

namespace qneq {

/// Category of failure; the command-line tool maps each one to an exit code.
enum class ErrorKind { Config, Data, Numeric, Precondition };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

/// A caller violated an operation's documented precondition.
struct PreconditionError : Error {
  explicit PreconditionError(const std::string& what) : Error(ErrorKind::Precondition, what) {}
};

}  // namespace qneq

#pragma once

#include <stdexcept>
#include <string>

namespace thermolens {

// Base of every error raised by the library. `kind()` is a stable short tag
// used by the CLI's machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string &what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string &kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string &what) : Error("domain", what) {}
};

struct EmptyCollectionError : Error {
  EmptyCollectionError() : Error("empty_collection", "empty collection") {}
};

struct ZeroEnergyError : Error {
  ZeroEnergyError() : Error("zero_energy", "average energy is zero") {}
};

struct DegenerateError : Error {
  explicit DegenerateError(const std::string &what) : Error("degenerate", what) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string &what) : Error("convergence", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string &what) : Error("io", what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string &what) : Error("parse", what) {}
};

}  // namespace thermolens

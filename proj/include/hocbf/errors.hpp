#ifndef HOCBF_ERRORS_HPP
#define HOCBF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hocbf {

// Invalid scenario/config input (bad kinds, missing keys, out-of-range params).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Caller broke an interface contract (dimension mismatch, null callback).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Requested operation has no implementation for the given inputs.
class UnsupportedError : public std::logic_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::logic_error(what) {}
};

// Hard constraint set is empty at the queried state.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Simulated state left the representable range.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hocbf

#endif  // HOCBF_ERRORS_HPP

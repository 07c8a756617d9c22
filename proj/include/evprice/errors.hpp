#pragma once

#include <stdexcept>
#include <string>

namespace evprice {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (CLI exit code 3).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A memory/size guard tripped, e.g. the value-iteration state ceiling
/// (CLI exit code 4).
class ResourceGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evprice

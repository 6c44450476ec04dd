#pragma once

#include <stdexcept>
#include <string>

namespace sedm {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// An iterative or adaptive numerical procedure ran out of budget.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw DomainError(msg);
}

}  // namespace detail
}  // namespace sedm

#pragma once

#include <stdexcept>
#include <string>

namespace covstein {

/// An argument lies outside the domain of the operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A dimension for which a required constant is not available.
class UnsupportedDimension : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A model-parameter precondition of an exact formula or bound does not hold.
/// `inequality()` names the failing condition, e.g. "4*rho < n^(1/d)".
class ValidityError : public std::runtime_error {
 public:
  ValidityError(std::string inequality, const std::string& detail)
      : std::runtime_error("validity condition violated: " + inequality +
                           (detail.empty() ? "" : " (" + detail + ")")),
        inequality_(std::move(inequality)) {}

  const std::string& inequality() const noexcept { return inequality_; }

 private:
  std::string inequality_;
};

/// Quadrature failed to converge, a cancellation check tripped, or an
/// internal consistency check on a computed quantity failed.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double achieved_error = 0.0)
      : std::runtime_error(what), achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

}  // namespace covstein

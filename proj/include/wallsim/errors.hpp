#pragma once

#include <stdexcept>
#include <string>

namespace wallsim {

/// Raised when a quadrature or contour integral fails to reach its tolerance.
class NumericalFailure : public std::runtime_error {
public:
  explicit NumericalFailure(const std::string &what) : std::runtime_error(what) {}
};

/// Raised when a truncated verification has no row whose captured mass is
/// large enough to draw a conclusion from.
class InconclusiveResult : public std::runtime_error {
public:
  explicit InconclusiveResult(const std::string &what) : std::runtime_error(what) {}
};

} // namespace wallsim

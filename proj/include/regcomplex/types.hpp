#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace regcomplex {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Raised when a vector length does not match an operator or functional.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(const std::string& what, Index expected, Index given)
      : std::invalid_argument(what + ": expected length " + std::to_string(expected) +
                              ", got " + std::to_string(given)),
        expected_(expected),
        given_(given) {}

  Index expected() const { return expected_; }
  Index given() const { return given_; }

 private:
  Index expected_;
  Index given_;
};

inline void require_length(const char* what, const Vector& v, Index expected) {
  if (v.size() != expected) throw DimensionError(what, expected, v.size());
}

}  // namespace regcomplex

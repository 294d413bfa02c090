#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace abl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs, const std::string& where)
      : Error(where + ": dimension mismatch (" + std::to_string(lhs) + " vs " + std::to_string(rhs) + ")"),
        lhs_(lhs),
        rhs_(rhs) {}

  std::size_t lhs() const noexcept { return lhs_; }
  std::size_t rhs() const noexcept { return rhs_; }

 private:
  std::size_t lhs_;
  std::size_t rhs_;
};

/// A structural invariant (normalization, idempotence, completeness, ranges) was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The conditioning event of an ABL probability has (numerically) zero probability.
class ZeroDenominator : public Error {
 public:
  explicit ZeroDenominator(double denominator)
      : Error(describe(denominator)), denominator_(denominator) {}

  double denominator() const noexcept { return denominator_; }

 private:
  static std::string describe(double denominator) {
    std::ostringstream os;
    os << "ABL denominator " << denominator
       << " below threshold: post-selection unreachable given this measurement";
    return os.str();
  }

  double denominator_;
};

}  // namespace abl

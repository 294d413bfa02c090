#pragma once

// Exact small-dimension linear algebra for pure states, projectors and
// observables given as explicit spectral decompositions. Everything here is an
// immutable value once constructed; constructors validate and throw.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abl/errors.hpp"

namespace abl {

using Complex = std::complex<double>;

/// Elementwise tolerance for every structural invariant.
inline constexpr double kTolerance = 1e-12;
/// Squared-amplitude sums below this are treated as exactly zero.
inline constexpr double kNegligibleWeight = 1e-24;
inline constexpr std::size_t kMinDim = 2;
inline constexpr std::size_t kMaxDim = 16;

class StateVector {
 public:
  /// Throws InvalidArgument unless the amplitudes are finite, 2 <= dim <= 16,
  /// and the squared norm is 1 within kTolerance.
  explicit StateVector(std::vector<Complex> amplitudes, std::string label = {});

  /// Opt-in renormalizing constructor. Rejects (near-)zero vectors.
  static StateVector normalized(std::vector<Complex> amplitudes, std::string label = {});
  static StateVector basis(std::size_t dim, std::size_t index, std::string label = {});

  std::size_t dim() const noexcept { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
  const std::string& label() const noexcept { return label_; }

  StateVector with_label(std::string label) const;

 private:
  std::vector<Complex> amplitudes_;
  std::string label_;
};

/// Dense square complex matrix, row-major.
class Matrix {
 public:
  explicit Matrix(std::size_t dim);
  Matrix(std::size_t dim, std::vector<Complex> row_major);

  static Matrix identity(std::size_t dim);
  /// |x><y|
  static Matrix outer(std::span<const Complex> x, std::span<const Complex> y);

  std::size_t dim() const noexcept { return dim_; }
  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }
  std::span<const Complex> data() const noexcept { return data_; }

  Matrix adjoint() const;
  Complex trace() const;
  std::vector<Complex> apply(std::span<const Complex> x) const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
  friend Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
  friend Matrix operator*(const Matrix& lhs, const Matrix& rhs);

  /// max_ij |a_ij - b_ij|
  friend double max_abs_diff(const Matrix& a, const Matrix& b);

 private:
  std::size_t dim_;
  std::vector<Complex> data_;
};

/// Orthogonal projector: Hermitian and idempotent within kTolerance, rank >= 1.
class Projector {
 public:
  explicit Projector(Matrix matrix);

  /// |x><x|
  static Projector onto(const StateVector& x);
  /// Sum of |i><i| over the listed computational-basis indices.
  static Projector basis(std::size_t dim, std::span<const std::size_t> indices);

  std::size_t dim() const noexcept { return matrix_.dim(); }
  std::size_t rank() const noexcept { return rank_; }
  const Matrix& matrix() const noexcept { return matrix_; }

  /// For a rank-1 projector, the (phase-arbitrary) state it projects onto.
  StateVector rank_one_state() const;

 private:
  Matrix matrix_;
  std::size_t rank_;
};

struct Outcome {
  double eigenvalue;
  std::string label;
  Projector projector;
};

/// Complete orthogonal decomposition of the identity with labelled outcomes.
class Observable {
 public:
  Observable(std::string name, std::vector<Outcome> outcomes);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return outcomes_.front().projector.dim(); }
  std::size_t size() const noexcept { return outcomes_.size(); }
  std::span<const Outcome> outcomes() const noexcept { return outcomes_; }
  const Outcome& outcome(std::size_t i) const { return outcomes_.at(i); }

  /// Throws InvalidArgument on unknown label.
  std::size_t index_of(std::string_view label) const;
  bool has_label(std::string_view label) const noexcept;

 private:
  std::string name_;
  std::vector<Outcome> outcomes_;
};

class BlochDirection {
 public:
  /// theta in [0, pi], phi in [0, 2 pi).
  BlochDirection(double theta, double phi = 0.0);
  /// Degrees; phi is wrapped into [0, 360).
  static BlochDirection from_degrees(double theta_deg, double phi_deg = 0.0);
  /// Maps any unit vector (x, y, z) to its polar angles.
  static BlochDirection from_unit_vector(const std::array<double, 3>& v);

  double theta() const noexcept { return theta_; }
  double phi() const noexcept { return phi_; }
  std::array<double, 3> unit_vector() const noexcept;

 private:
  double theta_;
  double phi_;
};

/// Angle between two Bloch vectors, in [0, pi].
double bloch_angle(const BlochDirection& m, const BlochDirection& n);

/// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1> for up, its orthogonal complement for down.
StateVector spin_state(const BlochDirection& direction, bool up = true);

Complex inner_product(const StateVector& x, const StateVector& y);
/// <x| applied to an arbitrary (possibly unnormalized) vector.
Complex inner_product(const StateVector& x, std::span<const Complex> y);

struct Projection {
  std::vector<Complex> vector;
  double norm2;
};

/// Pi|x> together with <x|Pi|x>.
Projection apply_projector(const Projector& p, const StateVector& x);
/// <x|Pi|x>, clamped to [0, 1].
double born_probability(const StateVector& x, const Projector& p);

/// Two outcomes, eigenvalues +1 ("up") and -1 ("down").
Observable spin_observable(const BlochDirection& direction, std::string name = {});
/// {(1, "yes", Pi), (0, "no", I - Pi)}; "no" is omitted when Pi is the identity.
Observable projector_observable(const Projector& p, std::string name);

/// True when every projector of a commutes with every projector of b.
bool commute(const Observable& a, const Observable& b);

}  // namespace abl

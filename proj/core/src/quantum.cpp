#include "abl/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace abl {

namespace {

void check_dim(std::size_t dim, const char* what) {
  if (dim < kMinDim || dim > kMaxDim) {
    std::ostringstream os;
    os << what << ": dimension " << dim << " outside [" << kMinDim << ", " << kMaxDim << "]";
    throw InvalidArgument(os.str());
  }
}

void check_finite(std::span<const Complex> values, const char* what) {
  for (const auto& z : values) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw InvalidArgument(std::string(what) + ": non-finite component");
    }
  }
}

double squared_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(std::vector<Complex> amplitudes, std::string label)
    : amplitudes_(std::move(amplitudes)), label_(std::move(label)) {
  check_dim(amplitudes_.size(), "StateVector");
  check_finite(amplitudes_, "StateVector");
  const double n2 = squared_norm(amplitudes_);
  if (std::abs(n2 - 1.0) > kTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "StateVector: squared norm " << n2 << " differs from 1 by more than " << kTolerance;
    throw InvalidArgument(os.str());
  }
}

StateVector StateVector::normalized(std::vector<Complex> amplitudes, std::string label) {
  check_dim(amplitudes.size(), "StateVector");
  check_finite(amplitudes, "StateVector");
  const double n2 = squared_norm(amplitudes);
  if (n2 < kNegligibleWeight) throw InvalidArgument("StateVector: cannot normalize a zero vector");
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& z : amplitudes) z *= scale;
  return StateVector(std::move(amplitudes), std::move(label));
}

StateVector StateVector::basis(std::size_t dim, std::size_t index, std::string label) {
  check_dim(dim, "StateVector::basis");
  if (index >= dim) throw InvalidArgument("StateVector::basis: index out of range");
  std::vector<Complex> a(dim);
  a[index] = 1.0;
  return StateVector(std::move(a), std::move(label));
}

StateVector StateVector::with_label(std::string label) const {
  StateVector copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

Matrix::Matrix(std::size_t dim, std::vector<Complex> row_major) : dim_(dim), data_(std::move(row_major)) {
  if (data_.size() != dim * dim) throw DimensionMismatch(data_.size(), dim * dim, "Matrix");
}

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::outer(std::span<const Complex> x, std::span<const Complex> y) {
  if (x.size() != y.size()) throw DimensionMismatch(x.size(), y.size(), "Matrix::outer");
  Matrix m(x.size());
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t c = 0; c < y.size(); ++c) m(r, c) = x[r] * std::conj(y[c]);
  }
  return m;
}

Matrix Matrix::adjoint() const {
  Matrix m(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = 0; c < dim_; ++c) m(r, c) = std::conj((*this)(c, r));
  }
  return m;
}

Complex Matrix::trace() const {
  Complex t{};
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

std::vector<Complex> Matrix::apply(std::span<const Complex> x) const {
  if (x.size() != dim_) throw DimensionMismatch(dim_, x.size(), "Matrix::apply");
  std::vector<Complex> y(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    Complex acc{};
    for (std::size_t c = 0; c < dim_; ++c) acc += (*this)(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  if (rhs.dim_ != dim_) throw DimensionMismatch(dim_, rhs.dim_, "Matrix::operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  if (rhs.dim_ != dim_) throw DimensionMismatch(dim_, rhs.dim_, "Matrix::operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.dim_ != rhs.dim_) throw DimensionMismatch(lhs.dim_, rhs.dim_, "Matrix::operator*");
  const std::size_t n = lhs.dim_;
  Matrix m(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex a = lhs(r, k);
      if (a == Complex{}) continue;
      for (std::size_t c = 0; c < n; ++c) m(r, c) += a * rhs(k, c);
    }
  }
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.dim_ != b.dim_) throw DimensionMismatch(a.dim_, b.dim_, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data_.size(); ++i) worst = std::max(worst, std::abs(a.data_[i] - b.data_[i]));
  return worst;
}

// ---------------------------------------------------------------------------
// Projector

Projector::Projector(Matrix matrix) : matrix_(std::move(matrix)), rank_(0) {
  check_dim(matrix_.dim(), "Projector");
  check_finite(matrix_.data(), "Projector");
  if (max_abs_diff(matrix_, matrix_.adjoint()) > kTolerance) {
    throw InvalidArgument("Projector: matrix is not Hermitian");
  }
  if (max_abs_diff(matrix_ * matrix_, matrix_) > kTolerance) {
    throw InvalidArgument("Projector: matrix is not idempotent");
  }
  // Trace of an orthogonal projector is its rank.
  const double tr = matrix_.trace().real();
  rank_ = static_cast<std::size_t>(std::llround(tr));
  if (rank_ == 0) throw InvalidArgument("Projector: rank must be positive");
}

Projector Projector::onto(const StateVector& x) { return Projector(Matrix::outer(x.amplitudes(), x.amplitudes())); }

Projector Projector::basis(std::size_t dim, std::span<const std::size_t> indices) {
  check_dim(dim, "Projector::basis");
  std::set<std::size_t> seen;
  Matrix m(dim);
  for (const auto i : indices) {
    if (i >= dim) throw InvalidArgument("Projector::basis: index " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second) throw InvalidArgument("Projector::basis: duplicate index " + std::to_string(i));
    m(i, i) = 1.0;
  }
  return Projector(std::move(m));
}

StateVector Projector::rank_one_state() const {
  if (rank_ != 1) throw InvalidArgument("Projector::rank_one_state: rank is " + std::to_string(rank_));
  // Any nonzero column of |v><v| is v scaled by conj(v_c); pick the largest.
  const std::size_t n = dim();
  std::size_t best = 0;
  double best_norm = -1.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double d = matrix_(c, c).real();
    if (d > best_norm) {
      best_norm = d;
      best = c;
    }
  }
  std::vector<Complex> v(n);
  for (std::size_t r = 0; r < n; ++r) v[r] = matrix_(r, best);
  return StateVector::normalized(std::move(v));
}

// ---------------------------------------------------------------------------
// Observable

Observable::Observable(std::string name, std::vector<Outcome> outcomes)
    : name_(std::move(name)), outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw InvalidArgument("Observable '" + name_ + "': no outcomes");
  const std::size_t n = outcomes_.front().projector.dim();
  std::set<std::string, std::less<>> labels;
  Matrix total(n);
  for (const auto& o : outcomes_) {
    if (o.projector.dim() != n) throw DimensionMismatch(n, o.projector.dim(), "Observable '" + name_ + "'");
    if (!std::isfinite(o.eigenvalue)) throw InvalidArgument("Observable '" + name_ + "': non-finite eigenvalue");
    if (o.label.empty()) throw InvalidArgument("Observable '" + name_ + "': empty outcome label");
    if (!labels.insert(o.label).second) {
      throw InvalidArgument("Observable '" + name_ + "': duplicate outcome label '" + o.label + "'");
    }
    total += o.projector.matrix();
  }
  if (max_abs_diff(total, Matrix::identity(n)) > kTolerance) {
    throw InvalidArgument("Observable '" + name_ + "': projectors do not sum to the identity");
  }
  const Matrix zero(n);
  for (std::size_t j = 0; j < outcomes_.size(); ++j) {
    for (std::size_t k = j + 1; k < outcomes_.size(); ++k) {
      if (max_abs_diff(outcomes_[j].projector.matrix() * outcomes_[k].projector.matrix(), zero) > kTolerance) {
        throw InvalidArgument("Observable '" + name_ + "': outcomes '" + outcomes_[j].label + "' and '" +
                              outcomes_[k].label + "' are not orthogonal");
      }
    }
  }
}

std::size_t Observable::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    if (outcomes_[i].label == label) return i;
  }
  throw InvalidArgument("Observable '" + name_ + "': unknown outcome label '" + std::string(label) + "'");
}

bool Observable::has_label(std::string_view label) const noexcept {
  return std::any_of(outcomes_.begin(), outcomes_.end(), [&](const Outcome& o) { return o.label == label; });
}

// ---------------------------------------------------------------------------
// BlochDirection

BlochDirection::BlochDirection(double theta, double phi) : theta_(theta), phi_(phi) {
  if (!std::isfinite(theta) || theta < 0.0 || theta > std::numbers::pi) {
    throw InvalidArgument("BlochDirection: theta outside [0, pi]");
  }
  if (!std::isfinite(phi) || phi < 0.0 || phi >= 2.0 * std::numbers::pi) {
    throw InvalidArgument("BlochDirection: phi outside [0, 2 pi)");
  }
}

BlochDirection BlochDirection::from_degrees(double theta_deg, double phi_deg) {
  constexpr double kDegree = std::numbers::pi / 180.0;
  if (!std::isfinite(phi_deg)) throw InvalidArgument("BlochDirection: non-finite phi");
  double wrapped = std::fmod(phi_deg, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  double phi = wrapped * kDegree;
  if (phi >= 2.0 * std::numbers::pi) phi = 0.0;
  return BlochDirection(theta_deg * kDegree, phi);
}

BlochDirection BlochDirection::from_unit_vector(const std::array<double, 3>& v) {
  const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(r > 0.0)) throw InvalidArgument("BlochDirection: zero vector");
  const double theta = std::acos(std::clamp(v[2] / r, -1.0, 1.0));
  double phi = std::atan2(v[1], v[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  if (phi >= 2.0 * std::numbers::pi) phi = 0.0;
  return BlochDirection(theta, phi);
}

std::array<double, 3> BlochDirection::unit_vector() const noexcept {
  return {std::sin(theta_) * std::cos(phi_), std::sin(theta_) * std::sin(phi_), std::cos(theta_)};
}

double bloch_angle(const BlochDirection& m, const BlochDirection& n) {
  const auto u = m.unit_vector();
  const auto v = n.unit_vector();
  const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

StateVector spin_state(const BlochDirection& direction, bool up) {
  const double c = std::cos(direction.theta() / 2.0);
  const double s = std::sin(direction.theta() / 2.0);
  const Complex phase = std::polar(1.0, direction.phi());
  if (up) return StateVector::normalized({Complex{c}, phase * s}, "up");
  return StateVector::normalized({Complex{s}, -phase * c}, "down");
}

// ---------------------------------------------------------------------------
// Free operations

Complex inner_product(const StateVector& x, std::span<const Complex> y) {
  if (x.dim() != y.size()) throw DimensionMismatch(x.dim(), y.size(), "inner_product");
  Complex acc{};
  for (std::size_t i = 0; i < y.size(); ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

Complex inner_product(const StateVector& x, const StateVector& y) { return inner_product(x, y.amplitudes()); }

Projection apply_projector(const Projector& p, const StateVector& x) {
  if (p.dim() != x.dim()) throw DimensionMismatch(p.dim(), x.dim(), "apply_projector");
  Projection out{p.matrix().apply(x.amplitudes()), 0.0};
  out.norm2 = squared_norm(out.vector);
  return out;
}

double born_probability(const StateVector& x, const Projector& p) {
  return std::clamp(apply_projector(p, x).norm2, 0.0, 1.0);
}

Observable spin_observable(const BlochDirection& direction, std::string name) {
  if (name.empty()) {
    std::ostringstream os;
    os.precision(6);
    os << "sigma(theta=" << direction.theta() << ",phi=" << direction.phi() << ")";
    name = os.str();
  }
  std::vector<Outcome> outcomes;
  outcomes.push_back({+1.0, "up", Projector::onto(spin_state(direction, true))});
  outcomes.push_back({-1.0, "down", Projector::onto(spin_state(direction, false))});
  return Observable(std::move(name), std::move(outcomes));
}

Observable projector_observable(const Projector& p, std::string name) {
  std::vector<Outcome> outcomes;
  outcomes.push_back({1.0, "yes", p});
  if (p.rank() < p.dim()) {
    outcomes.push_back({0.0, "no", Projector(Matrix::identity(p.dim()) - p.matrix())});
  }
  return Observable(std::move(name), std::move(outcomes));
}

bool commute(const Observable& a, const Observable& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim(), "commute");
  for (const auto& x : a.outcomes()) {
    for (const auto& y : b.outcomes()) {
      const Matrix& p = x.projector.matrix();
      const Matrix& q = y.projector.matrix();
      if (max_abs_diff(p * q, q * p) > kTolerance) return false;
    }
  }
  return true;
}

}  // namespace abl

#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Core>

namespace mixlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Point clouds are d x n, one point per column.
using Points = Eigen::MatrixXd;

/// Orthogonal projection onto span{y_1, ..., y_k} together with the bounded
/// Lyapunov function H(x) = (1 + |G(x)|^2)^{-1/2} built from it.
class SubspaceProjector {
 public:
  static constexpr double kOrthonormalTolerance = 1e-10;

  /// `basis` is d x k with orthonormal columns, k >= 3. Throws StructuralError.
  explicit SubspaceProjector(Matrix basis);

  /// First k standard basis vectors of R^d.
  static SubspaceProjector coordinate(std::size_t d, std::size_t k);

  /// Orthonormal frame whose first vector is `direction / |direction|`.
  static SubspaceProjector aligned_with(const Vector& direction, std::size_t k);

  std::size_t dim() const { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }

  /// Coordinates of G(x) in the basis, i.e. (<y_j, x>)_j.
  Vector coefficients(const Vector& x) const { return basis_.transpose() * x; }
  /// G(x) as a vector in R^d.
  Vector project(const Vector& x) const { return basis_ * coefficients(x); }
  double projected_norm_sq(const Vector& x) const { return coefficients(x).squaredNorm(); }

  double lyapunov(const Vector& x) const;
  /// H evaluated at every column.
  Eigen::ArrayXd lyapunov(const Points& xs) const;

 private:
  Matrix basis_;
};

/// H as a function of |G|^2.
inline double lyapunov_from_norm_sq(double g2) { return 1.0 / std::sqrt(1.0 + g2); }

}  // namespace mixlab

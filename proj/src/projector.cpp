#include "mixlab/projector.hpp"

#include <string>

#include <Eigen/QR>

#include "mixlab/errors.hpp"

namespace mixlab {

SubspaceProjector::SubspaceProjector(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.cols() < 3)
    throw StructuralError("subspace basis needs at least 3 vectors, got " +
                          std::to_string(basis_.cols()));
  if (basis_.cols() > basis_.rows())
    throw StructuralError("subspace basis has more vectors than the ambient dimension");
  const Matrix gram = basis_.transpose() * basis_;
  const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (!(err <= kOrthonormalTolerance))
    throw StructuralError("subspace basis is not orthonormal (max |B^T B - I| = " +
                          std::to_string(err) + ")");
}

SubspaceProjector SubspaceProjector::coordinate(std::size_t d, std::size_t k) {
  if (k > d) throw StructuralError("subspace rank exceeds dimension");
  return SubspaceProjector(Matrix::Identity(static_cast<Eigen::Index>(d),
                                            static_cast<Eigen::Index>(k)));
}

SubspaceProjector SubspaceProjector::aligned_with(const Vector& direction, std::size_t k) {
  const auto d = direction.size();
  if (static_cast<Eigen::Index>(k) > d) throw StructuralError("subspace rank exceeds dimension");
  const double norm = direction.norm();
  if (!(norm > 0.0)) throw StructuralError("cannot align a subspace with the zero vector");

  Matrix seed(d, d);
  seed.col(0) = direction / norm;
  seed.rightCols(d - 1) = Matrix::Identity(d, d).leftCols(d - 1);
  Eigen::HouseholderQR<Matrix> qr(seed);
  Matrix q = qr.householderQ() * Matrix::Identity(d, static_cast<Eigen::Index>(k));
  if (q.col(0).dot(direction) < 0.0) q.col(0) = -q.col(0);
  return SubspaceProjector(std::move(q));
}

double SubspaceProjector::lyapunov(const Vector& x) const {
  return lyapunov_from_norm_sq(projected_norm_sq(x));
}

Eigen::ArrayXd SubspaceProjector::lyapunov(const Points& xs) const {
  const Matrix coeffs = basis_.transpose() * xs;
  return (1.0 + coeffs.colwise().squaredNorm().array()).rsqrt().transpose();
}

}  // namespace mixlab

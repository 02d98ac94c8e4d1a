#include "dmmse/linalg.hpp"

#include "dmmse/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace dmmse {

namespace {

// LLT is trusted only when its reciprocal condition estimate is comfortably
// above the pseudo-inverse cut.
constexpr double kCholeskyMinRcond = 1e-12;

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tolerance;
}

Matrix symmetric_pseudo_inverse(const Matrix& s, double relative_tolerance) {
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s));
  const Vector& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  if (largest == 0.0) return Matrix::Zero(s.rows(), s.cols());
  const double cut = relative_tolerance * largest;
  Vector inv = Vector::Zero(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) > cut) inv(k) = 1.0 / values(k);
  }
  const Matrix& v = eig.eigenvectors();
  return v * inv.asDiagonal() * v.transpose();
}

Gain conditioning_gain(const Matrix& prior_cov, const Matrix& observation, const Matrix& noise) {
  const Eigen::Index p = prior_cov.rows();
  if (observation.rows() == 0) return {Matrix::Zero(p, 0), false};
  const Matrix cross = prior_cov * observation.transpose();
  const Matrix innovation = symmetrize(observation * cross + noise);

  Eigen::LLT<Matrix> llt(innovation);
  if (llt.info() == Eigen::Success && llt.rcond() > kCholeskyMinRcond) {
    // gain = cross * S^-1  <=>  S gain' = cross'
    return {llt.solve(cross.transpose()).transpose(), false};
  }
  return {cross * symmetric_pseudo_inverse(innovation), true};
}

Matrix condition_covariance(const Matrix& m) {
  Matrix sym = symmetrize(m);
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& values = eig.eigenvalues();
  const double smallest = values.minCoeff();
  if (smallest >= 0.0) return sym;
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (smallest < -kCovarianceFloor * scale) {
    throw Error(ErrorKind::build_failure,
                "covariance has a negative eigenvalue " + std::to_string(smallest));
  }
  const Vector clipped = values.cwiseMax(0.0);
  const Matrix& v = eig.eigenvectors();
  return symmetrize(v * clipped.asDiagonal() * v.transpose());
}

Matrix block_diagonal(std::span<const Matrix> blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Matrix psd_factor(const Matrix& cov) {
  if (cov.size() == 0) return cov;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(cov));
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

}  // namespace dmmse

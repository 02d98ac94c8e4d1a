#pragma once

#include <Eigen/Dense>

#include <span>

namespace dmmse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kPseudoInverseTolerance = 1e-10;
/// Negative covariance eigenvalues down to -kCovarianceFloor (relative to the
/// largest eigenvalue, or absolute below unit scale) are clipped to zero.
inline constexpr double kCovarianceFloor = 1e-10;

struct Gain {
  Matrix matrix;
  bool pseudo_inverse = false;
};

/// Linear MMSE gain prior_cov * H' * (H prior_cov H' + noise)^-1. Falls back
/// to a pseudo-inverse when the innovation covariance is singular.
Gain conditioning_gain(const Matrix& prior_cov, const Matrix& observation,
                       const Matrix& noise);

/// Moore-Penrose inverse of a symmetric positive semidefinite matrix.
Matrix symmetric_pseudo_inverse(const Matrix& s, double relative_tolerance = kPseudoInverseTolerance);

Matrix symmetrize(const Matrix& m);

/// Symmetrizes and clips roundoff-level negative eigenvalues. Throws
/// build_failure when the matrix is materially indefinite.
Matrix condition_covariance(const Matrix& m);

Matrix block_diagonal(std::span<const Matrix> blocks);

/// Symmetric square root factor F with F F' = cov, for PSD cov.
Matrix psd_factor(const Matrix& cov);

bool is_symmetric(const Matrix& m, double tolerance);

}  // namespace dmmse

#pragma once

#include <Eigen/Dense>

#include "curplus/rng.hpp"
#include "curplus/types.hpp"

namespace curplus::test {

inline Matrix random_matrix(Index n, Index m, Rng& rng) {
  Matrix M(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) M(i, j) = rng.normal();
  return M;
}

inline Matrix random_orthonormal(Index n, Index k, Rng& rng) {
  const Matrix G = random_matrix(n, k, rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  return qr.householderQ() * Matrix::Identity(n, k);
}

/// Sine of the largest principal angle between the column spaces of two
/// orthonormal bases: |(I - Q2 Q2^T) Q1|_2.
inline double subspace_angle_sin(const Matrix& Q1, const Matrix& Q2) {
  const Matrix residual = Q1 - Q2 * (Q2.transpose() * Q1);
  Eigen::BDCSVD<Matrix> svd(residual);
  return svd.singularValues()(0);
}

}  // namespace curplus::test

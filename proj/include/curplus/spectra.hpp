#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "curplus/rng.hpp"
#include "curplus/types.hpp"

namespace curplus {

/// Orthonormal basis for a top-r invariant subspace, with the matching
/// eigenvalues in descending order (clamped at zero).
struct TruncatedBasis {
  Matrix Q;
  Vector eigvals;
};

/// Leading singular triplets. For truncated decompositions `sigma_next`
/// carries the (r+1)-th singular value, the spectral norm of the discarded
/// tail; it is zero for full decompositions.
struct SvdResult {
  Matrix U;
  Vector sigma;
  Matrix V;
  double sigma_next = 0.0;
};

/// Power-iteration output. `value` is the best estimate of the spectral
/// norm; `converged` is false if max_iters ran out first. `history` holds
/// the successive Rayleigh quotients (of the squared operator).
struct SpectralEstimate {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
  std::vector<double> history;
};

inline double machine_eps() { return std::numeric_limits<double>::epsilon(); }

/// Top-r eigenvectors of X X^T, always eigendecomposed on the small side.
/// For a tall sample (d <= n) that is the d x d Gram matrix X^T X, whose
/// eigenvectors w map back as X w / |X w|; a wide sample (every row drawn,
/// d > n) eigendecomposes the n x n outer product directly. Eigenvalues
/// below rows(X) * eps * lambda_max count as zero; if fewer than r survive
/// the sample is rank-deficient.
inline TruncatedBasis top_r_left_eigvecs(const Matrix& X, Index r) {
  const Index n = X.rows();
  const Index d = X.cols();
  if (r < 1 || r > std::min(n, d))
    throw std::invalid_argument(
        "top_r_left_eigvecs: need 1 <= r <= min(d, n)");
  if (!all_finite(X))
    throw std::invalid_argument("top_r_left_eigvecs: non-finite input");

  const bool gram_route = d <= n;
  const Matrix small = gram_route ? Matrix(X.transpose() * X)
                                  : Matrix(X * X.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(small);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("top_r_left_eigvecs: eigendecomposition failed");

  // Eigen returns ascending order; walk from the back.
  const Index k = small.rows();
  const Vector& evals = es.eigenvalues();
  const double lambda_max = std::max(evals(k - 1), 0.0);
  const double cutoff = static_cast<double>(n) * machine_eps() * lambda_max;

  Index usable = 0;
  while (usable < k && evals(k - 1 - usable) > cutoff) ++usable;
  if (usable < r)
    throw RankDeficientError(
        "rank-deficient sample: only " + std::to_string(usable) + " of " +
        std::to_string(r) + " requested directions above cutoff " +
        std::to_string(cutoff));

  TruncatedBasis basis;
  basis.Q.resize(n, r);
  basis.eigvals.resize(r);
  for (Index idx = 0; idx < r; ++idx) {
    const Index src = k - 1 - idx;
    basis.eigvals(idx) = std::max(evals(src), 0.0);
    if (gram_route) {
      Vector mapped = X * es.eigenvectors().col(src);
      basis.Q.col(idx) = mapped / mapped.norm();
    } else {
      basis.Q.col(idx) = es.eigenvectors().col(src);
    }
  }
  return basis;
}

/// Thin SVD with all min(n, m) triplets. sigma_next is zero.
inline SvdResult thin_svd(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV(), 0.0};
}

/// First r singular triplets plus the (r+1)-th singular value.
inline SvdResult truncated_svd(const Matrix& M, Index r) {
  if (r < 1 || r >= std::min(M.rows(), M.cols()))
    throw std::invalid_argument("truncated_svd: need 1 <= r < min(n, m)");
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out;
  out.U = svd.matrixU().leftCols(r);
  out.sigma = svd.singularValues().head(r);
  out.V = svd.matrixV().leftCols(r);
  out.sigma_next = svd.singularValues()(r);
  return out;
}

namespace detail {

/// Power iteration for the largest singular value of a linear operator,
/// driven through callables for y = Op x and x = Op^T y. The Rayleigh
/// quotient of Op^T Op is nondecreasing across iterations; convergence is
/// declared when successive quotients agree to `tol` relative.
template <class Apply, class ApplyT>
SpectralEstimate power_iteration_norm(Index cols, Apply&& apply,
                                      ApplyT&& apply_t, double tol,
                                      int max_iters) {
  // Deterministic start: normalized all-ones plus a canonical perturbation.
  Vector x = Vector::Ones(cols);
  x(0) += 0.5;
  x.normalize();

  SpectralEstimate est;
  bool restarted = false;
  double quotient = 0.0;
  double prev = -1.0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector y = apply(x);
    quotient = y.squaredNorm();  // Rayleigh quotient of Op^T Op at unit x
    est.history.push_back(quotient);
    est.iterations = it + 1;
    if (prev >= 0.0 &&
        std::abs(quotient - prev) <= tol * std::max(quotient, 1e-300)) {
      // A vanishing quotient may mean the start vector was unlucky; retry
      // once from a seeded pseudorandom direction before accepting zero.
      if (quotient <= 1e-28 * std::max(1.0, prev) && !restarted) {
        restarted = true;
        Rng rng(0x5eedULL);
        for (Index i = 0; i < cols; ++i) x(i) = rng.normal();
        x.normalize();
        prev = -1.0;
        continue;
      }
      est.converged = true;
      est.value = std::sqrt(std::max(quotient, 0.0));
      return est;
    }
    prev = quotient;
    Vector next = apply_t(y);
    const double norm = next.norm();
    if (norm == 0.0) {
      // Operator annihilates the iterate: norm estimate is sqrt(quotient).
      est.converged = true;
      est.value = std::sqrt(std::max(quotient, 0.0));
      return est;
    }
    x = next / norm;
  }
  est.converged = false;
  est.value = std::sqrt(std::max(quotient, 0.0));
  return est;
}

}  // namespace detail

/// Spectral norm of M - L * C * R_t^T without forming the difference:
/// matvecs are evaluated factor by factor, y = M x - L (C (R_t^T x)).
inline SpectralEstimate spectral_norm_diff(const Matrix& M, const Matrix& L,
                                           const Matrix& C, const Matrix& R_t,
                                           double tol = 1e-8,
                                           int max_iters = 1000) {
  if (L.rows() != M.rows() || R_t.rows() != M.cols() ||
      C.rows() != L.cols() || C.cols() != R_t.cols())
    throw std::invalid_argument("spectral_norm_diff: factor shape mismatch");
  auto apply = [&](const Vector& x) -> Vector {
    return M * x - L * (C * (R_t.transpose() * x));
  };
  auto apply_t = [&](const Vector& y) -> Vector {
    return M.transpose() * y - R_t * (C.transpose() * (L.transpose() * y));
  };
  return detail::power_iteration_norm(M.cols(), apply, apply_t, tol,
                                      max_iters);
}

inline SpectralEstimate spectral_norm_diff(const Matrix& M,
                                           const FactoredLowRank& approx,
                                           double tol = 1e-8,
                                           int max_iters = 1000) {
  return spectral_norm_diff(M, approx.U, approx.Z, approx.V, tol, max_iters);
}

/// Spectral norm of M itself (difference against the zero approximation).
inline SpectralEstimate spectral_norm(const Matrix& M, double tol = 1e-8,
                                      int max_iters = 1000) {
  auto apply = [&](const Vector& x) -> Vector { return M * x; };
  auto apply_t = [&](const Vector& y) -> Vector { return M.transpose() * y; };
  return detail::power_iteration_norm(M.cols(), apply, apply_t, tol,
                                      max_iters);
}

/// Moore-Penrose pseudoinverse via SVD, zeroing singular values at or below
/// rcond * sigma_max. rcond < 0 selects the default max(n, m) * eps.
inline Matrix pseudoinverse(const Matrix& X, double rcond = -1.0) {
  if (!all_finite(X))
    throw std::invalid_argument("pseudoinverse: non-finite input");
  if (rcond < 0.0)
    rcond = static_cast<double>(std::max(X.rows(), X.cols())) * machine_eps();
  const SvdResult svd = thin_svd(X);
  const double sigma_max = svd.sigma.size() ? svd.sigma(0) : 0.0;
  const double cutoff = rcond * sigma_max;
  Vector inv = Vector::Zero(svd.sigma.size());
  for (Index k = 0; k < svd.sigma.size(); ++k)
    if (svd.sigma(k) > cutoff) inv(k) = 1.0 / svd.sigma(k);
  return svd.V * inv.asDiagonal() * svd.U.transpose();
}

}  // namespace curplus

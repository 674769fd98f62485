#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "curplus/baselines.hpp"
#include "curplus/solver.hpp"
#include "curplus/spectra.hpp"
#include "curplus/types.hpp"

namespace curplus {

/// The theory-side quantities of one matrix at rank r.
struct IncoherenceReport {
  double mu_r = 0.0;            // incoherence of the top-r singular subspaces
  double mu_hat_r = 0.0;        // same measure on sampled-column/row bases
  double mu_eta = 0.0;          // spectrum-weighted incoherence
  double numerical_rank = 0.0;  // soft rank at the chosen eta
  double eta = 0.0;
};

namespace detail {

// max over rows of (dim / scale) * |row|^2, the shared shape of every
// incoherence measure.
inline double max_scaled_row_norm(const Matrix& Q, double scale) {
  const double dim = static_cast<double>(Q.rows());
  return (dim / scale) * Q.rowwise().squaredNorm().maxCoeff();
}

// Definitional bounds 1 <= mu <= max(n, m) / r, checked on every result.
inline double checked_incoherence(double mu, Index n, Index m, Index r) {
  const double upper = static_cast<double>(std::max(n, m)) /
                       static_cast<double>(r);
  if (mu < 1.0 - 1e-9 || mu > upper * (1.0 + 1e-9))
    throw std::runtime_error(
        "incoherence outside its definitional bounds: mu = " +
        std::to_string(mu) + ", bound = " + std::to_string(upper));
  return mu;
}

}  // namespace detail

/// Incoherence of the top-r left/right singular subspaces of M:
///   mu(r) = max( max_i (n/r) |row_i(U_1)|^2, max_i (m/r) |row_i(V_1)|^2 ).
/// Always lies in [1, max(n, m) / r].
inline double incoherence_mu(const Matrix& M, Index r) {
  if (r < 1 || r > std::min(M.rows(), M.cols()))
    throw std::invalid_argument("incoherence_mu: rank out of range");
  const SvdResult svd = thin_svd(M);
  const double cutoff = static_cast<double>(std::max(M.rows(), M.cols())) *
                        machine_eps() * svd.sigma(0);
  if (svd.sigma(r - 1) <= cutoff)
    throw std::invalid_argument(
        "incoherence_mu: r = " + std::to_string(r) +
        " exceeds the numerical rank of the matrix");
  const double scale = static_cast<double>(r);
  const double mu = std::max(
      detail::max_scaled_row_norm(svd.U.leftCols(r), scale),
      detail::max_scaled_row_norm(svd.V.leftCols(r), scale));
  return detail::checked_incoherence(mu, M.rows(), M.cols(), r);
}

/// The same measure evaluated on explicit orthonormal bases.
inline double incoherence_mu_hat(const Matrix& U_hat, const Matrix& V_hat) {
  if (U_hat.cols() != V_hat.cols())
    throw std::invalid_argument("incoherence_mu_hat: rank mismatch");
  const double scale = static_cast<double>(U_hat.cols());
  const double mu = std::max(detail::max_scaled_row_norm(U_hat, scale),
                             detail::max_scaled_row_norm(V_hat, scale));
  return detail::checked_incoherence(mu, U_hat.rows(), V_hat.rows(),
                                     U_hat.cols());
}

/// Soft rank r(M, eta) = sum_i sigma_i^2 / (sigma_i^2 + m n eta). At eta = 0
/// this counts the nonzero singular values.
inline double numerical_rank(const Vector& sigma, double eta, Index n,
                             Index m) {
  if (eta < 0.0)
    throw std::invalid_argument("numerical_rank: eta must be >= 0");
  const double mn = static_cast<double>(n) * static_cast<double>(m);
  double sum = 0.0;
  for (Index i = 0; i < sigma.size(); ++i) {
    const double s2 = sigma(i) * sigma(i);
    if (s2 > 0.0) sum += s2 / (s2 + mn * eta);
  }
  return sum;
}

/// Spectrum-weighted incoherence mu(eta). The default (normalized) reading
/// weights each singular direction by sigma_j^2 / (sigma_j^2 + m n eta),
/// under which mu(eta) >= 1 always holds; the raw reading weights by
/// sigma_j^2 alone.
inline double incoherence_mu_eta(const Matrix& M, double eta,
                                 bool normalized = true) {
  if (eta <= 0.0)
    throw std::invalid_argument("incoherence_mu_eta: eta must be > 0");
  const SvdResult svd = thin_svd(M);
  const double mn =
      static_cast<double>(M.rows()) * static_cast<double>(M.cols());
  const Index k = svd.sigma.size();
  Vector weights(k);
  double soft_rank = 0.0;
  for (Index j = 0; j < k; ++j) {
    const double s2 = svd.sigma(j) * svd.sigma(j);
    const double ratio = s2 > 0.0 ? s2 / (s2 + mn * eta) : 0.0;
    soft_rank += ratio;
    weights(j) = normalized ? ratio : s2;
  }
  const Vector u_scores = svd.U.cwiseAbs2() * weights;  // per-row weighted norms
  const Vector v_scores = svd.V.cwiseAbs2() * weights;
  const double u_term =
      static_cast<double>(M.rows()) / soft_rank * u_scores.maxCoeff();
  const double v_term =
      static_cast<double>(M.cols()) / soft_rank * v_scores.maxCoeff();
  return std::max(u_term, v_term);
}

/// Smallest eigenvalue of the explicit r^2 x r^2 regression Hessian; the
/// strong-convexity constant of the core-matrix fit.
inline double hessian_min_eig(const ObservationSet& obs, const Matrix& U_hat,
                              const Matrix& V_hat) {
  const Index r = U_hat.cols();
  if (r > 50)
    throw std::invalid_argument(
        "hessian_min_eig: r > 50 makes the dense eigensolve impractical");
  const Matrix H = assemble_hessian(obs, U_hat, V_hat);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Convenience bundle: mu(r), mu(eta), soft rank at eta (default
/// eta = sigma_r^2 / (m n)) plus mu_hat left zero for the caller to fill
/// when sampled bases exist.
inline IncoherenceReport incoherence_report(
    const Matrix& M, Index r, std::optional<double> eta = std::nullopt,
    bool normalized = true) {
  IncoherenceReport rep;
  const SvdResult svd = thin_svd(M);
  const double mn =
      static_cast<double>(M.rows()) * static_cast<double>(M.cols());
  rep.eta = eta.value_or(svd.sigma(r - 1) * svd.sigma(r - 1) / mn);
  rep.mu_r = incoherence_mu(M, r);
  rep.numerical_rank = numerical_rank(svd.sigma, rep.eta, M.rows(), M.cols());
  rep.mu_eta = incoherence_mu_eta(M, rep.eta, normalized);
  return rep;
}

/// Approximation quality of a factored product L * C * R_t^T against M.
struct ErrorMetrics {
  std::optional<double> ell_s;  // spectral error over sigma_{r+1}
  std::optional<double> ell_F;  // Frobenius error over the tail norm
  double abs_spectral = 0.0;
  double abs_frobenius = 0.0;
  bool spectral_converged = true;
};

/// |M - L C R_t^T|_F via the trace expansion
///   |M|_F^2 - 2 <L^T M R_t, C> + tr((L^T L) C (R_t^T R_t) C^T),
/// which never materializes the difference. Accurate to about
/// sqrt(eps) * |M|_F absolute; exact-recovery tests should compare densely.
inline double frobenius_norm_diff(const Matrix& M, const Matrix& L,
                                  const Matrix& C, const Matrix& R_t) {
  const Matrix cross = L.transpose() * M * R_t;  // k x l
  const double cross_term = (cross.array() * C.array()).sum();
  const Matrix gl = L.transpose() * L;
  const Matrix gr = R_t.transpose() * R_t;
  const double approx_sq = (C.transpose() * gl * C * gr).trace();
  const double diff_sq = M.squaredNorm() - 2.0 * cross_term + approx_sq;
  return std::sqrt(std::max(diff_sq, 0.0));
}

inline double frobenius_norm_diff(const Matrix& M,
                                  const FactoredLowRank& approx) {
  return frobenius_norm_diff(M, approx.U, approx.Z, approx.V);
}

namespace detail {

inline ErrorMetrics error_metrics_impl(const Matrix& M, const Matrix& L,
                                       const Matrix& C, const Matrix& R_t,
                                       Index r, const Vector& sigma) {
  if (r < 1 || r >= std::min(M.rows(), M.cols()))
    throw std::invalid_argument("error_metrics: need 1 <= r < min(n, m)");
  ErrorMetrics out;
  // Tighter than the power-iteration default: these numerators are scored
  // against dense oracles at 1e-8 relative, and the successive-quotient
  // stopping rule lags the true error by a small factor.
  const SpectralEstimate spec = spectral_norm_diff(M, L, C, R_t, 1e-12, 5000);
  out.abs_spectral = spec.value;
  out.spectral_converged = spec.converged;
  out.abs_frobenius = frobenius_norm_diff(M, L, C, R_t);

  const double sigma_next = sigma(r);
  const double tail_frob =
      std::sqrt(sigma.tail(sigma.size() - r).squaredNorm());
  const double floor = 1e-14 * sigma(0);
  if (sigma_next > floor) out.ell_s = out.abs_spectral / sigma_next;
  if (tail_frob > floor) out.ell_F = out.abs_frobenius / tail_frob;
  return out;
}

}  // namespace detail

/// Relative errors against the best rank-r approximation:
///   ell_s = |M - Mhat|_2 / sigma_{r+1},  ell_F = |M - Mhat|_F / tail_F.
/// When M is (numerically) rank <= r the denominators vanish and the
/// relative fields stay unset; absolute errors are always filled.
inline ErrorMetrics error_metrics(const Matrix& M,
                                  const FactoredLowRank& approx, Index r) {
  return detail::error_metrics_impl(M, approx.U, approx.Z, approx.V, r,
                                    thin_svd(M).sigma);
}

inline ErrorMetrics error_metrics(const Matrix& M,
                                  const CurBaselineResult& approx, Index r) {
  return detail::error_metrics_impl(M, approx.C, approx.Z,
                                    approx.R.transpose(), r,
                                    thin_svd(M).sigma);
}

/// Variants taking the precomputed spectrum of M, for harnesses that score
/// many approximations of one matrix.
inline ErrorMetrics error_metrics(const Matrix& M,
                                  const FactoredLowRank& approx, Index r,
                                  const Vector& sigma_of_M) {
  return detail::error_metrics_impl(M, approx.U, approx.Z, approx.V, r,
                                    sigma_of_M);
}

inline ErrorMetrics error_metrics(const Matrix& M,
                                  const CurBaselineResult& approx, Index r,
                                  const Vector& sigma_of_M) {
  return detail::error_metrics_impl(M, approx.C, approx.Z,
                                    approx.R.transpose(), r, sigma_of_M);
}

}  // namespace curplus

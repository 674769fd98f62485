#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "curplus/mask.hpp"
#include "curplus/spectra.hpp"
#include "curplus/types.hpp"

namespace curplus {

enum class SolverKind { Auto, Direct, Cg };

/// Configuration for one CUR+ run. `r` is the target rank, `d` the
/// column/row budget and `omega_size` the entry budget used by the sampling
/// stage; the remaining fields steer the core-matrix regression.
struct CurPlusConfig {
  Index r = 0;
  Index d = 0;
  Index omega_size = 0;
  SolverKind solver = SolverKind::Auto;
  double cg_tol = 1e-10;
  int cg_max_iters = 0;  // 0 selects the default 10 * r^2
  double ridge = 0.0;

  void validate() const {
    if (r < 1) throw std::invalid_argument("CurPlusConfig: r must be >= 1");
    if (d != 0 && r > d)
      throw std::invalid_argument("CurPlusConfig: need r <= d");
    if (ridge < 0.0)
      throw std::invalid_argument("CurPlusConfig: ridge must be >= 0");
  }
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;  // linear-system residual, relative to rhs
  std::optional<double> hessian_min_eig;
  double objective_value = 0.0;
  bool converged = true;
};

namespace detail {

/// Observed entries grouped by column, the layout both the explicit Hessian
/// assembly and the matrix-free operator iterate over.
struct ColumnGroups {
  std::vector<std::vector<Observation>> by_col;

  ColumnGroups(const ObservationSet& obs, Index cols) : by_col(cols) {
    for (const auto& e : obs.entries()) by_col[e.col].push_back(e);
  }
};

}  // namespace detail

/// Eigenvector bases for the sampled column and row spaces: the top-r
/// eigenvectors of A A^T and B B^T.
inline std::pair<TruncatedBasis, TruncatedBasis> build_bases(
    const SampleSelection& sel, Index r) {
  if (r > std::min<Index>(sel.A.cols(), sel.B.cols()))
    throw std::invalid_argument("build_bases: r exceeds the sample budget d");
  try {
    TruncatedBasis left = top_r_left_eigvecs(sel.A, r);
    TruncatedBasis right = top_r_left_eigvecs(sel.B, r);
    return {std::move(left), std::move(right)};
  } catch (const RankDeficientError& err) {
    throw RankDeficientError(std::string(err.what()) +
                             "; increase the column/row budget d");
  }
}

/// Explicit r^2 x r^2 Hessian of the masked least-squares objective,
///   H = sum_{(i,j) in Omega} vec(u_i v_j^T) vec(u_i v_j^T)^T
/// with u_i, v_j the i-th/j-th rows of U and V and column-major vec.
/// Assembled per observed column: H += (v_j v_j^T) kron K_j with
/// K_j = sum_{i in Omega_j} u_i u_i^T, which costs |Omega| r^2 + m r^4
/// instead of |Omega| r^4.
inline Matrix assemble_hessian(const ObservationSet& obs, const Matrix& U,
                               const Matrix& V) {
  const Index r = U.cols();
  if (V.cols() != r)
    throw std::invalid_argument("assemble_hessian: basis rank mismatch");
  Matrix H = Matrix::Zero(r * r, r * r);
  detail::ColumnGroups groups(obs, V.rows());
  Matrix K(r, r);
  for (Index j = 0; j < V.rows(); ++j) {
    const auto& col = groups.by_col[j];
    if (col.empty()) continue;
    K.setZero();
    for (const auto& e : col)
      K.selfadjointView<Eigen::Lower>().rankUpdate(U.row(e.row).transpose());
    K.triangularView<Eigen::StrictlyUpper>() =
        K.triangularView<Eigen::StrictlyLower>().transpose();
    const auto vj = V.row(j);
    for (Index b2 = 0; b2 < r; ++b2)
      for (Index b1 = 0; b1 < r; ++b1)
        H.block(b1 * r, b2 * r, r, r) += (vj(b1) * vj(b2)) * K;
  }
  return H;
}

/// Right-hand side vec(U^T R_Omega(M) V) of the normal equations.
inline Vector assemble_rhs(const ObservationSet& obs, const Matrix& U,
                           const Matrix& V) {
  const Index r = U.cols();
  if (V.cols() != r)
    throw std::invalid_argument("assemble_rhs: basis rank mismatch");
  Matrix G = Matrix::Zero(r, r);
  detail::ColumnGroups groups(obs, V.rows());
  Vector s(r);
  for (Index j = 0; j < V.rows(); ++j) {
    const auto& col = groups.by_col[j];
    if (col.empty()) continue;
    s.setZero();
    for (const auto& e : col) s += e.value * U.row(e.row).transpose();
    G.noalias() += s * V.row(j);
  }
  return Eigen::Map<const Vector>(G.data(), r * r);
}

/// The Hessian applied to Z without forming it: U^T R_Omega(U Z V^T) V.
inline Matrix apply_hessian(const ObservationSet& obs, const Matrix& U,
                            const Matrix& V, const Matrix& Z) {
  const Index r = U.cols();
  Matrix out = Matrix::Zero(r, r);
  const Matrix P = U * Z;  // n x r
  detail::ColumnGroups groups(obs, V.rows());
  Vector s(r);
  for (Index j = 0; j < V.rows(); ++j) {
    const auto& col = groups.by_col[j];
    if (col.empty()) continue;
    s.setZero();
    const auto vj = V.row(j).transpose();
    for (const auto& e : col) {
      const double fitted = P.row(e.row) * vj;
      s += fitted * U.row(e.row).transpose();
    }
    out.noalias() += s * V.row(j);
  }
  return out;
}

namespace detail {

inline std::pair<Matrix, SolveReport> solve_direct(const ObservationSet& obs,
                                                   const Matrix& U,
                                                   const Matrix& V,
                                                   const Vector& rhs,
                                                   const CurPlusConfig& cfg) {
  const Index r = U.cols();
  const Index unknowns = r * r;
  if (obs.size() < unknowns && cfg.ridge == 0.0)
    throw UnderdeterminedError(
        "underdetermined: |Omega| = " + std::to_string(obs.size()) +
        " too small for r^2 = " + std::to_string(unknowns) +
        " unknowns (lambda_min = 0 by counting)");

  Matrix H = assemble_hessian(obs, U, V);
  if (cfg.ridge > 0.0) H.diagonal().array() += cfg.ridge;

  Eigen::LDLT<Matrix> ldlt(H);
  const Vector diag = ldlt.vectorD();
  const double d_max = diag.cwiseAbs().maxCoeff();
  const double d_min = diag.minCoeff();  // H is PSD: negatives mean breakdown
  const bool singular = ldlt.info() != Eigen::Success ||
                        d_min <= static_cast<double>(unknowns) *
                                     machine_eps() * d_max;
  if (singular) {
    if (cfg.ridge == 0.0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
      const double lambda_min = es.eigenvalues()(0);
      throw UnderdeterminedError(
          "underdetermined: |Omega| = " + std::to_string(obs.size()) +
          " too small for r^2 = " + std::to_string(unknowns) +
          " unknowns (Hessian lambda_min = " + std::to_string(lambda_min) +
          ")");
    }
    throw std::runtime_error("solve_z: ridge-regularized Hessian still singular");
  }

  const Vector z_vec = ldlt.solve(rhs);
  SolveReport report;
  report.iterations = 1;
  const double rhs_norm = rhs.norm();
  report.final_residual = (H * z_vec - rhs).norm() / rhs_norm;
  Matrix Z = Eigen::Map<const Matrix>(z_vec.data(), r, r);
  return {std::move(Z), report};
}

inline std::pair<Matrix, SolveReport> solve_cg(const ObservationSet& obs,
                                               const Matrix& U,
                                               const Matrix& V,
                                               const Vector& rhs_vec,
                                               const CurPlusConfig& cfg) {
  const Index r = U.cols();
  const Matrix B = Eigen::Map<const Matrix>(rhs_vec.data(), r, r);
  const int max_iters =
      cfg.cg_max_iters > 0 ? cfg.cg_max_iters : static_cast<int>(10 * r * r);

  auto op = [&](const Matrix& Z) -> Matrix {
    Matrix HZ = apply_hessian(obs, U, V, Z);
    if (cfg.ridge > 0.0) HZ += cfg.ridge * Z;
    return HZ;
  };

  // Conjugate gradient on the normal equations, in matrix shape.
  Matrix Z = Matrix::Zero(r, r);
  Matrix residual = B;  // B - op(0)
  Matrix direction = residual;
  double rho = residual.squaredNorm();
  const double b_norm = B.norm();
  const double stop = cfg.cg_tol * b_norm;

  SolveReport report;
  int it = 0;
  while (std::sqrt(rho) > stop && it < max_iters) {
    const Matrix h_dir = op(direction);
    const double curvature = (direction.array() * h_dir.array()).sum();
    if (curvature <= 0.0) {
      if (cfg.ridge == 0.0)
        throw UnderdeterminedError(
            "underdetermined: |Omega| = " + std::to_string(obs.size()) +
            " gives a singular Hessian for r^2 = " + std::to_string(r * r) +
            " unknowns (nonpositive CG curvature)");
      break;
    }
    const double alpha = rho / curvature;
    Z += alpha * direction;
    residual -= alpha * h_dir;
    const double rho_next = residual.squaredNorm();
    direction = residual + (rho_next / rho) * direction;
    rho = rho_next;
    ++it;
  }
  report.iterations = it;
  report.final_residual = b_norm > 0.0 ? std::sqrt(rho) / b_norm : 0.0;
  report.converged = std::sqrt(rho) <= stop;
  return {std::move(Z), report};
}

}  // namespace detail

/// Minimizes 1/2 sum_{(i,j) in Omega} (M_ij - u_i^T Z v_j)^2 over the core
/// matrix Z, with u_i, v_j rows of the orthonormal bases. Direct mode forms
/// the explicit r^2 x r^2 Hessian and factorizes it; CG mode runs conjugate
/// gradient on the same normal equations matrix-free. Auto picks direct for
/// r^2 <= 2500 (r <= 50, every desk-scale experiment) and CG beyond.
inline std::pair<Matrix, SolveReport> solve_z(const ObservationSet& obs,
                                              const TruncatedBasis& U_hat,
                                              const TruncatedBasis& V_hat,
                                              const CurPlusConfig& config) {
  config.validate();
  const Matrix& U = U_hat.Q;
  const Matrix& V = V_hat.Q;
  const Index r = U.cols();
  if (V.cols() != r) throw std::invalid_argument("solve_z: rank mismatch");
  if (obs.empty()) throw std::invalid_argument("solve_z: empty observation set");
  if (obs.rows() != U.rows() || obs.cols() != V.rows())
    throw std::invalid_argument("solve_z: shape mismatch");

  const Vector rhs = assemble_rhs(obs, U, V);
  if (rhs.norm() == 0.0) {
    // Gradient at Z = 0 vanishes, so zero is already optimal.
    Matrix Z = Matrix::Zero(r, r);
    SolveReport report;
    report.objective_value = residual_on_mask(obs, {U, Z, V});
    return {std::move(Z), report};
  }

  SolverKind kind = config.solver;
  if (kind == SolverKind::Auto)
    kind = (r * r <= 2500) ? SolverKind::Direct : SolverKind::Cg;

  auto [Z, report] = (kind == SolverKind::Direct)
                         ? detail::solve_direct(obs, U, V, rhs, config)
                         : detail::solve_cg(obs, U, V, rhs, config);
  report.objective_value = residual_on_mask(obs, {U, Z, V});
  return {std::move(Z), report};
}

/// The full pipeline: bases from the sampled columns/rows, core matrix from
/// the observed entries, result returned in factored form.
inline std::pair<FactoredLowRank, SolveReport> cur_plus(
    const SampleSelection& sel, const ObservationSet& obs,
    const CurPlusConfig& config) {
  config.validate();
  const Index n = sel.A.rows();
  const Index m = sel.B.rows();
  if (obs.rows() != n || obs.cols() != m)
    throw std::invalid_argument("cur_plus: observation shape mismatch");

  // A zero matrix has no distinguished eigenbasis; any orthonormal pair with
  // Z = 0 represents it exactly.
  if (sel.A.isZero(0.0) && sel.B.isZero(0.0)) {
    FactoredLowRank approx{Matrix::Identity(n, config.r),
                           Matrix::Zero(config.r, config.r),
                           Matrix::Identity(m, config.r)};
    SolveReport report;
    report.objective_value = residual_on_mask(obs, approx);
    return {std::move(approx), report};
  }

  auto [left, right] = build_bases(sel, config.r);
  auto [Z, report] = solve_z(obs, left, right, config);
  return {FactoredLowRank{std::move(left.Q), std::move(Z), std::move(right.Q)},
          report};
}

}  // namespace curplus

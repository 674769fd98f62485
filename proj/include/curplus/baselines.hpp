#pragma once

#include <span>
#include <string>
#include <vector>

#include "curplus/spectra.hpp"
#include "curplus/types.hpp"

namespace curplus {

enum class BaselineMethod { CurF, CurE };

inline const char* to_string(BaselineMethod m) {
  return m == BaselineMethod::CurF ? "cur-f" : "cur-e";
}

/// A CUR approximation M ~ C * Z * R built from actual columns C (n x d1)
/// and rows R (d2 x m) of the target matrix.
struct CurBaselineResult {
  Matrix C;
  Matrix R;
  Matrix Z;  // d1 x d2
  BaselineMethod method = BaselineMethod::CurF;
};

namespace detail {

inline Matrix extract_columns(const Matrix& M, std::span<const Index> cols) {
  Matrix C(M.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] < 0 || cols[k] >= M.cols())
      throw std::invalid_argument("column index " + std::to_string(cols[k]) +
                                  " out of range");
    C.col(static_cast<Index>(k)) = M.col(cols[k]);
  }
  return C;
}

inline Matrix extract_rows(const Matrix& M, std::span<const Index> rows) {
  Matrix R(static_cast<Index>(rows.size()), M.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= M.rows())
      throw std::invalid_argument("row index " + std::to_string(rows[k]) +
                                  " out of range");
    R.row(static_cast<Index>(k)) = M.row(rows[k]);
  }
  return R;
}

}  // namespace detail

/// Full-information CUR: Z = C^+ M R^+. Needs every entry of M, so it acts
/// as the lower-bound reference in comparisons.
inline CurBaselineResult cur_f(const Matrix& M, std::span<const Index> col_idx,
                               std::span<const Index> row_idx) {
  CurBaselineResult out;
  out.method = BaselineMethod::CurF;
  out.C = detail::extract_columns(M, col_idx);
  out.R = detail::extract_rows(M, row_idx);
  out.Z = pseudoinverse(out.C) * M * pseudoinverse(out.R);
  return out;
}

/// The unbiased estimator of M from uniformly observed entries:
/// (m n / |Omega|) * M_ij on observed cells, zero elsewhere. Materialized
/// densely, which is fine at desk scale.
inline Matrix unbiased_estimate(const ObservationSet& obs) {
  if (obs.empty())
    throw std::invalid_argument("unbiased_estimate: empty observation set");
  const double scale =
      static_cast<double>(obs.rows()) * static_cast<double>(obs.cols()) /
      static_cast<double>(obs.size());
  Matrix Me = Matrix::Zero(obs.rows(), obs.cols());
  for (const auto& e : obs.entries()) Me(e.row, e.col) = scale * e.value;
  return Me;
}

/// Estimator-based CUR: Z = C^+ M_e R^+ with C, R the true sampled columns
/// and rows (fully observed under the access model) and M_e the unbiased
/// estimate built from the observed entries only.
inline CurBaselineResult cur_e(const ObservationSet& obs,
                               std::span<const Index> col_idx,
                               std::span<const Index> row_idx, const Matrix& A,
                               const Matrix& B) {
  if (static_cast<Index>(col_idx.size()) != A.cols() ||
      static_cast<Index>(row_idx.size()) != B.cols())
    throw std::invalid_argument("cur_e: index/sample size mismatch");
  if (A.rows() != obs.rows() || B.rows() != obs.cols())
    throw std::invalid_argument("cur_e: sample shape mismatch");
  CurBaselineResult out;
  out.method = BaselineMethod::CurE;
  out.C = A;
  out.R = B.transpose();
  const Matrix Me = unbiased_estimate(obs);
  out.Z = pseudoinverse(out.C) * Me * pseudoinverse(out.R);
  return out;
}

}  // namespace curplus

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curplus/types.hpp"

namespace curplus {

/// Reads the entries of M named by omega, in the given order, into an
/// ObservationSet. Out-of-range indices are rejected naming the offender.
inline ObservationSet apply_mask(
    const Matrix& M, std::span<const std::pair<Index, Index>> omega) {
  std::vector<Observation> entries;
  entries.reserve(omega.size());
  for (const auto& [i, j] : omega) {
    if (i < 0 || i >= M.rows() || j < 0 || j >= M.cols())
      throw std::invalid_argument(
          "apply_mask: index (" + std::to_string(i) + ", " +
          std::to_string(j) + ") out of range for " +
          std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
    entries.push_back({i, j, M(i, j)});
  }
  return ObservationSet(M.rows(), M.cols(), std::move(entries));
}

inline ObservationSet apply_mask(
    const Matrix& M, const std::vector<std::pair<Index, Index>>& omega) {
  return apply_mask(
      M, std::span<const std::pair<Index, Index>>(omega.data(), omega.size()));
}

/// Least-squares objective restricted to the observed entries:
///   1/2 * sum_{(i,j) in Omega} (M_ij - (U Z V^T)_ij)^2.
/// Each approximated entry is evaluated as row_i(U) * Z * row_j(V), so the
/// full approximation is never materialized.
inline double residual_on_mask(const ObservationSet& obs,
                               const FactoredLowRank& approx) {
  if (obs.rows() != approx.rows() || obs.cols() != approx.cols())
    throw std::invalid_argument("residual_on_mask: shape mismatch");
  double sum = 0.0;
  Vector zv(approx.rank());
  for (const auto& e : obs.entries()) {
    zv.noalias() = approx.Z * approx.V.row(e.col).transpose();
    const double fitted = approx.U.row(e.row) * zv;
    const double diff = e.value - fitted;
    sum += diff * diff;
  }
  return 0.5 * sum;
}

}  // namespace curplus

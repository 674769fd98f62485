#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace curplus {

using Matrix = Eigen::MatrixXd;  // column-major throughout
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when a sampled matrix has fewer than the requested number of
/// directions above the numerical-rank cutoff.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the regression Hessian is singular and no ridge term was
/// requested (the observed-entry budget cannot pin down all r^2 unknowns).
class UnderdeterminedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One observed entry of the target matrix.
struct Observation {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

/// The set Omega of observed entries together with their values. This is the
/// only entry-level view of the target matrix the solver ever receives.
///
/// Invariants: indices in range, no duplicate (row, col) pairs. Both are
/// checked on construction; `trusted` skips the duplicate scan for callers
/// that generate distinct indices by construction (the samplers).
class ObservationSet {
 public:
  ObservationSet(Index rows, Index cols, std::vector<Observation> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    validate_shape();
    check_in_range();
    check_distinct();
  }

  static ObservationSet trusted(Index rows, Index cols,
                                std::vector<Observation> entries) {
    return ObservationSet(rows, cols, std::move(entries), TrustedTag{});
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return static_cast<Index>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Observation>& entries() const { return entries_; }
  const Observation& operator[](std::size_t k) const { return entries_[k]; }

 private:
  struct TrustedTag {};
  ObservationSet(Index rows, Index cols, std::vector<Observation> entries,
                 TrustedTag)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    validate_shape();
  }

  void validate_shape() const {
    if (rows_ <= 0 || cols_ <= 0)
      throw std::invalid_argument("ObservationSet: shape must be positive");
    if (size() > rows_ * cols_)
      throw std::invalid_argument(
          "ObservationSet: more entries than cells in the matrix");
  }

  void check_in_range() const {
    for (const auto& e : entries_) {
      if (e.row < 0 || e.row >= rows_ || e.col < 0 || e.col >= cols_)
        throw std::invalid_argument(
            "ObservationSet: index (" + std::to_string(e.row) + ", " +
            std::to_string(e.col) + ") out of range for " +
            std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  void check_distinct() const {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(entries_.size() * 2);
    for (const auto& e : entries_) {
      const auto key = static_cast<std::uint64_t>(e.row) *
                           static_cast<std::uint64_t>(cols_) +
                       static_cast<std::uint64_t>(e.col);
      if (!seen.insert(key).second)
        throw std::invalid_argument(
            "ObservationSet: duplicate index (" + std::to_string(e.row) +
            ", " + std::to_string(e.col) + ")");
    }
  }

  Index rows_;
  Index cols_;
  std::vector<Observation> entries_;
};

/// Uniformly sampled columns and rows of the target matrix. A's k-th column
/// is the col_indices[k]-th column of M; B's k-th column is the transposed
/// row_indices[k]-th row of M.
struct SampleSelection {
  std::vector<Index> col_indices;
  std::vector<Index> row_indices;
  Matrix A;  // n x col_indices.size()
  Matrix B;  // m x row_indices.size()
};

/// A rank-r approximation stored in factored form U * Z * V^T, never
/// materialized at full size. U (n x r) and V (m x r) have orthonormal
/// columns; Z is r x r.
struct FactoredLowRank {
  Matrix U;
  Matrix Z;
  Matrix V;

  Index rows() const { return U.rows(); }
  Index cols() const { return V.rows(); }
  Index rank() const { return Z.rows(); }
};

/// Max absolute deviation of Q^T Q from the identity.
inline double orthonormality_defect(const Matrix& Q) {
  const Matrix G = Q.transpose() * Q;
  return (G - Matrix::Identity(Q.cols(), Q.cols())).cwiseAbs().maxCoeff();
}

inline bool is_orthonormal(const Matrix& Q, double tol = 1e-10) {
  return orthonormality_defect(Q) <= tol;
}

inline bool all_finite(const Matrix& M) { return M.allFinite(); }

}  // namespace curplus

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "curplus/rng.hpp"
#include "curplus/types.hpp"

namespace curplus {

enum class SpectrumKind { ExactRank, PowerDecay, Custom };

/// Shape of a synthetic singular-value profile. `gap_ratio` asks for
/// sigma_r / sigma_{r+1} at least that large (the head is scaled up when the
/// natural profile is flatter).
struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::PowerDecay;
  Index r = 1;
  double decay_exponent = 2.0;
  double gap_ratio = 1.0;
  std::vector<double> custom;
};

namespace detail {

inline constexpr std::uint64_t kFactorLeft = 0x4c656674ull;   // "Left"
inline constexpr std::uint64_t kFactorRight = 0x52676874ull;  // "Rght"

inline Matrix gaussian_matrix(Index n, Index m, Rng& rng) {
  Matrix G(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) G(i, j) = rng.normal();
  return G;
}

/// Haar-distributed n x k orthonormal factor: QR of a Gaussian matrix with
/// the R diagonal signs fixed so the distribution is exactly rotation
/// invariant and the result deterministic.
inline Matrix haar_orthonormal(Index n, Index k, Rng& rng) {
  const Matrix G = gaussian_matrix(n, k, rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix R = qr.matrixQR().topLeftCorner(k, k);
  for (Index j = 0; j < k; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

inline Vector make_spectrum(const SpectrumSpec& spec, Index k) {
  if (spec.r < 1 || spec.r > k)
    throw std::invalid_argument("SpectrumSpec: rank out of range");
  if (spec.gap_ratio < 1.0)
    throw std::invalid_argument("SpectrumSpec: gap_ratio must be >= 1");
  Vector sigma(k);
  switch (spec.kind) {
    case SpectrumKind::ExactRank:
      for (Index i = 0; i < k; ++i) sigma(i) = i < spec.r ? 1.0 : 0.0;
      return sigma;  // infinite gap already
    case SpectrumKind::PowerDecay: {
      if (spec.decay_exponent <= 0.0)
        throw std::invalid_argument(
            "SpectrumSpec: decay_exponent must be > 0");
      for (Index i = 0; i < k; ++i)
        sigma(i) = std::pow(static_cast<double>(i + 1), -spec.decay_exponent);
      break;
    }
    case SpectrumKind::Custom: {
      if (static_cast<Index>(spec.custom.size()) != k)
        throw std::invalid_argument(
            "SpectrumSpec: custom spectrum must have min(n, m) values");
      for (Index i = 0; i < k; ++i) {
        sigma(i) = spec.custom[static_cast<std::size_t>(i)];
        if (sigma(i) < 0.0 || (i > 0 && sigma(i) > sigma(i - 1)))
          throw std::invalid_argument(
              "SpectrumSpec: custom spectrum must be nonnegative descending");
      }
      break;
    }
  }
  if (spec.r < k && sigma(spec.r) > 0.0) {
    const double current = sigma(spec.r - 1) / sigma(spec.r);
    if (current < spec.gap_ratio) {
      const double boost = spec.gap_ratio / current;
      sigma.head(spec.r) *= boost;
    }
  }
  return sigma;
}

}  // namespace detail

/// Rank-r Gaussian-factor matrix: the product of n x r and r x m matrices
/// with independent standard-normal entries.
inline Matrix gen_low_rank(Index n, Index m, Index r, std::uint64_t seed) {
  if (r < 1 || r > std::min(n, m))
    throw std::invalid_argument("gen_low_rank: rank out of range");
  Rng left_rng(derive_stream(seed, detail::kFactorLeft));
  Rng right_rng(derive_stream(seed, detail::kFactorRight));
  const Matrix ml = detail::gaussian_matrix(n, r, left_rng);
  const Matrix mr = detail::gaussian_matrix(r, m, right_rng);
  return ml * mr;
}

/// Full control over the spectrum: M = U diag(sigma) V^T with Haar-random
/// orthonormal factors and sigma from the spec.
inline Matrix gen_skewed(Index n, Index m, const SpectrumSpec& spec,
                         std::uint64_t seed) {
  const Index k = std::min(n, m);
  const Vector sigma = detail::make_spectrum(spec, k);
  Rng left_rng(derive_stream(seed, detail::kFactorLeft));
  Rng right_rng(derive_stream(seed, detail::kFactorRight));
  const Matrix U = detail::haar_orthonormal(n, k, left_rng);
  const Matrix V = detail::haar_orthonormal(m, k, right_rng);
  return U * sigma.asDiagonal() * V.transpose();
}

}  // namespace curplus

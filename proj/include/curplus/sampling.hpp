#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "curplus/rng.hpp"
#include "curplus/types.hpp"

namespace curplus {

/// Budgets for one sampling pass over a matrix.
struct SamplerConfig {
  std::uint64_t seed = 0;
  Index d = 0;           // column/row budget
  Index omega_size = 0;  // entry budget

  void validate(Index rows, Index cols) const {
    if (d < 1 || d > std::min(rows, cols))
      throw std::invalid_argument("SamplerConfig: d out of range");
    if (omega_size < 1 || omega_size > rows * cols)
      throw std::invalid_argument("SamplerConfig: omega_size out of range");
  }
};

namespace detail {

// Substream tags so each stage draws from an independent stream.
inline constexpr std::uint64_t kColStream = 0x636f6c73ull;   // "cols"
inline constexpr std::uint64_t kRowStream = 0x726f7773ull;   // "rows"
inline constexpr std::uint64_t kEntryStream = 0x656e7473ull; // "ents"

/// First `count` steps of a Fisher-Yates shuffle of [0, population), with the
/// swap table kept sparse so the virtual index space is never materialized.
/// Draws are uniform without replacement and, for a fixed generator state,
/// a larger count extends the smaller one (prefix-stable).
inline std::vector<Index> sample_without_replacement(Index population,
                                                     Index count, Rng& rng) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(count));
  std::unordered_map<Index, Index> swapped;
  swapped.reserve(static_cast<std::size_t>(count) * 2);
  for (Index k = 0; k < count; ++k) {
    const Index j =
        k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(population - k)));
    const auto it_j = swapped.find(j);
    const Index value_j = (it_j == swapped.end()) ? j : it_j->second;
    const auto it_k = swapped.find(k);
    const Index value_k = (it_k == swapped.end()) ? k : it_k->second;
    out.push_back(value_j);
    swapped[j] = value_k;
  }
  return out;
}

}  // namespace detail

/// Uniform without-replacement draw of d_cols column indices and d_rows row
/// indices, from independent substreams of `seed`, with the sampled columns
/// and (transposed) rows extracted into A and B.
inline SampleSelection sample_rows_cols(const Matrix& M, Index d_cols,
                                        Index d_rows, std::uint64_t seed) {
  if (d_cols < 1 || d_cols > M.cols())
    throw std::invalid_argument("sample_rows_cols: column budget " +
                                std::to_string(d_cols) + " out of range [1, " +
                                std::to_string(M.cols()) + "]");
  if (d_rows < 1 || d_rows > M.rows())
    throw std::invalid_argument("sample_rows_cols: row budget " +
                                std::to_string(d_rows) + " out of range [1, " +
                                std::to_string(M.rows()) + "]");
  Rng col_rng(derive_stream(seed, detail::kColStream));
  Rng row_rng(derive_stream(seed, detail::kRowStream));

  SampleSelection sel;
  sel.col_indices = detail::sample_without_replacement(M.cols(), d_cols, col_rng);
  sel.row_indices = detail::sample_without_replacement(M.rows(), d_rows, row_rng);

  sel.A.resize(M.rows(), d_cols);
  for (Index k = 0; k < d_cols; ++k) sel.A.col(k) = M.col(sel.col_indices[k]);
  sel.B.resize(M.cols(), d_rows);
  for (Index k = 0; k < d_rows; ++k)
    sel.B.col(k) = M.row(sel.row_indices[k]).transpose();
  return sel;
}

/// Symmetric budget d for both axes.
inline SampleSelection sample_rows_cols(const Matrix& M, Index d,
                                        std::uint64_t seed) {
  if (d < 1 || d > std::min(M.rows(), M.cols()))
    throw std::invalid_argument(
        "sample_rows_cols: d = " + std::to_string(d) + " out of range [1, " +
        std::to_string(std::min(M.rows(), M.cols())) + "]");
  return sample_rows_cols(M, d, d, seed);
}

/// Uniform without-replacement draw of `count` entries over the n*m grid,
/// values filled from M.
inline ObservationSet sample_entries(const Matrix& M, Index count,
                                     std::uint64_t seed) {
  const Index cells = M.rows() * M.cols();
  if (count < 1 || count > cells)
    throw std::invalid_argument("sample_entries: count = " +
                                std::to_string(count) + " out of range [1, " +
                                std::to_string(cells) + "]");
  Rng rng(derive_stream(seed, detail::kEntryStream));
  const auto linear = detail::sample_without_replacement(cells, count, rng);
  std::vector<Observation> entries;
  entries.reserve(static_cast<std::size_t>(count));
  for (const Index idx : linear) {
    const Index j = idx / M.rows();  // column-major linearization
    const Index i = idx % M.rows();
    entries.push_back({i, j, M(i, j)});
  }
  return ObservationSet::trusted(M.rows(), M.cols(), std::move(entries));
}

/// One full access pass under a shared seed: d columns, d rows and
/// omega_size entries, each from its own substream.
inline std::pair<SampleSelection, ObservationSet> sample(
    const Matrix& M, const SamplerConfig& config) {
  config.validate(M.rows(), M.cols());
  return {sample_rows_cols(M, config.d, config.seed),
          sample_entries(M, config.omega_size, config.seed)};
}

}  // namespace curplus

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "curplus/baselines.hpp"
#include "curplus/diagnostics.hpp"
#include "curplus/sampling.hpp"
#include "curplus/solver.hpp"
#include "curplus/synth.hpp"
#include "curplus/types.hpp"

namespace curplus {

/// One trial of one method at one budget point.
struct ExperimentRecord {
  Index n = 0, m = 0, r = 0, d = 0, omega_size = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  std::optional<double> ell_s;
  std::optional<double> ell_F;
  double rel_frobenius_to_M = 0.0;
  double runtime_ms = 0.0;
  bool converged = true;
  bool caps_applied = false;
};

/// Outcome of the minimal-budget search for one (n, r) pair. Budgets are
/// the smallest tested values passing all trials; unset means the search
/// ceiling was reached without a pass.
struct SweepResult {
  Index r = 0;
  Index n = 0;
  std::optional<Index> minimal_d;
  std::optional<Index> minimal_omega;
  int trials_per_point = 10;
};

struct SweepOptions {
  double recovery_threshold = 2e-4;
  int trials = 10;
  int threads = 1;
  bool search_omega = true;
  std::function<void(const std::string&)> progress;  // optional logger
};

enum class OmegaPolicy { FixedOmega0, AlphaCubed, VaryOmega };

struct MethodSet {
  bool curplus = true;
  bool cur_f = true;
  bool cur_e = true;
};

struct BenchOptions {
  std::vector<Index> ranks{10};
  int alpha_max = 5;    // alpha = 1..alpha_max for the fixed/cubed policies
  int omega_steps = 5;  // |Omega| = k * Omega_0, k = 1..omega_steps
  OmegaPolicy policy = OmegaPolicy::FixedOmega0;
  MethodSet methods;
  int trials = 10;
  std::uint64_t seed = 0;
  int threads = 1;
};

namespace detail {

inline constexpr std::uint64_t kTrialGen = 0x67656e00ull;   // "gen"
inline constexpr std::uint64_t kTrialSample = 0x736d7000ull; // "smp"

/// Index-parallel loop; item order of side effects is up to the caller
/// (write to preallocated slots). Exceptions propagate after join.
template <class Fn>
void parallel_for(int n_items, int threads, Fn&& fn) {
  threads = std::min(threads, n_items);
  if (threads <= 1) {
    for (int i = 0; i < n_items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_items; i = next.fetch_add(1)) {
        if (failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace detail

/// Entry budget of the baseline protocol: Omega_0 = n m r^2 / nnz(M). On
/// dense matrices that degenerates to r^2, so the budget is floored at the
/// exact-recovery requirement ceil(7 r^2 * 3 ln r). `floored` reports
/// whether the floor was the binding value.
inline Index omega0_budget(Index n, Index m, Index r, Index nnz,
                           bool* floored = nullptr) {
  if (nnz < 1) throw std::invalid_argument("omega0_budget: nnz must be >= 1");
  const Index base = (n * m * r * r) / nnz;
  const Index floor_value = std::max<Index>(
      r * r, static_cast<Index>(
                 std::ceil(7.0 * static_cast<double>(r * r) * 3.0 *
                           std::log(static_cast<double>(std::max<Index>(r, 2))))));
  if (floored) *floored = floor_value > base;
  return std::max(base, floor_value);
}

namespace detail {

struct SweepTrial {
  Matrix M;
  std::uint64_t sample_seed = 0;
  double frob = 0.0;
};

inline std::vector<SweepTrial> make_sweep_trials(Index n, Index r,
                                                 std::uint64_t master,
                                                 int trials) {
  std::vector<SweepTrial> out(static_cast<std::size_t>(trials));
  const std::uint64_t point_seed = derive_stream(
      derive_stream(master, static_cast<std::uint64_t>(n)),
      static_cast<std::uint64_t>(r));
  for (int t = 0; t < trials; ++t) {
    auto& trial = out[static_cast<std::size_t>(t)];
    const std::uint64_t trial_seed =
        derive_stream(point_seed, static_cast<std::uint64_t>(t));
    trial.M = gen_low_rank(n, n, r, derive_stream(trial_seed, kTrialGen));
    trial.sample_seed = derive_stream(trial_seed, kTrialSample);
    trial.frob = trial.M.norm();
  }
  return out;
}

inline bool sweep_trial_passes(const SweepTrial& trial, Index r, Index d,
                               Index omega, double threshold) {
  try {
    const SampleSelection sel = sample_rows_cols(trial.M, d, trial.sample_seed);
    const ObservationSet obs =
        sample_entries(trial.M, omega, trial.sample_seed);
    CurPlusConfig config;
    config.r = r;
    config.d = d;
    config.omega_size = omega;
    const auto [approx, report] = cur_plus(sel, obs, config);
    if (!report.converged) return false;
    const double rel = frobenius_norm_diff(trial.M, approx) / trial.frob;
    return rel <= threshold;
  } catch (const RankDeficientError&) {
    return false;
  } catch (const UnderdeterminedError&) {
    return false;
  }
}

/// Smallest budget in [start, ceiling] passing `test`, assuming larger
/// budgets keep passing: doubling to bracket, then binary search.
inline std::optional<Index> search_minimal_budget(
    Index start, Index ceiling, const std::function<bool(Index)>& test) {
  if (test(start)) return start;
  Index lo = start;  // known fail
  Index hi = 0;      // first observed pass
  Index probe = start;
  while (probe < ceiling) {
    probe = std::min(probe * 2, ceiling);
    if (test(probe)) {
      hi = probe;
      break;
    }
    lo = probe;
  }
  if (hi == 0) return std::nullopt;
  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    if (test(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

/// The minimal-budget protocol: for each (n, r), rank-r Gaussian-factor
/// square matrices, 10 fresh trials per point; first search the smallest d
/// with |Omega| held generous, then re-fix d at twice its minimum and search
/// the smallest |Omega|. A budget passes when every trial recovers M to the
/// threshold. Samples are prefix-stable in the budget, so a trial sees
/// nested draws as the search moves.
inline std::vector<SweepResult> sweep_minimal_budgets(
    const std::vector<Index>& n_list, const std::vector<Index>& r_list,
    std::uint64_t seed, const SweepOptions& options = {}) {
  if (n_list.empty() || r_list.empty())
    throw std::invalid_argument("sweep_minimal_budgets: empty n or r list");
  std::vector<SweepResult> results;
  for (const Index n : n_list) {
    for (const Index r : r_list) {
      if (r < 1 || r > n)
        throw std::invalid_argument("sweep_minimal_budgets: rank out of range");
      const auto trials =
          detail::make_sweep_trials(n, r, seed, options.trials);

      const Index cells = n * n;
      const Index omega_ceiling = cells / 2;
      const double lr = std::log(static_cast<double>(std::max<Index>(r, 2)));
      const Index omega_generous = std::min<Index>(
          omega_ceiling,
          static_cast<Index>(std::ceil(2.0 * 7.0 * 2.5 * 2.5 *
                                       static_cast<double>(r * r) * 3.0 * lr)));

      auto all_pass = [&](Index d, Index omega) {
        std::vector<char> ok(trials.size(), 0);
        detail::parallel_for(
            static_cast<int>(trials.size()), options.threads, [&](int t) {
              ok[static_cast<std::size_t>(t)] = detail::sweep_trial_passes(
                  trials[static_cast<std::size_t>(t)], r, d, omega,
                  options.recovery_threshold);
            });
        for (const char c : ok)
          if (!c) return false;
        return true;
      };

      SweepResult res;
      res.r = r;
      res.n = n;
      res.trials_per_point = options.trials;
      res.minimal_d = detail::search_minimal_budget(
          r, n, [&](Index d) { return all_pass(d, omega_generous); });
      if (options.progress)
        options.progress("n=" + std::to_string(n) + " r=" + std::to_string(r) +
                         " minimal_d=" +
                         (res.minimal_d ? std::to_string(*res.minimal_d)
                                        : std::string("not-found")));

      if (options.search_omega && res.minimal_d) {
        const Index d_fixed = std::min<Index>(2 * *res.minimal_d, n);
        res.minimal_omega = detail::search_minimal_budget(
            r * r, omega_ceiling,
            [&](Index omega) { return all_pass(d_fixed, omega); });
        if (options.progress)
          options.progress(
              "n=" + std::to_string(n) + " r=" + std::to_string(r) +
              " minimal_omega=" +
              (res.minimal_omega ? std::to_string(*res.minimal_omega)
                                 : std::string("not-found")));
      }
      results.push_back(std::move(res));
    }
  }
  return results;
}

namespace detail {

inline ExperimentRecord base_record(const Matrix& M, Index r, Index d1,
                                    Index omega, double alpha,
                                    std::uint64_t seed, bool caps) {
  ExperimentRecord rec;
  rec.n = M.rows();
  rec.m = M.cols();
  rec.r = r;
  rec.d = d1;
  rec.omega_size = omega;
  rec.alpha = alpha;
  rec.seed = seed;
  rec.caps_applied = caps;
  return rec;
}

inline void fill_metrics(ExperimentRecord& rec, const ErrorMetrics& metrics,
                         double frob_M) {
  rec.ell_s = metrics.ell_s;
  rec.ell_F = metrics.ell_F;
  rec.rel_frobenius_to_M = metrics.abs_frobenius / frob_M;
}

}  // namespace detail

/// The baseline-comparison protocol: per (r, alpha, trial), draw shared
/// column/row/entry samples with d1 = alpha r, d2 = alpha d1 (capped at the
/// matrix dimensions) and |Omega| from the policy, then score each method
/// against the best rank-r approximation.
inline std::vector<ExperimentRecord> bench_baselines(
    const Matrix& M, const BenchOptions& options) {
  if (M.size() == 0) throw std::invalid_argument("bench_baselines: empty matrix");
  const Index n = M.rows();
  const Index m = M.cols();
  const Index cells = n * m;
  const Index nnz = static_cast<Index>((M.array() != 0.0).count());
  const Vector sigma = thin_svd(M).sigma;
  const double frob_M = M.norm();

  struct Point {
    Index r;
    double alpha;
    Index d1, d2, omega;
    bool caps;
  };
  std::vector<Point> points;
  for (const Index r : options.ranks) {
    if (r < 1 || r >= std::min(n, m))
      throw std::invalid_argument("bench_baselines: rank out of range");
    bool floored = false;
    const Index omega0 = omega0_budget(n, m, r, nnz, &floored);
    auto add_point = [&](double alpha, Index omega_requested) {
      Point p;
      p.r = r;
      p.alpha = alpha;
      const auto want_d1 = static_cast<Index>(std::llround(alpha * r));
      p.d1 = std::min(want_d1, m);
      const auto want_d2 = static_cast<Index>(std::llround(alpha * p.d1));
      p.d2 = std::min(want_d2, n);
      p.omega = std::min(omega_requested, cells / 2);
      p.caps = floored || p.d1 != want_d1 || p.d2 != want_d2 ||
               p.omega != omega_requested;
      points.push_back(p);
    };
    switch (options.policy) {
      case OmegaPolicy::FixedOmega0:
        for (int a = 1; a <= options.alpha_max; ++a) add_point(a, omega0);
        break;
      case OmegaPolicy::AlphaCubed:
        for (int a = 1; a <= options.alpha_max; ++a)
          add_point(a, static_cast<Index>(a) * a * a * omega0);
        break;
      case OmegaPolicy::VaryOmega:
        for (int k = 1; k <= options.omega_steps; ++k)
          add_point(5.0, static_cast<Index>(k) * omega0);
        break;
    }
  }

  const int methods_per_trial = (options.methods.curplus ? 1 : 0) +
                                (options.methods.cur_f ? 1 : 0) +
                                (options.methods.cur_e ? 1 : 0);
  std::vector<ExperimentRecord> records(
      points.size() * static_cast<std::size_t>(options.trials) *
      static_cast<std::size_t>(methods_per_trial));

  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point& pt = points[p];
    detail::parallel_for(options.trials, options.threads, [&](int t) {
      const std::uint64_t trial_seed = derive_stream(
          derive_stream(derive_stream(options.seed,
                                      static_cast<std::uint64_t>(pt.r)),
                        static_cast<std::uint64_t>(p)),
          static_cast<std::uint64_t>(t));
      const SampleSelection sel =
          sample_rows_cols(M, pt.d1, pt.d2, trial_seed);
      const ObservationSet obs = sample_entries(M, pt.omega, trial_seed);
      const std::span<const Index> cols(sel.col_indices);
      const std::span<const Index> rows(sel.row_indices);

      std::size_t slot =
          (p * static_cast<std::size_t>(options.trials) +
           static_cast<std::size_t>(t)) *
          static_cast<std::size_t>(methods_per_trial);

      if (options.methods.curplus) {
        ExperimentRecord rec = detail::base_record(M, pt.r, pt.d1, pt.omega,
                                                   pt.alpha, trial_seed,
                                                   pt.caps);
        rec.method = "curplus";
        const auto start = std::chrono::steady_clock::now();
        try {
          CurPlusConfig config;
          config.r = pt.r;
          const auto [approx, report] = cur_plus(sel, obs, config);
          rec.runtime_ms = detail::elapsed_ms(start);
          rec.converged = report.converged;
          const auto metrics = error_metrics(M, approx, pt.r, sigma);
          detail::fill_metrics(rec, metrics, frob_M);
        } catch (const std::exception&) {
          rec.runtime_ms = detail::elapsed_ms(start);
          rec.converged = false;
          rec.rel_frobenius_to_M = std::numeric_limits<double>::quiet_NaN();
        }
        records[slot++] = std::move(rec);
      }
      if (options.methods.cur_f) {
        ExperimentRecord rec = detail::base_record(M, pt.r, pt.d1, pt.omega,
                                                   pt.alpha, trial_seed,
                                                   pt.caps);
        rec.method = "cur-f";
        const auto start = std::chrono::steady_clock::now();
        const CurBaselineResult result = cur_f(M, cols, rows);
        rec.runtime_ms = detail::elapsed_ms(start);
        const auto metrics = error_metrics(M, result, pt.r, sigma);
        detail::fill_metrics(rec, metrics, frob_M);
        records[slot++] = std::move(rec);
      }
      if (options.methods.cur_e) {
        ExperimentRecord rec = detail::base_record(M, pt.r, pt.d1, pt.omega,
                                                   pt.alpha, trial_seed,
                                                   pt.caps);
        rec.method = "cur-e";
        const auto start = std::chrono::steady_clock::now();
        const CurBaselineResult result = cur_e(obs, cols, rows, sel.A, sel.B);
        rec.runtime_ms = detail::elapsed_ms(start);
        const auto metrics = error_metrics(M, result, pt.r, sigma);
        detail::fill_metrics(rec, metrics, frob_M);
        records[slot++] = std::move(rec);
      }
    });
  }
  return records;
}

/// Mean errors over the trials of one (method, r, alpha, omega) cell.
struct BenchSummary {
  std::string method;
  Index r = 0;
  double alpha = 0.0;
  Index omega_size = 0;
  double mean_ell_s = 0.0;
  double mean_ell_F = 0.0;
  double mean_rel_frobenius = 0.0;
  int trials = 0;
  int failures = 0;
};

inline std::vector<BenchSummary> summarize(
    const std::vector<ExperimentRecord>& records) {
  std::vector<BenchSummary> cells;
  auto find_cell = [&](const ExperimentRecord& rec) -> std::size_t {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto& c = cells[k];
      if (c.method == rec.method && c.r == rec.r && c.alpha == rec.alpha &&
          c.omega_size == rec.omega_size)
        return k;
    }
    BenchSummary c;
    c.method = rec.method;
    c.r = rec.r;
    c.alpha = rec.alpha;
    c.omega_size = rec.omega_size;
    cells.push_back(std::move(c));
    return cells.size() - 1;
  };
  for (const auto& rec : records) {
    auto& cell = cells[find_cell(rec)];
    if (!rec.converged || !rec.ell_F) {
      ++cell.failures;
      continue;
    }
    ++cell.trials;
    cell.mean_ell_s += rec.ell_s.value_or(0.0);
    cell.mean_ell_F += *rec.ell_F;
    cell.mean_rel_frobenius += rec.rel_frobenius_to_M;
  }
  for (auto& c : cells) {
    if (c.trials > 0) {
      c.mean_ell_s /= c.trials;
      c.mean_ell_F /= c.trials;
      c.mean_rel_frobenius /= c.trials;
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// CSV / JSON emission. Column order is fixed and documented in the README.

inline constexpr const char* kRecordCsvHeader =
    "n,m,r,d,omega_size,alpha,seed,method,ell_s,ell_F,rel_frobenius_to_M,"
    "runtime_ms,converged,caps_applied";

namespace detail {

inline std::string opt_to_csv(const std::optional<double>& v) {
  return v ? std::to_string(*v) : std::string("nan");
}

}  // namespace detail

inline void write_records_csv(const std::vector<ExperimentRecord>& records,
                              std::ostream& out) {
  out << kRecordCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.n << "," << r.m << "," << r.r << "," << r.d << ","
        << r.omega_size << "," << r.alpha << "," << r.seed << "," << r.method
        << "," << detail::opt_to_csv(r.ell_s) << ","
        << detail::opt_to_csv(r.ell_F) << "," << r.rel_frobenius_to_M << ","
        << r.runtime_ms << "," << (r.converged ? 1 : 0) << ","
        << (r.caps_applied ? 1 : 0) << "\n";
  }
}

inline constexpr const char* kSweepCsvHeader =
    "n,r,minimal_d,minimal_omega,trials_per_point";

inline void write_sweep_csv(const std::vector<SweepResult>& results,
                            std::ostream& out) {
  out << kSweepCsvHeader << "\n";
  for (const auto& s : results) {
    out << s.n << "," << s.r << ","
        << (s.minimal_d ? std::to_string(*s.minimal_d)
                        : std::string("not-found"))
        << ","
        << (s.minimal_omega ? std::to_string(*s.minimal_omega)
                            : std::string("not-found"))
        << "," << s.trials_per_point << "\n";
  }
}

}  // namespace curplus

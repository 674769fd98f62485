#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "curplus/harness.hpp"
#include "curplus/json_report.hpp"
#include "curplus/synth.hpp"
#include "helpers.hpp"

using namespace curplus;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("omega0 floors the degenerate dense budget", "[harness]") {
  const Index n = 400, m = 300, r = 10;
  bool floored = false;
  const Index omega0 = omega0_budget(n, m, r, n * m, &floored);
  CHECK(floored);
  CHECK(omega0 ==
        static_cast<Index>(std::ceil(7.0 * 100.0 * 3.0 * std::log(10.0))));

  // A sparse matrix can push the base budget above the floor.
  bool floored_sparse = true;
  const Index sparse_omega = omega0_budget(n, m, r, 100, &floored_sparse);
  CHECK_FALSE(floored_sparse);
  CHECK(sparse_omega == n * m * r * r / 100);
}

TEST_CASE("sweep finds tiny budgets for a tiny problem", "[harness]") {
  SweepOptions options;
  options.trials = 5;
  const auto results = sweep_minimal_budgets({60}, {3}, 99, options);
  REQUIRE(results.size() == 1);
  const SweepResult& res = results.front();
  REQUIRE(res.minimal_d.has_value());
  REQUIRE(res.minimal_omega.has_value());
  // Any r sampled columns of a generic rank-r matrix already span it.
  CHECK(*res.minimal_d >= 3);
  CHECK(*res.minimal_d <= 10);
  CHECK(*res.minimal_omega >= 9);
  CHECK(res.trials_per_point == 5);
}

TEST_CASE("sweep passes stay passes at larger budgets", "[harness]") {
  // Spot-check of the monotonicity the search assumes, on three points.
  const Index n = 60, r = 3;
  const auto trials = detail::make_sweep_trials(n, r, 99, 5);
  const Index omega = 2000;
  auto all_pass = [&](Index d) {
    for (const auto& t : trials)
      if (!detail::sweep_trial_passes(t, r, d, omega, 2e-4)) return false;
    return true;
  };
  REQUIRE(all_pass(6));
  CHECK(all_pass(9));
  CHECK(all_pass(12));
  CHECK(all_pass(24));
}

TEST_CASE("bench produces reproducible complete records", "[harness]") {
  SpectrumSpec spec;
  spec.kind = SpectrumKind::PowerDecay;
  spec.r = 4;
  spec.gap_ratio = std::sqrt(2.0);
  const Matrix M = gen_skewed(60, 50, spec, 8);

  BenchOptions options;
  options.ranks = {4};
  options.alpha_max = 2;
  options.trials = 3;
  options.seed = 5;
  const auto records = bench_baselines(M, options);
  REQUIRE(records.size() == 2 * 3 * 3);  // alphas x trials x methods

  for (const auto& rec : records) {
    CHECK(rec.n == 60);
    CHECK(rec.m == 50);
    CHECK(rec.r == 4);
    CHECK((rec.method == "curplus" || rec.method == "cur-f" ||
           rec.method == "cur-e"));
    CHECK(rec.converged);
    REQUIRE(rec.ell_F.has_value());
    CHECK(*rec.ell_F >= 0.0);
    CHECK(rec.rel_frobenius_to_M >= 0.0);
  }

  // Bit-for-bit reproducibility of everything but the timings.
  const auto again = bench_baselines(M, options);
  REQUIRE(again.size() == records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    CHECK(records[k].seed == again[k].seed);
    CHECK(records[k].method == again[k].method);
    CHECK(records[k].ell_F == again[k].ell_F);
    CHECK(records[k].ell_s == again[k].ell_s);
    CHECK(records[k].rel_frobenius_to_M == again[k].rel_frobenius_to_M);
  }
}

TEST_CASE("bench records caps when alpha pushes budgets past the dimensions",
          "[harness]") {
  SpectrumSpec spec;
  spec.kind = SpectrumKind::PowerDecay;
  spec.r = 4;
  const Matrix M = gen_skewed(40, 30, spec, 3);
  BenchOptions options;
  options.ranks = {4};
  options.alpha_max = 5;  // d2 = 5 * 20 = 100 > n = 40
  options.trials = 1;
  const auto records = bench_baselines(M, options);
  bool saw_cap = false;
  for (const auto& rec : records)
    if (rec.alpha == 5.0) saw_cap = saw_cap || rec.caps_applied;
  CHECK(saw_cap);
}

TEST_CASE("multithreaded trials reproduce the serial records", "[harness]") {
  SpectrumSpec spec;
  spec.kind = SpectrumKind::PowerDecay;
  spec.r = 3;
  const Matrix M = gen_skewed(40, 30, spec, 12);
  BenchOptions serial;
  serial.ranks = {3};
  serial.alpha_max = 2;
  serial.trials = 4;
  BenchOptions parallel = serial;
  parallel.threads = 2;
  const auto a = bench_baselines(M, serial);
  const auto b = bench_baselines(M, parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].method == b[k].method);
    CHECK(a[k].seed == b[k].seed);
    CHECK(a[k].ell_F == b[k].ell_F);
  }
}

TEST_CASE("curplus tracks cur-f closely on heavy-tailed spectra", "[harness]") {
  // On slowly decaying spectra (the regime of large sparse text matrices)
  // a d1 x d2 core buys cur-f little over rank r, so the partially observed
  // method stays within a small factor of the fully observed one.
  SpectrumSpec spec;
  spec.kind = SpectrumKind::PowerDecay;
  spec.r = 10;
  spec.decay_exponent = 0.5;
  spec.gap_ratio = std::sqrt(2.0);
  const Matrix M = gen_skewed(300, 250, spec, 3);

  BenchOptions options;
  options.ranks = {10};
  options.alpha_max = 5;
  options.trials = 10;
  options.seed = 2025;
  options.threads = 2;
  options.methods.cur_e = false;
  const auto cells = summarize(bench_baselines(M, options));

  double curplus_5 = 0.0, curf_5 = 0.0;
  for (const auto& cell : cells) {
    if (cell.alpha != 5.0) continue;
    if (cell.method == "curplus") curplus_5 = cell.mean_ell_F;
    if (cell.method == "cur-f") curf_5 = cell.mean_ell_F;
  }
  REQUIRE(curf_5 > 0.0);
  INFO("curplus " << curplus_5 << " vs cur-f " << curf_5);
  CHECK(curplus_5 <= 1.25 * curf_5);
}

TEST_CASE("summaries average per cell", "[harness]") {
  std::vector<ExperimentRecord> records(2);
  records[0].method = "cur-f";
  records[0].r = 3;
  records[0].alpha = 1.0;
  records[0].omega_size = 10;
  records[0].ell_s = 1.0;
  records[0].ell_F = 2.0;
  records[0].rel_frobenius_to_M = 0.5;
  records[1] = records[0];
  records[1].ell_F = 4.0;
  const auto cells = summarize(records);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].trials == 2);
  CHECK(cells[0].mean_ell_F == 3.0);
}

TEST_CASE("record CSV has the documented header and one line per record",
          "[harness]") {
  std::vector<ExperimentRecord> records(1);
  records[0].n = 10;
  records[0].m = 8;
  records[0].method = "curplus";
  records[0].ell_F = 0.5;
  std::stringstream ss;
  write_records_csv(records, ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line == kRecordCsvHeader);
  int lines = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 1);
}

TEST_CASE("undefined relative errors serialize as nan / null", "[harness]") {
  std::vector<ExperimentRecord> records(1);
  records[0].method = "curplus";
  std::stringstream ss;
  write_records_csv(records, ss);
  CHECK_THAT(ss.str(), ContainsSubstring(",nan,"));

  const json j = to_json(records);
  CHECK(j[0]["ell_s"].is_null());
  CHECK(j[0]["ell_F"].is_null());
}

TEST_CASE("sweep results serialize to CSV and JSON", "[harness]") {
  std::vector<SweepResult> results(2);
  results[0].n = 100;
  results[0].r = 5;
  results[0].minimal_d = 7;
  results[0].minimal_omega = 300;
  results[1].n = 100;
  results[1].r = 50;  // nothing found
  std::stringstream ss;
  write_sweep_csv(results, ss);
  CHECK_THAT(ss.str(), ContainsSubstring("100,5,7,300,10"));
  CHECK_THAT(ss.str(), ContainsSubstring("not-found"));

  const json j = to_json(results);
  CHECK(j[1]["minimal_d"].is_null());
  CHECK(j[0]["minimal_omega"] == 300);
}

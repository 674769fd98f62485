// Command-line front end: synthetic matrix generation, one-shot CUR+
// approximation, incoherence diagnostics, minimal-budget sweeps and
// baseline benchmarks. Exit codes: 0 success, 1 input or runtime error,
// 2 a budget search hit its ceiling without a pass.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "curplus/curplus.hpp"
#include "curplus/json_report.hpp"

namespace {

using namespace curplus;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitBudgetNotFound = 2;

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

struct GenArgs {
  std::string kind = "lowrank";
  Index n = 100, m = 100, rank = 5;
  std::uint64_t seed = 0;
  double decay = 2.0;
  double gap = 1.0;
  std::string out;
};

int run_gen(const GenArgs& args) {
  Matrix M;
  if (args.kind == "lowrank") {
    M = gen_low_rank(args.n, args.m, args.rank, args.seed);
  } else {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::PowerDecay;
    spec.r = args.rank;
    spec.decay_exponent = args.decay;
    spec.gap_ratio = args.gap;
    M = gen_skewed(args.n, args.m, spec, args.seed);
  }
  save_matrix(M, args.out);
  std::cout << "wrote " << args.n << "x" << args.m << " matrix to "
            << args.out << "\n";
  return kExitOk;
}

struct ApproxArgs {
  std::string input;
  Index rank = 5;
  Index d = 0;
  Index d_rows = 0;  // defaults to d
  Index omega = 0;
  std::uint64_t seed = 0;
  std::string solver = "auto";
  double ridge = 0.0;
  std::string out = "approx";
};

int run_approx(const ApproxArgs& args) {
  const Matrix M = load_matrix(args.input);
  const Index d_cols = args.d;
  const Index d_rows = args.d_rows > 0 ? args.d_rows : args.d;

  const SampleSelection sel = sample_rows_cols(M, d_cols, d_rows, args.seed);
  const ObservationSet obs = sample_entries(M, args.omega, args.seed);

  CurPlusConfig config;
  config.r = args.rank;
  config.d = std::min(d_cols, d_rows);
  config.omega_size = args.omega;
  config.ridge = args.ridge;
  if (args.solver == "direct")
    config.solver = SolverKind::Direct;
  else if (args.solver == "cg")
    config.solver = SolverKind::Cg;

  const auto [approx, report] = cur_plus(sel, obs, config);

  save_matrix(approx.U, args.out + ".U.mtx");
  save_matrix(approx.Z, args.out + ".Z.mtx");
  save_matrix(approx.V, args.out + ".V.mtx");

  json j;
  j["input"] = args.input;
  j["n"] = M.rows();
  j["m"] = M.cols();
  j["rank"] = args.rank;
  j["d_cols"] = d_cols;
  j["d_rows"] = d_rows;
  j["omega_size"] = args.omega;
  j["seed"] = args.seed;
  j["report"] = to_json(report);
  j["col_indices"] = indices_to_json(sel.col_indices);
  j["row_indices"] = indices_to_json(sel.row_indices);
  if (args.rank < std::min(M.rows(), M.cols())) {
    const ErrorMetrics metrics = error_metrics(M, approx, args.rank);
    j["ell_s"] = metrics.ell_s ? json(*metrics.ell_s) : json(nullptr);
    j["ell_F"] = metrics.ell_F ? json(*metrics.ell_F) : json(nullptr);
    j["rel_frobenius_to_M"] = metrics.abs_frobenius / M.norm();
  }
  auto out = open_or_throw(args.out + ".json");
  out << j.dump(2) << "\n";
  std::cout << "wrote " << args.out << ".json and factor files\n";
  return kExitOk;
}

struct DiagnoseArgs {
  std::string input;
  Index rank = 5;
  std::string eta = "auto";
  bool raw_mu_eta = false;
  Index d = 0;  // optional: also report mu_hat from a fresh sample
  std::uint64_t seed = 0;
  std::string out;
};

int run_diagnose(const DiagnoseArgs& args) {
  const Matrix M = load_matrix(args.input);
  std::optional<double> eta;
  if (args.eta != "auto") eta = std::stod(args.eta);
  IncoherenceReport rep =
      incoherence_report(M, args.rank, eta, !args.raw_mu_eta);

  bool with_mu_hat = false;
  if (args.d > 0) {
    const SampleSelection sel = sample_rows_cols(M, args.d, args.seed);
    const auto [left, right] = build_bases(sel, args.rank);
    rep.mu_hat_r = incoherence_mu_hat(left.Q, right.Q);
    with_mu_hat = true;
  }

  const json j = incoherence_to_json(rep, with_mu_hat);
  if (args.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    auto out = open_or_throw(args.out);
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

struct SweepArgs {
  std::vector<Index> n_list{500};
  std::vector<Index> r_list{5, 10, 15, 20};
  std::uint64_t seed = 0;
  double threshold = 2e-4;
  int trials = 10;
  bool no_omega = false;
  int threads = 1;
  std::string out;
  std::string format = "csv";
};

int run_sweep(const SweepArgs& args) {
  SweepOptions options;
  options.recovery_threshold = args.threshold;
  options.trials = args.trials;
  options.threads = args.threads;
  options.search_omega = !args.no_omega;
  options.progress = [](const std::string& msg) {
    std::cerr << "sweep: " << msg << "\n";
  };
  const auto results =
      sweep_minimal_budgets(args.n_list, args.r_list, args.seed, options);

  const auto emit = [&](std::ostream& out) {
    if (args.format == "json")
      out << to_json(results).dump(2) << "\n";
    else
      write_sweep_csv(results, out);
  };
  if (args.out.empty()) {
    emit(std::cout);
  } else {
    auto out = open_or_throw(args.out);
    emit(out);
  }

  for (const auto& res : results) {
    if (!res.minimal_d || (options.search_omega && !res.minimal_omega))
      return kExitBudgetNotFound;
  }
  return kExitOk;
}

struct BenchArgs {
  std::string input;
  std::vector<Index> ranks{10};
  int alpha_max = 5;
  int omega_steps = 5;
  std::string policy = "fixed";
  std::string method = "all";
  int trials = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  bool summary = false;
  std::string out;
  std::string format = "csv";
};

int run_bench(const BenchArgs& args) {
  const Matrix M = load_matrix(args.input);

  BenchOptions options;
  options.ranks = args.ranks;
  options.alpha_max = args.alpha_max;
  options.omega_steps = args.omega_steps;
  options.trials = args.trials;
  options.seed = args.seed;
  options.threads = args.threads;
  if (args.policy == "cubic")
    options.policy = OmegaPolicy::AlphaCubed;
  else if (args.policy == "vary")
    options.policy = OmegaPolicy::VaryOmega;
  if (args.method != "all") {
    options.methods.curplus = args.method == "curplus";
    options.methods.cur_f = args.method == "cur-f";
    options.methods.cur_e = args.method == "cur-e";
  }

  const auto records = bench_baselines(M, options);

  const auto emit = [&](std::ostream& out) {
    if (args.format == "json")
      out << to_json(records).dump(2) << "\n";
    else
      write_records_csv(records, out);
  };
  if (args.out.empty()) {
    emit(std::cout);
  } else {
    auto out = open_or_throw(args.out);
    emit(out);
  }

  if (args.summary) {
    for (const auto& cell : summarize(records))
      std::cerr << cell.method << " r=" << cell.r << " alpha=" << cell.alpha
                << " |Omega|=" << cell.omega_size
                << " mean ell_F=" << cell.mean_ell_F
                << " mean ell_s=" << cell.mean_ell_s << " ("
                << cell.trials << " trials, " << cell.failures
                << " failures)\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CUR+ low-rank approximation from sampled rows, columns and "
               "entries"};
  app.require_subcommand(1);
  app.set_config("--config");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a synthetic matrix");
  gen->add_option("--kind", gen_args.kind, "lowrank or skewed")
      ->check(CLI::IsMember({"lowrank", "skewed"}));
  gen->add_option("--n", gen_args.n, "rows")->required();
  gen->add_option("--m", gen_args.m, "columns")->required();
  gen->add_option("--rank", gen_args.rank, "target rank")->required();
  gen->add_option("--seed", gen_args.seed, "random seed");
  gen->add_option("--decay", gen_args.decay, "power-decay exponent (skewed)");
  gen->add_option("--gap", gen_args.gap, "sigma_r / sigma_{r+1} floor (skewed)");
  gen->add_option("--out", gen_args.out, "output file (.mtx or .csv)")
      ->required();

  ApproxArgs approx_args;
  auto* approx = app.add_subcommand(
      "approx", "CUR+ approximation of a partially observed matrix");
  approx->add_option("--input", approx_args.input, "matrix file")->required();
  approx->add_option("--rank", approx_args.rank, "target rank")->required();
  approx->add_option("--d", approx_args.d, "column/row sample budget")
      ->required();
  approx->add_option("--d-rows", approx_args.d_rows,
                     "row budget when different from --d");
  approx->add_option("--omega", approx_args.omega, "observed-entry budget")
      ->required();
  approx->add_option("--seed", approx_args.seed, "random seed");
  approx->add_option("--solver", approx_args.solver, "auto, direct or cg")
      ->check(CLI::IsMember({"auto", "direct", "cg"}));
  approx->add_option("--ridge", approx_args.ridge, "ridge regularization");
  approx->add_option("--out", approx_args.out,
                     "output prefix for .json/.U.mtx/.Z.mtx/.V.mtx");

  DiagnoseArgs diag_args;
  auto* diagnose =
      app.add_subcommand("diagnose", "incoherence and numerical-rank report");
  diagnose->add_option("--input", diag_args.input, "matrix file")->required();
  diagnose->add_option("--rank", diag_args.rank, "target rank")->required();
  diagnose->add_option("--eta", diag_args.eta,
                       "'auto' (= sigma_r^2 / m n) or a value");
  diagnose->add_flag("--raw-mu-eta", diag_args.raw_mu_eta,
                     "use the unnormalized spectrum weighting");
  diagnose->add_option("--d", diag_args.d,
                       "also report mu_hat from a d-column/row sample");
  diagnose->add_option("--seed", diag_args.seed, "sampling seed for mu_hat");
  diagnose->add_option("--out", diag_args.out, "write JSON here (default stdout)");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand(
      "sweep", "search minimal d and |Omega| for perfect recovery");
  sweep->add_option("--n", sweep_args.n_list, "matrix sizes");
  sweep->add_option("--rank", sweep_args.r_list, "target ranks");
  sweep->add_option("--seed", sweep_args.seed, "master seed");
  sweep->add_option("--threshold", sweep_args.threshold,
                    "relative recovery threshold");
  sweep->add_option("--trials", sweep_args.trials, "trials per point");
  sweep->add_flag("--no-omega-search", sweep_args.no_omega,
                  "only search minimal d");
  sweep->add_option("--threads", sweep_args.threads, "parallel trials");
  sweep->add_option("--out", sweep_args.out, "output file (default stdout)");
  sweep->add_option("--out-format", sweep_args.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  BenchArgs bench_args;
  auto* bench = app.add_subcommand(
      "bench", "compare CUR+ against the cur-f / cur-e baselines");
  bench->add_option("--input", bench_args.input, "matrix file")->required();
  bench->add_option("--rank", bench_args.ranks, "target ranks");
  bench->add_option("--alpha-max", bench_args.alpha_max,
                    "largest alpha (d1 = alpha r)");
  bench->add_option("--omega-steps", bench_args.omega_steps,
                    "steps of Omega_0 for the vary policy");
  bench->add_option("--omega-policy", bench_args.policy,
                    "fixed, cubic or vary")
      ->check(CLI::IsMember({"fixed", "cubic", "vary"}));
  bench->add_option("--method", bench_args.method,
                    "curplus, cur-f, cur-e or all")
      ->check(CLI::IsMember({"curplus", "cur-f", "cur-e", "all"}));
  bench->add_option("--trials", bench_args.trials, "trials per point");
  bench->add_option("--seed", bench_args.seed, "master seed");
  bench->add_option("--threads", bench_args.threads, "parallel trials");
  bench->add_flag("--summary", bench_args.summary,
                  "print per-cell means to stderr");
  bench->add_option("--out", bench_args.out, "output file (default stdout)");
  bench->add_option("--out-format", bench_args.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen(gen_args);
    if (*approx) return run_approx(approx_args);
    if (*diagnose) return run_diagnose(diag_args);
    if (*sweep) return run_sweep(sweep_args);
    if (*bench) return run_bench(bench_args);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

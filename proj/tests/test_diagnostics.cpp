#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "curplus/diagnostics.hpp"
#include "curplus/mask.hpp"
#include "curplus/sampling.hpp"
#include "curplus/synth.hpp"
#include "helpers.hpp"

using namespace curplus;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("incoherence of the all-ones matrix is one", "[diagnostics]") {
  const Matrix M = Matrix::Ones(12, 12);
  CHECK_THAT(incoherence_mu(M, 1), WithinRel(1.0, 1e-10));
}

TEST_CASE("incoherence of the identity is n/r", "[diagnostics]") {
  const Index n = 10, r = 4;
  const Matrix M = Matrix::Identity(n, n);
  CHECK_THAT(incoherence_mu(M, r),
             WithinRel(static_cast<double>(n) / static_cast<double>(r), 1e-10));
}

TEST_CASE("incoherence rejects ranks above the numerical rank",
          "[diagnostics]") {
  const Matrix M = gen_low_rank(12, 10, 2, 3);
  REQUIRE_THROWS_AS(incoherence_mu(M, 5), std::invalid_argument);
}

TEST_CASE("Gaussian-factor matrices live in the expected incoherence band",
          "[diagnostics]") {
  // Reported range for this construction is about [1.41, 2.49] over a grid
  // of larger sizes; at n = 1000 the max-of-n row norm pushes r = 10 a bit
  // above that, so allow headroom while still catching gross errors (a
  // coherent construction would sit near n/r = 100).
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Matrix M = gen_low_rank(1000, 1000, 10, seed);
    const double mu10 = incoherence_mu(M, 10);
    INFO("seed " << seed << " mu(10) " << mu10);
    CHECK(mu10 >= 1.2);
    CHECK(mu10 <= 3.5);
  }
  const Matrix M = gen_low_rank(1000, 1000, 20, 1);
  const double mu20 = incoherence_mu(M, 20);
  CHECK(mu20 >= 1.2);
  CHECK(mu20 <= 2.6);
}

TEST_CASE("mu and mu_hat stay within their definitional bounds",
          "[diagnostics]") {
  Rng rng(601);
  for (int rep = 0; rep < 10; ++rep) {
    const Index n = 12 + static_cast<Index>(rng.below(20));
    const Index m = 8 + static_cast<Index>(rng.below(20));
    const Index r = 1 + static_cast<Index>(rng.below(4));
    const Matrix M = test::random_matrix(n, m, rng);
    const double mu = incoherence_mu(M, r);
    CHECK(mu >= 1.0 - 1e-12);
    CHECK(mu <= static_cast<double>(std::max(n, m)) / r + 1e-9);

    const Matrix U = test::random_orthonormal(n, r, rng);
    const Matrix V = test::random_orthonormal(m, r, rng);
    const double mu_hat = incoherence_mu_hat(U, V);
    CHECK(mu_hat >= 1.0 - 1e-12);
    CHECK(mu_hat <= static_cast<double>(std::max(n, m)) / r + 1e-9);
  }
}

TEST_CASE("mu_hat equals mu after exact-rank recovery", "[diagnostics]") {
  const Index n = 50, r = 3;
  const Matrix M = gen_low_rank(n, n, r, 21);
  const SvdResult svd = truncated_svd(M, r);
  CHECK_THAT(incoherence_mu_hat(svd.U, svd.V),
             WithinRel(incoherence_mu(M, r), 1e-9));
}

TEST_CASE("mu_hat of canonical bases is n/r", "[diagnostics]") {
  const Index n = 12, m = 9, r = 3;
  CHECK_THAT(incoherence_mu_hat(Matrix::Identity(n, r), Matrix::Identity(m, r)),
             WithinRel(static_cast<double>(n) / r, 1e-12));
}

TEST_CASE("mu_hat against a direct row-norm scan", "[diagnostics]") {
  Rng rng(602);
  const Index n = 200, r = 5;
  const Matrix U = test::random_orthonormal(n, r, rng);
  const Matrix V = test::random_orthonormal(n, r, rng);
  const double got = incoherence_mu_hat(U, V);

  double expected = 0.0;
  for (Index i = 0; i < n; ++i) {
    expected = std::max(expected,
                        static_cast<double>(n) / r * U.row(i).squaredNorm());
    expected = std::max(expected,
                        static_cast<double>(n) / r * V.row(i).squaredNorm());
  }
  CHECK_THAT(got, WithinRel(expected, 1e-12));
  CHECK(got >= 1.0);
  CHECK(got <= static_cast<double>(n) / r);
}

TEST_CASE("numerical rank at eta zero counts nonzero singular values",
          "[diagnostics]") {
  Vector sigma(5);
  sigma << 4.0, 2.0, 1.0, 0.0, 0.0;
  CHECK_THAT(numerical_rank(sigma, 0.0, 7, 5), WithinAbs(3.0, 1e-14));
}

TEST_CASE("numerical rank of a flat spectrum at matched eta is half the count",
          "[diagnostics]") {
  const Index count = 4;
  Vector sigma = Vector::Constant(count, 3.0);
  const Index n = 6, m = 4;
  const double eta = sigma(0) * sigma(0) / (static_cast<double>(n) * m);
  CHECK_THAT(numerical_rank(sigma, eta, n, m),
             WithinAbs(static_cast<double>(count) / 2.0, 1e-12));
}

TEST_CASE("numerical rank hand-evaluated example", "[diagnostics]") {
  Vector sigma(3);
  sigma << 4.0, 2.0, 1.0;
  const Index n = 3, m = 3;
  const double eta = sigma(1) * sigma(1) / 9.0;  // sigma_r^2 / (m n), r = 2
  // 16/20 + 4/8 + 1/5 = 1.5
  CHECK_THAT(numerical_rank(sigma, eta, n, m), WithinAbs(1.5, 1e-12));
}

TEST_CASE("numerical rank decreases in eta", "[diagnostics]") {
  Rng rng(603);
  const Matrix M = test::random_matrix(15, 10, rng);
  const Vector sigma = thin_svd(M).sigma;
  double prev = numerical_rank(sigma, 0.0, 15, 10);
  for (double eta = 1e-8; eta <= 1e2; eta *= 10.0) {
    const double cur = numerical_rank(sigma, eta, 15, 10);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("mu_eta of the all-ones matrix is one for any eta",
          "[diagnostics]") {
  const Matrix M = Matrix::Ones(9, 9);
  for (const double eta : {1e-6, 1e-2, 1.0, 50.0})
    CHECK_THAT(incoherence_mu_eta(M, eta), WithinRel(1.0, 1e-9));
}

TEST_CASE("mu_eta of a diagonal matrix matches the closed form",
          "[diagnostics]") {
  const Index n = 6;
  Matrix M = Matrix::Zero(n, n);
  M.diagonal() << 8.0, 5.0, 3.0, 2.0, 1.0, 0.5;
  const double eta = 0.01;
  const double mn = static_cast<double>(n) * n;

  const Vector sigma = M.diagonal();
  double soft_rank = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double s2 = sigma(i) * sigma(i);
    soft_rank += s2 / (s2 + mn * eta);
  }
  double expected = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double s2 = sigma(i) * sigma(i);
    expected = std::max(expected,
                        static_cast<double>(n) / soft_rank * s2 / (s2 + mn * eta));
  }
  CHECK_THAT(incoherence_mu_eta(M, eta), WithinRel(expected, 1e-10));
}

TEST_CASE("mu_eta is at least one on random matrices", "[diagnostics]") {
  Rng rng(604);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 5 + static_cast<Index>(rng.below(12));
    const Index m = 4 + static_cast<Index>(rng.below(12));
    const Matrix M = test::random_matrix(n, m, rng);
    const double eta = std::pow(10.0, -6.0 + 8.0 * rng.uniform01());
    CHECK(incoherence_mu_eta(M, eta) >= 1.0 - 1e-10);
  }
}

TEST_CASE("the raw mu_eta reading can drop below one", "[diagnostics]") {
  // With small singular values the unnormalized weighting loses the >= 1
  // guarantee; that is why the normalized reading is the default.
  const Matrix M = 0.1 * Matrix::Identity(6, 6);
  CHECK(incoherence_mu_eta(M, 1e-12, /*normalized=*/false) < 1.0);
  CHECK(incoherence_mu_eta(M, 1e-12, /*normalized=*/true) >= 1.0 - 1e-12);
}

TEST_CASE("relating full-rank incoherence to the soft quantities",
          "[diagnostics]") {
  // r mu(r) <= 2 r(M, eta) mu(eta) at eta = sigma_r^2 / (m n).
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::PowerDecay;
    spec.r = 5;
    spec.decay_exponent = 1.5;
    spec.gap_ratio = std::sqrt(2.0);
    const Index n = 40, m = 30;
    const Matrix M = gen_skewed(n, m, spec, seed);
    const Vector sigma = thin_svd(M).sigma;
    const double eta =
        sigma(spec.r - 1) * sigma(spec.r - 1) / (static_cast<double>(n) * m);
    const double lhs = spec.r * incoherence_mu(M, spec.r);
    const double rhs = 2.0 * numerical_rank(sigma, eta, n, m) *
                       incoherence_mu_eta(M, eta);
    INFO("seed " << seed << " lhs " << lhs << " rhs " << rhs);
    CHECK(lhs <= rhs * (1.0 + 1e-10));
  }
}

TEST_CASE("full observation makes the Hessian the identity", "[diagnostics]") {
  Rng rng(605);
  const Index n = 8, m = 6, r = 2;
  const Matrix U = test::random_orthonormal(n, r, rng);
  const Matrix V = test::random_orthonormal(m, r, rng);
  const Matrix M = test::random_matrix(n, m, rng);
  const ObservationSet obs = sample_entries(M, n * m, 1);
  const double min_eig = hessian_min_eig(obs, U, V);
  CHECK_THAT(min_eig, WithinAbs(1.0, 1e-12));

  // lambda_min <= lambda_max and both bracket one at full observation.
  const Matrix H = assemble_hessian(obs, U, V);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  CHECK(min_eig <= es.eigenvalues()(r * r - 1) + 1e-14);
  CHECK_THAT(es.eigenvalues()(r * r - 1), WithinAbs(1.0, 1e-12));
}

TEST_CASE("too few observations give a singular Hessian", "[diagnostics]") {
  Rng rng(606);
  const Index n = 8, m = 6, r = 3;
  const Matrix U = test::random_orthonormal(n, r, rng);
  const Matrix V = test::random_orthonormal(m, r, rng);
  const Matrix M = test::random_matrix(n, m, rng);
  const ObservationSet obs = sample_entries(M, r * r - 1, 2);
  CHECK(std::abs(hessian_min_eig(obs, U, V)) <= 1e-12);
}

TEST_CASE("error metrics are one at the best rank-r approximation",
          "[diagnostics]") {
  Rng rng(607);
  const Index n = 18, m = 14, r = 3;
  const Matrix M = test::random_matrix(n, m, rng);
  const SvdResult svd = truncated_svd(M, r);
  const FactoredLowRank best{svd.U, Matrix(svd.sigma.asDiagonal()), svd.V};
  const ErrorMetrics metrics = error_metrics(M, best, r);
  REQUIRE(metrics.ell_s.has_value());
  REQUIRE(metrics.ell_F.has_value());
  CHECK_THAT(*metrics.ell_s, WithinRel(1.0, 1e-6));
  CHECK_THAT(*metrics.ell_F, WithinRel(1.0, 1e-6));
}

TEST_CASE("error metrics vanish on an exact representation", "[diagnostics]") {
  Rng rng(608);
  const Index n = 12, m = 9;
  const Matrix M = test::random_matrix(n, m, rng);
  const SvdResult svd = thin_svd(M);
  const FactoredLowRank exact{svd.U, Matrix(svd.sigma.asDiagonal()), svd.V};
  const ErrorMetrics metrics = error_metrics(M, exact, 3);
  CHECK(metrics.abs_spectral <= 1e-7 * svd.sigma(0));
  CHECK(metrics.abs_frobenius <= 1e-7 * M.norm());
}

TEST_CASE("matrix-free error metrics match dense brute force",
          "[diagnostics]") {
  Rng rng(609);
  const Index n = 30, m = 20, r = 3;
  const Matrix M = test::random_matrix(n, m, rng);
  const Matrix U = test::random_orthonormal(n, r, rng);
  const Matrix V = test::random_orthonormal(m, r, rng);
  const Matrix Z = test::random_matrix(r, r, rng);
  const ErrorMetrics metrics = error_metrics(M, FactoredLowRank{U, Z, V}, r);

  const Matrix diff = M - U * Z * V.transpose();
  Eigen::BDCSVD<Matrix> svd(diff);
  CHECK_THAT(metrics.abs_spectral,
             WithinRel(svd.singularValues()(0), 1e-8));
  CHECK_THAT(metrics.abs_frobenius, WithinRel(diff.norm(), 1e-8));
}

TEST_CASE("rank-deficient targets flag relative errors undefined",
          "[diagnostics]") {
  const Index n = 16, m = 12, r = 3;
  const Matrix M = gen_low_rank(n, m, r, 44);  // exactly rank r
  const SvdResult svd = truncated_svd(M, r);
  const FactoredLowRank approx{svd.U, Matrix(svd.sigma.asDiagonal()), svd.V};
  const ErrorMetrics metrics = error_metrics(M, approx, r);
  CHECK_FALSE(metrics.ell_s.has_value());
  CHECK_FALSE(metrics.ell_F.has_value());
  CHECK(metrics.abs_spectral >= 0.0);
  CHECK(metrics.abs_frobenius >= 0.0);
}

TEST_CASE("incoherence_report fills eta automatically", "[diagnostics]") {
  const Matrix M = gen_low_rank(30, 30, 4, 9) +
                   0.01 * gen_low_rank(30, 30, 10, 10);
  const Index r = 4;
  const IncoherenceReport rep = incoherence_report(M, r);
  const Vector sigma = thin_svd(M).sigma;
  const double expected_eta = sigma(r - 1) * sigma(r - 1) / (30.0 * 30.0);
  CHECK_THAT(rep.eta, WithinRel(expected_eta, 1e-12));
  CHECK(rep.mu_r >= 1.0);
  CHECK(rep.mu_eta >= 1.0);
  CHECK(rep.numerical_rank > 0.0);
}

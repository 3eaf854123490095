#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

#include "helpers.hpp"
#include "mwtcs/dictionary.hpp"
#include "mwtcs/linear_ops.hpp"
#include "oracles.hpp"

using mwtcs::MeasurementOperator;

namespace {

// max relative adjoint defect over random probe pairs
double adjoint_defect(const mwtcs::LinearOperatorHandle& op, std::uint64_t seed,
                      int trials = 100) {
  mwtcs::Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd x(op.in_dim);
    Eigen::VectorXd y(op.out_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.normal();
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.apply_adjoint(y));
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

std::vector<Eigen::Index> all_indices(Eigen::Index n) {
  std::vector<Eigen::Index> v(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

}  // namespace

TEST_CASE("mask keeping every pixel is the identity") {
  const MeasurementOperator mo = mwtcs::make_mask_operator(all_indices(9), 9);
  const Eigen::VectorXd x = testutil::random_vector(9, 101);
  REQUIRE((mo.op.apply(x) - x).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((mo.op.apply_adjoint(x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mask gathers kept pixels and scatters on the adjoint") {
  const MeasurementOperator mo = mwtcs::make_mask_operator({0}, 2);
  Eigen::VectorXd x(2);
  x << 5.0, 7.0;
  const Eigen::VectorXd y = mo.op.apply(x);
  REQUIRE(y.size() == 1);
  REQUIRE(y[0] == 5.0);
  Eigen::VectorXd back = mo.op.apply_adjoint(Eigen::VectorXd::Constant(1, 3.0));
  REQUIRE(back.size() == 2);
  REQUIRE(back[0] == 3.0);
  REQUIRE(back[1] == 0.0);
}

TEST_CASE("mask operator satisfies the adjoint identity") {
  const MeasurementOperator mo = mwtcs::make_mask_operator({1, 4, 5, 10, 14}, 16);
  REQUIRE(adjoint_defect(mo.op, 111) < 1e-12);
}

TEST_CASE("mask rejects bad kept sets") {
  REQUIRE_THROWS_AS(mwtcs::make_mask_operator({}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_mask_operator({0, 4}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_mask_operator({-1, 2}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_mask_operator({2, 2}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_mask_operator({3, 1}, 4), std::invalid_argument);
}

TEST_CASE("blur_downsample with factor 1 is the identity") {
  const MeasurementOperator mo = mwtcs::make_blur_downsample_operator(1, 16);
  const Eigen::VectorXd x = testutil::random_vector(16, 121);
  REQUIRE((mo.op.apply(x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("blur_downsample averages factor x factor blocks") {
  // 4x4 image with distinct entries 0..15, factor 2
  Eigen::VectorXd x(16);
  for (int i = 0; i < 16; ++i) x[i] = static_cast<double>(i);
  const MeasurementOperator mo = mwtcs::make_blur_downsample_operator(2, 16);
  REQUIRE(mo.op.out_dim == 4);
  const Eigen::VectorXd y = mo.op.apply(x);
  // block (0,0) holds pixels {0,1,4,5}, and so on
  REQUIRE(y[0] == Catch::Approx(2.5).margin(1e-14));
  REQUIRE(y[1] == Catch::Approx(4.5).margin(1e-14));
  REQUIRE(y[2] == Catch::Approx(10.5).margin(1e-14));
  REQUIRE(y[3] == Catch::Approx(12.5).margin(1e-14));

  const Eigen::VectorXd c = Eigen::VectorXd::Constant(16, 3.25);
  REQUIRE((mo.op.apply(c) - Eigen::VectorXd::Constant(4, 3.25)).cwiseAbs().maxCoeff() < 1e-14);

  REQUIRE(adjoint_defect(mo.op, 122) < 1e-12);
}

TEST_CASE("blur_downsample rejects bad shapes") {
  REQUIRE_THROWS_AS(mwtcs::make_blur_downsample_operator(2, 15), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_blur_downsample_operator(3, 16), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_blur_downsample_operator(0, 16), std::invalid_argument);
}

TEST_CASE("complete fourier_subsample is unitary (Parseval)") {
  const int m = 6;
  const MeasurementOperator mo =
      mwtcs::make_fourier_subsample_operator(all_indices(m * m), m);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd x = testutil::random_vector(m * m, 131 + t);
    const double defect = std::abs(mo.op.apply(x).norm() - x.norm());
    REQUIRE(defect < 1e-10 * x.norm());
  }
}

TEST_CASE("fourier_subsample rows match the brute-force 2D DFT") {
  const int m = 5;
  const std::vector<Eigen::Index> kept = {0, 1, 7, 12, 23};
  const MeasurementOperator mo = mwtcs::make_fourier_subsample_operator(kept, m);
  REQUIRE(mo.op.out_dim == 10);

  const Eigen::VectorXd x = testutil::random_vector(m * m, 141);
  const Eigen::VectorXd y = mo.op.apply(x);
  const Eigen::VectorXcd full = oracle::dft2(x, m);
  for (std::size_t t = 0; t < kept.size(); ++t) {
    const std::complex<double> got(y[static_cast<Eigen::Index>(2 * t)],
                                   y[static_cast<Eigen::Index>(2 * t + 1)]);
    REQUIRE(std::abs(got - full[kept[t]]) < 1e-10);
  }

  // constant image concentrates on DC: y = (c * m, 0)
  const double c = 2.5;
  const MeasurementOperator dc = mwtcs::make_fourier_subsample_operator({0}, m);
  const Eigen::VectorXd y0 = dc.op.apply(Eigen::VectorXd::Constant(m * m, c));
  REQUIRE(y0[0] == Catch::Approx(c * m).margin(1e-12));
  REQUIRE(std::abs(y0[1]) < 1e-12);

  REQUIRE(adjoint_defect(mo.op, 142) < 1e-12);
}

TEST_CASE("fourier_subsample rejects bad frequency sets") {
  REQUIRE_THROWS_AS(mwtcs::make_fourier_subsample_operator({}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_fourier_subsample_operator({16}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_fourier_subsample_operator({-1}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_fourier_subsample_operator({3, 3}, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::make_fourier_subsample_operator({0}, 0), std::invalid_argument);
}

TEST_CASE("radial_frequency_set keeps the lowest wrapped frequencies") {
  // m = 4: distance-1 ring is f in {1, 3, 4, 12}
  const std::vector<Eigen::Index> got = mwtcs::radial_frequency_set(4, 0.3125);
  REQUIRE(got == std::vector<Eigen::Index>{0, 1, 3, 4, 12});

  const std::vector<Eigen::Index> all = mwtcs::radial_frequency_set(4, 1.0);
  REQUIRE(all.size() == 16);
  for (Eigen::Index f = 0; f < 16; ++f) REQUIRE(all[static_cast<std::size_t>(f)] == f);

  // tiny fractions still include DC
  const std::vector<Eigen::Index> one = mwtcs::radial_frequency_set(8, 1e-6);
  REQUIRE(one == std::vector<Eigen::Index>{0});

  REQUIRE_THROWS_AS(mwtcs::radial_frequency_set(0, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::radial_frequency_set(4, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::radial_frequency_set(4, 1.5), std::invalid_argument);
}

TEST_CASE("identity mask composed with a dictionary reproduces plain fista bit-for-bit") {
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(4, 1.0);
  const MeasurementOperator mo = mwtcs::make_mask_operator(all_indices(16), 16);
  const Eigen::VectorXd y = testutil::random_vector(16, 151);
  const double lambda_reg = 1e-2;
  const int iters = 60;

  const mwtcs::IterativeResult direct =
      mwtcs::fista(mwtcs::dense_operator(dict.atoms), y, lambda_reg, iters);
  mwtcs::RecoverParams params;
  params.lambda_reg = lambda_reg;
  params.iters = iters;
  const mwtcs::RecoverResult composed =
      mwtcs::recover_sparse(mo, dict, y, mwtcs::RecoverSolver::fista, params);

  REQUIRE(direct.objective.size() == composed.objective.size());
  for (std::size_t t = 0; t < direct.objective.size(); ++t)
    REQUIRE(direct.objective[t] == composed.objective[t]);
  REQUIRE((direct.code.coefficients - composed.code.coefficients).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("recover_sparse with identity measurements recovers a 3-sparse image") {
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(8, 1.0);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(64);
  s[3] = 1.0;
  s[20] = -0.7;
  s[41] = 0.5;
  const Eigen::VectorXd x_true = dict.atoms * s;
  const MeasurementOperator mo = mwtcs::make_mask_operator(all_indices(64), 64);

  mwtcs::RecoverParams params;
  params.lambda_reg = 1e-4;
  params.iters = 1500;
  params.debias = true;
  const mwtcs::RecoverResult res =
      mwtcs::recover_sparse(mo, dict, x_true, mwtcs::RecoverSolver::fista, params);
  REQUIRE((res.x_hat - x_true).norm() < 1e-4 * x_true.norm());

  mwtcs::RecoverParams op;
  op.k_max = 3;
  const mwtcs::RecoverResult viaomp =
      mwtcs::recover_sparse(mo, dict, x_true, mwtcs::RecoverSolver::omp, op);
  REQUIRE(viaomp.code.support == std::vector<Eigen::Index>{3, 20, 41});
  REQUIRE((viaomp.x_hat - x_true).norm() < 1e-12 * x_true.norm());
}

TEST_CASE("recover_sparse of zero data returns zero") {
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(4, 1.0);
  const MeasurementOperator mo = mwtcs::make_mask_operator({0, 3, 7, 9}, 16);
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(4);
  for (auto solver : {mwtcs::RecoverSolver::fista, mwtcs::RecoverSolver::omp}) {
    const mwtcs::RecoverResult res = mwtcs::recover_sparse(mo, dict, y, solver);
    REQUIRE(res.x_hat.norm() == 0.0);
    REQUIRE(res.code.support.empty());
  }
}

TEST_CASE("half-pixel inpainting recovers a DCT-sparse image") {
  const int m = 8;
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(m, 1.0);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(64);
  s[5] = 1.2;
  s[17] = -0.9;
  s[34] = 0.6;
  const Eigen::VectorXd x_true = dict.atoms * s;

  // deterministic half mask
  std::vector<Eigen::Index> pool = all_indices(64);
  mwtcs::Rng rng(161);
  for (std::size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1],
              pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  pool.resize(32);
  std::sort(pool.begin(), pool.end());
  const MeasurementOperator mo = mwtcs::make_mask_operator(pool, 64);

  mwtcs::RecoverParams params;
  params.lambda_reg = 1e-4;
  params.iters = 3000;
  params.debias = true;
  const mwtcs::RecoverResult res = mwtcs::recover_sparse(
      mo, dict, mo.op.apply(x_true), mwtcs::RecoverSolver::fista, params);
  REQUIRE((res.x_hat - x_true).norm() < 1e-2 * x_true.norm());
}

TEST_CASE("compose_with_dictionary checks dimensions") {
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(4, 1.0);
  const MeasurementOperator mo = mwtcs::make_mask_operator({0, 1}, 9);
  REQUIRE_THROWS_AS(mwtcs::compose_with_dictionary(mo, dict), std::invalid_argument);
}

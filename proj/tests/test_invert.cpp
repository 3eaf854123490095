#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "mwtcs/dictionary.hpp"
#include "mwtcs/forward.hpp"
#include "mwtcs/invert.hpp"

using mwtcs::cplx;
using mwtcs::RunConfig;
using mwtcs::ScatteringScene;

namespace {

RunConfig scene_config(int m, int n_inc, int n_rec) {
  RunConfig cfg;
  cfg.grid_pixels_per_side = m;
  cfg.n_inc = n_inc;
  cfg.n_rec = n_rec;
  return cfg;
}

Eigen::VectorXd disk_contrast(const ScatteringScene& sc, double cx, double cy,
                              double radius, double value) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sc.n_pixels());
  for (Eigen::Index i = 0; i < sc.n_pixels(); ++i) {
    const double dx = sc.pixel_centers(i, 0) - cx;
    const double dy = sc.pixel_centers(i, 1) - cy;
    if (std::hypot(dx, dy) <= radius) x[i] = value;
  }
  return x;
}

Eigen::MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                double scale) {
  mwtcs::Rng rng(seed);
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r)
      m(r, c) = scale * cplx(rng.normal(), rng.normal());
  return m;
}

}  // namespace

TEST_CASE("evaluate_cost vanishes at a consistent forward solution") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 4, 8));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const Eigen::VectorXd x = disk_contrast(sc, 0.1, -0.05, 0.3, 1.0);
  const mwtcs::ForwardFields f = mwtcs::forward_solve(sc, g, x);
  const Eigen::MatrixXcd e_inc = mwtcs::incident_fields(sc);
  const Eigen::VectorXcd lam = mwtcs::contrast_to_lambda(sc, x);

  const double cost = mwtcs::evaluate_cost(sc, g, lam, f.total, e_inc, f.scattered, 0.5);
  REQUIRE(cost < 1e-15 * e_inc.squaredNorm());
}

TEST_CASE("evaluate_cost reduces to the data term for a passive domain") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 3, 5));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const Eigen::MatrixXcd e_inc = mwtcs::incident_fields(sc);
  const Eigen::MatrixXcd e_meas = random_complex(5, 3, 201, 0.3);
  const Eigen::VectorXcd lam = Eigen::VectorXcd::Zero(100);

  const double alpha = 0.3;
  const double cost = mwtcs::evaluate_cost(sc, g, lam, e_inc, e_inc, e_meas, alpha);
  REQUIRE(cost == (1.0 - alpha * alpha) * e_meas.squaredNorm());
}

TEST_CASE("evaluate_cost approaches the pure state term as alpha nears one") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 3, 5));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const Eigen::MatrixXcd e_inc = 0.1 * mwtcs::incident_fields(sc);
  const Eigen::MatrixXcd e_meas = Eigen::MatrixXcd::Zero(5, 3);
  Eigen::VectorXd x(100);
  mwtcs::Rng rng(211);
  for (Eigen::Index i = 0; i < 100; ++i) x[i] = rng.uniform();
  const Eigen::VectorXcd lam = mwtcs::contrast_to_lambda(sc, x);

  const Eigen::MatrixXcd cur = lam.asDiagonal() * e_inc;
  const double state = (e_inc - g.g_domain * cur - e_inc).squaredNorm();
  const double data = (g.g_measure * cur - e_meas).squaredNorm();
  REQUIRE(state < 0.5);
  REQUIRE(data < 0.5);

  const double cost = mwtcs::evaluate_cost(sc, g, lam, e_inc, e_inc, e_meas, 0.999);
  REQUIRE(std::abs(cost - state) < 1e-3);

  REQUIRE_THROWS_AS(mwtcs::evaluate_cost(sc, g, lam, e_inc, e_inc, e_meas, 1.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(mwtcs::evaluate_cost(sc, g, lam, e_inc, e_inc, e_meas, 0.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      mwtcs::evaluate_cost(sc, g, lam, e_inc, e_inc.leftCols(2), e_meas, 0.5),
      std::invalid_argument);
}

TEST_CASE("relative_error basics and the zero-truth sentinel") {
  Eigen::VectorXd t(3);
  t << 1.0, 2.0, 2.0;
  REQUIRE(mwtcs::relative_error(t, t) == 0.0);
  REQUIRE(mwtcs::relative_error(Eigen::VectorXd::Zero(3), t) == 1.0);
  REQUIRE(mwtcs::relative_error(2.0 * t, t) == Catch::Approx(1.0).margin(1e-15));
  Eigen::VectorXd h(3);
  h << 3.0, 0.0, 4.0;
  REQUIRE(mwtcs::relative_error(h, Eigen::VectorXd::Zero(3)) == 5.0);
  REQUIRE_THROWS_AS(mwtcs::relative_error(h, Eigen::VectorXd::Zero(4)),
                    std::invalid_argument);
}

TEST_CASE("invert_bp of silence is silence") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 4, 8));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(8, 4);
  const mwtcs::InversionResult res = mwtcs::invert_bp(sc, g, zero);
  REQUIRE(res.method == "bp");
  REQUIRE(res.iterations_run == 0);
  REQUIRE(res.trace.size() == 1);
  REQUIRE(res.contrast.norm() == 0.0);
  REQUIRE(res.trace[0].cost == 0.0);
  REQUIRE((res.e_total - mwtcs::incident_fields(sc)).norm() == 0.0);
}

TEST_CASE("invert_bp concentrates mass near the true scatterer") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(16, 16, 32));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const Eigen::VectorXd x_true = disk_contrast(sc, 0.3, 0.15, 0.25, 1.0);
  REQUIRE(x_true.sum() > 0.0);
  const mwtcs::ForwardFields f = mwtcs::forward_solve(sc, g, x_true);
  const mwtcs::InversionResult res = mwtcs::invert_bp(sc, g, f.scattered);

  REQUIRE(res.contrast.minCoeff() >= 0.0);
  REQUIRE(res.contrast.maxCoeff() > 0.0);

  // at least 60% of the recovered mass within a 2-pixel dilation of the truth
  const int m = sc.m;
  double inside = 0.0;
  for (Eigen::Index i = 0; i < sc.n_pixels(); ++i) {
    const int ri = static_cast<int>(i) / m;
    const int ci = static_cast<int>(i) % m;
    bool close = false;
    for (Eigen::Index j = 0; j < sc.n_pixels() && !close; ++j) {
      if (x_true[j] == 0.0) continue;
      const int rj = static_cast<int>(j) / m;
      const int cj = static_cast<int>(j) % m;
      close = std::max(std::abs(ri - rj), std::abs(ci - cj)) <= 2;
    }
    if (close) inside += res.contrast[i];
  }
  REQUIRE(inside >= 0.6 * res.contrast.sum());
}

TEST_CASE("invert_bp induced fields scale linearly with a measurement phase") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 4, 8));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const Eigen::VectorXd x_true = disk_contrast(sc, 0.0, 0.1, 0.3, 1.0);
  const mwtcs::ForwardFields f = mwtcs::forward_solve(sc, g, x_true);
  const Eigen::MatrixXcd e_inc = mwtcs::incident_fields(sc);

  const cplx c = std::polar(1.0, 0.8);
  const mwtcs::InversionResult a = mwtcs::invert_bp(sc, g, f.scattered);
  const mwtcs::InversionResult b = mwtcs::invert_bp(sc, g, c * f.scattered);

  // gamma_p is phase-invariant, so the induced current (and with it the
  // scattered part of E^t) picks up exactly the factor c
  const Eigen::MatrixXcd ja = a.e_total - e_inc;
  const Eigen::MatrixXcd jb = b.e_total - e_inc;
  REQUIRE((jb - c * ja).norm() < 1e-12 * ja.norm());
}

TEST_CASE("lambda-step operator is the realified cost with a true adjoint") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 4, 8));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(10, 1.0);
  const Eigen::MatrixXcd e_inc = mwtcs::incident_fields(sc);
  const Eigen::MatrixXcd e_total = e_inc + random_complex(100, 4, 221, 0.02);
  const Eigen::MatrixXcd e_meas = random_complex(8, 4, 222, 0.1);
  const double alpha = 0.1;

  mwtcs::detail::LambdaStepOperator lso{&dict.atoms,
                                        &g.g_domain,
                                        &g.g_measure,
                                        &e_total,
                                        sc.lambda_scale(),
                                        alpha,
                                        std::sqrt(1.0 - alpha * alpha)};
  const Eigen::VectorXd y = lso.targets(e_inc, e_meas);

  // ||A s - y||^2 equals the Eq.-(8) cost at lambda = c0 D s
  const Eigen::VectorXd s = testutil::random_vector(100, 223);
  const Eigen::VectorXcd lam = sc.lambda_scale() * (dict.atoms * s).cast<cplx>();
  const double stacked = (lso.apply(s) - y).squaredNorm();
  const double direct = mwtcs::evaluate_cost(sc, g, lam, e_total, e_inc, e_meas, alpha);
  REQUIRE(stacked == Catch::Approx(direct).epsilon(1e-12));

  mwtcs::Rng rng(224);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd u(100);
    Eigen::VectorXd v(lso.out_dim());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    const double lhs = lso.apply(u).dot(v);
    const double rhs = u.dot(lso.apply_adjoint(v));
    REQUIRE(std::abs(lhs - rhs) < 1e-10 * std::max({std::abs(lhs), std::abs(rhs), 1.0}));
  }
}

TEST_CASE("invert_als_cs holds a consistent truth as a fixed point") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 4, 8));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(10, 1.0);
  const Eigen::VectorXd x_true = disk_contrast(sc, 0.1, 0.0, 0.3, 1.0);
  const mwtcs::ForwardFields f = mwtcs::forward_solve(sc, g, x_true);
  const Eigen::MatrixXcd e_inc = mwtcs::incident_fields(sc);

  RunConfig cfg = scene_config(10, 4, 8);
  cfg.fista_lambda = 1e-12;
  cfg.fista_iters = 300;
  cfg.als_iters = 3;

  mwtcs::AlsOptions opts;
  opts.init_code = dict.atoms.transpose() * x_true;  // exact code in an orthonormal basis
  const mwtcs::InversionResult res =
      mwtcs::invert_als_cs(sc, g, f.scattered, e_inc, dict, cfg, opts);

  REQUIRE(res.method == "als_cs");
  REQUIRE(res.fista_lambda_used == 1e-12);
  REQUIRE(res.trace[0].cost < 1e-12 * e_inc.squaredNorm());
  // the iterates drift by LDLT and FISTA roundoff only; measured ~2e-8
  REQUIRE(mwtcs::relative_error(res.contrast, x_true) < 1e-6);
}

TEST_CASE("invert_als_cs traces never increase within an iteration") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(12, 8, 16));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(12, 1.0);
  const Eigen::VectorXd x_true = disk_contrast(sc, 0.2, 0.1, 0.25, 1.0);
  const mwtcs::ForwardFields f = mwtcs::forward_solve(sc, g, x_true);
  const Eigen::MatrixXcd e_inc = mwtcs::incident_fields(sc);

  RunConfig cfg = scene_config(12, 8, 16);
  cfg.fista_iters = 100;
  cfg.als_iters = 4;
  const mwtcs::InversionResult res =
      mwtcs::invert_als_cs(sc, g, f.scattered, e_inc, dict, cfg);

  REQUIRE(res.iterations_run >= 1);
  REQUIRE(res.trace.size() == static_cast<std::size_t>(res.iterations_run) + 1);
  REQUIRE(res.half_trace.size() == 2 * static_cast<std::size_t>(res.iterations_run));
  REQUIRE(res.fista_lambda_used > 0.0);

  for (int it = 1; it <= res.iterations_run; ++it) {
    const mwtcs::TraceRow& prev = res.trace[static_cast<std::size_t>(it) - 1];
    const mwtcs::TraceRow& curr = res.trace[static_cast<std::size_t>(it)];
    const mwtcs::HalfStepRow& et = res.half_trace[2 * static_cast<std::size_t>(it - 1)];
    const mwtcs::HalfStepRow& ls = res.half_trace[2 * static_cast<std::size_t>(it - 1) + 1];
    REQUIRE_FALSE(et.lambda_step);
    REQUIRE(ls.lambda_step);
    // E^t-step is an exact minimizer over the field
    REQUIRE(et.cost <= prev.cost * (1.0 + 1e-10) + 1e-30);
    // Lambda-step keeps the penalized objective from rising
    REQUIRE(ls.penalized <= et.penalized * (1.0 + 1e-10) + 1e-30);
    REQUIRE(curr.cost == ls.cost);
    REQUIRE(curr.penalized ==
            Catch::Approx(curr.cost + 2.0 * res.fista_lambda_used * curr.l1_norm)
                .epsilon(1e-14));
  }

  // the sparse prior should still beat plain back-propagation here
  const mwtcs::InversionResult bp = mwtcs::invert_bp(sc, g, f.scattered);
  REQUIRE(mwtcs::relative_error(res.contrast, x_true) <
          mwtcs::relative_error(bp.contrast, x_true));
}

TEST_CASE("invert_als_cs is deterministic and maps zero data to zero contrast") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 4, 8));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(10, 1.0);
  const Eigen::VectorXd x_true = disk_contrast(sc, -0.1, 0.1, 0.3, 1.0);
  const mwtcs::ForwardFields f = mwtcs::forward_solve(sc, g, x_true);
  const Eigen::MatrixXcd e_inc = mwtcs::incident_fields(sc);

  RunConfig cfg = scene_config(10, 4, 8);
  cfg.fista_iters = 60;
  cfg.als_iters = 2;
  const mwtcs::InversionResult a =
      mwtcs::invert_als_cs(sc, g, f.scattered, e_inc, dict, cfg);
  const mwtcs::InversionResult b =
      mwtcs::invert_als_cs(sc, g, f.scattered, e_inc, dict, cfg);
  REQUIRE((a.contrast - b.contrast).cwiseAbs().maxCoeff() == 0.0);

  const mwtcs::InversionResult quiet =
      mwtcs::invert_als_cs(sc, g, Eigen::MatrixXcd::Zero(8, 4), e_inc, dict, cfg);
  // the E^t solve leaves ulp-level residue in E^t - E^i, so the code picks up
  // machine noise rather than exact zeros
  REQUIRE(quiet.contrast.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("invert_als_cs validates its inputs") {
  const ScatteringScene sc = mwtcs::build_scene(scene_config(10, 4, 8));
  const mwtcs::GreensOperators g = mwtcs::build_greens(sc);
  const mwtcs::Dictionary dict = mwtcs::dct_dictionary(10, 1.0);
  const Eigen::MatrixXcd e_inc = mwtcs::incident_fields(sc);
  const Eigen::MatrixXcd e_meas = Eigen::MatrixXcd::Zero(8, 4);
  RunConfig cfg = scene_config(10, 4, 8);

  const mwtcs::Dictionary wrong = mwtcs::dct_dictionary(9, 1.0);
  REQUIRE_THROWS_AS(mwtcs::invert_als_cs(sc, g, e_meas, e_inc, wrong, cfg),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      mwtcs::invert_als_cs(sc, g, Eigen::MatrixXcd::Zero(7, 4), e_inc, dict, cfg),
      std::invalid_argument);

  RunConfig bad = cfg;
  bad.alpha = 1.0;
  REQUIRE_THROWS_AS(mwtcs::invert_als_cs(sc, g, e_meas, e_inc, dict, bad),
                    std::invalid_argument);

  mwtcs::AlsOptions opts;
  opts.init_code = Eigen::VectorXd::Zero(99);
  REQUIRE_THROWS_AS(mwtcs::invert_als_cs(sc, g, e_meas, e_inc, dict, cfg, opts),
                    std::invalid_argument);

  REQUIRE_THROWS_AS(mwtcs::invert_bp(sc, g, Eigen::MatrixXcd::Zero(7, 4)),
                    std::invalid_argument);
}

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mwtcs/config.hpp"
#include "mwtcs/rng.hpp"

namespace mwtcs {

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

using cplx = std::complex<double>;

/// Outgoing-wave Hankel function H^(2)_n = J_n - i Y_n (e^{+j omega t} time
/// convention throughout).
inline cplx hankel2(int n, double x) {
  return {std::cyl_bessel_j(static_cast<double>(n), x),
          -std::cyl_neumann(static_cast<double>(n), x)};
}

/// TM illumination of an M x M dielectric grid by line sources on a circle,
/// measured by receivers on another circle. Pixel centers are row-major from
/// the top-left corner; antennas start at angle 0 and advance counterclockwise.
struct ScatteringScene {
  int m = 0;                       // pixels per side, I = m*m
  double side_m = 0.0;
  double pixel_side = 0.0;         // h = side/m
  double pixel_area = 0.0;         // h^2
  double frequency_hz = 0.0;
  double omega = 0.0;
  double k = 0.0;                  // omega*sqrt(mu0*eps0); equals the paper's Omega
  double epsilon0 = 0.0;
  double mu0 = 0.0;
  Eigen::MatrixXd pixel_centers;   // I x 2
  Eigen::MatrixXd tx;              // N_inc x 2
  Eigen::MatrixXd rx;              // N_rec x 2
  bool discretization_warning = false;  // k*h in (0.7, 1.5]

  Eigen::Index n_pixels() const { return pixel_centers.rows(); }
  Eigen::Index n_inc() const { return tx.rows(); }
  Eigen::Index n_rec() const { return rx.rows(); }

  // lambda_i = lambda_scale * x_i, the Eq.-style contrast-to-current factor
  cplx lambda_scale() const { return cplx(0.0, -k * epsilon0 * pixel_area); }
};

inline ScatteringScene build_scene(const RunConfig& cfg) {
  cfg.validate();
  ScatteringScene sc;
  sc.m = cfg.grid_pixels_per_side;
  sc.side_m = cfg.grid_side_m;
  sc.pixel_side = cfg.grid_side_m / cfg.grid_pixels_per_side;
  sc.pixel_area = sc.pixel_side * sc.pixel_side;
  sc.frequency_hz = cfg.frequency_hz;
  sc.omega = 2.0 * std::numbers::pi * cfg.frequency_hz;
  sc.epsilon0 = cfg.epsilon0;
  sc.mu0 = 4.0e-7 * std::numbers::pi;
  sc.k = sc.omega * std::sqrt(sc.mu0 * sc.epsilon0);

  const double kh = sc.k * sc.pixel_side;
  if (kh > 1.5)
    throw NumericalError("build_scene: k*pixel_side = " + std::to_string(kh) +
                         " > 1.5, grid too coarse for the wavelength");
  sc.discretization_warning = kh > 0.7;

  const Eigen::Index i_dim = static_cast<Eigen::Index>(sc.m) * sc.m;
  sc.pixel_centers.resize(i_dim, 2);
  for (int r = 0; r < sc.m; ++r)
    for (int c = 0; c < sc.m; ++c) {
      sc.pixel_centers(static_cast<Eigen::Index>(r) * sc.m + c, 0) =
          -sc.side_m / 2.0 + (c + 0.5) * sc.pixel_side;
      sc.pixel_centers(static_cast<Eigen::Index>(r) * sc.m + c, 1) =
          sc.side_m / 2.0 - (r + 0.5) * sc.pixel_side;
    }

  auto ring = [](int n, double radius) {
    Eigen::MatrixXd pts(n, 2);
    for (int p = 0; p < n; ++p) {
      const double th = 2.0 * std::numbers::pi * p / n;
      pts(p, 0) = radius * std::cos(th);
      pts(p, 1) = radius * std::sin(th);
    }
    return pts;
  };
  sc.tx = ring(cfg.n_inc, cfg.tx_radius_m);
  sc.rx = ring(cfg.n_rec, cfg.rx_radius_m);

  const double half = sc.side_m / 2.0;
  for (const auto& ants : {sc.tx, sc.rx})
    for (Eigen::Index p = 0; p < ants.rows(); ++p)
      if (std::abs(ants(p, 0)) <= half && std::abs(ants(p, 1)) <= half)
        throw NumericalError("build_scene: antenna inside the imaging domain");
  return sc;
}

struct GreensOperators {
  Eigen::MatrixXcd g_domain;   // I x I, symmetric
  Eigen::MatrixXcd g_measure;  // N_rec x I
};

/// Pulse-basis MoM matrices normalized so that E^t = E^i + G_D Lambda E^t and
/// E^s = G_S Lambda E^t hold with lambda_i = -j k (eps_r,i - 1) eps0 da.
/// Cells are integrated as equivalent-area circles of radius a = sqrt(da/pi):
///   off-diagonal / measurement:  G = J_1(ka)/(2 eps0 a) * H^(2)_0(k rho)
///   self term:                   G = H^(2)_1(ka)/(2 eps0 a) - j/(eps0 k da)
/// (the classical Richmond cell rule, rearranged for this Lambda convention).
inline GreensOperators build_greens(const ScatteringScene& sc) {
  const Eigen::Index i_dim = sc.n_pixels();
  const double a = std::sqrt(sc.pixel_area / std::numbers::pi);
  const double c_od = std::cyl_bessel_j(1.0, sc.k * a) / (2.0 * sc.epsilon0 * a);
  const cplx diag = hankel2(1, sc.k * a) / (2.0 * sc.epsilon0 * a) -
                    cplx(0.0, 1.0) / (sc.epsilon0 * sc.k * sc.pixel_area);

  GreensOperators g;
  g.g_domain.resize(i_dim, i_dim);
  for (Eigen::Index i = 0; i < i_dim; ++i) {
    g.g_domain(i, i) = diag;
    for (Eigen::Index j = i + 1; j < i_dim; ++j) {
      const double rho = (sc.pixel_centers.row(i) - sc.pixel_centers.row(j)).norm();
      const cplx v = c_od * hankel2(0, sc.k * rho);
      g.g_domain(i, j) = v;
      g.g_domain(j, i) = v;
    }
  }

  g.g_measure.resize(sc.n_rec(), i_dim);
  for (Eigen::Index r = 0; r < sc.n_rec(); ++r)
    for (Eigen::Index j = 0; j < i_dim; ++j) {
      const double rho = (sc.rx.row(r) - sc.pixel_centers.row(j)).norm();
      g.g_measure(r, j) = c_od * hankel2(0, sc.k * rho);
    }
  return g;
}

/// Unit-amplitude line sources: column p is H^(2)_0(k |r - tx_p|) at all pixel
/// centers. The overall source scale is arbitrary and cancels in inversion.
inline Eigen::MatrixXcd incident_fields(const ScatteringScene& sc) {
  Eigen::MatrixXcd e(sc.n_pixels(), sc.n_inc());
  for (Eigen::Index p = 0; p < sc.n_inc(); ++p)
    for (Eigen::Index i = 0; i < sc.n_pixels(); ++i) {
      const double rho = (sc.pixel_centers.row(i) - sc.tx.row(p)).norm();
      e(i, p) = hankel2(0, sc.k * rho);
    }
  return e;
}

inline Eigen::VectorXcd contrast_to_lambda(const ScatteringScene& sc,
                                           const Eigen::VectorXd& contrast) {
  if (contrast.size() != sc.n_pixels())
    throw std::invalid_argument("contrast length does not match scene pixel count");
  return sc.lambda_scale() * contrast.cast<cplx>();
}

struct ForwardFields {
  Eigen::MatrixXcd total;      // I x N_inc
  Eigen::MatrixXcd scattered;  // N_rec x N_inc
};

/// Solves (I - G_D Lambda) E^t = E^i by dense LU (one factorization, all
/// incidences), then E^s = G_S Lambda E^t.
inline ForwardFields forward_solve(const ScatteringScene& sc, const GreensOperators& g,
                                   const Eigen::VectorXd& contrast) {
  for (Eigen::Index i = 0; i < contrast.size(); ++i)
    if (!(contrast[i] >= 0.0))
      throw std::invalid_argument("forward_solve: contrast must be >= 0 everywhere");
  const Eigen::VectorXcd lam = contrast_to_lambda(sc, contrast);
  const Eigen::MatrixXcd e_inc = incident_fields(sc);

  Eigen::MatrixXcd sys = -g.g_domain * lam.asDiagonal();
  sys.diagonal().array() += 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys);
  ForwardFields f;
  f.total = lu.solve(e_inc);

  const double res = (sys * f.total - e_inc).norm() / e_inc.norm();
  if (!(res < 1e-10))
    throw NumericalError("forward_solve: linear-system residual " + std::to_string(res) +
                         ", rcond " + std::to_string(lu.rcond()) +
                         " (resonant or invalid contrast)");
  f.scattered = g.g_measure * (lam.asDiagonal() * f.total);
  return f;
}

/// First Born approximation: E^s = G_S Lambda E^i, no system solve.
inline Eigen::MatrixXcd born_scattered(const ScatteringScene& sc, const GreensOperators& g,
                                       const Eigen::VectorXd& contrast) {
  const Eigen::VectorXcd lam = contrast_to_lambda(sc, contrast);
  return g.g_measure * (lam.asDiagonal() * incident_fields(sc));
}

/// Additive complex white Gaussian noise at the given SNR (dB) relative to the
/// mean signal power. Deterministic given seed.
inline Eigen::MatrixXcd add_noise(const Eigen::MatrixXcd& e, double snr_db,
                                  std::uint64_t seed) {
  const double signal_power = e.squaredNorm() / static_cast<double>(e.size());
  const double noise_power = signal_power / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(noise_power / 2.0);
  Rng rng(mix_seed(seed, 0x6e6f6973655f3164ull));
  Eigen::MatrixXcd out = e;
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      out(r, c) += cplx(sigma * rng.normal(), sigma * rng.normal());
  return out;
}

}  // namespace mwtcs

#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

#include "mwtcs/rng.hpp"

namespace mwtcs {

/// Random-circle scenes: constant-permittivity discs on an M x M grid,
/// stored as contrast x = eps_r - 1 >= 0, row-major, length I = M*M.
struct CirclePhantomSpec {
  int n_circles_min = 1;
  int n_circles_max = 3;
  double radius_min_px = 2.0;
  double radius_max_px = 5.0;
  double epsilon_r_min = 1.5;
  double epsilon_r_max = 3.0;
  int grid_pixels_per_side = 16;

  void validate() const {
    if (grid_pixels_per_side < 1)
      throw std::invalid_argument("phantom spec: grid_pixels_per_side must be >= 1");
    if (n_circles_min < 0 || n_circles_max < n_circles_min)
      throw std::invalid_argument("phantom spec: need 0 <= n_circles_min <= n_circles_max");
    if (!(radius_min_px > 0.0) || radius_max_px < radius_min_px)
      throw std::invalid_argument("phantom spec: need 0 < radius_min_px <= radius_max_px");
    if (!(radius_max_px < grid_pixels_per_side / 2.0))
      throw std::invalid_argument("phantom spec: radius_max_px must be < M/2");
    if (!(epsilon_r_min > 1.0) || epsilon_r_max < epsilon_r_min)
      throw std::invalid_argument("phantom spec: need 1 < epsilon_r_min <= epsilon_r_max");
  }
};

/// Pixel i (row-major) covers [col, col+1) x [row, row+1) in pixel units; its
/// center sits at (col + 0.5, row + 0.5). A pixel belongs to a circle when its
/// center lies inside the disc. Later circles overwrite earlier ones.
/// Draw order is part of the determinism contract: circle count first, then
/// per circle cx, cy, radius, epsilon_r.
inline Eigen::VectorXd generate_phantom(const CirclePhantomSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int m = spec.grid_pixels_per_side;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) * m);
  Rng rng(seed);
  const int n_circles = rng.uniform_int(spec.n_circles_min, spec.n_circles_max);
  for (int c = 0; c < n_circles; ++c) {
    // center anywhere on the grid; discs may be clipped at the boundary
    const double cx = rng.uniform(0.0, static_cast<double>(m));
    const double cy = rng.uniform(0.0, static_cast<double>(m));
    const double r = rng.uniform(spec.radius_min_px, spec.radius_max_px);
    const double contrast = rng.uniform(spec.epsilon_r_min, spec.epsilon_r_max) - 1.0;
    const double r2 = r * r;
    for (int row = 0; row < m; ++row)
      for (int col = 0; col < m; ++col) {
        const double dx = (col + 0.5) - cx;
        const double dy = (row + 0.5) - cy;
        if (dx * dx + dy * dy < r2) x[static_cast<Eigen::Index>(row) * m + col] = contrast;
      }
  }
  return x;
}

/// Row t of the result is generate_phantom(spec, stream_seed(seed, ns, t)).
/// Per-index seed derivation keeps elements independent of generation order.
inline Eigen::MatrixXd generate_dataset(const CirclePhantomSpec& spec, int count,
                                        std::uint64_t seed,
                                        std::uint64_t ns = kTrainStream) {
  if (count < 1) throw std::invalid_argument("generate_dataset: count must be >= 1");
  spec.validate();
  const int m = spec.grid_pixels_per_side;
  Eigen::MatrixXd data(count, static_cast<Eigen::Index>(m) * m);
  for (int t = 0; t < count; ++t)
    data.row(t) = generate_phantom(spec, stream_seed(seed, ns, static_cast<std::uint64_t>(t)));
  return data;
}

}  // namespace mwtcs

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mwtcs/dictionary.hpp"
#include "mwtcs/sparse.hpp"

namespace mwtcs {

enum class MeasurementKind { mask, blur_downsample, fourier_subsample };

/// A measurement map y = Phi x realized as a matrix-free handle. `indices`
/// holds kept pixels (mask) or kept frequencies (fourier); `factor` the
/// decimation factor (blur).
struct MeasurementOperator {
  MeasurementKind kind = MeasurementKind::mask;
  LinearOperatorHandle op;
  std::vector<Eigen::Index> indices;
  int factor = 1;
};

/// Inpainting: keeps the listed pixels. Adjoint scatters back with zeros.
inline MeasurementOperator make_mask_operator(std::vector<Eigen::Index> kept_pixels,
                                              Eigen::Index i_dim) {
  if (kept_pixels.empty()) throw std::invalid_argument("mask: kept set is empty");
  for (std::size_t t = 0; t < kept_pixels.size(); ++t) {
    if (kept_pixels[t] < 0 || kept_pixels[t] >= i_dim)
      throw std::invalid_argument("mask: index out of range");
    if (t > 0 && kept_pixels[t] <= kept_pixels[t - 1])
      throw std::invalid_argument("mask: indices must be strictly increasing");
  }
  auto kept = std::make_shared<std::vector<Eigen::Index>>(std::move(kept_pixels));
  MeasurementOperator mo;
  mo.kind = MeasurementKind::mask;
  mo.indices = *kept;
  mo.op.in_dim = i_dim;
  mo.op.out_dim = static_cast<Eigen::Index>(kept->size());
  mo.op.apply = [kept](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(kept->size()));
    for (std::size_t t = 0; t < kept->size(); ++t)
      y[static_cast<Eigen::Index>(t)] = x[(*kept)[t]];
    return y;
  };
  mo.op.apply_adjoint = [kept, i_dim](const Eigen::VectorXd& y) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(i_dim);
    for (std::size_t t = 0; t < kept->size(); ++t)
      x[(*kept)[t]] = y[static_cast<Eigen::Index>(t)];
    return x;
  };
  return mo;
}

/// Superresolution forward map: mean over each factor x factor block of an
/// m x m image (i_dim = m^2), output length (m/factor)^2.
inline MeasurementOperator make_blur_downsample_operator(int factor, Eigen::Index i_dim) {
  const int m = static_cast<int>(std::llround(std::sqrt(static_cast<double>(i_dim))));
  if (static_cast<Eigen::Index>(m) * m != i_dim)
    throw std::invalid_argument("blur_downsample: i_dim is not a square");
  if (factor < 1 || m % factor != 0)
    throw std::invalid_argument("blur_downsample: factor must divide the grid side");
  const int mo_side = m / factor;
  const double inv_block = 1.0 / (static_cast<double>(factor) * factor);

  MeasurementOperator mo;
  mo.kind = MeasurementKind::blur_downsample;
  mo.factor = factor;
  mo.op.in_dim = i_dim;
  mo.op.out_dim = static_cast<Eigen::Index>(mo_side) * mo_side;
  mo.op.apply = [m, factor, mo_side, inv_block](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(mo_side) * mo_side);
    for (int br = 0; br < mo_side; ++br)
      for (int bc = 0; bc < mo_side; ++bc) {
        double acc = 0.0;
        for (int r = 0; r < factor; ++r)
          for (int c = 0; c < factor; ++c)
            acc += x[static_cast<Eigen::Index>(br * factor + r) * m + bc * factor + c];
        y[static_cast<Eigen::Index>(br) * mo_side + bc] = acc * inv_block;
      }
    return y;
  };
  mo.op.apply_adjoint = [m, factor, mo_side, inv_block, i_dim](const Eigen::VectorXd& y) {
    Eigen::VectorXd x(i_dim);
    for (int br = 0; br < mo_side; ++br)
      for (int bc = 0; bc < mo_side; ++bc) {
        const double v = y[static_cast<Eigen::Index>(br) * mo_side + bc] * inv_block;
        for (int r = 0; r < factor; ++r)
          for (int c = 0; c < factor; ++c)
            x[static_cast<Eigen::Index>(br * factor + r) * m + bc * factor + c] = v;
      }
    return x;
  };
  return mo;
}

/// Selected rows of the 2D unitary DFT of an m x m image, realified as
/// interleaved (real, imag) pairs so the operator is real-linear of shape
/// 2|kept| x m^2. Frequency index f encodes (u, v) = (f / m, f % m).
inline MeasurementOperator make_fourier_subsample_operator(
    std::vector<Eigen::Index> kept_freqs, int m) {
  if (m < 1) throw std::invalid_argument("fourier_subsample: m must be >= 1");
  const Eigen::Index i_dim = static_cast<Eigen::Index>(m) * m;
  if (kept_freqs.empty()) throw std::invalid_argument("fourier_subsample: kept set is empty");
  {
    std::vector<Eigen::Index> sorted = kept_freqs;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t t = 0; t < sorted.size(); ++t) {
      if (sorted[t] < 0 || sorted[t] >= i_dim)
        throw std::invalid_argument("fourier_subsample: frequency index out of range");
      if (t > 0 && sorted[t] == sorted[t - 1])
        throw std::invalid_argument("fourier_subsample: duplicate frequency index");
    }
  }

  const Eigen::Index n_f = static_cast<Eigen::Index>(kept_freqs.size());
  auto w = std::make_shared<Eigen::MatrixXd>(2 * n_f, i_dim);
  const double scale = 1.0 / m;  // unitary 2D DFT normalization, 1/sqrt(I)
  for (Eigen::Index t = 0; t < n_f; ++t) {
    const Eigen::Index u = kept_freqs[static_cast<std::size_t>(t)] / m;
    const Eigen::Index v = kept_freqs[static_cast<std::size_t>(t)] % m;
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        const double ph = 2.0 * std::numbers::pi *
                          (static_cast<double>(u) * r + static_cast<double>(v) * c) / m;
        (*w)(2 * t, static_cast<Eigen::Index>(r) * m + c) = std::cos(ph) * scale;
        (*w)(2 * t + 1, static_cast<Eigen::Index>(r) * m + c) = -std::sin(ph) * scale;
      }
  }

  MeasurementOperator mo;
  mo.kind = MeasurementKind::fourier_subsample;
  mo.indices = std::move(kept_freqs);
  mo.op.in_dim = i_dim;
  mo.op.out_dim = 2 * n_f;
  mo.op.apply = [w](const Eigen::VectorXd& x) -> Eigen::VectorXd { return *w * x; };
  mo.op.apply_adjoint = [w](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return w->transpose() * y;
  };
  return mo;
}

/// Lowest-|frequency| subset (wrapped distance from DC), fraction of all m^2
/// frequencies, ties broken by index. Models radially dense interferometric
/// sampling.
inline std::vector<Eigen::Index> radial_frequency_set(int m, double fraction) {
  if (m < 1) throw std::invalid_argument("radial_frequency_set: m must be >= 1");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("radial_frequency_set: fraction must lie in (0,1]");
  const Eigen::Index i_dim = static_cast<Eigen::Index>(m) * m;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(i_dim));
  std::vector<double> dist(static_cast<std::size_t>(i_dim));
  for (Eigen::Index f = 0; f < i_dim; ++f) {
    idx[static_cast<std::size_t>(f)] = f;
    const double u = static_cast<double>(std::min<Eigen::Index>(f / m, m - f / m));
    const double v = static_cast<double>(std::min<Eigen::Index>(f % m, m - f % m));
    dist[static_cast<std::size_t>(f)] = std::hypot(u, v);
  }
  std::stable_sort(idx.begin(), idx.end(), [&dist](Eigen::Index a, Eigen::Index b) {
    return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
  });
  const auto n_keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(i_dim)));
  idx.resize(std::max<std::size_t>(1, std::min(idx.size(), n_keep)));
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Composite sensing operator D~ = Phi D as a handle; D is never multiplied
/// out, so large J costs nothing extra.
inline LinearOperatorHandle compose_with_dictionary(const MeasurementOperator& phi,
                                                    const Dictionary& dict) {
  if (phi.op.in_dim != dict.atoms.rows())
    throw std::invalid_argument("compose_with_dictionary: operator/dictionary dim mismatch");
  auto atoms = std::make_shared<Eigen::MatrixXd>(dict.atoms);
  auto inner = std::make_shared<LinearOperatorHandle>(phi.op);
  LinearOperatorHandle h;
  h.in_dim = atoms->cols();
  h.out_dim = inner->out_dim;
  h.apply = [atoms, inner](const Eigen::VectorXd& s) { return inner->apply(*atoms * s); };
  h.apply_adjoint = [atoms, inner](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return atoms->transpose() * inner->apply_adjoint(y);
  };
  return h;
}

enum class RecoverSolver { fista, omp };

struct RecoverParams {
  double lambda_reg = 1e-3;
  int iters = 500;
  int k_max = 10;             // omp only
  double residual_tol = 1e-10;  // omp only
  bool debias = false;
};

struct RecoverResult {
  Eigen::VectorXd x_hat;      // D s
  SparseCode code;
  std::vector<double> objective;  // fista trace; empty for omp
};

inline RecoverResult recover_sparse(const MeasurementOperator& phi, const Dictionary& dict,
                                    const Eigen::VectorXd& y, RecoverSolver solver,
                                    const RecoverParams& params = {}) {
  const LinearOperatorHandle composite = compose_with_dictionary(phi, dict);
  RecoverResult res;
  if (solver == RecoverSolver::fista) {
    FistaOptions opts;
    opts.debias = params.debias;
    IterativeResult it = fista(composite, y, params.lambda_reg, params.iters, opts);
    res.code = std::move(it.code);
    res.objective = std::move(it.objective);
  } else {
    OmpResult o = omp(composite, y, params.k_max, params.residual_tol);
    res.code = std::move(o.code);
  }
  res.x_hat = dict.atoms * res.code.coefficients;
  return res;
}

}  // namespace mwtcs

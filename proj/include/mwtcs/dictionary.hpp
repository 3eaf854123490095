#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mwtcs/rng.hpp"
#include "mwtcs/sparse.hpp"

namespace mwtcs {

enum class Provenance { dct, kronecker, learned };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::dct: return "dct";
    case Provenance::kronecker: return "kronecker";
    case Provenance::learned: return "learned";
  }
  return "unknown";
}

/// Atoms are the columns of an I x J matrix, each unit l2 norm. For image
/// dictionaries rows follow the row-major ContrastMap layout.
struct Dictionary {
  Eigen::MatrixXd atoms;
  Provenance provenance = Provenance::dct;

  Eigen::Index signal_dim() const { return atoms.rows(); }
  Eigen::Index n_atoms() const { return atoms.cols(); }

  void validate() const {
    if (atoms.rows() < 1 || atoms.cols() < 1)
      throw std::invalid_argument("dictionary: empty atom matrix");
    check_unit_columns(atoms);
  }
};

/// 1D overcomplete DCT frame, m x n: atom k samples cos(pi (2i+1) k / (2n))
/// at i = 0..m-1, column-normalized. At n == m this is the orthonormal DCT-II
/// basis.
inline Eigen::MatrixXd dct_frame_1d(int m, int n) {
  if (m < 1 || n < m) throw std::invalid_argument("dct_frame_1d: need 1 <= m <= n");
  Eigen::MatrixXd d(m, n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < m; ++i)
      d(i, k) = std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
    d.col(k).normalize();
  }
  return d;
}

/// atoms = d1 kron d2, where d1 acts along image rows and d2 along columns;
/// column (j1, j2) is the row-major vectorization of the outer product
/// d1[:,j1] * d2[:,j2]^T, so it matches the ContrastMap pixel order.
inline Dictionary kronecker_dictionary(const Dictionary& d1, const Dictionary& d2,
                                       std::uint64_t max_entries = std::uint64_t{1} << 27) {
  d1.validate();
  d2.validate();
  const std::uint64_t rows = static_cast<std::uint64_t>(d1.atoms.rows()) * d2.atoms.rows();
  const std::uint64_t cols = static_cast<std::uint64_t>(d1.atoms.cols()) * d2.atoms.cols();
  if (rows == 0 || cols > max_entries / rows)
    throw std::length_error("kronecker_dictionary: result exceeds entry cap");
  Dictionary out;
  out.provenance = Provenance::kronecker;
  out.atoms.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j1 = 0; j1 < d1.atoms.cols(); ++j1)
    for (Eigen::Index j2 = 0; j2 < d2.atoms.cols(); ++j2) {
      const Eigen::Index j = j1 * d2.atoms.cols() + j2;
      for (Eigen::Index i1 = 0; i1 < d1.atoms.rows(); ++i1)
        for (Eigen::Index i2 = 0; i2 < d2.atoms.rows(); ++i2)
          out.atoms(i1 * d2.atoms.rows() + i2, j) = d1.atoms(i1, j1) * d2.atoms(i2, j2);
    }
  return out;
}

/// 2D overcomplete DCT for an m x m image: Kronecker product of two 1D frames
/// of size m x ceil(m*sqrt(overcompleteness)), giving J = overcompleteness * I
/// atoms (up to rounding).
inline Dictionary dct_dictionary(int m, double overcompleteness) {
  if (m < 1) throw std::invalid_argument("dct_dictionary: m must be >= 1");
  if (!(overcompleteness >= 1.0))
    throw std::invalid_argument("dct_dictionary: overcompleteness must be >= 1");
  const int n = static_cast<int>(std::ceil(m * std::sqrt(overcompleteness)));
  Dictionary f;
  f.atoms = dct_frame_1d(m, n);
  Dictionary out = kronecker_dictionary(f, f);
  out.provenance = Provenance::dct;
  return out;
}

/// Lockstep FISTA over columns: solves min_s 0.5||D s - x||^2 + lambda||s||_1
/// for every column x of x_cols at once (shared step and momentum schedule, so
/// each column follows exactly the single-vector FISTA trajectory).
inline Eigen::MatrixXd batch_fista(const Eigen::MatrixXd& dict, const Eigen::MatrixXd& x_cols,
                                   double lambda_reg, int iters, double step) {
  if (x_cols.rows() != dict.rows())
    throw std::invalid_argument("batch_fista: sample dimension does not match dictionary");
  if (!(lambda_reg > 0.0)) throw std::invalid_argument("batch_fista: lambda_reg must be > 0");
  const Eigen::Index j = dict.cols();
  const Eigen::Index n = x_cols.cols();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(j, n);
  Eigen::MatrixXd z = s;
  double t = 1.0;
  const double tau = step * lambda_reg;
  for (int it = 0; it < iters; ++it) {
    Eigen::MatrixXd g = dict.transpose() * (dict * z - x_cols);
    Eigen::MatrixXd s_next = z - step * g;
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < j; ++r) {
        const double v = s_next(r, c);
        const double a = std::abs(v) - tau;
        s_next(r, c) = a > 0.0 ? (v > 0.0 ? a : -a) : 0.0;
      }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = s_next + ((t - 1.0) / t_next) * (s_next - s);
    s.swap(s_next);
    t = t_next;
  }
  return s;
}

/// Mean of 0.5||x - D s||^2 + lambda||s||_1 over samples (rows of dataset),
/// with codes computed by lockstep FISTA. Used both as the training trace and
/// for head-to-head dictionary comparisons.
inline double coding_objective(const Eigen::MatrixXd& dict, const Eigen::MatrixXd& dataset,
                               double lambda_reg, int coding_iters, int chunk = 256) {
  const double lip = lipschitz_estimate(dense_operator(dict));
  const double step = lip > 0.0 ? 1.0 / lip : 1.0;
  double total = 0.0;
  for (Eigen::Index lo = 0; lo < dataset.rows(); lo += chunk) {
    const Eigen::Index n = std::min<Eigen::Index>(chunk, dataset.rows() - lo);
    const Eigen::MatrixXd x = dataset.middleRows(lo, n).transpose();
    const Eigen::MatrixXd s = batch_fista(dict, x, lambda_reg, coding_iters, step);
    total += 0.5 * (dict * s - x).squaredNorm() + lambda_reg * s.lpNorm<1>();
  }
  return total / static_cast<double>(dataset.rows());
}

namespace detail {

inline void make_first_nonzero_positive(Eigen::MatrixXd& atoms) {
  for (Eigen::Index j = 0; j < atoms.cols(); ++j)
    for (Eigen::Index i = 0; i < atoms.rows(); ++i)
      if (atoms(i, j) != 0.0) {
        if (atoms(i, j) < 0.0) atoms.col(j) = -atoms.col(j);
        break;
      }
}

}  // namespace detail

struct LearnOptions {
  double lambda_reg = 0.1;
  int epochs = 3;
  int batch_size = 256;
  int coding_iters = 50;
  std::uint64_t seed = 1;
};

struct LearnResult {
  Dictionary dict;
  std::vector<double> epoch_objective;  // coding objective on the training set per epoch
};

/// Online dictionary learning in the Mairal style: mini-batch sparse coding
/// with FISTA, running sufficient statistics A += S S^T and B += X S^T, and
/// block coordinate descent over columns with renormalization. Atoms never
/// activated during an epoch are reinitialized from a random training sample.
inline LearnResult learn_dictionary(const Eigen::MatrixXd& dataset, int j_atoms,
                                    const LearnOptions& opt) {
  const Eigen::Index t_samples = dataset.rows();
  const Eigen::Index i_dim = dataset.cols();
  if (j_atoms < 1) throw std::invalid_argument("learn_dictionary: j_atoms must be >= 1");
  if (opt.batch_size < 1 || t_samples < opt.batch_size)
    throw std::invalid_argument("learn_dictionary: need batch_size >= 1 and T >= batch_size");
  if (opt.epochs < 0) throw std::invalid_argument("learn_dictionary: epochs must be >= 0");
  if (!(opt.lambda_reg > 0.0))
    throw std::invalid_argument("learn_dictionary: lambda_reg must be > 0");
  Eigen::Index zero_rows = 0;
  for (Eigen::Index r = 0; r < t_samples; ++r)
    if (dataset.row(r).isZero(0.0)) ++zero_rows;
  if (2 * zero_rows > t_samples)
    throw std::invalid_argument("learn_dictionary: dataset is degenerate (mostly zero rows)");
  if (j_atoms < i_dim)
    std::cerr << "learn_dictionary: warning: J=" << j_atoms << " < I=" << i_dim
              << ", dictionary is undercomplete\n";

  Rng rng(mix_seed(opt.seed, 0x6c6561726e5f6463ull));
  Dictionary dict;
  dict.provenance = Provenance::learned;
  dict.atoms.resize(i_dim, j_atoms);
  for (Eigen::Index j = 0; j < j_atoms; ++j) {
    for (Eigen::Index i = 0; i < i_dim; ++i) dict.atoms(i, j) = rng.normal();
    dict.atoms.col(j).normalize();
  }
  detail::make_first_nonzero_positive(dict.atoms);

  LearnResult res;
  if (opt.epochs == 0) {
    res.dict = std::move(dict);
    return res;
  }

  Eigen::MatrixXd stat_a = Eigen::MatrixXd::Zero(j_atoms, j_atoms);
  Eigen::MatrixXd stat_b = Eigen::MatrixXd::Zero(i_dim, j_atoms);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(t_samples));
  for (Eigen::Index i = 0; i < t_samples; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    // deterministic Fisher-Yates reshuffle per epoch
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t k = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[k]);
    }

    std::vector<bool> activated(static_cast<std::size_t>(j_atoms), false);
    for (Eigen::Index lo = 0; lo < t_samples; lo += opt.batch_size) {
      const Eigen::Index n = std::min<Eigen::Index>(opt.batch_size, t_samples - lo);
      Eigen::MatrixXd x(i_dim, n);
      for (Eigen::Index c = 0; c < n; ++c)
        x.col(c) = dataset.row(order[static_cast<std::size_t>(lo + c)]).transpose();

      const double lip = lipschitz_estimate(dense_operator(dict.atoms));
      const double step = lip > 0.0 ? 1.0 / lip : 1.0;
      const Eigen::MatrixXd s = batch_fista(dict.atoms, x, opt.lambda_reg,
                                            opt.coding_iters, step);
      for (Eigen::Index j = 0; j < j_atoms; ++j)
        if (!s.row(j).isZero(0.0)) activated[static_cast<std::size_t>(j)] = true;

      stat_a.noalias() += s * s.transpose();
      stat_b.noalias() += x * s.transpose();

      // block coordinate descent over columns, two sweeps
      for (int sweep = 0; sweep < 2; ++sweep)
        for (Eigen::Index j = 0; j < j_atoms; ++j) {
          const double ajj = stat_a(j, j);
          if (ajj < 1e-10) continue;
          Eigen::VectorXd u =
              dict.atoms.col(j) + (stat_b.col(j) - dict.atoms * stat_a.col(j)) / ajj;
          const double nu = u.norm();
          if (nu > 0.0) dict.atoms.col(j) = u / nu;
        }
    }

    // revive atoms that coded nothing this epoch
    for (Eigen::Index j = 0; j < j_atoms; ++j) {
      if (activated[static_cast<std::size_t>(j)]) continue;
      for (int tries = 0; tries < 32; ++tries) {
        const Eigen::Index pick =
            static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<std::int64_t>(t_samples) - 1));
        Eigen::VectorXd cand = dataset.row(pick).transpose();
        const double nc = cand.norm();
        if (nc > 0.0) {
          dict.atoms.col(j) = cand / nc;
          break;
        }
      }
      stat_a.row(j).setZero();
      stat_a.col(j).setZero();
      stat_b.col(j).setZero();
    }

    res.epoch_objective.push_back(
        coding_objective(dict.atoms, dataset, opt.lambda_reg, opt.coding_iters));
  }

  detail::make_first_nonzero_positive(dict.atoms);
  res.dict = std::move(dict);
  return res;
}

inline LearnResult learn_dictionary(const Eigen::MatrixXd& dataset, int j_atoms,
                                    double lambda_reg, int epochs, int batch_size,
                                    std::uint64_t seed) {
  LearnOptions opt;
  opt.lambda_reg = lambda_reg;
  opt.epochs = epochs;
  opt.batch_size = batch_size;
  opt.seed = seed;
  return learn_dictionary(dataset, j_atoms, opt);
}

}  // namespace mwtcs

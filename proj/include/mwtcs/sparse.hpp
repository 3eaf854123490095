#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mwtcs/rng.hpp"

namespace mwtcs {

struct SparseCode {
  Eigen::VectorXd coefficients;
  std::vector<Eigen::Index> support;  // positions of nonzero coefficients
  Eigen::Index sparsity_k() const { return static_cast<Eigen::Index>(support.size()); }
};

inline SparseCode make_sparse_code(Eigen::VectorXd coefficients) {
  SparseCode sc;
  sc.coefficients = std::move(coefficients);
  for (Eigen::Index i = 0; i < sc.coefficients.size(); ++i)
    if (sc.coefficients[i] != 0.0) sc.support.push_back(i);
  return sc;
}

/// Matrix-free operator: only products with A and A^T are required.
struct LinearOperatorHandle {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_adjoint;
  Eigen::Index in_dim = 0;
  Eigen::Index out_dim = 0;
};

inline LinearOperatorHandle dense_operator(const Eigen::MatrixXd& a) {
  auto m = std::make_shared<Eigen::MatrixXd>(a);
  LinearOperatorHandle op;
  op.in_dim = m->cols();
  op.out_dim = m->rows();
  op.apply = [m](const Eigen::VectorXd& x) -> Eigen::VectorXd { return *m * x; };
  op.apply_adjoint = [m](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return m->transpose() * y;
  };
  return op;
}

inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double tau) {
  if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - tau;
    out[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

/// Largest eigenvalue of A^T A by power iteration (30 rounds, deterministic
/// start), inflated by 5% so 1/L is a safe gradient step.
inline double lipschitz_estimate(const LinearOperatorHandle& op) {
  Rng rng(0x9e3779b97f4a7c15ull);
  Eigen::VectorXd v(op.in_dim);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  double lam = 0.0;
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd w = op.apply_adjoint(op.apply(v));
    lam = w.norm();
    if (lam <= 0.0) return 0.0;
    v = w / lam;
  }
  return lam * 1.05;
}

namespace detail {

inline void check_l1_problem(const LinearOperatorHandle& op, const Eigen::VectorXd& y,
                             double lambda_reg) {
  if (y.size() != op.out_dim)
    throw std::invalid_argument("l1 solver: y length does not match operator out_dim");
  if (!(lambda_reg > 0.0))
    throw std::invalid_argument("l1 solver: lambda_reg must be > 0");
}

inline double l1_objective(const LinearOperatorHandle& op, const Eigen::VectorXd& y,
                           double lambda_reg, const Eigen::VectorXd& s) {
  return 0.5 * (op.apply(s) - y).squaredNorm() + lambda_reg * s.lpNorm<1>();
}

}  // namespace detail

struct IterativeResult {
  SparseCode code;
  std::vector<double> objective;  // F(s_t) after each iteration
};

struct FistaOptions {
  std::optional<double> step{};   // default 1/L via power iteration
  Eigen::VectorXd warm_start{};   // empty means the zero vector
  bool return_best = false;       // return the lowest-objective iterate seen
  bool debias = false;            // least squares on the final support
};

namespace detail {

inline Eigen::VectorXd debias_on_support(const LinearOperatorHandle& op,
                                         const Eigen::VectorXd& y, Eigen::VectorXd s) {
  std::vector<Eigen::Index> sup;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] != 0.0) sup.push_back(i);
  if (sup.empty()) return s;
  Eigen::MatrixXd cols(op.out_dim, static_cast<Eigen::Index>(sup.size()));
  Eigen::VectorXd e = Eigen::VectorXd::Zero(op.in_dim);
  for (std::size_t k = 0; k < sup.size(); ++k) {
    e[sup[k]] = 1.0;
    cols.col(static_cast<Eigen::Index>(k)) = op.apply(e);
    e[sup[k]] = 0.0;
  }
  Eigen::VectorXd c = cols.colPivHouseholderQr().solve(y);
  for (std::size_t k = 0; k < sup.size(); ++k) s[sup[k]] = c[static_cast<Eigen::Index>(k)];
  return s;
}

}  // namespace detail

inline IterativeResult fista(const LinearOperatorHandle& op, const Eigen::VectorXd& y,
                             double lambda_reg, int iters, const FistaOptions& opts = {}) {
  detail::check_l1_problem(op, y, lambda_reg);
  if (opts.warm_start.size() != 0 && opts.warm_start.size() != op.in_dim)
    throw std::invalid_argument("fista: warm_start length does not match operator in_dim");

  double lip_step;
  if (opts.step) {
    lip_step = *opts.step;
  } else {
    const double lip = lipschitz_estimate(op);
    lip_step = lip > 0.0 ? 1.0 / lip : 1.0;
  }

  Eigen::VectorXd s = opts.warm_start.size() ? opts.warm_start
                                             : Eigen::VectorXd::Zero(op.in_dim);
  Eigen::VectorXd z = s;
  double t = 1.0;

  IterativeResult res;
  res.objective.reserve(static_cast<std::size_t>(std::max(iters, 0)));
  Eigen::VectorXd best = s;
  double best_f = detail::l1_objective(op, y, lambda_reg, s);

  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd grad = op.apply_adjoint(op.apply(z) - y);
    Eigen::VectorXd s_next = soft_threshold(z - lip_step * grad, lip_step * lambda_reg);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = s_next + ((t - 1.0) / t_next) * (s_next - s);
    s = std::move(s_next);
    t = t_next;
    const double f = detail::l1_objective(op, y, lambda_reg, s);
    res.objective.push_back(f);
    if (f < best_f) {
      best_f = f;
      best = s;
    }
  }

  Eigen::VectorXd out = opts.return_best ? best : s;
  if (opts.debias) out = detail::debias_on_support(op, y, std::move(out));
  res.code = make_sparse_code(std::move(out));
  return res;
}

inline IterativeResult ista(const LinearOperatorHandle& op, const Eigen::VectorXd& y,
                            double lambda_reg, int iters,
                            std::optional<double> step = std::nullopt) {
  detail::check_l1_problem(op, y, lambda_reg);
  double lip_step;
  if (step) {
    lip_step = *step;
  } else {
    const double lip = lipschitz_estimate(op);
    lip_step = lip > 0.0 ? 1.0 / lip : 1.0;
  }

  Eigen::VectorXd s = Eigen::VectorXd::Zero(op.in_dim);
  IterativeResult res;
  res.objective.reserve(static_cast<std::size_t>(std::max(iters, 0)));
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd grad = op.apply_adjoint(op.apply(s) - y);
    s = soft_threshold(s - lip_step * grad, lip_step * lambda_reg);
    res.objective.push_back(detail::l1_objective(op, y, lambda_reg, s));
  }
  res.code = make_sparse_code(std::move(s));
  return res;
}

struct OmpResult {
  SparseCode code;
  std::vector<double> residual_norms;  // after each accepted atom
  bool rank_deficient = false;         // active set went rank-deficient; last atom rolled back
};

inline OmpResult omp(const LinearOperatorHandle& op, const Eigen::VectorXd& y, int k_max,
                     double residual_tol) {
  if (y.size() != op.out_dim)
    throw std::invalid_argument("omp: y length does not match operator out_dim");
  if (k_max < 0 || k_max > op.in_dim)
    throw std::invalid_argument("omp: require 0 <= k_max <= in_dim");

  OmpResult res;
  Eigen::VectorXd residual = y;
  std::vector<Eigen::Index> support;
  Eigen::MatrixXd active(op.out_dim, 0);
  Eigen::VectorXd active_coeffs;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(op.in_dim);

  while (static_cast<int>(support.size()) < k_max && residual.norm() > residual_tol) {
    const Eigen::VectorXd corr = op.apply_adjoint(residual);
    Eigen::Index pick = -1;
    double best = -1.0;
    for (Eigen::Index j = 0; j < corr.size(); ++j) {
      if (std::find(support.begin(), support.end(), j) != support.end()) continue;
      const double a = std::abs(corr[j]);
      if (a > best) {  // strict: ties keep the lowest index
        best = a;
        pick = j;
      }
    }
    if (pick < 0) break;

    e[pick] = 1.0;
    const Eigen::VectorXd col = op.apply(e);
    e[pick] = 0.0;

    Eigen::MatrixXd trial(op.out_dim, active.cols() + 1);
    trial.leftCols(active.cols()) = active;
    trial.col(active.cols()) = col;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
    if (qr.rank() < trial.cols()) {
      res.rank_deficient = true;
      break;
    }
    active = std::move(trial);
    support.push_back(pick);
    active_coeffs = qr.solve(y);
    residual = y - active * active_coeffs;
    res.residual_norms.push_back(residual.norm());
  }

  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(op.in_dim);
  for (std::size_t k = 0; k < support.size(); ++k)
    coeffs[support[k]] = active_coeffs[static_cast<Eigen::Index>(k)];
  res.code = make_sparse_code(std::move(coeffs));
  return res;
}

inline void check_unit_columns(const Eigen::MatrixXd& dict, double tol = 1e-8) {
  for (Eigen::Index j = 0; j < dict.cols(); ++j)
    if (std::abs(dict.col(j).norm() - 1.0) > tol)
      throw std::invalid_argument("column " + std::to_string(j) + " is not unit-norm");
}

inline OmpResult omp(const Eigen::MatrixXd& dict, const Eigen::VectorXd& y, int k_max,
                     double residual_tol) {
  check_unit_columns(dict);
  return omp(dense_operator(dict), y, k_max, residual_tol);
}

inline double mutual_coherence(const Eigen::MatrixXd& dict) {
  check_unit_columns(dict);
  double mu = 0.0;
  const Eigen::MatrixXd gram = dict.transpose() * dict;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = i + 1; j < gram.cols(); ++j)
      mu = std::max(mu, std::abs(gram(i, j)));
  return mu;
}

/// Coherence-based sufficient condition: any representation with fewer than
/// (1 + 1/mu)/2 nonzeros is the unique sparsest one. mu = 0 (orthonormal
/// columns) puts no finite limit, reported as +infinity.
inline double uniqueness_bound(double coherence) {
  if (coherence == 0.0) return std::numeric_limits<double>::infinity();
  if (!(coherence > 0.0 && coherence <= 1.0))
    throw std::invalid_argument("uniqueness_bound: coherence must lie in [0,1]");
  return 0.5 * (1.0 + 1.0 / coherence);
}

}  // namespace mwtcs

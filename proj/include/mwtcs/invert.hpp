#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mwtcs/config.hpp"
#include "mwtcs/dictionary.hpp"
#include "mwtcs/forward.hpp"
#include "mwtcs/sparse.hpp"

namespace mwtcs {

/// alpha^2 ||(I - G_D Lambda) E^t - E^i||_F^2 + (1-alpha^2) ||G_S Lambda E^t - E^s||_F^2
inline double evaluate_cost(const ScatteringScene& scene, const GreensOperators& g,
                            const Eigen::VectorXcd& lambda_vec,
                            const Eigen::MatrixXcd& e_total, const Eigen::MatrixXcd& e_inc,
                            const Eigen::MatrixXcd& e_meas, double alpha) {
  if (lambda_vec.size() != scene.n_pixels() || e_total.rows() != scene.n_pixels() ||
      e_meas.rows() != scene.n_rec() || e_total.cols() != e_inc.cols() ||
      e_total.cols() != e_meas.cols())
    throw std::invalid_argument("evaluate_cost: dimension mismatch");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("evaluate_cost: alpha must lie in (0,1)");
  const Eigen::MatrixXcd current = lambda_vec.asDiagonal() * e_total;
  const double state = (e_total - g.g_domain * current - e_inc).squaredNorm();
  const double data = (g.g_measure * current - e_meas).squaredNorm();
  return alpha * alpha * state + (1.0 - alpha * alpha) * data;
}

struct TraceRow {
  int iteration = 0;       // 0 is the initialization row
  double cost = 0.0;       // C at the end of the iteration
  double state_term = 0.0;
  double data_term = 0.0;
  double l1_norm = 0.0;    // ||s||_1
  double penalized = 0.0;  // C + 2 lambda_fista ||s||_1
  bool fista_converged = true;
};

struct HalfStepRow {
  int iteration = 0;
  bool lambda_step = false;  // false: E^t-step, true: Lambda-step
  double cost = 0.0;
  double penalized = 0.0;
};

struct InversionResult {
  Eigen::VectorXd contrast;          // clamped at 0
  std::vector<TraceRow> trace;       // length iterations_run + 1
  std::vector<HalfStepRow> half_trace;
  int iterations_run = 0;
  std::string method;
  Eigen::MatrixXcd e_total;
  double fista_lambda_used = 0.0;
};

/// ||x_hat - x_true|| / ||x_true||; when x_true is the zero map the metric is
/// undefined and ||x_hat|| itself is returned (callers treat it as a sentinel).
inline double relative_error(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_true) {
  if (x_hat.size() != x_true.size())
    throw std::invalid_argument("relative_error: length mismatch");
  const double denom = x_true.norm();
  if (denom == 0.0) return x_hat.norm();
  return (x_hat - x_true).norm() / denom;
}

/// Back-propagation baseline. Per incidence the induced current is taken
/// proportional to G_S^H e^s with the Cauchy step
///   gamma_p = ||G_S^H e^s_p||^2 / ||G_S G_S^H e^s_p||^2,
/// the total field is E^i + G_D J, and lambda_i follows from least squares
/// over incidences of J_{p,i} = lambda_i E^t_{p,i}.
inline InversionResult invert_bp(const ScatteringScene& scene, const GreensOperators& g,
                                 const Eigen::MatrixXcd& e_meas) {
  if (e_meas.rows() != scene.n_rec())
    throw std::invalid_argument("invert_bp: measurement rows != receiver count");
  const Eigen::MatrixXcd e_inc = incident_fields(scene);
  if (e_meas.cols() != e_inc.cols())
    throw std::invalid_argument("invert_bp: measurement cols != incidence count");

  Eigen::MatrixXcd current(scene.n_pixels(), e_meas.cols());
  for (Eigen::Index p = 0; p < e_meas.cols(); ++p) {
    const Eigen::VectorXcd v = g.g_measure.adjoint() * e_meas.col(p);
    const double wn = (g.g_measure * v).squaredNorm();
    if (wn > 0.0)
      current.col(p) = (v.squaredNorm() / wn) * v;
    else
      current.col(p).setZero();
  }
  const Eigen::MatrixXcd e_total = e_inc + g.g_domain * current;

  InversionResult res;
  res.method = "bp";
  res.contrast.resize(scene.n_pixels());
  const cplx scale = scene.lambda_scale();
  Eigen::VectorXcd lambda_vec(scene.n_pixels());
  for (Eigen::Index i = 0; i < scene.n_pixels(); ++i) {
    cplx num = 0.0;
    double den = 0.0;
    for (Eigen::Index p = 0; p < e_total.cols(); ++p) {
      num += std::conj(e_total(i, p)) * current(i, p);
      den += std::norm(e_total(i, p));
    }
    const cplx lam = den > 0.0 ? num / den : cplx(0.0);
    res.contrast[i] = std::max(0.0, (lam / scale).real());
    lambda_vec[i] = scale * res.contrast[i];
  }
  res.e_total = e_total;
  res.iterations_run = 0;

  const Eigen::MatrixXcd cur = lambda_vec.asDiagonal() * e_total;
  TraceRow row;
  row.state_term = (e_total - g.g_domain * cur - e_inc).squaredNorm();
  row.data_term = (g.g_measure * cur - e_meas).squaredNorm();
  row.cost = row.data_term;
  row.penalized = row.cost;
  res.trace.push_back(row);
  return res;
}

namespace detail {

/// Realified Lambda-step operator for fixed E^t: maps a real code s to the
/// weighted stacked residual pieces of Eq.-(8) form,
///   [ alpha * G_D diag(E^t_p) c0 D s  (re, im per incidence) ;
///     sqrt(1-alpha^2) * G_S diag(E^t_p) c0 D s  (re, im per incidence) ],
/// so that ||A~ s - y~||^2 reproduces the cost C(lambda(s), E^t) exactly.
struct LambdaStepOperator {
  const Eigen::MatrixXd* dict;
  const Eigen::MatrixXcd* g_domain;
  const Eigen::MatrixXcd* g_measure;
  const Eigen::MatrixXcd* e_total;
  cplx c0;
  double w_state;      // alpha
  double w_data;       // sqrt(1 - alpha^2)

  Eigen::Index i_dim() const { return e_total->rows(); }
  Eigen::Index p_dim() const { return e_total->cols(); }
  Eigen::Index r_dim() const { return g_measure->rows(); }
  Eigen::Index out_dim() const { return 2 * p_dim() * (i_dim() + r_dim()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& s) const {
    const Eigen::VectorXcd mu = c0 * (*dict * s).cast<cplx>();
    const Eigen::MatrixXcd z = mu.asDiagonal() * (*e_total);
    const Eigen::MatrixXcd u = *g_domain * z;
    const Eigen::MatrixXcd v = *g_measure * z;
    Eigen::VectorXd out(out_dim());
    Eigen::Index at = 0;
    for (Eigen::Index p = 0; p < p_dim(); ++p) {
      out.segment(at, i_dim()) = w_state * u.col(p).real();
      at += i_dim();
      out.segment(at, i_dim()) = w_state * u.col(p).imag();
      at += i_dim();
    }
    for (Eigen::Index p = 0; p < p_dim(); ++p) {
      out.segment(at, r_dim()) = w_data * v.col(p).real();
      at += r_dim();
      out.segment(at, r_dim()) = w_data * v.col(p).imag();
      at += r_dim();
    }
    return out;
  }

  /// Targets y~ in the same stacking: state part E^t - E^i, data part E^s.
  Eigen::VectorXd targets(const Eigen::MatrixXcd& e_inc, const Eigen::MatrixXcd& e_meas) const {
    Eigen::VectorXd out(out_dim());
    Eigen::Index at = 0;
    for (Eigen::Index p = 0; p < p_dim(); ++p) {
      const Eigen::VectorXcd d = e_total->col(p) - e_inc.col(p);
      out.segment(at, i_dim()) = w_state * d.real();
      at += i_dim();
      out.segment(at, i_dim()) = w_state * d.imag();
      at += i_dim();
    }
    for (Eigen::Index p = 0; p < p_dim(); ++p) {
      out.segment(at, r_dim()) = w_data * e_meas.col(p).real();
      at += r_dim();
      out.segment(at, r_dim()) = w_data * e_meas.col(p).imag();
      at += r_dim();
    }
    return out;
  }

  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& r) const {
    Eigen::MatrixXcd ru(i_dim(), p_dim());
    Eigen::MatrixXcd rv(r_dim(), p_dim());
    Eigen::Index at = 0;
    for (Eigen::Index p = 0; p < p_dim(); ++p) {
      ru.col(p).real() = w_state * r.segment(at, i_dim());
      at += i_dim();
      ru.col(p).imag() = w_state * r.segment(at, i_dim());
      at += i_dim();
    }
    for (Eigen::Index p = 0; p < p_dim(); ++p) {
      rv.col(p).real() = w_data * r.segment(at, r_dim());
      at += r_dim();
      rv.col(p).imag() = w_data * r.segment(at, r_dim());
      at += r_dim();
    }
    const Eigen::MatrixXcd w = g_domain->adjoint() * ru + g_measure->adjoint() * rv;
    const Eigen::VectorXcd zeta =
        (e_total->conjugate().array() * w.array()).matrix().rowwise().sum();
    const Eigen::VectorXcd scaled = std::conj(c0) * zeta;
    return dict->transpose() * scaled.real();
  }

  LinearOperatorHandle handle() const {
    LinearOperatorHandle h;
    h.in_dim = dict->cols();
    h.out_dim = out_dim();
    h.apply = [this](const Eigen::VectorXd& s) { return apply(s); };
    h.apply_adjoint = [this](const Eigen::VectorXd& r) { return apply_adjoint(r); };
    return h;
  }
};

}  // namespace detail

struct AlsOptions {
  std::optional<Eigen::VectorXd> init_code;  // bypasses the BP-derived initialization
};

/// Alternating least squares with a sparse-coding prior on the contrast.
/// Initialization comes from invert_bp (the BP contrast is sparse-coded once
/// to seed s). Each iteration then
///   (1) minimizes the cost exactly over E^t (shared Hermitian normal matrix,
///       one LDLT, all incidences), and
///   (2) re-codes s by warm-started FISTA on the realified lambda operator,
///       keeping the best iterate, so C + 2 lambda ||s||_1 never increases.
inline InversionResult invert_als_cs(const ScatteringScene& scene, const GreensOperators& g,
                                     const Eigen::MatrixXcd& e_meas,
                                     const Eigen::MatrixXcd& e_inc, const Dictionary& dict,
                                     const RunConfig& cfg, const AlsOptions& opts = {}) {
  if (dict.atoms.rows() != scene.n_pixels())
    throw std::invalid_argument("invert_als_cs: dictionary signal dim != pixel count");
  if (e_meas.rows() != scene.n_rec() || e_inc.rows() != scene.n_pixels() ||
      e_meas.cols() != e_inc.cols())
    throw std::invalid_argument("invert_als_cs: field dimensions inconsistent");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("invert_als_cs: alpha must lie in (0,1)");

  const double alpha = cfg.alpha;
  const double w_state = alpha;
  const double w_data = std::sqrt(1.0 - alpha * alpha);
  const cplx c0 = scene.lambda_scale();

  InversionResult bp = invert_bp(scene, g, e_meas);

  Eigen::VectorXd s_prev;
  Eigen::MatrixXcd e_total;
  if (opts.init_code) {
    if (opts.init_code->size() != dict.atoms.cols())
      throw std::invalid_argument("invert_als_cs: init_code length != atom count");
    s_prev = *opts.init_code;
  } else {
    const LinearOperatorHandle d_op = dense_operator(dict.atoms);
    const double seed_lambda =
        std::max(0.01 * (dict.atoms.transpose() * bp.contrast).lpNorm<Eigen::Infinity>(),
                 1e-30);
    s_prev = fista(d_op, bp.contrast, seed_lambda, cfg.fista_iters).code.coefficients;
  }
  Eigen::VectorXcd lambda_vec = c0 * (dict.atoms * s_prev).cast<cplx>();

  if (opts.init_code) {
    // no BP field goes with a caller-supplied code; take the exact E^t for it
    // so the row-0 cost refers to a consistent pair
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(scene.n_pixels(), scene.n_pixels()) -
                               g.g_domain * lambda_vec.asDiagonal();
    const Eigen::MatrixXcd b = g.g_measure * lambda_vec.asDiagonal();
    const Eigen::MatrixXcd h = (alpha * alpha) * (a.adjoint() * a) +
                               (1.0 - alpha * alpha) * (b.adjoint() * b);
    const Eigen::MatrixXcd rhs = (alpha * alpha) * (a.adjoint() * e_inc) +
                                 (1.0 - alpha * alpha) * (b.adjoint() * e_meas);
    e_total = h.ldlt().solve(rhs);
  } else {
    e_total = bp.e_total;
  }

  InversionResult res;
  res.method = "als_cs";
  auto cost_terms = [&](const Eigen::VectorXcd& lam, const Eigen::MatrixXcd& et, double& state,
                        double& data) {
    const Eigen::MatrixXcd cur = lam.asDiagonal() * et;
    state = (et - g.g_domain * cur - e_inc).squaredNorm();
    data = (g.g_measure * cur - e_meas).squaredNorm();
  };

  {
    TraceRow row;
    cost_terms(lambda_vec, e_total, row.state_term, row.data_term);
    row.cost = alpha * alpha * row.state_term + (1.0 - alpha * alpha) * row.data_term;
    row.l1_norm = s_prev.lpNorm<1>();
    res.trace.push_back(row);
  }

  double lambda_fista = cfg.fista_lambda;  // 0 means: fix from the first Lambda-step
  const Eigen::MatrixXcd eye =
      Eigen::MatrixXcd::Identity(scene.n_pixels(), scene.n_pixels());
  int flat_count = 0;

  for (int it = 1; it <= cfg.als_iters; ++it) {
    // (1) E^t-step: exact minimizer of C over the total field, Lambda fixed
    const Eigen::MatrixXcd a = eye - g.g_domain * lambda_vec.asDiagonal();
    const Eigen::MatrixXcd b = g.g_measure * lambda_vec.asDiagonal();
    const Eigen::MatrixXcd h =
        (alpha * alpha) * (a.adjoint() * a) + (1.0 - alpha * alpha) * (b.adjoint() * b);
    const Eigen::MatrixXcd rhs = (alpha * alpha) * (a.adjoint() * e_inc) +
                                 (1.0 - alpha * alpha) * (b.adjoint() * e_meas);
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(h);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("invert_als_cs: E^t-step factorization failed at iteration " +
                           std::to_string(it));
    e_total = ldlt.solve(rhs);

    // (2) Lambda-step: warm-started best-iterate FISTA on the realified operator
    detail::LambdaStepOperator lso{&dict.atoms, &g.g_domain, &g.g_measure,
                                   &e_total,    c0,          w_state,
                                   w_data};
    const LinearOperatorHandle op = lso.handle();
    const Eigen::VectorXd y = lso.targets(e_inc, e_meas);
    // freeze the l1 weight before the first half row so both half rows of an
    // iteration report the penalized objective under the same weight
    if (lambda_fista == 0.0)
      lambda_fista = std::max(0.01 * lso.apply_adjoint(y).lpNorm<Eigen::Infinity>(), 1e-30);

    {
      HalfStepRow half;
      half.iteration = it;
      half.lambda_step = false;
      half.cost = evaluate_cost(scene, g, lambda_vec, e_total, e_inc, e_meas, alpha);
      half.penalized = half.cost + 2.0 * lambda_fista * s_prev.lpNorm<1>();
      res.half_trace.push_back(half);
    }

    FistaOptions fopts;
    fopts.warm_start = s_prev;
    fopts.return_best = true;
    const IterativeResult fr = fista(op, y, lambda_fista, cfg.fista_iters, fopts);
    const Eigen::VectorXd s = fr.code.coefficients;
    lambda_vec = c0 * (dict.atoms * s).cast<cplx>();

    TraceRow row;
    row.iteration = it;
    cost_terms(lambda_vec, e_total, row.state_term, row.data_term);
    row.cost = alpha * alpha * row.state_term + (1.0 - alpha * alpha) * row.data_term;
    row.l1_norm = s.lpNorm<1>();
    row.penalized = row.cost + 2.0 * lambda_fista * row.l1_norm;
    if (fr.objective.size() >= 2) {
      const double last = fr.objective.back();
      const double prev = fr.objective[fr.objective.size() - 2];
      row.fista_converged = std::abs(last - prev) <= 1e-9 * std::max(std::abs(prev), 1e-30);
    }
    res.trace.push_back(row);

    {
      HalfStepRow half;
      half.iteration = it;
      half.lambda_step = true;
      half.cost = row.cost;
      half.penalized = row.penalized;
      res.half_trace.push_back(half);
    }

    res.iterations_run = it;
    s_prev = s;

    const double c_prev = res.trace[res.trace.size() - 2].cost;
    if (std::abs(row.cost - c_prev) < 1e-6 * std::max(std::abs(c_prev), 1e-30)) {
      if (++flat_count >= 3) break;
    } else {
      flat_count = 0;
    }
  }

  // the penalized column of the initialization row needs the frozen weight
  res.trace[0].penalized = res.trace[0].cost + 2.0 * lambda_fista * res.trace[0].l1_norm;
  res.fista_lambda_used = lambda_fista;
  res.e_total = e_total;
  res.contrast = (dict.atoms * s_prev).cwiseMax(0.0);
  return res;
}

}  // namespace mwtcs

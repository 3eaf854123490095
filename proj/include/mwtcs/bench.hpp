#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mwtcs/config.hpp"
#include "mwtcs/dictionary.hpp"
#include "mwtcs/forward.hpp"
#include "mwtcs/invert.hpp"
#include "mwtcs/io.hpp"
#include "mwtcs/phantoms.hpp"

namespace mwtcs {

struct BenchRow {
  int id = 0;
  std::string method;          // "bp" or "als_cs"
  double relative_error = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;    // reported separately; timings are not reproducible
  bool sentinel = false;       // truth was the zero map, value is ||x_hat||
  bool failed = false;
  std::string fail_message;
};

struct BenchmarkReport {
  std::vector<BenchRow> rows;
  double median_bp = 0.0;
  double median_als = 0.0;
  double mean_bp = 0.0;
  double mean_als = 0.0;
  double win_rate = 0.0;       // fraction of included phantoms where als_cs beats bp
  int n_included = 0;          // phantoms with both methods ok and nonzero truth
  RunConfig config;
  CirclePhantomSpec phantom_spec;
  std::uint64_t seed = 0;
  int n_test = 0;
  std::vector<Eigen::VectorXd> truths;
  std::vector<Eigen::VectorXd> bp_maps;
  std::vector<Eigen::VectorXd> als_maps;
  std::vector<InversionResult> als_results;  // full traces, for monotonicity checks
};

inline nlohmann::json phantom_spec_to_json(const CirclePhantomSpec& s) {
  return nlohmann::json{
      {"n_circles_min", s.n_circles_min},   {"n_circles_max", s.n_circles_max},
      {"radius_min_px", s.radius_min_px},   {"radius_max_px", s.radius_max_px},
      {"epsilon_r_min", s.epsilon_r_min},   {"epsilon_r_max", s.epsilon_r_max},
      {"grid_pixels_per_side", s.grid_pixels_per_side},
  };
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Held-out evaluation: test phantoms come from the test seed stream, which is
/// disjoint from the training stream by construction. Each phantom is pushed
/// through the forward solver (noiseless) and both inverters.
inline BenchmarkReport run_benchmark(const RunConfig& cfg, const Dictionary& dict, int n_test,
                                     std::uint64_t seed) {
  if (n_test < 1) throw std::invalid_argument("run_benchmark: n_test must be >= 1");
  BenchmarkReport rep;
  rep.config = cfg;
  rep.seed = seed;
  rep.n_test = n_test;
  rep.phantom_spec.grid_pixels_per_side = cfg.grid_pixels_per_side;
  rep.phantom_spec.validate();

  const ScatteringScene scene = build_scene(cfg);
  if (dict.atoms.rows() != scene.n_pixels())
    throw std::invalid_argument("run_benchmark: dictionary does not match the grid");
  const GreensOperators greens = build_greens(scene);
  const Eigen::MatrixXcd e_inc = incident_fields(scene);

  std::vector<double> errs_bp, errs_als;
  int wins = 0;
  for (int t = 0; t < n_test; ++t) {
    const Eigen::VectorXd truth =
        generate_phantom(rep.phantom_spec, stream_seed(seed, kTestStream, t));
    rep.truths.push_back(truth);

    Eigen::MatrixXcd e_meas;
    try {
      e_meas = forward_solve(scene, greens, truth).scattered;
    } catch (const std::exception& e) {
      for (const char* method : {"bp", "als_cs"}) {
        BenchRow row;
        row.id = t;
        row.method = method;
        row.failed = true;
        row.fail_message = e.what();
        row.relative_error = std::nan("");
        rep.rows.push_back(row);
      }
      rep.bp_maps.push_back(Eigen::VectorXd::Zero(truth.size()));
      rep.als_maps.push_back(Eigen::VectorXd::Zero(truth.size()));
      rep.als_results.emplace_back();
      continue;
    }

    const bool zero_truth = truth.isZero(0.0);
    bool both_ok = true;
    double err_bp = 0.0, err_als = 0.0;

    {
      BenchRow row;
      row.id = t;
      row.method = "bp";
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const InversionResult r = invert_bp(scene, greens, e_meas);
        row.relative_error = relative_error(r.contrast, truth);
        row.iterations = r.iterations_run;
        row.sentinel = zero_truth;
        rep.bp_maps.push_back(r.contrast);
        err_bp = row.relative_error;
      } catch (const std::exception& e) {
        row.failed = true;
        row.fail_message = e.what();
        row.relative_error = std::nan("");
        rep.bp_maps.push_back(Eigen::VectorXd::Zero(truth.size()));
        both_ok = false;
      }
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rep.rows.push_back(row);
    }

    {
      BenchRow row;
      row.id = t;
      row.method = "als_cs";
      const auto t0 = std::chrono::steady_clock::now();
      try {
        InversionResult r = invert_als_cs(scene, greens, e_meas, e_inc, dict, cfg);
        row.relative_error = relative_error(r.contrast, truth);
        row.iterations = r.iterations_run;
        row.sentinel = zero_truth;
        rep.als_maps.push_back(r.contrast);
        err_als = row.relative_error;
        rep.als_results.push_back(std::move(r));
      } catch (const std::exception& e) {
        row.failed = true;
        row.fail_message = e.what();
        row.relative_error = std::nan("");
        rep.als_maps.push_back(Eigen::VectorXd::Zero(truth.size()));
        rep.als_results.emplace_back();
        both_ok = false;
      }
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rep.rows.push_back(row);
    }

    if (both_ok && !zero_truth) {
      ++rep.n_included;
      errs_bp.push_back(err_bp);
      errs_als.push_back(err_als);
      if (err_als < err_bp) ++wins;
    }
  }

  rep.median_bp = median_of(errs_bp);
  rep.median_als = median_of(errs_als);
  if (!errs_bp.empty()) {
    double sb = 0.0, sa = 0.0;
    for (double v : errs_bp) sb += v;
    for (double v : errs_als) sa += v;
    rep.mean_bp = sb / static_cast<double>(errs_bp.size());
    rep.mean_als = sa / static_cast<double>(errs_als.size());
    rep.win_rate = static_cast<double>(wins) / static_cast<double>(rep.n_included);
  }
  return rep;
}

namespace detail {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Writes report.csv, aggregate.json, rerun.json, per-phantom triptych PGMs
/// (truth | bp | als_cs), and timings.csv. Everything except timings.csv is
/// byte-reproducible for a fixed (config, seed).
inline void emit_report(const BenchmarkReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&out_dir](const std::string& name) { return out_dir + "/" + name; };

  {
    std::ofstream csv(path("report.csv"));
    if (!csv) throw IoError(IoError::Kind::open_failed, "cannot write report.csv");
    csv << "id,method,relative_error,iterations,sentinel\n";
    for (const auto& row : rep.rows)
      csv << row.id << "," << row.method << "," << detail::fmt_g17(row.relative_error) << ","
          << row.iterations << "," << (row.sentinel ? 1 : 0) << "\n";
  }

  {
    std::ofstream csv(path("timings.csv"));
    if (!csv) throw IoError(IoError::Kind::open_failed, "cannot write timings.csv");
    csv << "id,method,wall_time_s\n";
    for (const auto& row : rep.rows)
      csv << row.id << "," << row.method << "," << detail::fmt_g17(row.wall_time_s) << "\n";
  }

  int n_failed = 0, n_sentinel = 0;
  for (const auto& row : rep.rows) {
    if (row.failed) ++n_failed;
    if (row.sentinel) ++n_sentinel;
  }
  nlohmann::json agg{
      {"n_test", rep.n_test},
      {"seed", rep.seed},
      {"config", to_json(rep.config)},
      {"phantom_spec", phantom_spec_to_json(rep.phantom_spec)},
      {"median_bp", rep.median_bp},
      {"median_als_cs", rep.median_als},
      {"mean_bp", rep.mean_bp},
      {"mean_als_cs", rep.mean_als},
      {"win_rate_als_cs", rep.win_rate},
      {"n_included", rep.n_included},
      {"n_failed_rows", n_failed},
      {"n_sentinel_rows", n_sentinel},
  };
  {
    std::ofstream f(path("aggregate.json"));
    if (!f) throw IoError(IoError::Kind::open_failed, "cannot write aggregate.json");
    f << agg.dump(2) << "\n";
  }
  {
    nlohmann::json rerun{{"config", to_json(rep.config)},
                         {"phantom_spec", phantom_spec_to_json(rep.phantom_spec)},
                         {"seed", rep.seed},
                         {"n_test", rep.n_test}};
    std::ofstream f(path("rerun.json"));
    if (!f) throw IoError(IoError::Kind::open_failed, "cannot write rerun.json");
    f << rerun.dump(2) << "\n";
  }

  const int m = rep.phantom_spec.grid_pixels_per_side;
  for (std::size_t t = 0; t < rep.truths.size(); ++t) {
    const Eigen::MatrixXd truth = as_image(rep.truths[t], m);
    const Eigen::MatrixXd bp = as_image(rep.bp_maps[t], m);
    const Eigen::MatrixXd als = as_image(rep.als_maps[t], m);
    double hi = std::max({truth.maxCoeff(), bp.maxCoeff(), als.maxCoeff()});
    if (!(hi > 0.0)) hi = 1.0;
    Eigen::MatrixXd trip = Eigen::MatrixXd::Zero(m, 3 * m + 2);
    trip.block(0, 0, m, m) = truth;
    trip.block(0, m + 1, m, m) = bp;
    trip.block(0, 2 * m + 2, m, m) = als;
    char name[48];
    std::snprintf(name, sizeof name, "phantom_%03d.pgm", static_cast<int>(t));
    write_image_pgm(path(name), trip, 0.0, hi);
  }
}

}  // namespace mwtcs

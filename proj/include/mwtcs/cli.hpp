#pragma once

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mwtcs/bench.hpp"
#include "mwtcs/config.hpp"
#include "mwtcs/dictionary.hpp"
#include "mwtcs/forward.hpp"
#include "mwtcs/invert.hpp"
#include "mwtcs/io.hpp"
#include "mwtcs/linear_ops.hpp"
#include "mwtcs/phantoms.hpp"
#include "mwtcs/version.hpp"

namespace mwtcs::cli {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // reserved; this build is single-threaded
  std::vector<std::string> overrides;
};

inline void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--config", c.config_path, "JSON run config (missing keys take defaults)");
  cmd->add_option("--out", c.out_dir, "output directory (default: $MWTCS_OUT_ROOT or ./out)");
  cmd->add_option("--seed", c.seed, "seed override");
  cmd->add_option("--threads", c.threads, "reserved; this build runs single-threaded");
  cmd->add_option("--set", c.overrides, "config override, key=value (repeatable)")
      ->take_all();
}

inline std::string resolve_out_dir(const CommonArgs& c, const std::string& sub) {
  if (!c.out_dir.empty()) return c.out_dir;
  const char* root = std::getenv("MWTCS_OUT_ROOT");
  const std::string base = root && *root ? root : "out";
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::tm tmv{};
  localtime_r(&now, &tmv);
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tmv);
  return base + "/" + sub + "-" + stamp;
}

/// Config file, then --set overrides, then --seed, flags last.
inline RunConfig effective_config(const CommonArgs& c) {
  nlohmann::json j = nlohmann::json::object();
  if (!c.config_path.empty()) {
    std::ifstream f(c.config_path);
    if (!f) throw ConfigError("cannot open config file: " + c.config_path);
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  for (const auto& kv : c.overrides) apply_override(j, kv);
  if (c.seed) j["seed"] = *c.seed;
  return config_from_json(j);
}

inline void echo_config(const RunConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  save_config(out_dir + "/effective-config.json", cfg);
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw IoError(IoError::Kind::open_failed, "cannot write " + path);
  f << j.dump(2) << "\n";
}

inline void write_pgm_auto(const std::string& path, const Eigen::MatrixXd& img) {
  double lo = img.minCoeff();
  double hi = img.maxCoeff();
  if (!(hi > lo)) hi = lo + 1.0;
  write_image_pgm(path, img, lo, hi);
}

inline void save_dictionary(const std::string& dir, const Dictionary& dict,
                            nlohmann::json sidecar) {
  write_matrix(dir + "/dict.mtx", dict.atoms);
  sidecar["provenance"] = provenance_name(dict.provenance);
  sidecar["signal_dim"] = dict.atoms.rows();
  sidecar["n_atoms"] = dict.atoms.cols();
  write_json(dir + "/dict-sidecar.json", sidecar);
}

inline Dictionary load_dictionary(const std::string& path) {
  Dictionary d;
  d.atoms = read_real_matrix(path);
  d.provenance = Provenance::learned;
  const std::string sidecar =
      (std::filesystem::path(path).parent_path() / "dict-sidecar.json").string();
  if (std::filesystem::exists(sidecar)) {
    std::ifstream f(sidecar);
    nlohmann::json j;
    if (f && (f >> j, j.contains("provenance"))) {
      const std::string p = j["provenance"].get<std::string>();
      if (p == "dct") d.provenance = Provenance::dct;
      else if (p == "kronecker") d.provenance = Provenance::kronecker;
    }
  }
  d.validate();
  return d;
}

inline CirclePhantomSpec spec_for(const RunConfig& cfg) {
  CirclePhantomSpec spec;
  spec.grid_pixels_per_side = cfg.grid_pixels_per_side;
  return spec;
}

// ---- subcommands ----

inline int cmd_info() {
  RunConfig def;
  std::cout << "mwtcs " << kVersion << "\n";
  std::cout << "compiler: " << __VERSION__ << "\n";
  std::cout << "eigen: " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
            << EIGEN_MINOR_VERSION << "\n";
  std::cout << "default config:\n" << to_json(def).dump(2) << "\n";
  return 0;
}

struct PhantomArgs {
  CommonArgs common;
  int count = 1;
  std::string stream = "train";
  int pgm_previews = 0;
  CirclePhantomSpec spec;
};

inline int cmd_phantom(const PhantomArgs& a) {
  RunConfig cfg = effective_config(a.common);
  const std::string dir = resolve_out_dir(a.common, "phantom");
  echo_config(cfg, dir);
  CirclePhantomSpec spec = a.spec;
  spec.grid_pixels_per_side = cfg.grid_pixels_per_side;
  const std::uint64_t ns = a.stream == "test" ? kTestStream : kTrainStream;
  const Eigen::MatrixXd data = generate_dataset(spec, a.count, cfg.seed, ns);
  write_matrix(dir + "/phantoms.mtx", data);
  nlohmann::json sidecar = phantom_spec_to_json(spec);
  sidecar["count"] = a.count;
  sidecar["seed"] = cfg.seed;
  sidecar["stream"] = a.stream;
  write_json(dir + "/phantom-spec.json", sidecar);
  for (int t = 0; t < std::min(a.pgm_previews, a.count); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "phantom_%03d.pgm", t);
    write_pgm_auto(dir + "/" + name,
                   as_image(data.row(t).transpose(), spec.grid_pixels_per_side));
  }
  std::cout << "wrote " << a.count << " phantoms to " << dir << "\n";
  return 0;
}

struct DictDctArgs {
  CommonArgs common;
  double overcompleteness = 4.0;
};

inline int cmd_dict_dct(const DictDctArgs& a) {
  RunConfig cfg = effective_config(a.common);
  const std::string dir = resolve_out_dir(a.common, "dict-dct");
  echo_config(cfg, dir);
  const Dictionary d = dct_dictionary(cfg.grid_pixels_per_side, a.overcompleteness);
  save_dictionary(dir, d,
                  {{"m", cfg.grid_pixels_per_side}, {"overcompleteness", a.overcompleteness}});
  std::cout << "wrote " << d.atoms.rows() << "x" << d.atoms.cols() << " DCT dictionary to "
            << dir << "\n";
  return 0;
}

struct DictTrainArgs {
  CommonArgs common;
  std::string phantoms_path;
  int train_count = 10000;
  int atoms = 0;  // 0: 4 * I
  LearnOptions learn;
};

inline int cmd_dict_train(const DictTrainArgs& a) {
  RunConfig cfg = effective_config(a.common);
  const std::string dir = resolve_out_dir(a.common, "dict-train");
  echo_config(cfg, dir);

  Eigen::MatrixXd data;
  if (!a.phantoms_path.empty()) {
    data = read_real_matrix(a.phantoms_path);
  } else {
    data = generate_dataset(spec_for(cfg), a.train_count, cfg.seed, kTrainStream);
  }
  const int j_atoms = a.atoms > 0 ? a.atoms : static_cast<int>(4 * data.cols());
  LearnOptions opt = a.learn;
  opt.seed = cfg.seed;
  const LearnResult lr = learn_dictionary(data, j_atoms, opt);

  save_dictionary(dir, lr.dict,
                  {{"lambda_reg", opt.lambda_reg},
                   {"epochs", opt.epochs},
                   {"batch_size", opt.batch_size},
                   {"coding_iters", opt.coding_iters},
                   {"seed", opt.seed},
                   {"train_count", data.rows()}});
  {
    std::ofstream csv(dir + "/trace.csv");
    csv << "epoch,objective\n";
    for (std::size_t e = 0; e < lr.epoch_objective.size(); ++e)
      csv << (e + 1) << "," << detail::fmt_g17(lr.epoch_objective[e]) << "\n";
  }
  std::cout << "trained " << lr.dict.atoms.rows() << "x" << lr.dict.atoms.cols()
            << " dictionary";
  if (!lr.epoch_objective.empty())
    std::cout << ", final objective " << lr.epoch_objective.back();
  std::cout << "\n";
  return 0;
}

struct ForwardArgs {
  CommonArgs common;
  std::string phantom_path;
  int row = 0;
  std::optional<double> snr_db;
  bool emit_total = false;
};

inline int cmd_forward(const ForwardArgs& a) {
  RunConfig cfg = effective_config(a.common);
  const std::string dir = resolve_out_dir(a.common, "forward");
  echo_config(cfg, dir);

  const Eigen::MatrixXd data = read_real_matrix(a.phantom_path);
  if (a.row < 0 || a.row >= data.rows())
    throw std::invalid_argument("--row out of range for the phantom file");
  Eigen::VectorXd contrast;
  if (data.cols() == 1 && data.rows() > 1 && a.row == 0)
    contrast = data.col(0);  // single column vector file
  else
    contrast = data.row(a.row).transpose();

  const ScatteringScene scene = build_scene(cfg);
  if (contrast.size() != scene.n_pixels())
    throw std::invalid_argument("phantom length does not match grid (I = M*M)");
  const GreensOperators greens = build_greens(scene);
  const ForwardFields f = forward_solve(scene, greens, contrast);
  Eigen::MatrixXcd e_scat = f.scattered;
  if (a.snr_db) e_scat = add_noise(e_scat, *a.snr_db, cfg.seed);
  write_matrix(dir + "/e_scat.mtx", e_scat);
  if (a.emit_total) write_matrix(dir + "/e_total.mtx", f.total);
  std::cout << "wrote scattered fields (" << e_scat.rows() << "x" << e_scat.cols() << ") to "
            << dir << "\n";
  return 0;
}

struct InvertArgs {
  CommonArgs common;
  std::string method = "als-cs";
  std::string escat_path;
  std::string dict_path;
  std::string truth_path;
};

inline int cmd_invert(const InvertArgs& a) {
  RunConfig cfg = effective_config(a.common);
  const std::string dir = resolve_out_dir(a.common, "invert");
  echo_config(cfg, dir);

  const Eigen::MatrixXcd e_meas = read_complex_matrix(a.escat_path);
  const ScatteringScene scene = build_scene(cfg);
  const GreensOperators greens = build_greens(scene);

  InversionResult res;
  if (a.method == "bp") {
    res = invert_bp(scene, greens, e_meas);
  } else if (a.method == "als-cs") {
    if (a.dict_path.empty())
      throw std::invalid_argument("--dict is required for method als-cs");
    const Dictionary dict = load_dictionary(a.dict_path);
    const Eigen::MatrixXcd e_inc = incident_fields(scene);
    res = invert_als_cs(scene, greens, e_meas, e_inc, dict, cfg);
  } else {
    throw std::invalid_argument("--method must be bp or als-cs");
  }

  write_matrix(dir + "/contrast.mtx", Eigen::MatrixXd(res.contrast));
  write_pgm_auto(dir + "/contrast.pgm", as_image(res.contrast, scene.m));
  {
    std::ofstream csv(dir + "/trace.csv");
    csv << "iteration,cost,state_term,data_term,l1_norm,penalized,fista_converged\n";
    for (const auto& r : res.trace)
      csv << r.iteration << "," << detail::fmt_g17(r.cost) << ","
          << detail::fmt_g17(r.state_term) << "," << detail::fmt_g17(r.data_term) << ","
          << detail::fmt_g17(r.l1_norm) << "," << detail::fmt_g17(r.penalized) << ","
          << (r.fista_converged ? 1 : 0) << "\n";
  }
  nlohmann::json metrics{{"method", res.method},
                         {"iterations_run", res.iterations_run},
                         {"fista_lambda_used", res.fista_lambda_used}};
  if (!a.truth_path.empty()) {
    const Eigen::MatrixXd t = read_real_matrix(a.truth_path);
    Eigen::VectorXd truth = t.cols() == 1 ? Eigen::VectorXd(t.col(0))
                                          : Eigen::VectorXd(t.row(0).transpose());
    metrics["relative_error"] = relative_error(res.contrast, truth);
  }
  write_json(dir + "/metrics.json", metrics);
  std::cout << "inversion (" << res.method << ") finished, " << res.iterations_run
            << " iterations\n";
  return 0;
}

struct LinearDemoArgs {
  CommonArgs common;
  std::string scenario = "mask";
  std::string solver = "fista";
  double keep_frac = 0.5;
  int factor = 2;
  double freq_frac = 0.3;
  int sparsity = 3;
  double lambda_reg = 1e-3;
  int iters = 500;
  double overcompleteness = 1.0;
  bool debias = false;
  std::string image_path;
};

inline int cmd_linear_demo(const LinearDemoArgs& a) {
  RunConfig cfg = effective_config(a.common);
  const std::string dir = resolve_out_dir(a.common, "linear-demo");
  echo_config(cfg, dir);

  const int m = cfg.grid_pixels_per_side;
  const Eigen::Index i_dim = static_cast<Eigen::Index>(m) * m;
  const Dictionary dict = dct_dictionary(m, a.overcompleteness);

  Eigen::VectorXd x_true;
  if (!a.image_path.empty()) {
    const Eigen::MatrixXd img = read_real_matrix(a.image_path);
    if (img.size() != i_dim)
      throw std::invalid_argument("--image size does not match the configured grid");
    x_true.resize(i_dim);
    for (Eigen::Index r = 0; r < img.rows(); ++r)
      for (Eigen::Index c = 0; c < img.cols(); ++c) x_true[r * img.cols() + c] = img(r, c);
  } else {
    // synthesize a dictionary-sparse image. Masking is incoherent with every
    // atom, but blur and the frequency operators only pass low frequencies,
    // so those scenarios draw from the low-band corner of the frame; with
    // uniform atoms the measurements could not support a recovery at all.
    Rng rng(mix_seed(cfg.seed, 0x64656d6f5f696d67ull));
    const auto n_axis =
        static_cast<Eigen::Index>(std::ceil(m * std::sqrt(a.overcompleteness)));
    const Eigen::Index band =
        a.scenario == "mask" ? n_axis : std::max<Eigen::Index>(2, n_axis / 4);
    if (a.sparsity < 0 || static_cast<std::int64_t>(a.sparsity) > band * band)
      throw std::invalid_argument("--sparsity exceeds the atom band for this scenario");
    Eigen::VectorXd s = Eigen::VectorXd::Zero(dict.atoms.cols());
    for (int k = 0; k < a.sparsity; ++k) {
      Eigen::Index j;
      do {
        const auto j1 = static_cast<Eigen::Index>(
            rng.uniform_int(0, static_cast<std::int64_t>(band) - 1));
        const auto j2 = static_cast<Eigen::Index>(
            rng.uniform_int(0, static_cast<std::int64_t>(band) - 1));
        j = j1 * n_axis + j2;
      } while (s[j] != 0.0);
      s[j] = rng.uniform(0.5, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    x_true = dict.atoms * s;
  }

  Rng op_rng(mix_seed(cfg.seed, 0x64656d6f5f6f7073ull));
  MeasurementOperator phi;
  if (a.scenario == "mask") {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(i_dim));
    for (Eigen::Index i = 0; i < i_dim; ++i) all[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = all.size(); i > 1; --i)
      std::swap(all[i - 1], all[static_cast<std::size_t>(
                                op_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    const auto n_keep = static_cast<std::size_t>(
        std::max(1.0, std::ceil(a.keep_frac * static_cast<double>(i_dim))));
    all.resize(std::min(all.size(), n_keep));
    std::sort(all.begin(), all.end());
    phi = make_mask_operator(std::move(all), i_dim);
  } else if (a.scenario == "blur") {
    phi = make_blur_downsample_operator(a.factor, i_dim);
  } else if (a.scenario == "fourier") {
    // variable-density draw: always keep DC, favour low radii. A uniform draw
    // misses most of a frequency-sparse image's support at any sane fraction.
    const auto n_keep = static_cast<std::size_t>(
        std::max(1.0, std::ceil(a.freq_frac * static_cast<double>(i_dim))));
    const double sigma = static_cast<double>(m) / 6.0;
    std::vector<std::pair<double, Eigen::Index>> keyed;
    keyed.reserve(static_cast<std::size_t>(i_dim) - 1);
    for (Eigen::Index i = 1; i < i_dim; ++i) {
      const double ru = static_cast<double>(std::min(i / m, m - i / m));
      const double rv = static_cast<double>(std::min(i % m, m - i % m));
      const double w = std::exp(-(ru * ru + rv * rv) / (2.0 * sigma * sigma));
      keyed.emplace_back(std::pow(op_rng.uniform(), 1.0 / w), i);
    }
    std::sort(keyed.begin(), keyed.end(), std::greater<>());
    std::vector<Eigen::Index> keep{0};
    for (std::size_t i = 0; i + 1 < n_keep && i < keyed.size(); ++i)
      keep.push_back(keyed[i].second);
    std::sort(keep.begin(), keep.end());
    phi = make_fourier_subsample_operator(std::move(keep), m);
  } else if (a.scenario == "radial") {
    phi = make_fourier_subsample_operator(radial_frequency_set(m, a.freq_frac), m);
  } else {
    throw std::invalid_argument("--scenario must be mask, blur, fourier, or radial");
  }

  const Eigen::VectorXd y = phi.op.apply(x_true);
  RecoverParams params;
  params.lambda_reg = a.lambda_reg;
  params.iters = a.iters;
  params.k_max = a.sparsity;
  params.debias = a.debias;
  const RecoverResult rec = recover_sparse(
      phi, dict, y, a.solver == "omp" ? RecoverSolver::omp : RecoverSolver::fista, params);

  write_matrix(dir + "/truth.mtx", Eigen::MatrixXd(x_true));
  write_matrix(dir + "/measured.mtx", Eigen::MatrixXd(y));
  write_matrix(dir + "/recovered.mtx", Eigen::MatrixXd(rec.x_hat));
  write_pgm_auto(dir + "/truth.pgm", as_image(x_true, m));
  write_pgm_auto(dir + "/recovered.pgm", as_image(rec.x_hat, m));
  if (phi.kind == MeasurementKind::mask) {
    const Eigen::VectorXd observed = phi.op.apply_adjoint(y);
    write_pgm_auto(dir + "/observed.pgm", as_image(observed, m));
  }

  const double err = relative_error(rec.x_hat, x_true);
  write_json(dir + "/metrics.json", {{"scenario", a.scenario},
                                     {"solver", a.solver},
                                     {"relative_error", err},
                                     {"measurements", y.size()},
                                     {"signal_dim", i_dim},
                                     {"nonzero_coefficients", rec.code.sparsity_k()}});
  std::cout << a.scenario << " demo relative error " << err << "\n";
  return 0;
}

struct BenchArgs {
  CommonArgs common;
  std::string dict_path;
  int n_test = 20;
  int train_count = 10000;
  int atoms = 0;
  LearnOptions learn;
};

inline int cmd_bench(const BenchArgs& a) {
  RunConfig cfg = effective_config(a.common);
  const std::string dir = resolve_out_dir(a.common, "bench");
  echo_config(cfg, dir);

  Dictionary dict;
  if (!a.dict_path.empty()) {
    dict = load_dictionary(a.dict_path);
  } else {
    std::cout << "no --dict given, training one (this is the slow path)\n";
    const Eigen::MatrixXd data = generate_dataset(spec_for(cfg), a.train_count, cfg.seed,
                                                  kTrainStream);
    const int j_atoms = a.atoms > 0 ? a.atoms : static_cast<int>(4 * data.cols());
    LearnOptions opt = a.learn;
    opt.seed = cfg.seed;
    dict = learn_dictionary(data, j_atoms, opt).dict;
    save_dictionary(dir, dict,
                    {{"lambda_reg", opt.lambda_reg},
                     {"epochs", opt.epochs},
                     {"batch_size", opt.batch_size},
                     {"coding_iters", opt.coding_iters},
                     {"seed", opt.seed},
                     {"train_count", data.rows()}});
  }

  const BenchmarkReport rep = run_benchmark(cfg, dict, a.n_test, cfg.seed);
  emit_report(rep, dir);
  std::cout << "bench: median bp " << rep.median_bp << ", median als_cs " << rep.median_als
            << ", win rate " << rep.win_rate << " over " << rep.n_included << " phantoms\n";
  return 0;
}

inline int dispatch(int argc, const char* const* argv) {
  CLI::App app{"microwave tomography with a sparse-coding prior"};
  app.require_subcommand(1);

  PhantomArgs pa;
  auto* phantom = app.add_subcommand("phantom", "generate random-circle contrast maps");
  add_common(phantom, pa.common);
  phantom->add_option("--count", pa.count, "number of phantoms");
  phantom->add_option("--stream", pa.stream, "seed stream: train or test")
      ->check(CLI::IsMember({"train", "test"}));
  phantom->add_option("--pgm", pa.pgm_previews, "write PGM previews for the first N maps");
  phantom->add_option("--circles-min", pa.spec.n_circles_min, "min circles per map");
  phantom->add_option("--circles-max", pa.spec.n_circles_max, "max circles per map");
  phantom->add_option("--radius-min", pa.spec.radius_min_px, "min radius in pixels");
  phantom->add_option("--radius-max", pa.spec.radius_max_px, "max radius in pixels");
  phantom->add_option("--eps-min", pa.spec.epsilon_r_min, "min relative permittivity");
  phantom->add_option("--eps-max", pa.spec.epsilon_r_max, "max relative permittivity");

  DictDctArgs da;
  auto* dct = app.add_subcommand("dict-dct", "build the overcomplete 2D DCT dictionary");
  add_common(dct, da.common);
  dct->add_option("--overcompleteness", da.overcompleteness, "J/I ratio (>= 1)");

  DictTrainArgs ta;
  auto* train = app.add_subcommand("dict-train", "online dictionary learning on phantoms");
  add_common(train, ta.common);
  train->add_option("--phantoms", ta.phantoms_path, "training set MTX1 (T x I); generated if absent");
  train->add_option("--train-count", ta.train_count, "phantoms to generate when no --phantoms");
  train->add_option("--atoms", ta.atoms, "atom count J (default 4*I)");
  train->add_option("--lambda", ta.learn.lambda_reg, "coding l1 weight");
  train->add_option("--epochs", ta.learn.epochs, "training epochs");
  train->add_option("--batch", ta.learn.batch_size, "mini-batch size");
  train->add_option("--coding-iters", ta.learn.coding_iters, "FISTA iterations per coding");

  ForwardArgs fa;
  auto* fwd = app.add_subcommand("forward", "simulate scattered fields for a phantom");
  add_common(fwd, fa.common);
  fwd->add_option("--phantom", fa.phantom_path, "phantom MTX1 (row-major contrast)")
      ->required();
  fwd->add_option("--row", fa.row, "row of the phantom file to use");
  fwd->add_option("--snr-db", fa.snr_db, "add complex Gaussian noise at this SNR (dB)");
  fwd->add_flag("--emit-total", fa.emit_total, "also write the total field");

  InvertArgs ia;
  auto* inv = app.add_subcommand("invert", "reconstruct contrast from scattered fields");
  add_common(inv, ia.common);
  inv->add_option("--method", ia.method, "bp or als-cs")
      ->check(CLI::IsMember({"bp", "als-cs"}));
  inv->add_option("--escat", ia.escat_path, "scattered fields MTX1 (complex)")->required();
  inv->add_option("--dict", ia.dict_path, "dictionary MTX1 (required for als-cs)");
  inv->add_option("--truth", ia.truth_path, "ground-truth contrast for error reporting");

  LinearDemoArgs la;
  auto* demo = app.add_subcommand("linear-demo", "generic y = Phi D s recovery demos");
  add_common(demo, la.common);
  demo->add_option("--scenario", la.scenario, "mask, blur, fourier, or radial")
      ->check(CLI::IsMember({"mask", "blur", "fourier", "radial"}));
  demo->add_option("--solver", la.solver, "fista or omp")
      ->check(CLI::IsMember({"fista", "omp"}));
  demo->add_option("--keep-frac", la.keep_frac, "mask: fraction of pixels kept");
  demo->add_option("--factor", la.factor, "blur: decimation factor");
  demo->add_option("--freq-frac", la.freq_frac, "fourier/radial: fraction of frequencies");
  demo->add_option("--sparsity", la.sparsity, "atoms in the synthetic image");
  demo->add_option("--lambda", la.lambda_reg, "FISTA l1 weight");
  demo->add_option("--iters", la.iters, "FISTA iterations");
  demo->add_option("--overcompleteness", la.overcompleteness, "dictionary J/I ratio");
  demo->add_flag("--debias", la.debias, "least-squares refit on the recovered support");
  demo->add_option("--image", la.image_path, "use this MTX1 image instead of a synthetic one");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "train/test benchmark: bp vs als-cs");
  add_common(bench, ba.common);
  bench->add_option("--dict", ba.dict_path, "trained dictionary MTX1; trains one if absent");
  bench->add_option("--n-test", ba.n_test, "held-out phantom count");
  bench->add_option("--train-count", ba.train_count, "training phantoms when training here");
  bench->add_option("--atoms", ba.atoms, "atom count J when training here (default 4*I)");
  bench->add_option("--lambda", ba.learn.lambda_reg, "training coding l1 weight");
  bench->add_option("--epochs", ba.learn.epochs, "training epochs");
  bench->add_option("--batch", ba.learn.batch_size, "training mini-batch size");
  bench->add_option("--coding-iters", ba.learn.coding_iters, "training FISTA iterations");

  auto* info = app.add_subcommand("info", "print version, build info, default config");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (phantom->parsed()) return cmd_phantom(pa);
    if (dct->parsed()) return cmd_dict_dct(da);
    if (train->parsed()) return cmd_dict_train(ta);
    if (fwd->parsed()) return cmd_forward(fa);
    if (inv->parsed()) return cmd_invert(ia);
    if (demo->parsed()) return cmd_linear_demo(la);
    if (bench->parsed()) return cmd_bench(ba);
    if (info->parsed()) return cmd_info();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == IoError::Kind::open_failed ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace mwtcs::cli

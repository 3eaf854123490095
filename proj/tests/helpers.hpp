#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <filesystem>
#include <string>

#include "mwtcs/rng.hpp"

namespace testutil {

/// Scratch directory under the system temp root, removed on scope exit.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    const int id = counter++;
    path = std::filesystem::temp_directory_path() /
           ("mwtcs-test-" + std::to_string(::getpid()) + "-" + std::to_string(id));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t seed) {
  mwtcs::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

inline Eigen::MatrixXd unit_column_matrix(Eigen::Index rows, Eigen::Index cols,
                                          std::uint64_t seed) {
  Eigen::MatrixXd m = random_matrix(rows, cols, seed);
  for (Eigen::Index c = 0; c < cols; ++c) m.col(c) /= m.col(c).norm();
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  mwtcs::Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace testutil

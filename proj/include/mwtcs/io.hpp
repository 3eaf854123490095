#pragma once

#include <Eigen/Core>

#include <bit>
#include <cfenv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mwtcs {

/// Binary matrix container "MTX1".
///
/// Layout (all little-endian):
///   bytes 0..3   magic "MTX1"
///   byte  4      dtype code, u8: 1 = real64, 2 = complex128
///   bytes 5..12  rows, u64
///   bytes 13..20 cols, u64
///   payload      rows*cols scalars, row-major; complex stored interleaved (re, im)
class IoError : public std::runtime_error {
 public:
  enum class Kind {
    open_failed,
    write_failed,
    bad_magic,
    bad_header,
    unknown_dtype,
    truncated,
    non_finite,
    dtype_mismatch,
  };

  IoError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::string& out, double v) {
  put_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline double get_f64_le(const unsigned char* p) {
  return std::bit_cast<double>(get_u64_le(p));
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(IoError::Kind::open_failed, "cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError(IoError::Kind::write_failed, "write failed: " + path);
}

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(IoError::Kind::open_failed, "cannot open for reading: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace detail

inline constexpr std::uint8_t kDtypeReal64 = 1;
inline constexpr std::uint8_t kDtypeComplex128 = 2;

inline void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw std::invalid_argument("write_matrix: rows and cols must be >= 1");
  if (!m.allFinite())
    throw IoError(IoError::Kind::non_finite, "write_matrix: non-finite values in " + path);
  std::string out;
  out.reserve(21 + static_cast<std::size_t>(m.size()) * 8);
  out += "MTX1";
  out.push_back(static_cast<char>(kDtypeReal64));
  detail::put_u64_le(out, static_cast<std::uint64_t>(m.rows()));
  detail::put_u64_le(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) detail::put_f64_le(out, m(r, c));
  detail::write_file(path, out);
}

inline void write_matrix(const std::string& path, const Eigen::MatrixXcd& m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw std::invalid_argument("write_matrix: rows and cols must be >= 1");
  if (!m.allFinite())
    throw IoError(IoError::Kind::non_finite, "write_matrix: non-finite values in " + path);
  std::string out;
  out.reserve(21 + static_cast<std::size_t>(m.size()) * 16);
  out += "MTX1";
  out.push_back(static_cast<char>(kDtypeComplex128));
  detail::put_u64_le(out, static_cast<std::uint64_t>(m.rows()));
  detail::put_u64_le(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      detail::put_f64_le(out, m(r, c).real());
      detail::put_f64_le(out, m(r, c).imag());
    }
  detail::write_file(path, out);
}

using MatrixVariant = std::variant<Eigen::MatrixXd, Eigen::MatrixXcd>;

inline MatrixVariant read_matrix(const std::string& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() < 4 || std::string(bytes.begin(), bytes.begin() + 4) != "MTX1")
    throw IoError(IoError::Kind::bad_magic, "bad magic in " + path);
  if (bytes.size() < 21)
    throw IoError(IoError::Kind::truncated, "truncated header in " + path);
  const std::uint8_t dtype = bytes[4];
  if (dtype != kDtypeReal64 && dtype != kDtypeComplex128)
    throw IoError(IoError::Kind::unknown_dtype,
                  "unknown dtype code " + std::to_string(dtype) + " in " + path);
  const std::uint64_t rows = detail::get_u64_le(bytes.data() + 5);
  const std::uint64_t cols = detail::get_u64_le(bytes.data() + 13);
  if (rows < 1 || cols < 1)
    throw IoError(IoError::Kind::bad_header, "zero-sized matrix in " + path);
  const std::uint64_t scalars = rows * cols * (dtype == kDtypeComplex128 ? 2 : 1);
  if (bytes.size() != 21 + scalars * 8)
    throw IoError(IoError::Kind::truncated, "payload size mismatch in " + path);
  const unsigned char* p = bytes.data() + 21;
  if (dtype == kDtypeReal64) {
    Eigen::MatrixXd m(rows, cols);
    for (std::uint64_t r = 0; r < rows; ++r)
      for (std::uint64_t c = 0; c < cols; ++c, p += 8) m(r, c) = detail::get_f64_le(p);
    return m;
  }
  Eigen::MatrixXcd m(rows, cols);
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c, p += 16)
      m(r, c) = {detail::get_f64_le(p), detail::get_f64_le(p + 8)};
  return m;
}

inline Eigen::MatrixXd read_real_matrix(const std::string& path) {
  auto v = read_matrix(path);
  if (!std::holds_alternative<Eigen::MatrixXd>(v))
    throw IoError(IoError::Kind::dtype_mismatch, "expected real64 matrix in " + path);
  return std::get<Eigen::MatrixXd>(v);
}

inline Eigen::MatrixXcd read_complex_matrix(const std::string& path) {
  auto v = read_matrix(path);
  if (!std::holds_alternative<Eigen::MatrixXcd>(v))
    throw IoError(IoError::Kind::dtype_mismatch, "expected complex128 matrix in " + path);
  return std::get<Eigen::MatrixXcd>(v);
}

/// 8-bit binary PGM (P5). Values are mapped affinely from [lo, hi] to [0, 255]
/// with clamping; ties round half-to-even (std::nearbyint under the default
/// rounding mode), so (lo+hi)/2 maps to 128.
inline void write_image_pgm(const std::string& path, const Eigen::MatrixXd& img,
                            double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("write_image_pgm: requires hi > lo");
  std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) +
                    "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(img.size()));
  const double scale = 255.0 / (hi - lo);
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      double t = (img(r, c) - lo) * scale;
      t = std::nearbyint(t);
      if (t < 0.0) t = 0.0;
      if (t > 255.0) t = 255.0;
      out.push_back(static_cast<char>(static_cast<unsigned char>(t)));
    }
  detail::write_file(path, out);
}

// row-major image view of a length-m*m vector
inline Eigen::MatrixXd as_image(const Eigen::VectorXd& v, int m) {
  if (v.size() != static_cast<Eigen::Index>(m) * m)
    throw std::invalid_argument("as_image: vector length is not m*m");
  Eigen::MatrixXd img(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) img(r, c) = v[r * m + c];
  return img;
}

}  // namespace mwtcs

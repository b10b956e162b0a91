#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "mrrecon/array.hpp"

namespace mrr {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadMagicError : IoError {
  using IoError::IoError;
};
struct TruncatedFileError : IoError {
  using IoError::IoError;
};
struct DimOverflowError : IoError {
  using IoError::IoError;
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw TruncatedFileError("truncated array file: " + path);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

inline void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is, const std::string& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw TruncatedFileError("truncated array file: " + path);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace detail

// "MRA1" format: magic, rank (u32 LE), dims (u32 LE each), then interleaved
// real/imag float64 LE, row-major.

inline void write_array(const std::string& path, const ComplexArray& a) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("MRA1", 4);
  detail::put_u32(os, static_cast<std::uint32_t>(a.rank()));
  for (std::size_t d : a.dims)
    detail::put_u32(os, static_cast<std::uint32_t>(d));
  for (const cplx& z : a.data) {
    detail::put_f64(os, z.real());
    detail::put_f64(os, z.imag());
  }
  if (!os) throw IoError("write failure: " + path);
}

inline ComplexArray read_array(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  char magic[4];
  if (!is.read(magic, 4)) throw TruncatedFileError("truncated header: " + path);
  if (std::memcmp(magic, "MRA1", 4) != 0)
    throw BadMagicError("bad magic in " + path);
  const std::uint32_t rank = detail::get_u32(is, path);
  if (rank > 16) throw DimOverflowError("unreasonable rank in " + path);
  std::vector<std::size_t> dims(rank);
  std::size_t total = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const std::uint32_t d = detail::get_u32(is, path);
    if (d == 0) throw DimOverflowError("zero extent in " + path);
    if (total > std::numeric_limits<std::size_t>::max() / d / 16)
      throw DimOverflowError("dimension overflow in " + path);
    dims[i] = d;
    total *= d;
  }
  ComplexArray a(dims);
  for (std::size_t i = 0; i < total; ++i) {
    const double re = detail::get_f64(is, path);
    const double im = detail::get_f64(is, path);
    a.data[i] = cplx{re, im};
  }
  return a;
}

inline void write_mask(const std::string& path, const SamplingMask& m) {
  ComplexArray a({m.rows, m.cols});
  for (std::size_t i = 0; i < a.data.size(); ++i)
    a.data[i] = cplx{m.collected[i] ? 1.0 : 0.0, 0.0};
  write_array(path, a);
  nlohmann::json meta = {{"acr_origin", {m.acr_origin_r, m.acr_origin_c}},
                         {"acr_size", {m.acr_rows, m.acr_cols}}};
  std::ofstream os(path + ".json");
  if (!os) throw IoError("cannot open for writing: " + path + ".json");
  os << meta.dump(2) << "\n";
}

inline SamplingMask read_mask(const std::string& path) {
  const ComplexArray a = read_array(path);
  if (a.rank() != 2) throw IoError("mask must be 2D: " + path);
  SamplingMask m;
  m.rows = a.dims[0];
  m.cols = a.dims[1];
  m.collected.resize(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m.collected[i] = a.data[i].real() != 0.0 ? 1 : 0;
  std::ifstream is(path + ".json");
  if (is) {
    nlohmann::json meta = nlohmann::json::parse(is);
    m.acr_origin_r = meta["acr_origin"][0];
    m.acr_origin_c = meta["acr_origin"][1];
    m.acr_rows = meta["acr_size"][0];
    m.acr_cols = meta["acr_size"][1];
  }
  return m;
}

/// JSON field names are part of the external interface; keep them stable.
inline nlohmann::json config_to_json(const ReconConfig& c,
                                     std::size_t acr_size = 0,
                                     std::uint64_t seed = 0) {
  nlohmann::json j = {{"nu", c.nu},
                      {"lambda_s", c.lambda_s},
                      {"kappa", c.kappa},
                      {"max_iters", c.max_iters},
                      {"acr_size", acr_size},
                      {"seed", seed}};
  if (c.sigma_sq) j["sigma_sq"] = *c.sigma_sq;
  return j;
}

inline ReconConfig config_from_json(const nlohmann::json& j) {
  ReconConfig c;
  if (j.contains("nu")) c.nu = j["nu"];
  if (j.contains("lambda_s")) c.lambda_s = j["lambda_s"];
  if (j.contains("kappa")) c.kappa = j["kappa"];
  if (j.contains("max_iters")) c.max_iters = j["max_iters"];
  if (j.contains("sigma_sq")) c.sigma_sq = j["sigma_sq"].get<double>();
  return c;
}

}  // namespace mrr

#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrr {

using cplx = std::complex<double>;

/// N-dimensional complex grid, row-major.  The universal carrier for images,
/// k-space data, and wavelet coefficients.
struct ComplexArray {
  std::vector<std::size_t> dims;
  std::vector<cplx> data;

  ComplexArray() = default;

  explicit ComplexArray(std::vector<std::size_t> d) : dims(std::move(d)) {
    data.assign(size(), cplx{0.0, 0.0});
  }

  ComplexArray(std::vector<std::size_t> d, std::vector<cplx> v)
      : dims(std::move(d)), data(std::move(v)) {
    if (size() != data.size())
      throw std::invalid_argument("ComplexArray: dims do not match data length");
  }

  std::size_t size() const {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::size_t rank() const { return dims.size(); }

  // 2D accessors; first index is the slower-varying (row) axis.
  cplx& at(std::size_t u, std::size_t v) { return data[u * dims[1] + v]; }
  const cplx& at(std::size_t u, std::size_t v) const {
    return data[u * dims[1] + v];
  }

  bool same_dims(const ComplexArray& o) const { return dims == o.dims; }
};

inline double norm2(const ComplexArray& a) {
  double s = 0.0;
  for (const cplx& z : a.data) s += std::norm(z);
  return std::sqrt(s);
}

inline cplx dotc(const ComplexArray& a, const ComplexArray& b) {
  if (a.data.size() != b.data.size())
    throw std::invalid_argument("dotc: length mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.data.size(); ++i)
    s += std::conj(a.data[i]) * b.data[i];
  return s;
}

inline ComplexArray& axpy(ComplexArray& y, cplx alpha, const ComplexArray& x) {
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += alpha * x.data[i];
  return y;
}

inline ComplexArray scaled(const ComplexArray& x, cplx alpha) {
  ComplexArray r = x;
  for (cplx& z : r.data) z *= alpha;
  return r;
}

inline ComplexArray operator-(const ComplexArray& a, const ComplexArray& b) {
  ComplexArray r = a;
  for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= b.data[i];
  return r;
}

inline ComplexArray operator+(const ComplexArray& a, const ComplexArray& b) {
  ComplexArray r = a;
  for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] += b.data[i];
  return r;
}

/// Binary indicator of collected k-space locations, stored in the centered
/// (fftshifted) layout.  Carries the fully-sampled auto-calibration region.
struct SamplingMask {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint8_t> collected;  // row-major, centered layout
  std::size_t acr_origin_r = 0, acr_origin_c = 0;
  std::size_t acr_rows = 0, acr_cols = 0;

  bool at(std::size_t r, std::size_t c) const { return collected[r * cols + c]; }
  void set(std::size_t r, std::size_t c, bool v) {
    collected[r * cols + c] = v ? 1 : 0;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : collected) n += b;
    return n;
  }

  double sample_fraction() const {
    return static_cast<double>(count()) / (static_cast<double>(rows) * cols);
  }

  bool in_acr(std::size_t r, std::size_t c) const {
    return r >= acr_origin_r && r < acr_origin_r + acr_rows &&
           c >= acr_origin_c && c < acr_origin_c + acr_cols;
  }
};

/// Full mask over the given grid; ACR is the whole grid.
inline SamplingMask full_mask(std::size_t rows, std::size_t cols) {
  SamplingMask m;
  m.rows = rows;
  m.cols = cols;
  m.collected.assign(rows * cols, 1);
  m.acr_rows = rows;
  m.acr_cols = cols;
  return m;
}

/// Solver and regularization parameters for one reconstruction.
struct ReconConfig {
  double nu = 0.0;            // l1 weight on wavelet coefficients
  double lambda_s = 0.0;      // SPIRiT regularization weight
  double kappa = 1.0;         // term-balancing constant, > 0
  std::vector<double> gamma;  // per-frequency weights, centered layout
  std::size_t max_iters = 1000;
  std::optional<std::vector<std::uint8_t>> support;  // 1 inside Omega
  std::optional<double> sigma_sq;  // average-energy bound outside Omega

  void validate(std::size_t grid_size) const {
    if (nu < 0.0 || lambda_s < 0.0) throw std::invalid_argument("negative weight");
    if (kappa <= 0.0) throw std::invalid_argument("kappa must be positive");
    if (!gamma.empty()) {
      if (gamma.size() != grid_size)
        throw std::invalid_argument("gamma length must equal grid size");
      for (double g : gamma)
        if (!(g > 0.0)) throw std::invalid_argument("gamma must be positive");
    }
    if (support && !sigma_sq)
      throw std::invalid_argument("support constraint requires sigma_sq");
  }
};

}  // namespace mrr

#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "mrrecon/array.hpp"

namespace mrr {

namespace detail {

// FFTW plan creation is not thread-safe; execution with execute_dft is.
class FftwPlans {
 public:
  static FftwPlans& instance() {
    static FftwPlans p;
    return p;
  }

  void execute(int sign, std::size_t rows, std::size_t cols, const cplx* in,
               cplx* out) {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto key = std::make_tuple(sign, rows, cols);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<cplx> tmp(rows * cols);
        plan = fftw_plan_dft_2d(
            static_cast<int>(rows), static_cast<int>(cols),
            reinterpret_cast<fftw_complex*>(tmp.data()),
            reinterpret_cast<fftw_complex*>(tmp.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_[key] = plan;
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  ~FftwPlans() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }
  std::mutex mu_;
  std::map<std::tuple<int, std::size_t, std::size_t>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized forward 2D DFT:
///   y[ku,kv] = sum_u sum_v x[u,v] exp(-i 2 pi (ku u / U + kv v / V)).
inline ComplexArray dft2(const ComplexArray& x) {
  if (x.rank() != 2) throw std::invalid_argument("dft2: 2D array required");
  ComplexArray y(x.dims);
  detail::FftwPlans::instance().execute(FFTW_FORWARD, x.dims[0], x.dims[1],
                                        x.data.data(), y.data.data());
  return y;
}

/// Inverse with 1/(UV) normalization, so idft2(dft2(x)) == x.
inline ComplexArray idft2(const ComplexArray& y) {
  if (y.rank() != 2) throw std::invalid_argument("idft2: 2D array required");
  ComplexArray x(y.dims);
  detail::FftwPlans::instance().execute(FFTW_BACKWARD, y.dims[0], y.dims[1],
                                        y.data.data(), x.data.data());
  const double scale = 1.0 / (static_cast<double>(y.dims[0]) * y.dims[1]);
  for (cplx& z : x.data) z *= scale;
  return x;
}

namespace detail {

inline ComplexArray cyclic_shift2(const ComplexArray& a, std::size_t sr,
                                  std::size_t sc) {
  const std::size_t R = a.dims[0], C = a.dims[1];
  ComplexArray out(a.dims);
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t rr = (r + sr) % R;
    for (std::size_t c = 0; c < C; ++c)
      out.at(rr, (c + sc) % C) = a.at(r, c);
  }
  return out;
}

}  // namespace detail

/// Move the zero frequency to the center: shift forward by floor(dim/2).
inline ComplexArray fftshift2(const ComplexArray& a) {
  if (a.rank() != 2) throw std::invalid_argument("fftshift2: 2D array required");
  return detail::cyclic_shift2(a, a.dims[0] / 2, a.dims[1] / 2);
}

/// Inverse of fftshift2 for all extents, including odd.
inline ComplexArray ifftshift2(const ComplexArray& a) {
  if (a.rank() != 2)
    throw std::invalid_argument("ifftshift2: 2D array required");
  const std::size_t R = a.dims[0], C = a.dims[1];
  return detail::cyclic_shift2(a, R - R / 2, C - C / 2);
}

/// Centered-frequency indexing for a 2D grid.  In the centered (shifted)
/// layout, index (r, c) carries frequency (r - R/2, c - C/2).
struct FrequencyGrid {
  std::size_t rows, cols;

  FrequencyGrid(std::size_t r, std::size_t c) : rows(r), cols(c) {}

  double freq_row(std::size_t r) const {
    return static_cast<double>(r) - static_cast<double>(rows / 2);
  }
  double freq_col(std::size_t c) const {
    return static_cast<double>(c) - static_cast<double>(cols / 2);
  }

  /// |k| of the centered index at (r, c).
  double radius(std::size_t r, std::size_t c) const {
    const double kr = freq_row(r), kc = freq_col(c);
    return std::sqrt(kr * kr + kc * kc);
  }

  double max_radius() const {
    double m = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) m = std::max(m, radius(r, c));
    return m;
  }
};

}  // namespace mrr

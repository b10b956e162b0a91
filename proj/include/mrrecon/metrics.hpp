#pragma once

#include <cmath>
#include <limits>

#include "mrrecon/array.hpp"

namespace mrr {

/// Mean local SSIM between two nonnegative magnitude images.  11x11 Gaussian
/// window with sigma 1.5, K1 = 0.01, K2 = 0.03.  Dynamic range defaults to
/// max(ref).  Windows are evaluated where they fit entirely inside the image.
inline double ssim(const std::vector<double>& x, const std::vector<double>& ref,
                   std::size_t rows, std::size_t cols, double dynamic_range = -1.0) {
  if (x.size() != ref.size() || x.size() != rows * cols)
    throw std::invalid_argument("ssim: dims mismatch");
  constexpr int W = 11, H = W / 2;
  if (rows < W || cols < W) throw std::invalid_argument("ssim: image too small");
  double L = dynamic_range;
  if (L < 0.0) {
    L = 0.0;
    for (double v : ref) L = std::max(L, v);
  }
  if (L <= 0.0) L = 1.0;
  const double C1 = (0.01 * L) * (0.01 * L);
  const double C2 = (0.03 * L) * (0.03 * L);

  double win[W * W];
  {
    double s = 0.0;
    for (int i = 0; i < W; ++i)
      for (int j = 0; j < W; ++j) {
        const double di = i - H, dj = j - H;
        win[i * W + j] = std::exp(-(di * di + dj * dj) / (2.0 * 1.5 * 1.5));
        s += win[i * W + j];
      }
    for (double& w : win) w /= s;
  }

  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t r = H; r + H < rows; ++r)
    for (std::size_t c = H; c + H < cols; ++c) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < W; ++i)
        for (int j = 0; j < W; ++j) {
          const double w = win[i * W + j];
          const double a = x[(r + i - H) * cols + (c + j - H)];
          const double b = ref[(r + i - H) * cols + (c + j - H)];
          mx += w * a;
          my += w * b;
          sxx += w * a * a;
          syy += w * b * b;
          sxy += w * a * b;
        }
      sxx -= mx * mx;
      syy -= my * my;
      sxy -= mx * my;
      acc += ((2.0 * mx * my + C1) * (2.0 * sxy + C2)) /
             ((mx * mx + my * my + C1) * (sxx + syy + C2));
      ++n;
    }
  return acc / double(n);
}

inline std::vector<double> magnitudes(const ComplexArray& a) {
  std::vector<double> m(a.data.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(a.data[i]);
  return m;
}

inline double ssim(const ComplexArray& x, const ComplexArray& ref,
                   double dynamic_range = -1.0) {
  if (!x.same_dims(ref)) throw std::invalid_argument("ssim: dims mismatch");
  return ssim(magnitudes(x), magnitudes(ref), x.dims[0], x.dims[1],
              dynamic_range);
}

/// PSNR between two complex images:
///   20 log10( max|ref| / RMSE ),  RMSE over complex differences.
/// Identical inputs give +infinity.
inline double psnr_complex(const ComplexArray& x, const ComplexArray& ref) {
  if (!x.same_dims(ref)) throw std::invalid_argument("psnr: dims mismatch");
  double peak = 0.0;
  for (const cplx& z : ref.data) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) throw std::invalid_argument("psnr: reference is all zero");
  double se = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i)
    se += std::norm(x.data[i] - ref.data[i]);
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double rmse = std::sqrt(se / double(x.data.size()));
  return 20.0 * std::log10(peak / rmse);
}

}  // namespace mrr

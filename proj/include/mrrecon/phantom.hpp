#pragma once

#include <cmath>

#include "mrrecon/fourier.hpp"
#include "mrrecon/operators.hpp"
#include "mrrecon/rng.hpp"

namespace mrr {

namespace detail {

struct Ellipse {
  double value, a, b, x0, y0, phi_deg;
};

// Shepp-Logan ellipses with the bottom trio mirrored so the phantom is
// exactly symmetric about the vertical axis.
inline const Ellipse shepp_logan_ellipses[10] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1100, 0.3100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0460, 0.0230, 0.08, -0.605, 0.0},
};

}  // namespace detail

/// Shepp-Logan ellipse phantom on a rows x cols grid, values in [0, 1].
inline std::vector<double> shepp_logan(std::size_t rows, std::size_t cols) {
  if (rows < 32 || cols < 32)
    throw std::invalid_argument("shepp_logan: dims must be >= 32");
  std::vector<double> img(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = -(double(r) + 0.5 - double(rows) / 2.0) * 2.0 / rows;
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = (double(c) + 0.5 - double(cols) / 2.0) * 2.0 / cols;
      double v = 0.0;
      for (const auto& e : detail::shepp_logan_ellipses) {
        const double phi = e.phi_deg * 3.14159265358979323846 / 180.0;
        const double dx = x - e.x0, dy = y - e.y0;
        const double xr = dx * std::cos(phi) + dy * std::sin(phi);
        const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
        if (xr * xr / (e.a * e.a) + yr * yr / (e.b * e.b) <= 1.0) v += e.value;
      }
      img[r * cols + c] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

inline ComplexArray to_complex(const std::vector<double>& v, std::size_t rows,
                               std::size_t cols) {
  ComplexArray a({rows, cols});
  for (std::size_t i = 0; i < v.size(); ++i) a.data[i] = cplx{v[i], 0.0};
  return a;
}

/// Smooth analytic coil maps: coil centers on a circle outside the FOV,
/// magnitude falling off with distance, linear phase per coil.  The
/// root-sum-square across coils is strictly positive everywhere.
inline SensitivitySet birdcage_maps(std::size_t rows, std::size_t cols,
                                    std::size_t coils) {
  if (coils < 1) throw std::invalid_argument("birdcage_maps: need >= 1 coil");
  const double pi = 3.14159265358979323846;
  SensitivitySet s;
  for (std::size_t c = 0; c < coils; ++c) {
    const double ang = 2.0 * pi * double(c) / double(coils);
    const double cx = 1.4 * std::cos(ang), cy = 1.4 * std::sin(ang);
    ComplexArray map({rows, cols});
    for (std::size_t r = 0; r < rows; ++r) {
      const double y = -(double(r) + 0.5 - double(rows) / 2.0) * 2.0 / rows;
      for (std::size_t cc = 0; cc < cols; ++cc) {
        const double x = (double(cc) + 0.5 - double(cols) / 2.0) * 2.0 / cols;
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        // bounded falloff: image corners can come arbitrarily close to a
        // coil center, so a bare 1/d^2 would concentrate the whole dynamic
        // range in one pixel after peak normalization
        const double mag = 1.0 / (0.25 + d2);
        const double phase = 0.5 * pi * (x * cx + y * cy) / 1.4;
        map.at(r, cc) = mag * cplx{std::cos(phase), std::sin(phase)};
      }
    }
    s.maps.push_back(std::move(map));
  }
  // normalize so the strongest sensitivity is 1
  double peak = 0.0;
  for (const auto& m : s.maps)
    for (const cplx& z : m.data) peak = std::max(peak, std::abs(z));
  for (auto& m : s.maps)
    for (cplx& z : m.data) z /= peak;
  return s;
}

/// Per-coil k-space of the given image plus complex Gaussian noise with the
/// given per-component standard deviation.  Deterministic per seed.
inline std::vector<ComplexArray> simulate_kspace(const ComplexArray& img,
                                                 const SensitivitySet& maps,
                                                 double noise_std,
                                                 std::uint64_t seed) {
  if (maps.rows() != img.dims[0] || maps.cols() != img.dims[1])
    throw std::invalid_argument("simulate_kspace: dims mismatch");
  CounterRng rng(seed);
  std::vector<ComplexArray> out;
  for (std::size_t c = 0; c < maps.coils(); ++c) {
    ComplexArray tmp = img;
    for (std::size_t i = 0; i < tmp.data.size(); ++i)
      tmp.data[i] *= maps.maps[c].data[i];
    ComplexArray k = dft2(tmp);
    if (noise_std > 0.0)
      for (cplx& z : k.data)
        z += noise_std * cplx{rng.next_gaussian(), rng.next_gaussian()};
    out.push_back(std::move(k));
  }
  return out;
}

/// Two-coil construction that satisfies the linear-predictability condition
/// exactly: S1 == 1 and S2(u, v) = exp(i 2 pi u / U), so coil 2's spectrum is
/// coil 1's circularly shifted by one along the first axis.
inline std::pair<ComplexArray, SensitivitySet> exact_pilp_phantom(
    std::size_t rows, std::size_t cols) {
  if (rows % 2 != 0 || cols % 2 != 0)
    throw std::invalid_argument("exact_pilp_phantom: dims must be even");
  const ComplexArray img = to_complex(shepp_logan(rows, cols), rows, cols);
  SensitivitySet s;
  ComplexArray s1({rows, cols});
  for (cplx& z : s1.data) z = cplx{1.0, 0.0};
  ComplexArray s2({rows, cols});
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (std::size_t r = 0; r < rows; ++r) {
    const double ph = two_pi * double(r) / double(rows);
    for (std::size_t c = 0; c < cols; ++c)
      s2.at(r, c) = cplx{std::cos(ph), std::sin(ph)};
  }
  s.maps.push_back(std::move(s1));
  s.maps.push_back(std::move(s2));
  return {img, std::move(s)};
}

}  // namespace mrr

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "mrrecon/fourier.hpp"
#include "mrrecon/rng.hpp"

namespace mrr {

/// ACR extent matching the coarsest wavelet scale: dims / 2^levels.
inline std::pair<std::size_t, std::size_t> default_acr_size(
    std::size_t rows, std::size_t cols, int levels) {
  const std::size_t div = std::size_t{1} << levels;
  if (rows % div != 0 || cols % div != 0)
    throw std::invalid_argument("default_acr_size: dims not divisible by 2^levels");
  return {rows / div, cols / div};
}

struct MaskGenError : std::runtime_error {
  double achieved_fraction;
  MaskGenError(const std::string& msg, double f)
      : std::runtime_error(msg), achieved_fraction(f) {}
};

namespace detail {

// Dart throwing over a seeded permutation of the exterior grid points.
// Minimum distance between two accepted points p, q is r(|midpoint|) with
// r(|k|) = r0 * (1 + alpha * |k| / |k|max).
inline SamplingMask poisson_trial(std::size_t rows, std::size_t cols,
                                  std::size_t acr_rows, std::size_t acr_cols,
                                  double r0, double alpha, std::uint64_t seed) {
  SamplingMask m;
  m.rows = rows;
  m.cols = cols;
  m.collected.assign(rows * cols, 0);
  m.acr_rows = acr_rows;
  m.acr_cols = acr_cols;
  m.acr_origin_r = rows / 2 - acr_rows / 2;
  m.acr_origin_c = cols / 2 - acr_cols / 2;
  for (std::size_t r = m.acr_origin_r; r < m.acr_origin_r + acr_rows; ++r)
    for (std::size_t c = m.acr_origin_c; c < m.acr_origin_c + acr_cols; ++c)
      m.set(r, c, true);

  const FrequencyGrid grid(rows, cols);
  const double kmax = grid.max_radius();
  auto radius = [&](double k) { return r0 * (1.0 + alpha * k / kmax); };

  std::vector<std::uint32_t> order;
  order.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (!m.in_acr(r, c))
        order.push_back(static_cast<std::uint32_t>(r * cols + c));
  CounterRng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);

  std::vector<std::uint8_t> placed(rows * cols, 0);  // exterior samples only
  const double denom = 1.0 - r0 * alpha / (2.0 * kmax);
  for (std::uint32_t idx : order) {
    const std::size_t pr = idx / cols, pc = idx % cols;
    const double pk = grid.radius(pr, pc);
    // Upper bound on the distance at which a neighbor could still conflict.
    const double reach = denom > 0.0 ? radius(pk) / denom : radius(kmax);
    const long w = static_cast<long>(std::ceil(reach));
    bool ok = true;
    for (long dr = -w; dr <= w && ok; ++dr) {
      const long qr = static_cast<long>(pr) + dr;
      if (qr < 0 || qr >= static_cast<long>(rows)) continue;
      for (long dc = -w; dc <= w; ++dc) {
        const long qc = static_cast<long>(pc) + dc;
        if (qc < 0 || qc >= static_cast<long>(cols)) continue;
        if (!placed[qr * cols + qc]) continue;
        const double dist = std::sqrt(double(dr * dr + dc * dc));
        const double midk = grid.radius((pr + qr) / 2, (pc + qc) / 2);
        if (dist < radius(midk)) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      placed[idx] = 1;
      m.collected[idx] = 1;
    }
  }
  return m;
}

}  // namespace detail

struct MaskGenResult {
  SamplingMask mask;
  double r0 = 0.0;  // calibrated base exclusion radius
};

/// Variable-density Poisson-disc mask with an embedded, fully-sampled,
/// centered ACR.  The base radius r0 is calibrated by bisection so the
/// achieved sample fraction lands within +/-0.01 of the target.
inline MaskGenResult generate_mask_calibrated(
    std::size_t rows, std::size_t cols, double target_fraction,
    std::size_t acr_rows, std::size_t acr_cols, std::uint64_t seed,
    double alpha = 3.0) {
  if (target_fraction <= 0.0 || target_fraction > 1.0)
    throw std::invalid_argument("generate_mask: fraction must be in (0, 1]");
  if (acr_rows > rows || acr_cols > cols)
    throw std::invalid_argument("generate_mask: ACR does not fit");
  const double acr_fraction =
      static_cast<double>(acr_rows * acr_cols) / (double(rows) * cols);
  if (target_fraction < acr_fraction)
    throw std::invalid_argument("generate_mask: fraction below ACR coverage");

  if (target_fraction >= 0.995) {
    SamplingMask m = full_mask(rows, cols);
    m.acr_origin_r = rows / 2 - acr_rows / 2;
    m.acr_origin_c = cols / 2 - acr_cols / 2;
    m.acr_rows = acr_rows;
    m.acr_cols = acr_cols;
    return {std::move(m), 0.0};
  }

  double lo = 0.0, hi = static_cast<double>(std::max(rows, cols));
  double best_err = 1.0;
  MaskGenResult best;
  for (int trial = 0; trial < 20; ++trial) {
    const double r0 = 0.5 * (lo + hi);
    SamplingMask m = detail::poisson_trial(rows, cols, acr_rows, acr_cols, r0,
                                           alpha, seed);
    const double f = m.sample_fraction();
    if (std::abs(f - target_fraction) < best_err) {
      best_err = std::abs(f - target_fraction);
      best = {std::move(m), r0};
    }
    if (best_err <= 0.01) return best;
    if (f > target_fraction)
      lo = r0;  // too dense, grow the exclusion radius
    else
      hi = r0;
  }
  throw MaskGenError("generate_mask: calibration failed, achieved fraction " +
                         std::to_string(best.mask.sample_fraction()),
                     best.mask.sample_fraction());
}

inline SamplingMask generate_mask(std::size_t rows, std::size_t cols,
                                  double target_fraction, std::size_t acr_rows,
                                  std::size_t acr_cols, std::uint64_t seed,
                                  double alpha = 3.0) {
  return generate_mask_calibrated(rows, cols, target_fraction, acr_rows,
                                  acr_cols, seed, alpha)
      .mask;
}

}  // namespace mrr

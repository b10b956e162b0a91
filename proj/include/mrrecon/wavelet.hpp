#pragma once

#include <cmath>

#include "mrrecon/array.hpp"

namespace mrr {

namespace detail {

// Daubechies-4 analysis filters, computed from the closed form
// (1±√3)/(4√2) so the taps are orthonormal to machine precision;
// g is the quadrature mirror of h.
inline const double db4_s3 = std::sqrt(3.0);
inline const double db4_c = 1.0 / (4.0 * std::sqrt(2.0));
inline const double db4_h[4] = {
    (1.0 + db4_s3) * db4_c, (3.0 + db4_s3) * db4_c,
    (3.0 - db4_s3) * db4_c, (1.0 - db4_s3) * db4_c};
inline const double db4_g[4] = {
    db4_h[3], -db4_h[2], db4_h[1], -db4_h[0]};

// One analysis pass over a length-L strided lane, periodic extension.
// Output: [approx | detail] in place.
template <typename Vec>
void db4_analyze_lane(Vec& buf, cplx* x, std::size_t L, std::size_t stride) {
  const std::size_t half = L / 2;
  for (std::size_t i = 0; i < half; ++i) {
    cplx a{0.0, 0.0}, d{0.0, 0.0};
    for (std::size_t n = 0; n < 4; ++n) {
      const cplx v = x[((2 * i + n) % L) * stride];
      a += db4_h[n] * v;
      d += db4_g[n] * v;
    }
    buf[i] = a;
    buf[half + i] = d;
  }
  for (std::size_t i = 0; i < L; ++i) x[i * stride] = buf[i];
}

template <typename Vec>
void db4_synthesize_lane(Vec& buf, cplx* x, std::size_t L, std::size_t stride) {
  const std::size_t half = L / 2;
  for (std::size_t i = 0; i < L; ++i) buf[i] = cplx{0.0, 0.0};
  for (std::size_t i = 0; i < half; ++i) {
    const cplx a = x[i * stride], d = x[(half + i) * stride];
    for (std::size_t n = 0; n < 4; ++n)
      buf[(2 * i + n) % L] += db4_h[n] * a + db4_g[n] * d;
  }
  for (std::size_t i = 0; i < L; ++i) x[i * stride] = buf[i];
}

inline void check_divisible(const ComplexArray& x, int levels) {
  if (x.rank() != 2) throw std::invalid_argument("dwt2: 2D array required");
  if (levels < 1) throw std::invalid_argument("dwt2: levels must be >= 1");
  const std::size_t div = std::size_t{1} << levels;
  if (x.dims[0] % div != 0 || x.dims[1] % div != 0 ||
      x.dims[0] < div || x.dims[1] < div)
    throw std::invalid_argument("dwt2: dims not divisible by 2^levels");
}

}  // namespace detail

/// Multilevel separable Daubechies-4 transform, periodic boundaries, applied
/// to real and imaginary channels independently.  Subbands are stored in the
/// standard nested layout inside a same-shape array.  The transform is
/// orthogonal: it preserves the l2 norm exactly.
inline ComplexArray dwt2(const ComplexArray& x, int levels = 4) {
  detail::check_divisible(x, levels);
  ComplexArray w = x;
  std::vector<cplx> buf(std::max(x.dims[0], x.dims[1]));
  std::size_t R = x.dims[0], C = x.dims[1];
  for (int l = 0; l < levels; ++l) {
    for (std::size_t r = 0; r < R; ++r)
      detail::db4_analyze_lane(buf, &w.at(r, 0), C, 1);
    for (std::size_t c = 0; c < C; ++c)
      detail::db4_analyze_lane(buf, &w.at(0, c), R, w.dims[1]);
    R /= 2;
    C /= 2;
  }
  return w;
}

inline ComplexArray idwt2(const ComplexArray& w, int levels = 4) {
  detail::check_divisible(w, levels);
  ComplexArray x = w;
  std::vector<cplx> buf(std::max(w.dims[0], w.dims[1]));
  for (int l = levels - 1; l >= 0; --l) {
    const std::size_t R = w.dims[0] >> l, C = w.dims[1] >> l;
    for (std::size_t c = 0; c < C; ++c)
      detail::db4_synthesize_lane(buf, &x.at(0, c), R, x.dims[1]);
    for (std::size_t r = 0; r < R; ++r)
      detail::db4_synthesize_lane(buf, &x.at(r, 0), C, 1);
  }
  return x;
}

/// Complex soft-thresholding, the proximal operator of t * ||.||_1:
/// z -> z * max(|z| - t, 0) / |z|, with 0 -> 0.
inline ComplexArray soft_threshold(const ComplexArray& w, double t) {
  if (t < 0.0) throw std::invalid_argument("soft_threshold: t must be >= 0");
  ComplexArray out = w;
  for (cplx& z : out.data) {
    const double mag = std::abs(z);
    z = (mag > t) ? z * ((mag - t) / mag) : cplx{0.0, 0.0};
  }
  return out;
}

inline double l1_norm(const ComplexArray& a) {
  double s = 0.0;
  for (const cplx& z : a.data) s += std::abs(z);
  return s;
}

}  // namespace mrr

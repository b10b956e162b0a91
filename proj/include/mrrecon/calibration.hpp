#pragma once

#include <cmath>

#include "mrrecon/fourier.hpp"
#include "mrrecon/rng.hpp"
#include "mrrecon/solvers.hpp"

namespace mrr {

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-target-coil interpolation kernels on a (2R+1)x(2R+1) offset grid.
/// kernels[target][source] holds taps indexed [dr+R][dc+R]; the center tap of
/// kernels[t][t] is identically zero.
struct SpiritKernelSet {
  std::size_t coils = 0;
  int radius = 2;
  // taps[t][c][(dr+R)*(2R+1) + (dc+R)]
  std::vector<std::vector<std::vector<cplx>>> taps;

  std::size_t side() const { return 2 * std::size_t(radius) + 1; }

  cplx tap(std::size_t target, std::size_t src, int dr, int dc) const {
    return taps[target][src][(dr + radius) * side() + (dc + radius)];
  }
  cplx& tap(std::size_t target, std::size_t src, int dr, int dc) {
    return taps[target][src][(dr + radius) * side() + (dc + radius)];
  }

  static SpiritKernelSet zeros(std::size_t coils, int radius) {
    SpiritKernelSet k;
    k.coils = coils;
    k.radius = radius;
    const std::size_t n = (2 * radius + 1) * (2 * radius + 1);
    k.taps.assign(coils, std::vector<std::vector<cplx>>(
                             coils, std::vector<cplx>(n, cplx{0.0, 0.0})));
    return k;
  }
};

/// Cut the centered ACR block out of each coil's (unshifted) spectrum.
inline std::vector<ComplexArray> extract_acr(
    const std::vector<ComplexArray>& kspace, const SamplingMask& mask) {
  if (mask.acr_rows == 0 || mask.acr_cols == 0)
    throw CalibrationError("extract_acr: mask carries no ACR metadata");
  std::vector<ComplexArray> out;
  out.reserve(kspace.size());
  for (const ComplexArray& k : kspace) {
    if (k.dims[0] != mask.rows || k.dims[1] != mask.cols)
      throw CalibrationError("extract_acr: k-space / mask shape mismatch");
    const ComplexArray centered = fftshift2(k);
    ComplexArray block({mask.acr_rows, mask.acr_cols});
    for (std::size_t r = 0; r < mask.acr_rows; ++r)
      for (std::size_t c = 0; c < mask.acr_cols; ++c)
        block.at(r, c) = centered.at(mask.acr_origin_r + r, mask.acr_origin_c + c);
    out.push_back(std::move(block));
  }
  return out;
}

namespace detail {

// Tap enumeration for one target coil: all (c, dr, dc) except the target's
// center tap, in a fixed order.
struct TapIndex {
  std::size_t coil;
  int dr, dc;
};

inline std::vector<TapIndex> enumerate_taps(std::size_t coils,
                                            std::size_t target, int R) {
  std::vector<TapIndex> taps;
  for (std::size_t c = 0; c < coils; ++c)
    for (int dr = -R; dr <= R; ++dr)
      for (int dc = -R; dc <= R; ++dc) {
        if (c == target && dr == 0 && dc == 0) continue;
        taps.push_back({c, dr, dc});
      }
  return taps;
}

}  // namespace detail

/// SPIRiT kernel calibration: for every target coil, least-squares fit of the
/// interpolation taps over the ACR interior (only points where the kernel
/// stays entirely inside the ACR), solved matrix-free with LSQR.
inline SpiritKernelSet estimate_kernels(const std::vector<ComplexArray>& acr,
                                        int kernel_radius = 2,
                                        double damping = 0.0) {
  if (acr.empty()) throw CalibrationError("estimate_kernels: no coils");
  const std::size_t C = acr.size();
  const int R = kernel_radius;
  const std::size_t Ar = acr[0].dims[0], Ac = acr[0].dims[1];
  if (Ar <= 2 * std::size_t(R) || Ac <= 2 * std::size_t(R))
    throw CalibrationError("estimate_kernels: ACR not larger than kernel");
  const std::size_t ir = Ar - 2 * R, ic = Ac - 2 * R;  // interior extents
  const std::size_t rows = ir * ic;

  SpiritKernelSet kset = SpiritKernelSet::zeros(C, R);
  for (std::size_t target = 0; target < C; ++target) {
    const auto taps = detail::enumerate_taps(C, target, R);
    if (rows < taps.size())
      throw CalibrationError(
          "estimate_kernels: underdetermined calibration, " +
          std::to_string(rows) + " interior points for " +
          std::to_string(taps.size()) + " taps");

    // A[p, j] = acr[taps[j].coil] at (p - d_j); interior p keeps p - d in range.
    auto forward = [&](const ComplexArray& x) {
      ComplexArray y({rows + (damping > 0.0 ? taps.size() : 0)});
      for (std::size_t pr = 0; pr < ir; ++pr)
        for (std::size_t pc = 0; pc < ic; ++pc) {
          cplx s{0.0, 0.0};
          for (std::size_t j = 0; j < taps.size(); ++j)
            s += x.data[j] * acr[taps[j].coil].at(pr + R - taps[j].dr,
                                                  pc + R - taps[j].dc);
          y.data[pr * ic + pc] = s;
        }
      if (damping > 0.0)
        for (std::size_t j = 0; j < taps.size(); ++j)
          y.data[rows + j] = damping * x.data[j];
      return y;
    };
    auto adjoint = [&](const ComplexArray& y) {
      ComplexArray x({taps.size()});
      for (std::size_t j = 0; j < taps.size(); ++j) {
        cplx s{0.0, 0.0};
        for (std::size_t pr = 0; pr < ir; ++pr)
          for (std::size_t pc = 0; pc < ic; ++pc)
            s += std::conj(acr[taps[j].coil].at(pr + R - taps[j].dr,
                                                pc + R - taps[j].dc)) *
                 y.data[pr * ic + pc];
        if (damping > 0.0) s += damping * y.data[rows + j];
        x.data[j] = s;
      }
      return x;
    };

    ComplexArray b({rows + (damping > 0.0 ? taps.size() : 0)});
    for (std::size_t pr = 0; pr < ir; ++pr)
      for (std::size_t pc = 0; pc < ic; ++pc)
        b.data[pr * ic + pc] = acr[target].at(pr + R, pc + R);

    const LsqrResult sol = lsqr(forward, adjoint, b, 2000, 1e-12);
    for (std::size_t j = 0; j < taps.size(); ++j)
      kset.tap(target, taps[j].coil, taps[j].dr, taps[j].dc) = sol.x.data[j];
  }
  return kset;
}

/// Full interpolation operator W applied to multi-coil k-space by direct
/// circular convolution: out[t][k] = sum_c sum_d taps[t][c][d] k_c[k - d].
inline std::vector<ComplexArray> apply_kernels(
    const SpiritKernelSet& kset, const std::vector<ComplexArray>& kspace) {
  if (kspace.size() != kset.coils)
    throw CalibrationError("apply_kernels: coil count mismatch");
  const std::size_t Rn = kspace[0].dims[0], Cn = kspace[0].dims[1];
  const int R = kset.radius;
  std::vector<ComplexArray> out(kset.coils, ComplexArray({Rn, Cn}));
  for (std::size_t t = 0; t < kset.coils; ++t)
    for (std::size_t c = 0; c < kset.coils; ++c)
      for (int dr = -R; dr <= R; ++dr)
        for (int dc = -R; dc <= R; ++dc) {
          const cplx w = kset.tap(t, c, dr, dc);
          if (w == cplx{0.0, 0.0}) continue;
          for (std::size_t r = 0; r < Rn; ++r) {
            const std::size_t sr = (r + Rn - ((dr % int(Rn)) + Rn) % Rn) % Rn;
            for (std::size_t cc = 0; cc < Cn; ++cc) {
              const std::size_t sc =
                  (cc + Cn - ((dc % int(Cn)) + Cn) % Cn) % Cn;
              out[t].at(r, cc) += w * kspace[c].at(sr, sc);
            }
          }
        }
  return out;
}

/// Two-branch power-law magnitude model P(k) = max(mL |k|^-pL, mH |k|^-pH),
/// with a separately fitted value p0 at the zero frequency.
struct PowerLawFit {
  double m_L = 1.0, p_L = 0.0, m_H = 1.0, p_H = 0.0;
  double p0 = 1.0;

  double eval(double k) const {
    if (k <= 0.0) return p0;
    return std::max(m_L * std::pow(k, -p_L), m_H * std::pow(k, -p_H));
  }
};

namespace detail {

struct SpectrumPoint {
  double k;    // centered radius
  double mag;  // root-sum-square magnitude across coils
};

inline std::vector<SpectrumPoint> collected_spectrum(
    const std::vector<ComplexArray>& kspace, const SamplingMask& mask) {
  std::vector<ComplexArray> centered;
  centered.reserve(kspace.size());
  for (const ComplexArray& k : kspace) centered.push_back(fftshift2(k));
  const FrequencyGrid grid(mask.rows, mask.cols);
  std::vector<SpectrumPoint> pts;
  for (std::size_t r = 0; r < mask.rows; ++r)
    for (std::size_t c = 0; c < mask.cols; ++c) {
      if (!mask.at(r, c)) continue;
      double ss = 0.0;
      for (const ComplexArray& kc : centered) ss += std::norm(kc.at(r, c));
      pts.push_back({grid.radius(r, c), std::sqrt(ss)});
    }
  return pts;
}

// Least-squares line a + b*x through (x, y) pairs.
inline std::pair<double, double> fit_line(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) return {sy / n, 0.0};
  return {(sy * sxx - sx * sxy) / det, (n * sxy - sx * sy) / det};
}

}  // namespace detail

/// Fit P(k) to the collected magnitudes |b(k)| (root-sum-square across coils)
/// with Levenberg-Marquardt, parameters optimized in log-space.  p0 comes from
/// a degree-1 fit over 0 < |k| <= 4 evaluated at 0.
inline PowerLawFit fit_power_law(const std::vector<ComplexArray>& kspace,
                                 const SamplingMask& mask,
                                 double near_zero_radius = 4.0) {
  auto pts = detail::collected_spectrum(kspace, mask);
  std::vector<detail::SpectrumPoint> nz;
  for (const auto& p : pts)
    if (p.k > 0.0 && p.mag > 0.0) nz.push_back(p);
  {
    std::vector<double> radii;
    for (const auto& p : nz) radii.push_back(p.k);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    if (radii.size() < 8)
      throw CalibrationError("fit_power_law: need >= 8 distinct radii");
  }

  // Initialize each branch from a log-log line over its half of the radii.
  std::sort(nz.begin(), nz.end(),
            [](const auto& a, const auto& b) { return a.k < b.k; });
  auto loglog_init = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> lx, ly;
    for (std::size_t i = lo; i < hi; ++i) {
      lx.push_back(std::log(nz[i].k));
      ly.push_back(std::log(nz[i].mag));
    }
    auto [a, b] = detail::fit_line(lx, ly);
    return std::pair<double, double>{std::exp(a), std::max(-b, 1e-3)};
  };
  const std::size_t half = nz.size() / 2;
  auto [mL0, pL0] = loglog_init(0, half);
  auto [mH0, pH0] = loglog_init(half, nz.size());

  auto unpack = [](const std::vector<double>& th) {
    PowerLawFit f;
    f.m_L = std::exp(th[0]);
    f.p_L = std::exp(th[1]);
    f.m_H = std::exp(th[2]);
    f.p_H = std::exp(th[3]);
    return f;
  };
  auto residual = [&](const std::vector<double>& th) {
    const PowerLawFit f = unpack(th);
    std::vector<double> r(nz.size());
    for (std::size_t i = 0; i < nz.size(); ++i)
      r[i] = f.eval(nz[i].k) - nz[i].mag;
    return r;
  };
  auto jacobian = [&](const std::vector<double>& th) {
    const PowerLawFit f = unpack(th);
    std::vector<double> J(nz.size() * 4, 0.0);
    for (std::size_t i = 0; i < nz.size(); ++i) {
      const double k = nz[i].k;
      const double vL = f.m_L * std::pow(k, -f.p_L);
      const double vH = f.m_H * std::pow(k, -f.p_H);
      if (vL >= vH) {
        J[i * 4 + 0] = vL;                        // d/d log mL
        J[i * 4 + 1] = -vL * f.p_L * std::log(k); // d/d log pL
      } else {
        J[i * 4 + 2] = vH;
        J[i * 4 + 3] = -vH * f.p_H * std::log(k);
      }
    }
    return J;
  };

  LmSettings settings;
  const LmResult lm = levenberg_marquardt(
      residual, jacobian,
      {std::log(mL0), std::log(pL0), std::log(mH0), std::log(pH0)}, settings);
  PowerLawFit fit = unpack(lm.theta);

  // value at k = 0 from a linear fit near the center
  std::vector<double> xs, ys;
  for (const auto& p : pts)
    if (p.k > 0.0 && p.k <= near_zero_radius) {
      xs.push_back(p.k);
      ys.push_back(p.mag);
    }
  if (xs.size() >= 2) {
    auto [a, b] = detail::fit_line(xs, ys);
    (void)b;
    fit.p0 = a;
  }
  if (!(fit.p0 > 0.0)) fit.p0 = fit.eval(xs.empty() ? 1.0 : xs.front());
  return fit;
}

/// Inverse-power-spectrum weights in centered layout; the zero frequency gets
/// 1 / p0.  Strictly positive everywhere.
inline std::vector<double> gamma_weights(const PowerLawFit& fit,
                                         const FrequencyGrid& grid) {
  std::vector<double> g(grid.rows * grid.cols);
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double k = grid.radius(r, c);
      g[r * grid.cols + c] = k > 0.0
                                 ? std::min(std::pow(k, fit.p_L) / fit.m_L,
                                            std::pow(k, fit.p_H) / fit.m_H)
                                 : 1.0 / fit.p0;
    }
  return g;
}

/// ||A||_2 by power iteration on A^H A; fixed-seed start vector so the
/// estimate is reproducible.
inline double operator_norm(const VecFn& forward, const VecFn& adjoint,
                            const std::vector<std::size_t>& domain_dims,
                            double rel_tol = 1e-4, int max_iters = 200,
                            std::uint64_t seed = 0x5eedULL) {
  ComplexArray v(domain_dims);
  CounterRng rng(seed);
  for (cplx& z : v.data) z = cplx{rng.next_gaussian(), rng.next_gaussian()};
  double nv = norm2(v);
  for (cplx& z : v.data) z /= nv;
  double lambda = 0.0;
  for (int i = 0; i < max_iters; ++i) {
    ComplexArray w = adjoint(forward(v));
    const double nw = norm2(w);
    if (nw == 0.0) return 0.0;
    const double prev = lambda;
    lambda = nw;  // Rayleigh estimate of ||A^H A||
    for (cplx& z : w.data) z /= nw;
    v = std::move(w);
    if (i > 0 && std::abs(lambda - prev) <= rel_tol * lambda) break;
  }
  return std::sqrt(lambda);
}

/// kappa = sqrt(||stacked SPIRiT residual|| / ||encoding||).
inline double estimate_kappa(const VecFn& spirit_forward,
                             const VecFn& spirit_adjoint,
                             const VecFn& encode_forward,
                             const VecFn& encode_adjoint,
                             const std::vector<std::size_t>& domain_dims) {
  const double num = operator_norm(spirit_forward, spirit_adjoint, domain_dims);
  const double den = operator_norm(encode_forward, encode_adjoint, domain_dims);
  if (den == 0.0)
    throw CalibrationError("estimate_kappa: encoding operator has zero norm");
  return std::sqrt(num / den);
}

}  // namespace mrr

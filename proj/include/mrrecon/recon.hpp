#pragma once

#include <memory>

#include "mrrecon/operators.hpp"
#include "mrrecon/solvers.hpp"
#include "mrrecon/wavelet.hpp"

namespace mrr {

inline ComplexArray stack_coils(const std::vector<ComplexArray>& coils) {
  const std::size_t C = coils.size();
  const std::size_t n = coils[0].data.size();
  ComplexArray out({C, coils[0].dims[0], coils[0].dims[1]});
  for (std::size_t c = 0; c < C; ++c)
    std::copy(coils[c].data.begin(), coils[c].data.end(),
              out.data.begin() + c * n);
  return out;
}

inline std::vector<ComplexArray> unstack_coils(const ComplexArray& stacked) {
  const std::size_t C = stacked.dims[0];
  const std::size_t n = stacked.dims[1] * stacked.dims[2];
  std::vector<ComplexArray> out;
  for (std::size_t c = 0; c < C; ++c) {
    ComplexArray a({stacked.dims[1], stacked.dims[2]});
    std::copy(stacked.data.begin() + c * n, stacked.data.begin() + (c + 1) * n,
              a.data.begin());
    out.push_back(std::move(a));
  }
  return out;
}

struct ReconResult {
  ComplexArray image;
  SolverTrace trace;
  double objective = 0.0;
};

/// Fully-sampled least-squares reference: min (1/2) ||F S m - b||^2 by LSQR.
inline ComplexArray recon_reference(const std::vector<ComplexArray>& kspace,
                                    const SensitivitySet& maps,
                                    std::size_t max_iters = 300,
                                    double atol = 1e-12) {
  const EncodingOperator enc(maps, full_mask(maps.rows(), maps.cols()));
  const ComplexArray b = stack_coils(kspace);
  auto fwd = [&](const ComplexArray& m) { return enc.forward(m); };
  auto adj = [&](const ComplexArray& y) { return enc.adjoint(y); };
  // LSQR wants a domain-shaped zero start; its adjoint call fixes the shape.
  return lsqr(fwd, adj, b, max_iters, atol).x;
}

namespace detail {

inline ProxFn wavelet_prox(double nu, int levels) {
  if (nu == 0.0)
    return [](const ComplexArray& z, double) { return z; };
  return [nu, levels](const ComplexArray& z, double t) {
    return idwt2(soft_threshold(dwt2(z, levels), t * nu), levels);
  };
}

inline ObjFn wavelet_l1(double nu, int levels) {
  if (nu == 0.0)
    return [](const ComplexArray&) { return 0.0; };
  return [nu, levels](const ComplexArray& z) {
    return nu * l1_norm(dwt2(z, levels));
  };
}

}  // namespace detail

/// l1-wavelet reconstruction with the interpolation-residual penalty; with
/// lambda_s == 0 or no kernels this reduces exactly to plain l1-wavelet
/// compressed sensing.
inline ReconResult recon_pics_sr(const ComplexArray& data,
                                 const SensitivitySet& maps,
                                 const SamplingMask& mask,
                                 const SpiritKernelSet* kernels,
                                 const ReconConfig& cfg, int levels = 4) {
  cfg.validate(mask.rows * mask.cols);
  const EncodingOperator enc(maps, mask);
  std::unique_ptr<SpiritOperator> spirit;
  if (kernels && cfg.lambda_s > 0.0)
    spirit = std::make_unique<SpiritOperator>(*kernels, maps);
  const SmoothObjective G(&enc, spirit.get(), data, cfg.lambda_s, cfg.kappa,
                          cfg.gamma);

  // Zero-filled adjoint start, rescaled by the optimal least-squares scalar:
  // the unnormalized DFT makes E^H b about UV times larger than the solution.
  ComplexArray x0 = enc.adjoint(data);
  {
    const ComplexArray ex0 = enc.forward(x0);
    const double denom = norm2(ex0) * norm2(ex0);
    if (denom > 0.0) {
      const double alpha = std::real(dotc(ex0, data)) / denom;
      for (cplx& z : x0.data) z *= alpha;
    }
  }
  auto grad = [&](const ComplexArray& m) { return G.gradient(m); };
  auto evalG = [&](const ComplexArray& m) { return G.value(m); };
  SolveResult sr = fista_ls(grad, evalG, detail::wavelet_prox(cfg.nu, levels),
                            detail::wavelet_l1(cfg.nu, levels), x0,
                            cfg.max_iters);
  ReconResult out;
  out.objective = G.value(sr.x) + detail::wavelet_l1(cfg.nu, levels)(sr.x);
  out.image = std::move(sr.x);
  out.trace = std::move(sr.trace);
  return out;
}

inline ReconResult recon_pics(const ComplexArray& data,
                              const SensitivitySet& maps,
                              const SamplingMask& mask, double nu,
                              std::size_t max_iters, int levels = 4) {
  ReconConfig cfg;
  cfg.nu = nu;
  cfg.max_iters = max_iters;
  return recon_pics_sr(data, maps, mask, nullptr, cfg, levels);
}

/// Support-constrained variant of the problem above, solved with PDHG
/// on the split V(m) = nu ||Psi m||_1, W acting on the stacked range
/// [E m; R m; m].  The returned image is projected onto the constraint, so it
/// is always feasible.
inline ReconResult recon_pics_sr_support(const ComplexArray& data,
                                         const SensitivitySet& maps,
                                         const SamplingMask& mask,
                                         const SpiritKernelSet& kernels,
                                         const ReconConfig& cfg,
                                         int levels = 4) {
  const std::size_t n = mask.rows * mask.cols;
  cfg.validate(n);
  if (!cfg.support || !cfg.sigma_sq)
    throw std::invalid_argument("recon_pics_sr_support: support and sigma_sq required");
  const std::vector<std::uint8_t>& omega = *cfg.support;
  if (omega.size() != n)
    throw std::invalid_argument("recon_pics_sr_support: support size mismatch");
  std::size_t outside = 0;
  for (auto v : omega) outside += v ? 0 : 1;
  const double ball_radius = std::sqrt(*cfg.sigma_sq * double(outside));

  const EncodingOperator enc(maps, mask);
  const SpiritOperator spirit(kernels, maps);
  const SmoothObjective G(&enc, &spirit, data, cfg.lambda_s, cfg.kappa,
                          cfg.gamma);
  const std::vector<double>& gamma_u = G.gamma_unshifted();
  const std::size_t C = enc.coils();

  auto A_forward = [&](const ComplexArray& m) {
    ComplexArray out({(2 * C + 1) * n});
    const ComplexArray e = enc.forward(m);
    std::copy(e.data.begin(), e.data.end(), out.data.begin());
    const ComplexArray r = spirit.forward(m);
    std::copy(r.data.begin(), r.data.end(), out.data.begin() + C * n);
    std::copy(m.data.begin(), m.data.end(), out.data.begin() + 2 * C * n);
    return out;
  };
  auto A_adjoint = [&](const ComplexArray& y) {
    ComplexArray e({C, mask.rows, mask.cols});
    std::copy(y.data.begin(), y.data.begin() + C * n, e.data.begin());
    ComplexArray r({C, mask.rows, mask.cols});
    std::copy(y.data.begin() + C * n, y.data.begin() + 2 * C * n,
              r.data.begin());
    ComplexArray out = enc.adjoint(e) + spirit.adjoint(r);
    for (std::size_t i = 0; i < n; ++i) out.data[i] += y.data[2 * C * n + i];
    return out;
  };

  const double lam = cfg.lambda_s / cfg.kappa;
  auto prox_W = [&](const ComplexArray& u, double t) {
    ComplexArray v = u;
    // data block: quadratic shrink toward b
    for (std::size_t i = 0; i < C * n; ++i)
      v.data[i] = (u.data[i] + t * data.data[i]) / (1.0 + t);
    // SPIRiT blocks: elementwise weighted quadratic shrink
    if (lam > 0.0 && !gamma_u.empty())
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < n; ++i)
          v.data[(C + c) * n + i] /= 1.0 + t * lam * gamma_u[i];
    // identity block: project the outside-support entries onto the ball
    if (outside > 0) {
      double nn = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!omega[i]) nn += std::norm(u.data[2 * C * n + i]);
      nn = std::sqrt(nn);
      if (nn > ball_radius) {
        const double scale = ball_radius / nn;
        for (std::size_t i = 0; i < n; ++i)
          if (!omega[i]) v.data[2 * C * n + i] *= scale;
      }
    }
    return v;
  };

  auto eval_obj = [&](const ComplexArray& m) {
    return G.value(m) + detail::wavelet_l1(cfg.nu, levels)(m);
  };

  ComplexArray x0 = enc.adjoint(data);
  {
    const ComplexArray ex0 = enc.forward(x0);
    const double denom = norm2(ex0) * norm2(ex0);
    if (denom > 0.0) {
      const double alpha = std::real(dotc(ex0, data)) / denom;
      for (cplx& z : x0.data) z *= alpha;
    }
  }
  auto Afn = VecFn(A_forward);
  const double anorm = operator_norm(Afn, VecFn(A_adjoint), {mask.rows, mask.cols});
  SolveResult sr = pdhg_ls(detail::wavelet_prox(cfg.nu, levels), prox_W,
                           Afn, A_adjoint, x0, cfg.max_iters, eval_obj,
                           anorm > 0.0 ? 1.0 / anorm : 1.0, 1.0,
                           /*return_best=*/false);

  // enforce feasibility of the reported image
  ComplexArray img = std::move(sr.x);
  if (outside > 0) {
    double nn = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!omega[i]) nn += std::norm(img.data[i]);
    nn = std::sqrt(nn);
    if (nn > ball_radius) {
      const double scale = ball_radius > 0.0 ? ball_radius / nn : 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!omega[i]) img.data[i] *= scale;
    }
  }
  ReconResult out;
  out.objective = eval_obj(img);
  out.image = std::move(img);
  out.trace = std::move(sr.trace);
  return out;
}

/// sigma^2 estimate: sample variance of a rectangle of the reference image.
inline double estimate_sigma_sq(const ComplexArray& img, std::size_t r0,
                                std::size_t c0, std::size_t h, std::size_t w) {
  if (h * w < 2) throw std::invalid_argument("estimate_sigma_sq: region too small");
  cplx mean{0.0, 0.0};
  for (std::size_t r = r0; r < r0 + h; ++r)
    for (std::size_t c = c0; c < c0 + w; ++c) mean += img.at(r, c);
  mean /= double(h * w);
  double var = 0.0;
  for (std::size_t r = r0; r < r0 + h; ++r)
    for (std::size_t c = c0; c < c0 + w; ++c)
      var += std::norm(img.at(r, c) - mean);
  return var / double(h * w - 1);
}

}  // namespace mrr

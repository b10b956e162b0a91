// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Criterion 9 needs an external clinical dataset and is reported
// as SKIP; it does not gate.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mrrecon/metrics.hpp"
#include "mrrecon/phantom.hpp"
#include "mrrecon/recon.hpp"
#include "mrrecon/rng.hpp"
#include "mrrecon/sampling.hpp"

using namespace mrr;

namespace {

int g_failures = 0;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double now_seconds() {
  static const auto t0 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void report(int idx, const char* name, const Check& c) {
  if (c.ok) {
    std::printf("[PASS] criterion %d: %s\n", idx, name);
  } else {
    std::printf("[FAIL] criterion %d: %s -- %s\n", idx, name,
                c.detail.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

ComplexArray random_array(std::vector<std::size_t> dims, std::uint64_t seed) {
  ComplexArray a(std::move(dims));
  CounterRng rng(seed);
  for (cplx& z : a.data) z = cplx{rng.next_gaussian(), rng.next_gaussian()};
  return a;
}

// --- criterion 1: adjoint identities ---------------------------------------

double adjoint_gap(const VecFn& fwd, const VecFn& adj,
                   const std::vector<std::size_t>& dom,
                   const std::vector<std::size_t>& ran, std::uint64_t seed) {
  const ComplexArray x = random_array(dom, seed);
  const ComplexArray y = random_array(ran, seed + 1000);
  const cplx lhs = dotc(fwd(x), y);
  const cplx rhs = dotc(x, adj(y));
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

void criterion_1() {
  Check c;
  const double t0 = now_seconds();
  const std::size_t n = 24, C = 3;
  const SensitivitySet maps = birdcage_maps(n, n, C);
  const SamplingMask mask = generate_mask(n, n, 0.5, 8, 8, 7);
  const EncodingOperator enc(maps, mask);

  SpiritKernelSet kset = SpiritKernelSet::zeros(C, 2);
  {
    CounterRng rng(17);
    for (std::size_t t = 0; t < C; ++t)
      for (std::size_t s = 0; s < C; ++s)
        for (int dr = -2; dr <= 2; ++dr)
          for (int dc = -2; dc <= 2; ++dc) {
            if (t == s && dr == 0 && dc == 0) continue;
            kset.tap(t, s, dr, dc) =
                0.2 * cplx{rng.next_gaussian(), rng.next_gaussian()};
          }
  }
  const SpiritOperator spirit(kset, maps);

  double worst_e = 0.0, worst_r = 0.0, worst_w = 0.0;
  for (std::uint64_t p = 0; p < 50; ++p) {
    worst_e = std::max(
        worst_e,
        adjoint_gap([&](const ComplexArray& m) { return enc.forward(m); },
                    [&](const ComplexArray& y) { return enc.adjoint(y); },
                    {n, n}, {C, n, n}, 100 + p));
    worst_r = std::max(
        worst_r,
        adjoint_gap([&](const ComplexArray& m) { return spirit.forward(m); },
                    [&](const ComplexArray& y) { return spirit.adjoint(y); },
                    {n, n}, {C, n, n}, 300 + p));
    // dwt2 is orthonormal, so its adjoint is its inverse
    worst_w = std::max(
        worst_w,
        adjoint_gap([](const ComplexArray& m) { return dwt2(m, 3); },
                    [](const ComplexArray& w) { return idwt2(w, 3); },
                    {32, 32}, {32, 32}, 500 + p));
  }
  const double secs = now_seconds() - t0;
  c.require(worst_e <= 1e-10,
            "encode adjoint gap " + std::to_string(worst_e));
  c.require(worst_r <= 1e-10,
            "interpolation-residual adjoint gap " + std::to_string(worst_r));
  c.require(worst_w <= 1e-10,
            "wavelet adjoint gap " + std::to_string(worst_w));
  c.require(secs < 10.0, "runtime " + std::to_string(secs) + " s");
  report(1, "adjoint dot-product identities (50 pairs each, <= 1e-10)", c);
}

// --- criterion 2: gradient vs central finite differences -------------------

void criterion_2() {
  Check c;
  const double t0 = now_seconds();
  const std::size_t n = 32, C = 4;
  const SensitivitySet maps = birdcage_maps(n, n, C);
  const SamplingMask mask = generate_mask(n, n, 0.5, 12, 12, 9);
  const EncodingOperator enc(maps, mask);

  SpiritKernelSet kset = SpiritKernelSet::zeros(C, 2);
  {
    CounterRng rng(19);
    for (std::size_t t = 0; t < C; ++t)
      for (std::size_t s = 0; s < C; ++s)
        for (int dr = -2; dr <= 2; ++dr)
          for (int dc = -2; dc <= 2; ++dc) {
            if (t == s && dr == 0 && dc == 0) continue;
            kset.tap(t, s, dr, dc) =
                0.15 * cplx{rng.next_gaussian(), rng.next_gaussian()};
          }
  }
  const SpiritOperator spirit(kset, maps);

  std::vector<double> gamma(n * n);
  CounterRng grng(21);
  for (double& v : gamma) v = std::exp(0.5 * grng.next_gaussian());

  const SmoothObjective G(&enc, &spirit, random_array({C, n, n}, 23), 0.7, 1.3,
                          gamma);
  const ComplexArray m = random_array({n, n}, 25);
  const ComplexArray g = G.gradient(m);
  const double eps = 1e-5;
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    ComplexArray d = random_array({n, n}, 700 + t);
    const double nd = norm2(d);
    for (cplx& z : d.data) z /= nd;
    ComplexArray plus = m, minus = m;
    axpy(plus, cplx{eps, 0.0}, d);
    axpy(minus, cplx{-eps, 0.0}, d);
    const double fd = (G.value(plus) - G.value(minus)) / (2.0 * eps);
    const double want = std::real(dotc(g, d));
    worst = std::max(worst, std::abs(fd - want) / (1.0 + std::abs(want)));
  }
  const double secs = now_seconds() - t0;
  c.require(worst <= 1e-6, "worst directional gap " + std::to_string(worst));
  c.require(secs < 30.0, "runtime " + std::to_string(secs) + " s");
  report(2, "smooth gradient vs central finite differences (20 directions)", c);
}

// --- criterion 3: kernel calibration on the exact shift construction -------

void criterion_3() {
  Check c;
  auto [img, maps] = exact_pilp_phantom(32, 32);
  const auto kspace = simulate_kspace(img, maps, 0.0, 1);
  SamplingMask mask = full_mask(32, 32);
  mask.acr_rows = 16;
  mask.acr_cols = 16;
  mask.acr_origin_r = 8;
  mask.acr_origin_c = 8;
  const auto acr = extract_acr(kspace, mask);
  const SpiritKernelSet kset = estimate_kernels(acr, 2);  // 5x5 kernels

  // residual of the calibrated taps on the ACR interior
  const int R = kset.radius;
  const std::size_t ir = acr[0].dims[0] - 2 * R, ic = acr[0].dims[1] - 2 * R;
  double worst_acr = 0.0;
  for (std::size_t target = 0; target < acr.size(); ++target) {
    double rss = 0.0, sig = 0.0;
    for (std::size_t pr = 0; pr < ir; ++pr)
      for (std::size_t pc = 0; pc < ic; ++pc) {
        cplx pred{0.0, 0.0};
        for (std::size_t s = 0; s < acr.size(); ++s)
          for (int dr = -R; dr <= R; ++dr)
            for (int dc = -R; dc <= R; ++dc)
              pred += kset.tap(target, s, dr, dc) *
                      acr[s].at(pr + R - dr, pc + R - dc);
        rss += std::norm(pred - acr[target].at(pr + R, pc + R));
        sig += std::norm(acr[target].at(pr + R, pc + R));
      }
    worst_acr = std::max(worst_acr, std::sqrt(rss) / std::sqrt(sig));
  }

  // residual of the image-domain operator at the true image, against ||F S m||
  const SpiritOperator spirit(kset, maps);
  const ComplexArray r = spirit.forward(img);
  double fsn = 0.0;
  for (std::size_t s = 0; s < maps.coils(); ++s) {
    ComplexArray tmp = img;
    for (std::size_t i = 0; i < tmp.data.size(); ++i)
      tmp.data[i] *= maps.maps[s].data[i];
    const double nk = norm2(dft2(tmp));
    fsn += nk * nk;
  }
  fsn = std::sqrt(fsn);

  c.require(worst_acr <= 1e-8,
            "ACR interior residual " + std::to_string(worst_acr));
  c.require(norm2(r) <= 1e-8 * fsn,
            "operator residual " + std::to_string(norm2(r) / fsn));
  report(3, "5x5 kernel calibration is exact on a linearly predictable scene",
         c);
}

// --- criterion 4: power-law recovery ---------------------------------------

void criterion_4() {
  Check c;
  const std::size_t n = 32;
  ComplexArray centered({n, n});
  const FrequencyGrid grid(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t cc = 0; cc < n; ++cc) {
      const double k = grid.radius(r, cc);
      const double mag =
          k > 0.0 ? std::max(10.0 * std::pow(k, -2.0), std::pow(k, -0.5))
                  : 12.0;
      centered.at(r, cc) = cplx{mag, 0.0};
    }
  const PowerLawFit fit =
      fit_power_law({ifftshift2(centered)}, full_mask(n, n));
  c.require(std::abs(fit.m_L - 10.0) <= 1e-4 * 10.0,
            "m_L = " + std::to_string(fit.m_L));
  c.require(std::abs(fit.p_L - 2.0) <= 1e-4 * 2.0,
            "p_L = " + std::to_string(fit.p_L));
  c.require(std::abs(fit.m_H - 1.0) <= 1e-4,
            "m_H = " + std::to_string(fit.m_H));
  c.require(std::abs(fit.p_H - 0.5) <= 1e-4 * 0.5,
            "p_H = " + std::to_string(fit.p_H));
  report(4, "two-branch power-law fit recovers (10, 2, 1, 0.5) to 1e-4", c);
}

// --- criterion 5: solver oracles against dense linear algebra --------------

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

Mat random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  Mat A(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      A(i, j) = cplx{rng.next_gaussian(), rng.next_gaussian()};
  return A;
}

ComplexArray to_arr(const Vec& v) {
  ComplexArray a({std::size_t(v.size())});
  for (Eigen::Index i = 0; i < v.size(); ++i) a.data[i] = v(i);
  return a;
}

Vec to_vec(const ComplexArray& a) {
  Vec v(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) v(i) = a.data[i];
  return v;
}

VecFn mat_fwd(const Mat& A) {
  return [A](const ComplexArray& x) { return to_arr(A * to_vec(x)); };
}
VecFn mat_adj(const Mat& A) {
  return [A](const ComplexArray& y) { return to_arr(A.adjoint() * to_vec(y)); };
}

void criterion_5() {
  Check c;

  // 5a: proximal-gradient solve of a dense 8x8 quadratic vs normal equations
  {
    const Mat A = random_matrix(8, 8, 41);
    const Vec b = random_matrix(8, 1, 42).col(0);
    const Vec x_star = (A.adjoint() * A).ldlt().solve(A.adjoint() * b);
    auto grad = [&](const ComplexArray& x) {
      return to_arr(A.adjoint() * (A * to_vec(x) - b));
    };
    auto evalG = [&](const ComplexArray& x) {
      return 0.5 * (A * to_vec(x) - b).squaredNorm();
    };
    ProxFn idp = [](const ComplexArray& z, double) { return z; };
    ObjFn zero = [](const ComplexArray&) { return 0.0; };
    const SolveResult r =
        fista_ls(grad, evalG, idp, zero, to_arr(Vec::Zero(8)), 500);
    const double rel = (to_vec(r.x) - x_star).norm() / x_star.norm();
    c.require(rel <= 1e-8, "quadratic solve gap " + std::to_string(rel));
  }

  // 5b: lsqr vs pseudoinverse, full-rank and rank-deficient
  {
    const Mat A = random_matrix(20, 12, 51);
    const Vec b = random_matrix(20, 1, 52).col(0);
    const Vec x_star = A.completeOrthogonalDecomposition().solve(b);
    const LsqrResult r = lsqr(mat_fwd(A), mat_adj(A), to_arr(b), 300, 1e-14);
    const double rel = (to_vec(r.x) - x_star).norm() / x_star.norm();
    c.require(rel <= 1e-6, "full-rank lsqr gap " + std::to_string(rel));
  }
  {
    Mat A = random_matrix(10, 8, 53);
    A.col(7) = A.col(0) + A.col(1);
    const Vec b = random_matrix(10, 1, 54).col(0);
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Vec x_star = svd.solve(b);
    const LsqrResult r = lsqr(mat_fwd(A), mat_adj(A), to_arr(b), 500, 1e-14);
    const double rel = (to_vec(r.x) - x_star).norm() / x_star.norm();
    c.require(rel <= 1e-6, "rank-deficient lsqr gap " + std::to_string(rel));
  }

  // 5c: primal-dual vs proximal-gradient on a shared lasso instance
  {
    const Mat A = random_matrix(14, 10, 46);
    const Vec b = random_matrix(14, 1, 47).col(0);
    const double nu = 0.5;
    auto grad = [&](const ComplexArray& x) {
      return to_arr(A.adjoint() * (A * to_vec(x) - b));
    };
    auto evalG = [&](const ComplexArray& x) {
      return 0.5 * (A * to_vec(x) - b).squaredNorm();
    };
    ProxFn soft = [&](const ComplexArray& z, double t) {
      return soft_threshold(z, t * nu);
    };
    ObjFn evalH = [&](const ComplexArray& x) { return nu * l1_norm(x); };
    const SolveResult fista =
        fista_ls(grad, evalG, soft, evalH, ComplexArray({10}), 3000);
    const double obj_f = evalG(fista.x) + evalH(fista.x);
    ProxFn prox_W = [&](const ComplexArray& u, double t) {
      ComplexArray v = u;
      for (Eigen::Index i = 0; i < b.size(); ++i)
        v.data[i] = (u.data[i] + t * b(i)) / (1.0 + t);
      return v;
    };
    ObjFn obj = [&](const ComplexArray& x) { return evalG(x) + evalH(x); };
    const SolveResult pdhg = pdhg_ls(soft, prox_W, mat_fwd(A), mat_adj(A),
                                     ComplexArray({10}), 4000, obj);
    const double obj_p = evalG(pdhg.x) + evalH(pdhg.x);
    const double gap = std::abs(obj_p - obj_f) / std::abs(obj_f);
    c.require(gap <= 1e-6, "lasso objective gap " + std::to_string(gap));
  }

  report(5, "iterative solvers match dense linear-algebra oracles", c);
}

// --- criterion 6: regularization improves PSNR and SSIM --------------------

std::vector<SolverTrace> g_benchmark_traces;  // harvested for criterion 8

void criterion_6() {
  Check c;
  const double t0 = now_seconds();
  const std::size_t N = 128, C = 8;
  const std::size_t iters = 1000;

  const ComplexArray img = to_complex(shepp_logan(N, N), N, N);
  const SensitivitySet maps = birdcage_maps(N, N, C);

  // noise sized for ~30 dB input SNR: per-component variance is the mean
  // per-sample k-space power divided by 2 * 10^3
  const auto clean = simulate_kspace(img, maps, 0.0, 7);
  double power = 0.0;
  std::size_t count = 0;
  for (const ComplexArray& k : clean) {
    const double nk = norm2(k);
    power += nk * nk;
    count += k.data.size();
  }
  const double noise_std = std::sqrt(power / count / (2.0 * 1000.0));
  const auto kspace = simulate_kspace(img, maps, noise_std, 7);
  const ComplexArray ref = recon_reference(kspace, maps);

  std::vector<double> gains;
  for (double frac : {0.2, 0.25, 0.3}) {
    const SamplingMask mask = generate_mask(N, N, frac, 24, 24, 7);
    const SpiritKernelSet kernels =
        estimate_kernels(extract_acr(kspace, mask), 2);
    const std::vector<double> gamma =
        gamma_weights(fit_power_law(kspace, mask), FrequencyGrid(N, N));
    const EncodingOperator enc(maps, mask);
    const SpiritOperator spirit(kernels, maps);
    const double kappa = estimate_kappa(
        [&](const ComplexArray& m) { return spirit.forward(m); },
        [&](const ComplexArray& y) { return spirit.adjoint(y); },
        [&](const ComplexArray& m) { return enc.forward(m); },
        [&](const ComplexArray& y) { return enc.adjoint(y); }, {N, N});

    // collected noisy data: the simulated spectra restricted to the mask
    ComplexArray data({C, N, N});
    {
      const ComplexArray full = stack_coils(kspace);
      ComplexArray cm({N, N});
      for (std::size_t i = 0; i < cm.data.size(); ++i)
        cm.data[i] = cplx{mask.collected[i] ? 1.0 : 0.0, 0.0};
      const ComplexArray mu = ifftshift2(cm);
      for (std::size_t ch = 0; ch < C; ++ch)
        for (std::size_t i = 0; i < N * N; ++i)
          data.data[ch * N * N + i] =
              mu.data[i].real() != 0.0 ? full.data[ch * N * N + i]
                                       : cplx{0.0, 0.0};
    }

    double pics_psnr = -1e300, pics_ssim = -1e300;
    double sr_psnr = -1e300, sr_ssim = -1e300;
    for (double nu : {0.1, 1.0}) {
      const ReconResult rp = recon_pics(data, maps, mask, nu, iters);
      g_benchmark_traces.push_back(rp.trace);
      pics_psnr = std::max(pics_psnr, psnr_complex(rp.image, ref));
      pics_ssim = std::max(pics_ssim, ssim(rp.image, ref));
      for (double ls : {0.1, 0.5, 2.0}) {
        ReconConfig cfg;
        cfg.nu = nu;
        cfg.lambda_s = ls;
        cfg.kappa = kappa;
        cfg.gamma = gamma;
        cfg.max_iters = iters;
        const ReconResult rs =
            recon_pics_sr(data, maps, mask, &kernels, cfg);
        g_benchmark_traces.push_back(rs.trace);
        sr_psnr = std::max(sr_psnr, psnr_complex(rs.image, ref));
        sr_ssim = std::max(sr_ssim, ssim(rs.image, ref));
      }
    }
    std::printf(
        "       fraction %.2f: plain best %.2f dB / %.4f, "
        "regularized best %.2f dB / %.4f\n",
        frac, pics_psnr, pics_ssim, sr_psnr, sr_ssim);
    std::fflush(stdout);
    c.require(sr_psnr >= pics_psnr,
              "PSNR regressed at fraction " + std::to_string(frac));
    c.require(sr_ssim >= pics_ssim,
              "SSIM regressed at fraction " + std::to_string(frac));
    gains.push_back(sr_psnr - pics_psnr);
  }
  c.require(gains.front() > gains.back(),
            "PSNR gain not larger at the lowest fraction (" +
                std::to_string(gains.front()) + " vs " +
                std::to_string(gains.back()) + " dB)");
  const double secs = now_seconds() - t0;
  c.require(secs < 1200.0, "runtime " + std::to_string(secs) + " s");
  report(6,
         "interpolation regularization improves PSNR and SSIM at every "
         "fraction, most at the lowest",
         c);
}

// --- criterion 7: support-constraint behavior ------------------------------

void criterion_7() {
  Check c;
  const std::size_t n = 32;
  const ComplexArray img = to_complex(shepp_logan(n, n), n, n);
  const SensitivitySet maps = birdcage_maps(n, n, 3);
  const SamplingMask mask = generate_mask(n, n, 0.45, 16, 16, 10);
  const auto kspace = simulate_kspace(img, maps, 0.0, 10);
  const SpiritKernelSet kernels = estimate_kernels(extract_acr(kspace, mask), 2);
  const EncodingOperator enc(maps, mask);
  const ComplexArray data = enc.forward(img);

  std::vector<std::uint8_t> omega(n * n, 0);
  for (std::size_t i = 0; i < omega.size(); ++i)
    omega[i] = std::abs(img.data[i]) > 0.0 ? 1 : 0;

  ReconConfig base;
  base.nu = 0.005;
  base.lambda_s = 0.5;
  base.max_iters = 2000;
  const ReconResult sr = recon_pics_sr(data, maps, mask, &kernels, base);

  // 7a: a huge energy bound reproduces the unconstrained solution
  {
    ReconConfig cfg = base;
    cfg.max_iters = 6000;
    cfg.support = omega;
    cfg.sigma_sq = 1e12;
    const ReconResult sup =
        recon_pics_sr_support(data, maps, mask, kernels, cfg);
    const double rel = norm2(sup.image - sr.image) / norm2(sr.image);
    c.require(rel <= 1e-3, "inactive-bound gap " + std::to_string(rel));
  }

  // 7b: exact support with a zero bound zeroes the background
  {
    ReconConfig cfg = base;
    cfg.max_iters = 200;
    cfg.support = omega;
    cfg.sigma_sq = 0.0;
    const ReconResult sup =
        recon_pics_sr_support(data, maps, mask, kernels, cfg);
    bool zero = true;
    for (std::size_t i = 0; i < omega.size(); ++i)
      if (!omega[i] && sup.image.data[i] != cplx{0.0, 0.0}) zero = false;
    c.require(zero, "background not exactly zero with a zero bound");
  }

  // 7c: feasibility always holds
  for (double sig_sq : {0.0, 1e-6, 1e-2}) {
    ReconConfig cfg = base;
    cfg.max_iters = 100;
    cfg.support = omega;
    cfg.sigma_sq = sig_sq;
    const ReconResult sup =
        recon_pics_sr_support(data, maps, mask, kernels, cfg);
    double nn = 0.0;
    std::size_t outside = 0;
    for (std::size_t i = 0; i < omega.size(); ++i)
      if (!omega[i]) {
        nn += std::norm(sup.image.data[i]);
        ++outside;
      }
    c.require(nn / double(outside) <= sig_sq + 1e-8,
              "infeasible at sigma_sq = " + std::to_string(sig_sq));
  }

  // 7d: including the support barely moves the quality metric.  This runs
  // the constraint in the setting it is designed for: a noisy, calibrated,
  // well-conditioned acquisition, sigma^2 estimated from the background of
  // the fully sampled reference, and a support mask drawn with a small
  // margin around the object (as a hand-drawn ROI would be).
  {
    const std::size_t N = 64, C = 6;
    const ComplexArray big = to_complex(shepp_logan(N, N), N, N);
    const SensitivitySet bmaps = birdcage_maps(N, N, C);
    const auto clean = simulate_kspace(big, bmaps, 0.0, 7);
    double power = 0.0;
    std::size_t count = 0;
    for (const ComplexArray& k : clean) {
      const double nk = norm2(k);
      power += nk * nk;
      count += k.data.size();
    }
    const double noise_std = std::sqrt(power / count / (2.0 * 1000.0));
    const auto noisy = simulate_kspace(big, bmaps, noise_std, 7);
    const ComplexArray ref = recon_reference(noisy, bmaps);
    const SamplingMask bmask = generate_mask(N, N, 0.35, 20, 20, 7);
    const SpiritKernelSet bker = estimate_kernels(extract_acr(noisy, bmask), 2);
    const std::vector<double> gamma =
        gamma_weights(fit_power_law(noisy, bmask), FrequencyGrid(N, N));
    const EncodingOperator benc(bmaps, bmask);
    const SpiritOperator bsp(bker, bmaps);
    const double kappa = estimate_kappa(
        [&](const ComplexArray& m) { return bsp.forward(m); },
        [&](const ComplexArray& y) { return bsp.adjoint(y); },
        [&](const ComplexArray& m) { return benc.forward(m); },
        [&](const ComplexArray& y) { return benc.adjoint(y); }, {N, N});
    ComplexArray ndata({C, N, N});
    {
      const ComplexArray full = stack_coils(noisy);
      ComplexArray cm({N, N});
      for (std::size_t i = 0; i < cm.data.size(); ++i)
        cm.data[i] = cplx{bmask.collected[i] ? 1.0 : 0.0, 0.0};
      const ComplexArray mu = ifftshift2(cm);
      for (std::size_t ch = 0; ch < C; ++ch)
        for (std::size_t i = 0; i < N * N; ++i)
          ndata.data[ch * N * N + i] =
              mu.data[i].real() != 0.0 ? full.data[ch * N * N + i]
                                       : cplx{0.0, 0.0};
    }
    // object support dilated by 3 pixels (chessboard distance)
    std::vector<std::uint8_t> roi(N * N, 0);
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t cc = 0; cc < N; ++cc) {
        bool on = false;
        for (int dr = -3; dr <= 3 && !on; ++dr)
          for (int dc = -3; dc <= 3 && !on; ++dc) {
            const long rr = long(r) + dr, c2 = long(cc) + dc;
            if (rr < 0 || c2 < 0 || rr >= long(N) || c2 >= long(N)) continue;
            if (std::abs(big.at(rr, c2)) > 0.0) on = true;
          }
        roi[r * N + cc] = on ? 1 : 0;
      }
    ReconConfig bcfg;
    bcfg.nu = 0.5;
    bcfg.lambda_s = 2.0;
    bcfg.kappa = kappa;
    bcfg.gamma = gamma;
    bcfg.max_iters = 1000;
    const ReconResult nsr = recon_pics_sr(ndata, bmaps, bmask, &bker, bcfg);
    ReconConfig scfg = bcfg;
    scfg.max_iters = 3000;
    scfg.support = roi;
    scfg.sigma_sq = estimate_sigma_sq(ref, 0, 0, 8, 8);
    const ReconResult sup =
        recon_pics_sr_support(ndata, bmaps, bmask, bker, scfg);
    const double d_psnr =
        std::abs(psnr_complex(sup.image, ref) - psnr_complex(nsr.image, ref));
    c.require(d_psnr < 0.5,
              "support changed PSNR by " + std::to_string(d_psnr) + " dB");
  }

  report(7, "support constraint: inactive when loose, exact when tight, "
            "always feasible, metric-neutral",
         c);
}

// --- criterion 8: convergence stability ------------------------------------

void criterion_8() {
  Check c;
  c.require(!g_benchmark_traces.empty(), "no benchmark traces collected");
  double worst = 0.0;
  for (const SolverTrace& tr : g_benchmark_traces) {
    if (tr.points.size() < 1000) {
      c.require(false, "trace shorter than 1000 iterations");
      continue;
    }
    const double o500 = tr.points[499].objective;
    const double o1000 = tr.points[999].objective;
    worst = std::max(worst, std::abs(o500 - o1000) / std::abs(o1000));
  }
  c.require(worst < 1e-3,
            "worst relative objective change " + std::to_string(worst));
  report(8, "objective change between iterations 500 and 1000 below 1e-3 on "
            "all benchmark runs",
         c);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf(
      "[SKIP] criterion 9: clinical-data reproduction (needs an external "
      "dataset and externally supplied sensitivity maps; not gating)\n");
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all gating criteria passed\n");
  return 0;
}

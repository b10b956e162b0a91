#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

#include "mrrecon/array.hpp"

namespace mrr {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TracePoint {
  std::size_t iter;
  double objective;
  double step;
  double residual;  // ||x_k - x_{k-1}||
  double seconds;
};

struct SolverTrace {
  std::vector<TracePoint> points;
};

struct LineSearchParams {
  double initial_step = 1.0;
  double shrink = 0.5;
  double growth = 1.25;
  int max_backtracks = 60;
};

using VecFn = std::function<ComplexArray(const ComplexArray&)>;
using ObjFn = std::function<double(const ComplexArray&)>;
using ProxFn = std::function<ComplexArray(const ComplexArray&, double)>;

struct SolveResult {
  ComplexArray x;
  SolverTrace trace;
};

/// FISTA with backtracking line search for min G(x) + H(x), G smooth and
/// convex, H convex with an exact prox.  The accepted step always satisfies
///   G(x+) <= G(y) + Re<grad G(y), x+ - y> + ||x+ - y||^2 / (2t).
/// Returns the best iterate by objective value.
inline SolveResult fista_ls(const VecFn& grad_G, const ObjFn& eval_G,
                            const ProxFn& prox_H, const ObjFn& eval_H,
                            const ComplexArray& x0, std::size_t max_iters,
                            const LineSearchParams& ls = {},
                            double rel_obj_tol = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  ComplexArray x = x0, x_prev = x0;
  double theta = 1.0;
  double t = ls.initial_step;
  SolveResult out;
  out.x = x0;
  double best_obj = eval_G(x0) + eval_H(x0);
  double prev_obj = best_obj;

  for (std::size_t k = 0; k < max_iters; ++k) {
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double beta = (theta - 1.0) / theta_next;
    ComplexArray y = x;
    for (std::size_t i = 0; i < y.data.size(); ++i)
      y.data[i] += beta * (x.data[i] - x_prev.data[i]);
    theta = theta_next;

    const ComplexArray g = grad_G(y);
    const double Gy = eval_G(y);
    t *= ls.growth;
    ComplexArray x_new;
    for (int bt = 0;; ++bt) {
      ComplexArray step = y;
      axpy(step, cplx{-t, 0.0}, g);
      x_new = prox_H(step, t);
      const ComplexArray d = x_new - y;
      const double quad =
          Gy + std::real(dotc(g, d)) + norm2(d) * norm2(d) / (2.0 * t);
      const double Gx = eval_G(x_new);
      if (Gx <= quad + 1e-12 * std::abs(quad)) break;
      if (bt >= ls.max_backtracks)
        throw SolverError("fista_ls: line search failed");
      t *= ls.shrink;
    }

    x_prev = x;
    x = x_new;
    const double obj = eval_G(x) + eval_H(x);
    if (!std::isfinite(obj)) {
      throw SolverError("fista_ls: non-finite objective at iteration " +
                        std::to_string(k));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out.trace.points.push_back({k, obj, t, norm2(x - x_prev), secs});
    if (obj < best_obj) {
      best_obj = obj;
      out.x = x;
    }
    // adaptive restart: drop the momentum whenever the objective rises
    if (obj > prev_obj) {
      theta = 1.0;
      x_prev = x;
    }
    if (rel_obj_tol > 0.0 && k > 0 &&
        std::abs(prev_obj - obj) <= rel_obj_tol * std::abs(prev_obj))
      break;
    prev_obj = obj;
  }
  return out;
}

/// PDHG with line search (Malitsky & Pock) for min V(x) + W(Ax).
/// prox_W is the primal prox of W; the dual prox is obtained through the
/// Moreau decomposition.  eval_obj, when provided, is used for the trace and
/// for returning the best iterate; it may return +inf outside a constraint.
inline SolveResult pdhg_ls(const ProxFn& prox_V, const ProxFn& prox_W,
                           const VecFn& A_forward, const VecFn& A_adjoint,
                           const ComplexArray& x0, std::size_t max_iters,
                           const ObjFn& eval_obj = nullptr,
                           double tau0 = 1.0, double beta = 1.0,
                           bool return_best = true) {
  const auto start = std::chrono::steady_clock::now();
  const double delta = 0.99;
  ComplexArray x = x0;
  ComplexArray Ax = A_forward(x);
  ComplexArray y(Ax.dims);  // dual starts at zero
  ComplexArray Aty(x.dims);
  ComplexArray x_prev = x, Ax_prev = Ax;
  double tau = tau0, theta = 1.0;

  auto prox_W_star = [&](const ComplexArray& z, double s) {
    ComplexArray u = scaled(z, cplx{1.0 / s, 0.0});
    ComplexArray p = prox_W(u, 1.0 / s);
    ComplexArray r = z;
    axpy(r, cplx{-s, 0.0}, p);
    return r;
  };

  SolveResult out;
  out.x = x0;
  double best_obj = eval_obj ? eval_obj(x0) : std::numeric_limits<double>::max();

  for (std::size_t k = 0; k < max_iters; ++k) {
    // primal step
    x_prev = x;
    Ax_prev = Ax;
    ComplexArray step = x_prev;
    axpy(step, cplx{-tau, 0.0}, Aty);
    x = prox_V(step, tau);
    Ax = A_forward(x);

    // dual step with backtracked step growth
    double tau_next = tau * std::sqrt(1.0 + theta);
    ComplexArray y_new, Aty_new;
    for (int bt = 0;; ++bt) {
      theta = tau_next / tau;
      const double sigma = beta * tau_next;
      ComplexArray Axbar = Ax;
      for (std::size_t i = 0; i < Axbar.data.size(); ++i)
        Axbar.data[i] += theta * (Ax.data[i] - Ax_prev.data[i]);
      ComplexArray z = y;
      axpy(z, cplx{sigma, 0.0}, Axbar);
      y_new = prox_W_star(z, sigma);
      Aty_new = A_adjoint(y_new);
      const double lhs =
          std::sqrt(beta) * tau_next * norm2(Aty_new - Aty);
      const double rhs = delta * norm2(y_new - y);
      if (lhs <= rhs || rhs == 0.0) break;
      if (bt >= 60) break;  // keep the shrunken step
      tau_next *= 0.5;
    }
    tau = tau_next;
    y = y_new;
    Aty = Aty_new;

    for (const cplx& z : x.data)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw SolverError("pdhg_ls: non-finite iterate at iteration " +
                          std::to_string(k));

    const double obj = eval_obj ? eval_obj(x) : 0.0;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out.trace.points.push_back({k, obj, tau, norm2(x - x_prev), secs});
    if (!return_best || !eval_obj || obj <= best_obj) {
      best_obj = obj;
      out.x = x;
    }
  }
  return out;
}

struct LsqrResult {
  ComplexArray x;
  std::vector<double> residual_norms;  // estimated ||b - A x_k|| per iteration
};

/// Paige-Saunders LSQR for min ||A x - b||_2, matrix-free.  Started from zero
/// it converges to the minimum-norm least-squares solution.
inline LsqrResult lsqr(const VecFn& A_forward, const VecFn& A_adjoint,
                       const ComplexArray& b, std::size_t max_iters = 1000,
                       double atol = 1e-10) {
  LsqrResult res;
  ComplexArray u = b;
  double beta = norm2(u);
  const double bnorm = beta;
  ComplexArray v = A_adjoint(u);
  res.x = ComplexArray(v.dims);
  if (beta == 0.0) return res;
  for (cplx& z : u.data) z /= beta;
  v = A_adjoint(u);
  double alpha = norm2(v);
  if (alpha == 0.0) return res;
  for (cplx& z : v.data) z /= alpha;
  ComplexArray w = v;
  double phibar = beta, rhobar = alpha;
  double anorm_sq = alpha * alpha;

  for (std::size_t k = 0; k < max_iters; ++k) {
    // bidiagonalization
    ComplexArray Av = A_forward(v);
    for (std::size_t i = 0; i < u.data.size(); ++i)
      u.data[i] = Av.data[i] - alpha * u.data[i];
    beta = norm2(u);
    if (beta > 0.0)
      for (cplx& z : u.data) z /= beta;
    ComplexArray Atu = A_adjoint(u);
    for (std::size_t i = 0; i < v.data.size(); ++i)
      v.data[i] = Atu.data[i] - beta * v.data[i];
    alpha = norm2(v);
    if (alpha > 0.0)
      for (cplx& z : v.data) z /= alpha;

    // Givens rotation
    const double rho = std::sqrt(rhobar * rhobar + beta * beta);
    const double c = rhobar / rho, s = beta / rho;
    const double theta = s * alpha;
    rhobar = -c * alpha;
    const double phi = c * phibar;
    phibar = s * phibar;

    for (std::size_t i = 0; i < res.x.data.size(); ++i) {
      res.x.data[i] += (phi / rho) * w.data[i];
      w.data[i] = v.data[i] - (theta / rho) * w.data[i];
    }
    anorm_sq += beta * beta + alpha * alpha;
    res.residual_norms.push_back(std::abs(phibar));
    if (std::abs(phibar) <= atol * bnorm) break;
    // ||A^H r|| test: stops on inconsistent systems once the normal
    // equations are satisfied, which preserves the minimum-norm solution.
    const double arnorm = std::abs(phibar) * alpha * std::abs(c);
    if (arnorm <= atol * std::sqrt(anorm_sq) * std::abs(phibar)) break;
    if (alpha == 0.0 || beta == 0.0) break;
  }
  return res;
}

struct LmSettings {
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  double rel_cost_tol = 1e-8;
  std::size_t max_iters = 100;
};

struct LmResult {
  std::vector<double> theta;
  double cost = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

namespace detail {

// Solve (symmetric positive definite) M x = rhs by Cholesky; M row-major n*n.
inline std::vector<double> solve_spd(std::vector<double> M,
                                     std::vector<double> rhs, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = M[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= M[i * n + k] * M[j * n + k];
      if (i == j) {
        if (s <= 0.0) throw SolverError("solve_spd: matrix not SPD");
        M[i * n + i] = std::sqrt(s);
      } else {
        M[i * n + j] = s / M[j * n + j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= M[i * n + k] * rhs[k];
    rhs[i] = s / M[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= M[k * n + i] * rhs[k];
    rhs[i] = s / M[i * n + i];
  }
  return rhs;
}

}  // namespace detail

/// Levenberg-Marquardt for min (1/2)||r(theta)||^2 with a dense Jacobian
/// callback (row-major, m x n).  Damping scales diag(J^T J).
inline LmResult levenberg_marquardt(
    const std::function<std::vector<double>(const std::vector<double>&)>& residual_fn,
    const std::function<std::vector<double>(const std::vector<double>&)>& jacobian_fn,
    std::vector<double> theta0, const LmSettings& settings = {}) {
  const std::size_t n = theta0.size();
  LmResult res;
  res.theta = std::move(theta0);
  std::vector<double> r = residual_fn(res.theta);
  auto cost_of = [](const std::vector<double>& rr) {
    double s = 0.0;
    for (double v : rr) s += v * v;
    return 0.5 * s;
  };
  res.cost = cost_of(r);
  double mu = settings.initial_damping;

  for (res.iterations = 0; res.iterations < settings.max_iters;
       ++res.iterations) {
    const std::vector<double> J = jacobian_fn(res.theta);
    const std::size_t m = J.size() / n;
    std::vector<double> JtJ(n * n, 0.0), Jtr(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t a = 0; a < n; ++a) {
        Jtr[a] += J[i * n + a] * r[i];
        for (std::size_t bb = 0; bb <= a; ++bb)
          JtJ[a * n + bb] += J[i * n + a] * J[i * n + bb];
      }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t bb = a + 1; bb < n; ++bb) JtJ[a * n + bb] = JtJ[bb * n + a];

    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      std::vector<double> M = JtJ;
      for (std::size_t a = 0; a < n; ++a)
        M[a * n + a] += mu * std::max(JtJ[a * n + a], 1e-12);
      std::vector<double> rhs(n);
      for (std::size_t a = 0; a < n; ++a) rhs[a] = -Jtr[a];
      std::vector<double> delta;
      try {
        delta = detail::solve_spd(std::move(M), std::move(rhs), n);
      } catch (const SolverError&) {
        mu *= settings.damping_up;
        continue;
      }
      std::vector<double> trial = res.theta;
      for (std::size_t a = 0; a < n; ++a) trial[a] += delta[a];
      const std::vector<double> r_trial = residual_fn(trial);
      const double c_trial = cost_of(r_trial);
      if (std::isfinite(c_trial) && c_trial <= res.cost) {
        const double rel = (res.cost - c_trial) /
                           std::max(res.cost, 1e-30);
        res.theta = std::move(trial);
        r = r_trial;
        res.cost = c_trial;
        mu *= settings.damping_down;
        accepted = true;
        if (rel < settings.rel_cost_tol) {
          res.converged = true;
          return res;
        }
      } else {
        mu *= settings.damping_up;
      }
    }
    if (!accepted) {
      res.converged = true;  // stalled at a (local) minimum
      return res;
    }
  }
  return res;  // iteration budget exhausted, best-so-far, converged == false
}

}  // namespace mrr

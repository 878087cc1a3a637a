#include "gss/agss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gss {

namespace {

long default_inner_cap(Eigen::Index dim, long requested) {
  return requested > 0 ? requested : 20 * static_cast<long>(dim) + 200;
}

double shifted_residual(double beta, const Mat& N, const Vec& b,
                        const Vec& y) {
  return (b - beta * y - N * y).norm();
}

}  // namespace

double max_step_size(const CorrectionParams& params, double L_F) {
  if (L_F <= 0.0 || params.c1 <= 0.0 || params.c2 <= 0.0 || params.c3 <= 0.0)
    throw std::invalid_argument("max_step_size: positive inputs required");
  const double c1 = params.c1, c2 = params.c2, c3 = params.c3;
  return (c1 * c3 + std::sqrt(c1 * c1 * c3 * c3 + 4.0 * L_F * c2 * c2 * c3)) /
         (2.0 * L_F * c2 * c2);
}

Vec correction_extrapolate(const Vec& x_hat_new, const Vec& y_new,
                           const Vec& y_old, double alpha,
                           const CorrectionParams& params) {
  return x_hat_new +
         (alpha * params.c2 / (1.0 + alpha * params.c1)) * (y_new - y_old);
}

std::pair<Vec, InnerSolveReport> shifted_skew_solve(
    double beta, const Mat& N, const SkewSplit& split, const Vec& b,
    InnerMethod method, double tol, long max_iter) {
  if (beta <= 0.0)
    throw std::invalid_argument("shifted_skew_solve: beta must be positive");
  const Eigen::Index n = b.size();
  InnerSolveReport rep;
  rep.method = method;

  switch (method) {
    case InnerMethod::direct: {
      if (n > 2048)
        throw std::invalid_argument(
            "shifted_skew_solve: direct method limited to dim <= 2048");
      const Mat M = beta * Mat::Identity(n, n) + N;
      Vec y = Eigen::PartialPivLU<Mat>(M).solve(b);
      rep.residual_norm = shifted_residual(beta, N, b, y);
      return {std::move(y), rep};
    }
    case InnerMethod::cg_normal: {
      // CG on (beta^2 I + N^T N) y = (beta I - N) b; N^T N = -N^2.
      const long cap = default_inner_cap(n, max_iter);
      const double bnorm = b.norm();
      Vec y = Vec::Zero(n);
      if (bnorm == 0.0) return {std::move(y), rep};
      const auto apply = [&](const Vec& v) -> Vec {
        return beta * beta * v - N * (N * v);
      };
      const Vec rhs = beta * b - N * b;
      Vec r = rhs - apply(y);
      Vec d = r;
      double rs = r.squaredNorm();
      for (long it = 0; it < cap; ++it) {
        rep.residual_norm = shifted_residual(beta, N, b, y);
        if (rep.residual_norm <= tol * bnorm) {
          rep.iterations = it;
          return {std::move(y), rep};
        }
        const Vec Ad = apply(d);
        const double step = rs / d.dot(Ad);
        y += step * d;
        r -= step * Ad;
        const double rs_new = r.squaredNorm();
        d = r + (rs_new / rs) * d;
        rs = rs_new;
      }
      rep.iterations = cap;
      rep.residual_norm = shifted_residual(beta, N, b, y);
      rep.converged = rep.residual_norm <= tol * bnorm;
      return {std::move(y), rep};
    }
    case InnerMethod::aor_inner: {
      if (split.L_Bsym == 0.0) {
        Vec y = b / beta;
        return {std::move(y), rep};
      }
      const long cap = default_inner_cap(n, max_iter);
      const double alpha_in = 1.0 / (2.0 * split.L_Bsym);
      const double bnorm = b.norm();
      Vec y = Vec::Zero(n);
      for (long it = 0; it < cap; ++it) {
        rep.residual_norm = shifted_residual(beta, N, b, y);
        if (rep.residual_norm <= tol * bnorm) {
          rep.iterations = it;
          return {std::move(y), rep};
        }
        y = aor_linear_step(split, beta, b, y, alpha_in);
      }
      rep.iterations = cap;
      rep.residual_norm = shifted_residual(beta, N, b, y);
      rep.converged = rep.residual_norm <= tol * bnorm;
      return {std::move(y), rep};
    }
  }
  throw std::logic_error("shifted_skew_solve: unknown method");
}

std::pair<AccState, InnerSolveReport> agss_imex_step(
    const MonotoneProblem& p, const SkewSplit& split, const AccState& s,
    double alpha, InnerMethod inner, double inner_tol) {
  AccState next;
  next.x_hat = (s.x + alpha * s.y) / (1.0 + alpha);
  // [(1+a)I + (a/mu) N] y = y_k + a xhat - (a/mu) grad F(xhat), scaled by
  // mu/a into shifted form (beta I + N) y = b.
  const double beta = p.mu * (1.0 + alpha) / alpha;
  const Vec b = (p.mu / alpha) * s.y + p.mu * next.x_hat - p.grad_F(next.x_hat);
  auto [y_new, rep] = shifted_skew_solve(beta, p.N, split, b, inner, inner_tol);
  rep.residual_norm *= alpha / p.mu;  // residual of the unscaled equation
  next.y = std::move(y_new);
  next.x = (s.x + alpha * next.y) / (1.0 + alpha);
  return {std::move(next), rep};
}

std::pair<AccState, InnerSolveReport> agss_imex_inexact_step(
    const MonotoneProblem& p, const SkewSplit& split, const AccState& s,
    double alpha, long inner_budget, bool disable_criterion,
    double loose_tol) {
  (void)split;
  AccState next;
  next.x_hat = (s.x + alpha * s.y) / (1.0 + alpha);
  const double beta = p.mu * (1.0 + alpha) / alpha;
  const Vec b = (p.mu / alpha) * s.y + p.mu * next.x_hat - p.grad_F(next.x_hat);
  const double hat_dist2 = (next.x_hat - s.x).squaredNorm();
  const double scale = alpha / p.mu;  // shifted residual -> eps_in

  const long cap = default_inner_cap(p.dim, inner_budget);
  InnerSolveReport rep;
  rep.method = InnerMethod::cg_normal;

  // CG on the normal equations, warm-started at y_k; the acceptance test
  // depends on the current iterate, so it is re-evaluated every iteration.
  const auto apply = [&](const Vec& v) -> Vec {
    return beta * beta * v - p.N * (p.N * v);
  };
  const auto accept = [&](const Vec& y) -> bool {
    const double shifted = shifted_residual(beta, p.N, b, y);
    const double eps = scale * shifted;
    rep.residual_norm = eps;
    if (disable_criterion) return shifted <= loose_tol * b.norm();
    const double budget =
        0.5 * alpha *
        (hat_dist2 + alpha * (y - next.x_hat).squaredNorm());
    // At the equilibrium the budget is exactly zero; a machine-precision
    // residual counts as an exact solve there.
    return eps * eps <= budget ||
           shifted <= 64.0 * std::numeric_limits<double>::epsilon() * b.norm();
  };

  Vec y = s.y;
  const Vec rhs = beta * b - p.N * b;
  Vec r = rhs - apply(y);
  Vec d = r;
  double rs = r.squaredNorm();
  bool ok = false;
  long it = 0;
  for (; it < cap; ++it) {
    if (accept(y)) {
      ok = true;
      break;
    }
    const Vec Ad = apply(d);
    const double denom = d.dot(Ad);
    if (denom <= 0.0) break;
    const double step = rs / denom;
    y += step * d;
    r -= step * Ad;
    const double rs_new = r.squaredNorm();
    d = r + (rs_new / rs) * d;
    rs = rs_new;
  }
  if (!ok) ok = accept(y);
  rep.iterations = it;
  rep.converged = ok;

  next.y = std::move(y);
  // Midpoint corrector: x_{k+1} = (x_k + a y_{k+1} - (a/2) xhat)/(1 + a/2).
  next.x = (s.x + alpha * next.y - 0.5 * alpha * next.x_hat) /
           (1.0 + 0.5 * alpha);
  return {std::move(next), rep};
}

AccState agss_explicit_step(const MonotoneProblem& p, const SkewSplit& split,
                            const AccState& s, double alpha) {
  const Eigen::Index n = p.dim;
  AccState next;
  next.x_hat = (s.x + alpha * s.y) / (1.0 + alpha);
  const Vec rhs = s.y + alpha * next.x_hat -
                  (alpha / p.mu) * p.grad_F(next.x_hat) -
                  (alpha / p.mu) * (split.Bsym * s.y);
  // From the y-update: (1+a) y+ - (2a/mu) B y+ = b(xhat, y_k); lower
  // triangular since B is strictly lower.
  const Mat lhs = (1.0 + alpha) * Mat::Identity(n, n) -
                  (2.0 * alpha / p.mu) * split.B;
  next.y = lhs.triangularView<Eigen::Lower>().solve(rhs);
  next.x = (s.x + alpha * next.y - 0.5 * alpha * next.x_hat) /
           (1.0 + 0.5 * alpha);
  return next;
}

std::pair<std::complex<double>, std::complex<double>> flow_spectrum(double a,
                                                                    double b) {
  if (a < 1.0)
    throw std::invalid_argument("flow_spectrum: requires a >= 1");
  const double root = std::sqrt(b * b + 4.0 * (a - 1.0));
  return {std::complex<double>(-1.0, 0.5 * (b + root)),
          std::complex<double>(-1.0, 0.5 * (b - root))};
}

double default_alpha(AgssScheme scheme, const MonotoneProblem& p,
                     const SkewSplit& split) {
  switch (scheme) {
    case AgssScheme::imex:
    case AgssScheme::imex_inexact:
      return std::sqrt(p.mu / p.L_F);
    case AgssScheme::explicit_agss: {
      const double boundF = std::sqrt(p.mu / (2.0 * p.L_F));
      if (split.L_Bsym == 0.0) return boundF;
      return std::min(p.mu / (2.0 * split.L_Bsym), boundF);
    }
  }
  return 0.0;
}

AgssResult solve_agss(const MonotoneProblem& p, const SkewSplit& split,
                      AgssScheme scheme, const Vec& x0,
                      const AgssOptions& opts) {
  StepConfig cfg = opts.config;
  double alpha = cfg.alpha > 0.0 ? cfg.alpha : default_alpha(scheme, p, split);

  const auto lyap = [&](const AccState& s) -> double {
    if (!p.x_star || !p.has_F_value()) return p.residual_norm(s.x);
    if (scheme == AgssScheme::explicit_agss)
      return lyapunov_acc_alphaB(s.x, s.y, *p.x_star, alpha, split.Bsym, p);
    return lyapunov_acc(s.x, s.y, *p.x_star, p);
  };

  AgssResult out;
  out.state.x = x0;
  out.state.y = x0;
  out.state.x_hat = x0;

  auto record = [&](long k, const InnerSolveReport* rep) {
    TraceEntry e;
    e.k = k;
    e.lyapunov = lyap(out.state);
    if (p.x_star) e.err_norm = (out.state.x - *p.x_star).norm();
    e.residual = p.residual_norm(out.state.x);
    if (rep) {
      e.inner_iters = rep->iterations;
      e.inner_residual = rep->residual_norm;
    }
    out.trace.push(e);
  };

  record(0, nullptr);
  int rising = 0;
  double last = out.trace.entries.back().lyapunov;
  for (long k = 0; k < cfg.max_iter; ++k) {
    if (p.residual_norm(out.state.x) <= cfg.stop_tol) break;
    InnerSolveReport rep;
    switch (scheme) {
      case AgssScheme::imex: {
        auto [next, r] = agss_imex_step(p, split, out.state, alpha,
                                        opts.inner, opts.inner_tol);
        out.state = std::move(next);
        rep = r;
        break;
      }
      case AgssScheme::imex_inexact: {
        auto [next, r] = agss_imex_inexact_step(
            p, split, out.state, alpha, opts.inner_budget,
            opts.disable_inexact_criterion, opts.loose_inner_tol);
        out.state = std::move(next);
        rep = r;
        break;
      }
      case AgssScheme::explicit_agss:
        out.state = agss_explicit_step(p, split, out.state, alpha);
        break;
    }
    if (!out.state.x.allFinite() || !out.state.y.allFinite())
      throw std::runtime_error("solve_agss: non-finite iterate");
    out.total_inner_iters += rep.iterations;
    record(k + 1, &rep);
    const double cur = out.trace.entries.back().lyapunov;
    rising = cur > last ? rising + 1 : 0;
    last = cur;
    if (rising >= 10 && !opts.disable_inexact_criterion)
      throw std::runtime_error(
          "solve_agss: Lyapunov value increased for 10 consecutive steps");
  }
  return out;
}

}  // namespace gss

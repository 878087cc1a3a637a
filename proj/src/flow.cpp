#include "gss/flow.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(const Vec& x, const char* who) {
  if (!x.allFinite())
    throw std::runtime_error(std::string(who) + ": non-finite iterate");
}

}  // namespace

Resolvent make_linear_resolvent(const Mat& M, const Vec& b) {
  return [M, b](const Vec& x_k, double alpha) -> Vec {
    const Mat shifted =
        Mat::Identity(M.rows(), M.cols()) + alpha * M;
    return Eigen::PartialPivLU<Mat>(shifted).solve(x_k + alpha * b);
  };
}

Vec explicit_euler_step(const MonotoneProblem& p, const Vec& x_k,
                        double alpha) {
  Vec x = x_k - alpha * p.apply_A(x_k);
  check_finite(x, "explicit_euler_step");
  return x;
}

Vec implicit_euler_step(const MonotoneProblem& p, const Vec& x_k, double alpha,
                        const Resolvent& resolvent) {
  if (!resolvent)
    throw std::invalid_argument("implicit_euler_step: resolvent required");
  (void)p;
  Vec x = resolvent(x_k, alpha);
  check_finite(x, "implicit_euler_step");
  return x;
}

Vec aor_linear_step(const SkewSplit& split, double mu, const Vec& b,
                    const Vec& x_k, double alpha, SplitVariant variant) {
  const Eigen::Index n = x_k.size();
  if (split.B.rows() != n || b.size() != n)
    throw std::invalid_argument("aor_linear_step: dimension mismatch");
  const Mat I = Mat::Identity(n, n);
  if (variant == SplitVariant::forward) {
    const Vec rhs = x_k - alpha * (split.Bsym * x_k - b);
    const Mat lhs = (1.0 + alpha * mu) * I - 2.0 * alpha * split.B;
    return lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  const Vec rhs = x_k + alpha * (split.Bsym * x_k + b);
  const Mat lhs = (1.0 + alpha * mu) * I + 2.0 * alpha * split.B.transpose();
  return lhs.triangularView<Eigen::Upper>().solve(rhs);
}

Vec gss_step(const MonotoneProblem& p, const SkewSplit& split, const Vec& x_k,
             double alpha, SplitVariant variant) {
  const Eigen::Index n = x_k.size();
  if (split.B.rows() != n)
    throw std::invalid_argument("gss_step: dimension mismatch");
  const Mat I = Mat::Identity(n, n);
  const Vec g = p.grad_F(x_k);
  check_finite(g, "gss_step");
  if (variant == SplitVariant::forward) {
    const Vec rhs = x_k - alpha * (g + split.Bsym * x_k);
    const Mat lhs = I - 2.0 * alpha * split.B;
    return lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  const Vec rhs = x_k - alpha * (g - split.Bsym * x_k);
  const Mat lhs = I + 2.0 * alpha * split.B.transpose();
  return lhs.triangularView<Eigen::Upper>().solve(rhs);
}

HssSolver::HssSolver(const Mat& A, Vec b, double alpha)
    : b_(std::move(b)), alpha_(alpha) {
  const Eigen::Index n = A.rows();
  Asym_ = 0.5 * (A + A.transpose());
  Askew_ = 0.5 * (A - A.transpose());
  const Mat I = Mat::Identity(n, n);
  lu_sym_.compute(alpha_ * I + Asym_);
  lu_skew_.compute(alpha_ * I + Askew_);
}

Vec HssSolver::step(const Vec& x_k) const {
  ++sym_solves_;
  const Vec x_half = lu_sym_.solve((alpha_ * x_k - Askew_ * x_k) + b_);
  return lu_skew_.solve((alpha_ * x_half - Asym_ * x_half) + b_);
}

double HssSolver::optimal_alpha(const Mat& A) {
  const Mat Asym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(Asym, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 0.0)
    throw std::invalid_argument("HssSolver: symmetric part not SPD");
  return std::sqrt(lmin * lmax);
}

double default_alpha(FlowMethod method, const MonotoneProblem& p,
                     const SkewSplit& split) {
  const double LB = split.L_Bsym;
  switch (method) {
    case FlowMethod::explicit_euler: {
      const double L_A = p.L_F + LB;
      return p.mu / (L_A * L_A);
    }
    case FlowMethod::implicit_euler:
      return 1.0;
    case FlowMethod::aor:
      if (LB == 0.0)
        throw std::invalid_argument("default_alpha: AOR needs L_Bsym > 0");
      return 1.0 / (2.0 * LB);
    case FlowMethod::gss: {
      const double boundB = LB > 0.0 ? 1.0 / (4.0 * LB) : kInf;
      return std::min(boundB, 1.0 / (4.0 * p.L_F));
    }
    case FlowMethod::hss:
      throw std::invalid_argument("default_alpha: use HssSolver::optimal_alpha");
  }
  return 0.0;
}

double alpha_bound(FlowMethod method, const MonotoneProblem& p,
                   const SkewSplit& split) {
  const double LB = split.L_Bsym;
  switch (method) {
    case FlowMethod::explicit_euler: {
      const double L_A = p.L_F + LB;
      return p.mu / (L_A * L_A);
    }
    case FlowMethod::implicit_euler:
    case FlowMethod::hss:
      return kInf;
    case FlowMethod::aor: {
      if (LB == 0.0) return kInf;
      // Boundary alpha = 1/L_Bsym degenerates; require a strict margin.
      return (1.0 - 1e-6) / LB;
    }
    case FlowMethod::gss: {
      const double lim = std::max(2.0 * LB, 2.0 * p.L_F);
      return lim > 0.0 ? (1.0 - 1e-6) / lim : kInf;
    }
  }
  return 0.0;
}

FlowResult solve_flow(const MonotoneProblem& p, const SkewSplit& split,
                      FlowMethod method, const Vec& x0,
                      const FlowOptions& opts) {
  StepConfig cfg = opts.config;
  double alpha = cfg.alpha;
  if (alpha <= 0.0) {
    alpha = (method == FlowMethod::hss && opts.A_linear)
                ? HssSolver::optimal_alpha(*opts.A_linear)
                : default_alpha(method, p, split);
  }
  const double bound = alpha_bound(method, p, split);
  const bool precondition_ok = alpha <= bound;
  if (!precondition_ok && !cfg.allow_large_alpha)
    throw std::invalid_argument(
        "solve_flow: step size exceeds the theorem bound (set "
        "allow_large_alpha to override)");

  Resolvent resolvent = opts.resolvent;
  std::optional<HssSolver> hss;
  if (method == FlowMethod::hss) {
    if (!opts.A_linear || !opts.b_linear)
      throw std::invalid_argument("solve_flow: hss needs linear data");
    hss.emplace(*opts.A_linear, *opts.b_linear, alpha);
  } else if (method == FlowMethod::implicit_euler && !resolvent) {
    if (!opts.A_linear || !opts.b_linear)
      throw std::invalid_argument(
          "solve_flow: implicit Euler needs a resolvent or linear data");
    resolvent = make_linear_resolvent(*opts.A_linear, *opts.b_linear);
  }

  // b of the shifted skew-symmetric system, recovered from the oracle.
  Vec b_aor;
  if (method == FlowMethod::aor)
    b_aor = -p.grad_F(Vec::Zero(p.dim));

  const auto lyap = [&](const Vec& x) -> double {
    if (!p.x_star) return p.residual_norm(x);
    switch (method) {
      case FlowMethod::aor:
        return lyapunov_alphaB(x, *p.x_star, alpha, split.Bsym);
      case FlowMethod::gss:
        return lyapunov_alphaBD(x, *p.x_star, alpha, split.Bsym, p);
      default:
        return lyapunov_Eq(x, *p.x_star);
    }
  };

  FlowResult out;
  out.x = x0;
  out.trace.step_size_warning = !precondition_ok;

  auto record = [&](long k, const Vec& x) {
    TraceEntry e;
    e.k = k;
    e.lyapunov = lyap(x);
    if (p.x_star) e.err_norm = (x - *p.x_star).norm();
    e.residual = p.residual_norm(x);
    out.trace.push(e);
  };

  record(0, out.x);
  int rising = 0;
  double last_lyap = out.trace.entries.back().lyapunov;
  for (long k = 0; k < cfg.max_iter; ++k) {
    if (p.residual_norm(out.x) <= cfg.stop_tol) break;
    switch (method) {
      case FlowMethod::explicit_euler:
        out.x = explicit_euler_step(p, out.x, alpha);
        break;
      case FlowMethod::implicit_euler:
        out.x = implicit_euler_step(p, out.x, alpha, resolvent);
        break;
      case FlowMethod::aor:
        out.x = aor_linear_step(split, p.mu, b_aor, out.x, alpha, cfg.variant);
        break;
      case FlowMethod::gss:
        out.x = gss_step(p, split, out.x, alpha, cfg.variant);
        break;
      case FlowMethod::hss:
        out.x = hss->step(out.x);
        break;
    }
    check_finite(out.x, "solve_flow");
    record(k + 1, out.x);
    const double cur = out.trace.entries.back().lyapunov;
    rising = cur > last_lyap ? rising + 1 : 0;
    last_lyap = cur;
    if (rising >= 10 && precondition_ok)
      throw std::runtime_error(
          "solve_flow: Lyapunov value increased for 10 consecutive steps "
          "with the step-size precondition satisfied");
  }
  return out;
}

}  // namespace gss

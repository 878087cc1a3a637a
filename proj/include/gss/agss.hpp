#pragma once

#include "gss/core.hpp"
#include "gss/flow.hpp"

#include <complex>
#include <utility>

namespace gss {

/// Coupled iterate of the accelerated schemes. x_hat is transient, kept
/// only so tests can inspect the predictor.
struct AccState {
  Vec x;
  Vec y;
  Vec x_hat;
};

struct CorrectionParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
};

enum class InnerMethod { direct, cg_normal, aor_inner };

struct InnerSolveReport {
  double residual_norm = 0.0;  // ||eps_in||
  long iterations = 0;
  InnerMethod method = InnerMethod::direct;
  bool converged = true;
};

/// Largest alpha with alpha^2 L_F c2^2 <= (1 + alpha c1) c3 (equality).
double max_step_size(const CorrectionParams& params, double L_F);

/// x_new = x_hat_new + alpha c2 / (1 + alpha c1) * (y_new - y_old).
Vec correction_extrapolate(const Vec& x_hat_new, const Vec& y_new,
                           const Vec& y_old, double alpha,
                           const CorrectionParams& params);

/// Solves (beta I + N) y = b.
/// cg_normal runs CG on (beta^2 I + N^T N) y = (beta I - N) b, using
/// N^T N = -N^2; aor_inner runs the shifted-skew AOR iteration with
/// mu <- beta. Iterative methods stop at ||b - (beta I + N) y|| <= tol ||b||.
std::pair<Vec, InnerSolveReport> shifted_skew_solve(
    double beta, const Mat& N, const SkewSplit& split, const Vec& b,
    InnerMethod method, double tol = 1e-12, long max_iter = 0);

/// One IMEX step: predictor, shifted skew-symmetric solve for y, corrector.
std::pair<AccState, InnerSolveReport> agss_imex_step(
    const MonotoneProblem& p, const SkewSplit& split, const AccState& s,
    double alpha, InnerMethod inner = InnerMethod::direct,
    double inner_tol = 1e-12);

/// IMEX step with the inexact inner solve: the residual criterion
/// ||eps||^2 <= (alpha/2)(||xhat - x_k||^2 + alpha ||y - xhat||^2) is
/// re-evaluated against the current inner iterate each inner iteration;
/// the midpoint corrector is used. When disable_criterion is set, the
/// inner solve instead stops at the fixed relative residual loose_tol.
std::pair<AccState, InnerSolveReport> agss_imex_inexact_step(
    const MonotoneProblem& p, const SkewSplit& split, const AccState& s,
    double alpha, long inner_budget = 0, bool disable_criterion = false,
    double loose_tol = 1e-1);

/// Fully explicit AGSS step (forward substitution on the y-update).
AccState agss_explicit_step(const MonotoneProblem& p, const SkewSplit& split,
                            const AccState& s, double alpha);

/// Eigenvalues -1 + (b +/- sqrt(b^2 + 4(a-1)))/2 * i of the accelerated
/// flow's 2x2 model matrix; a >= 1.
std::pair<std::complex<double>, std::complex<double>> flow_spectrum(double a,
                                                                    double b);

enum class AgssScheme { imex, imex_inexact, explicit_agss };

struct AgssOptions {
  StepConfig config;
  InnerMethod inner = InnerMethod::direct;
  double inner_tol = 1e-12;
  long inner_budget = 0;  // 0 = dimension-scaled default
  bool disable_inexact_criterion = false;
  double loose_inner_tol = 1e-1;
};

/// Theorem step sizes: IMEX sqrt(mu/L_F); explicit
/// min{mu/(2 L_Bsym), sqrt(mu/(2 L_F))}.
double default_alpha(AgssScheme scheme, const MonotoneProblem& p,
                     const SkewSplit& split);

struct AgssResult {
  AccState state;
  ConvergenceTrace trace;
  long total_inner_iters = 0;
};

/// Iterates the chosen accelerated scheme from x0 = y0 until
/// ||A(x_k)|| <= stop_tol or max_iter. Traces lyapunov_acc for the IMEX
/// schemes and lyapunov_acc_alphaB for the explicit scheme.
AgssResult solve_agss(const MonotoneProblem& p, const SkewSplit& split,
                      AgssScheme scheme, const Vec& x0,
                      const AgssOptions& opts);

}  // namespace gss

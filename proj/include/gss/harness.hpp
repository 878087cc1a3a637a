#pragma once

#include "gss/agss.hpp"
#include "gss/core.hpp"
#include "gss/flow.hpp"
#include "gss/saddle.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gss {

enum class ProblemKind {
  shifted_skew_linear,   // (mu I + N) x = b
  quadratic_plus_skew,   // grad F = H x - b (+ eps tanh), skew N
  bilinear_saddle,       // strongly-convex-strongly-concave quadratic saddle
  constrained_qp,        // f quadratic, g(p) = (b, p), mu_g = 0
};

/// Seeded generator input. Seeds fully determine instances; requested
/// condition numbers are hit exactly by explicit eigenvalue placement.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::shifted_skew_linear;
  Eigen::Index dim = 0;    // monotone kinds
  Eigen::Index m = 0, n = 0;  // saddle kinds
  double mu = 1.0;         // mu (monotone) / mu_f (saddle)
  double kappa_F = 1.0;    // L_F / mu
  double kappa_Bsym = 1.0; // L_Bsym / mu
  double kappa_g = 1.0;    // L_g / mu_g, with mu_g = mu for bilinear_saddle
  double kappa_S = 1.0;    // spread of singular values of B (squared)
  double nonlinear_eps = 0.0;  // log-cosh perturbation strength
  std::uint64_t seed = 0;
};

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// JSON (de)serialization of the documented problem schema.
std::string spec_to_json(const ProblemSpec& spec);
ProblemSpec spec_from_json(const std::string& text);
ProblemSpec load_spec(const std::string& path);

/// Generated instances carry x_star (dense direct solve, or damped Newton
/// to 1e-12 residual for the nonlinear family).
MonotoneProblem generate_monotone(const ProblemSpec& spec);
SaddleProblem generate_saddle(const ProblemSpec& spec);

/// Seeded orthogonal conjugation H = Q diag(eigs) Q' with exact endpoints.
Mat seeded_spd(Eigen::Index dim, double lambda_min, double lambda_max,
               std::uint64_t seed);
/// Seeded skew-symmetric N scaled so ||B + B'|| (B = lower(N)) = L_Bsym.
Mat seeded_skew(Eigen::Index dim, double L_Bsym, std::uint64_t seed);

struct RateFit {
  double rho_hat = 1.0;  // fitted per-step contraction
  double r_squared = 0.0;
  long window_begin = 0, window_end = 0;
};

/// Least-squares slope of log E_k over the tail window (last 60% of the
/// entries above the floor 100 * eps * E_0); rho_hat = exp(slope).
RateFit estimate_rate(const ConvergenceTrace& trace, double tail = 0.6);

/// Least-squares slope of log y vs log x (sweep scaling fits).
double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y);

// Matrix Market coordinate format, exact (shortest round-trip) reals.
void write_matrix_market(const std::string& path, const Mat& M);
Mat read_matrix_market(const std::string& path);

/// Fixed CSV schema: k,lyapunov,err_norm,residual,inner_iters,
/// inner_residual (err_norm empty when x* is unknown).
void write_trace_csv(const std::string& path, const ConvergenceTrace& trace);

struct AssertionRecord {
  std::string name;
  double expected = 0.0;  // bound (ratio/slope checks) or reference value
  double observed = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct BenchReport {
  std::string suite;
  std::vector<AssertionRecord> assertions;
  bool pass() const {
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }
  std::string to_json() const;
};

/// Suites: aor, gss, imex, agss_explicit, saddle, tpd, atpd, sweeps.
/// Each assertion mirrors one theorem (per-step Lyapunov ratio) or scaling
/// law (log-log slope). Thread count for sweeps comes from GSS_SWEEP_THREADS.
BenchReport run_benchmark(const std::string& suite);

/// Maximum per-step Lyapunov ratio over a trace (1.0 for empty/one-entry).
double max_step_ratio(const ConvergenceTrace& trace);

/// Largest per-step Lyapunov ratio observed, ignoring entries below the
/// floor 100 * eps * E_0 where roundoff dominates.
double max_step_ratio_above_floor(const ConvergenceTrace& trace);

}  // namespace gss

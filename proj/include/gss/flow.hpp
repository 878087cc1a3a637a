#pragma once

#include "gss/core.hpp"

namespace gss {

enum class SplitVariant { forward, backward };

enum class FlowMethod {
  explicit_euler,
  implicit_euler,
  aor,
  gss,
  hss,
};

struct StepConfig {
  double alpha = 0.0;  // 0 means: use the method's theorem step size
  SplitVariant variant = SplitVariant::forward;
  long max_iter = 100000;
  double stop_tol = 1e-10;       // on ||A(x_k)||
  bool allow_large_alpha = false;  // run past the theorem bound, warn in trace
};

/// Resolvent oracle: x_{k+1} = (I + alpha A)^{-1}(x_k).
using Resolvent = std::function<Vec(const Vec&, double)>;

/// Resolvent of a linear operator A(x) = M x - b via dense LU of I + alpha M.
Resolvent make_linear_resolvent(const Mat& M, const Vec& b);

/// x_{k+1} = x_k - alpha (grad F(x_k) + N x_k).
Vec explicit_euler_step(const MonotoneProblem& p, const Vec& x_k, double alpha);

Vec implicit_euler_step(const MonotoneProblem& p, const Vec& x_k, double alpha,
                        const Resolvent& resolvent);

/// One AOR step for (mu I + N) x = b.
///   forward:  [(1+a mu)I - 2a B] x_{k+1} = x_k - a (Bsym x_k - b)
///   backward: [(1+a mu)I + 2a B^T] x_{k+1} = x_k + a (Bsym x_k + b)
Vec aor_linear_step(const SkewSplit& split, double mu, const Vec& b,
                    const Vec& x_k, double alpha,
                    SplitVariant variant = SplitVariant::forward);

/// One GSS step for grad F(x) + N x = 0.
///   forward:  (I - 2a B) x_{k+1} = x_k - a (grad F(x_k) + Bsym x_k)
///   backward: (I + 2a B^T) x_{k+1} = x_k - a (grad F(x_k) - Bsym x_k)
Vec gss_step(const MonotoneProblem& p, const SkewSplit& split, const Vec& x_k,
             double alpha, SplitVariant variant = SplitVariant::forward);

/// HSS for a linear system A x = b with A = Asym + Askew, Asym SPD.
/// Precomputes the two shifted factorizations; counts symmetric-part solves
/// so benchmark reports can census them.
class HssSolver {
 public:
  HssSolver(const Mat& A, Vec b, double alpha);

  Vec step(const Vec& x_k) const;
  double alpha() const { return alpha_; }
  long sym_solves() const { return sym_solves_; }

  /// Optimal shift sqrt(lambda_min * lambda_max) of the symmetric part.
  static double optimal_alpha(const Mat& A);

 private:
  Vec b_;
  Mat Asym_, Askew_;
  Eigen::PartialPivLU<Mat> lu_sym_, lu_skew_;
  double alpha_;
  mutable long sym_solves_ = 0;
};

struct FlowResult {
  Vec x;
  ConvergenceTrace trace;
};

struct FlowOptions {
  StepConfig config;
  // Required for implicit_euler on nonlinear problems; built automatically
  // for hss/implicit_euler when linear data is supplied.
  Resolvent resolvent;
  // Linear data A x = b for hss (and the built-in linear resolvent).
  std::optional<Mat> A_linear;
  std::optional<Vec> b_linear;
};

/// Theorem step sizes: AOR 1/(2 L_Bsym), GSS min{1/(4 L_Bsym), 1/(4 L_F)},
/// explicit Euler mu/L_A^2. L_Bsym = 0 bounds are treated as +inf.
double default_alpha(FlowMethod method, const MonotoneProblem& p,
                     const SkewSplit& split);

/// Step-size bound of the method's convergence theorem (+inf when
/// unconditional). Requires strict inequality with margin for AOR/GSS.
double alpha_bound(FlowMethod method, const MonotoneProblem& p,
                   const SkewSplit& split);

/// Iterates the chosen step until ||A(x_k)|| <= stop_tol or max_iter.
/// Traces the method's designated Lyapunov value (residual when x* unknown).
/// Throws std::runtime_error on divergence under a satisfied precondition.
FlowResult solve_flow(const MonotoneProblem& p, const SkewSplit& split,
                      FlowMethod method, const Vec& x0,
                      const FlowOptions& opts);

}  // namespace gss

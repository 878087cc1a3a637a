#pragma once

#include "gss/agss.hpp"
#include "gss/core.hpp"

#include <utility>

namespace gss {

/// SPD inner-product operator. Only apply and inverse-apply are needed by
/// the schemes; identity (possibly scaled), diagonal and dense forms are
/// built in.
class Metric {
 public:
  Metric() = default;  // identity
  explicit Metric(Vec diag);
  explicit Metric(Mat dense);

  Vec apply(const Vec& v) const;
  Vec solve(const Vec& v) const;
  double quad(const Vec& v) const;  // v' M v
  double scale() const { return scale_; }
  bool is_scaled_identity() const { return kind_ == Kind::identity; }

  /// Metric for c * M.
  Metric scaled(double c) const;
  /// Dense materialization (diagnostics and small-dim tests only).
  Mat dense(Eigen::Index dim) const;

 private:
  enum class Kind { identity, diagonal, dense };
  Kind kind_ = Kind::identity;
  double scale_ = 1.0;
  Vec d_;
  Mat M_;
  Eigen::LLT<Mat> llt_;
};

/// Proximal oracle in the problem's metric:
/// prox(v, gamma) = argmin_u h(u) + 1/(2 gamma) ||u - v||_M^2.
using ProxOracle = std::function<Vec(const Vec&, double)>;

/// min_u max_p f(u) - g(p) + (Bu, p) with B full row rank, n <= m,
/// in the inner products induced by I_V (primal) and I_Q (dual).
struct SaddleProblem {
  Eigen::Index m = 0;  // primal dim
  Eigen::Index n = 0;  // dual dim
  GradOracle grad_f;
  ValueOracle f_value;
  GradOracle grad_g;
  ValueOracle g_value;
  ProxOracle prox_f;
  ProxOracle prox_g;
  Mat B;  // n x m
  std::optional<Vec> b_rhs;  // g(p) = (b, p) for constrained problems
  Metric I_V;
  Metric I_Q;
  double mu_f = 0.0, L_f = 0.0;  // of f in the I_V metric
  double mu_g = 0.0, L_g = 0.0;  // of g in the I_Q metric
  std::optional<Mat> H_f;  // Hessian when f is quadratic
  std::optional<Mat> H_g;  // Hessian when g is quadratic
  std::optional<Vec> u_star, p_star;  // known saddle point (diagnostics)

  /// Schur complement apply S p = B I_V^{-1} B' p (never formed densely
  /// for large dims).
  Vec apply_S(const Vec& p) const { return B * I_V.solve(B.transpose() * p); }
  Vec kkt_residual_u(const Vec& u, const Vec& p) const {
    return grad_f(u) + B.transpose() * p;
  }
  Vec kkt_residual_p(const Vec& u, const Vec& p) const {
    return grad_g(p) - B * u;
  }
  double kkt_residual(const Vec& u, const Vec& p) const {
    return kkt_residual_u(u, p).norm() + kkt_residual_p(u, p).norm();
  }
};

/// Throws std::invalid_argument on violated invariants (SPD metrics by
/// sampled Rayleigh quotients, full row rank of B, mu <= L).
void validate(const SaddleProblem& p, unsigned seed = 0, int samples = 8);

struct SchurSpectrum {
  double L_S = 0.0;    // lambda_max(I_Q^{-1} B I_V^{-1} B')
  double mu_S = 0.0;   // lambda_min
  double kappa_S = 0.0;
  double B_sym_norm_Imu = 0.0;  // sqrt(L_S / (mu_f mu_g)); 0 when mu_g = 0
};

/// Extreme generalized eigenvalues of (B I_V^{-1} B', I_Q). Dense
/// generalized eigensolve for n <= 512, matrix-free power/inverse
/// iteration above.
SchurSpectrum schur_spectrum(const SaddleProblem& p);

struct SaddleState {
  Vec u, p;          // x
  Vec v, q;          // y
  Vec u_hat, p_hat;  // predictor
};

/// One step of the explicit accelerated scheme: predictor, v-update with
/// q_k, q-update with 2Bv_{k+1} - Bv_k, midpoint correction. Requires
/// mu_g > 0.
SaddleState agss_saddle_step(const SaddleProblem& p, const SaddleState& s,
                             double alpha);

/// One IMEX step: the skew part is implicit; the inner block system
///   [(1+a) mu_f I_V,  a B'; -a B,  (1+a) mu_g I_Q] (v,q) = b
/// is solved by dense LU (direct), CG on the SPD dual Schur system
/// (cg_normal), or the preconditioned AOR inner iteration started from
/// (v_k, q_k) (aor_inner).
std::pair<SaddleState, InnerSolveReport> imex_saddle_step(
    const SaddleProblem& p, const SaddleState& s, double alpha,
    InnerMethod inner = InnerMethod::direct, double inner_tol = 1e-12);

/// Gauss-Seidel proximal splitting (x = (u, p) only):
///   u+ = prox_{(a/mu_f) f}(u - (a/mu_f) I_V^{-1} B' p)
///   p+ = prox_{(a/mu_g) g}(p - (a/mu_g) I_Q^{-1} B (u - 2 u+))
std::pair<Vec, Vec> prox_saddle_step(const SaddleProblem& p, const Vec& u,
                                     const Vec& p_dual, double alpha);

/// prox of h(u) = c/2 ||u||^2 + (a, u) in the metric s*I.
ProxOracle make_quadratic_prox(double c, Vec a, double metric_scale = 1.0);
/// prox of h(u) = lambda ||u||_2 (smooth-free l2 penalty) in s*I.
ProxOracle make_l2_penalty_prox(double lambda, double metric_scale = 1.0);

struct TpdConstants {
  double mu_g_plus = 0.0;  // of 2g + (2 - L_f) 1/2 ||.||_S^2
  double mu_gS = 0.0, L_gS = 0.0;  // of g_S = g + 1/2 ||.||_S^2
};

struct GsOracles {
  GradOracle grad_gS;
  ValueOracle gS_value;
  TpdConstants constants;
};

/// g_S(p) = g(p) + 1/2 ||p||_S^2. mu_g_plus is the enhanced-convexity bound
/// 2 mu_g + (2 - L_f) mu_S unless H_g is available, in which case the exact
/// generalized eigenvalue of (2 H_g + (2 - L_f) S, I_Q) is used.
GsOracles build_gS(const SaddleProblem& p, const SchurSpectrum& spec);

/// One GSS-TPD step (u-update strictly before p-update):
///   u+ = u - a I_V^{-1}(grad f(u) + B' p)
///   p+ = p - a I_Q^{-1}(B I_V^{-1} grad f(u+) + grad g_S(p) - B(2u+ - u))
std::pair<Vec, Vec> tpd_gss_step(const SaddleProblem& p, const GsOracles& gS,
                                 const Vec& u, const Vec& p_dual,
                                 double alpha);

/// One ATPD step: predictor; v-update with the 1/2(u_hat - v) drag;
/// q-update with the transformed gradient at the predictor; extrapolation
/// (1 + a/4)(x+ - x_hat) = a (y+ - y_k).
SaddleState atpd_step(const SaddleProblem& p, const GsOracles& gS,
                      const SaddleState& s, double alpha);

struct PreconScaling {
  double c_v = 1.0, c_q = 1.0;
  double L_f_scaled = 0.0, mu_f_scaled = 0.0;
  double mu_g_scaled = 0.0, L_g_scaled = 0.0;
  double L_S_scaled = 0.0, mu_S_scaled = 0.0;
};

/// c_v = (4/3) L_f kappa(S) so that L_f/c_v <= 3/4; c_q so that
/// mu_S/(c_v c_q) = 2/3. Post-scaling the TPD acceleration condition
///   2/3 - mu_g <= lambda_min <= lambda_max <= 1/(2 L_f)
/// holds in the rescaled metrics.
PreconScaling choose_scaling(const SaddleProblem& p,
                             const SchurSpectrum& spec);

/// The problem in the metrics (c_v I_V, c_q I_Q).
SaddleProblem apply_scaling(const SaddleProblem& p, const PreconScaling& sc);

struct AugmentResult {
  SaddleProblem problem;
  double mu_gain = 0.0;        // beta sigma_min(B)^2 / lambda_max(I_V)
  bool rank_deficient = false; // m > n: no gain on the null space of B
};

/// f_beta(u) = f(u) + beta/2 ||Bu - b||^2; saddle point unchanged.
AugmentResult augment_objective(const SaddleProblem& p, double beta);

/// L(u, p*) - L(u*, p) = D_f(u, u*) + D_g(p, p*) >= 0.
double duality_bregman_gap(const SaddleProblem& p, const Vec& u,
                           const Vec& p_dual);

// Designated Lyapunov functions of the saddle schemes; all require the
// saddle point (and value oracles where Bregman terms appear).
double lyapunov_saddle_acc(const SaddleProblem& p, const SaddleState& s);
double lyapunov_saddle_acc_alphaB(const SaddleProblem& p,
                                  const SaddleState& s, double alpha);
double lyapunov_prox_saddle(const SaddleProblem& p, const Vec& u,
                            const Vec& p_dual, double alpha);
double lyapunov_tpd(const SaddleProblem& p, const GsOracles& gS, const Vec& u,
                    const Vec& p_dual, double alpha);
double lyapunov_atpd(const SaddleProblem& p, const GsOracles& gS,
                     const SaddleState& s, double alpha);

enum class SaddleScheme { agss, imex, prox, tpd_gss, atpd };

struct SaddleOptions {
  StepConfig config;
  InnerMethod inner = InnerMethod::direct;  // imex only
  double inner_tol = 1e-12;
};

/// Theorem step sizes per scheme (see the per-step functions).
double default_alpha(SaddleScheme scheme, const SaddleProblem& p,
                     const SchurSpectrum& spec, const TpdConstants* tpd);

struct SaddleResult {
  Vec u, p;
  ConvergenceTrace trace;
  long total_inner_iters = 0;
};

/// Iterates the chosen scheme from (u0, p0) (= y0 for the accelerated
/// schemes) until kkt_residual <= stop_tol or max_iter; traces the
/// scheme's designated Lyapunov value (KKT residual when the saddle point
/// is unknown). tpd_gss/atpd build g_S internally.
SaddleResult solve_saddle(const SaddleProblem& p, SaddleScheme scheme,
                          const Vec& u0, const Vec& p0,
                          const SaddleOptions& opts);

/// Stacked monotone-operator view x = (u, p), N = [0 B'; -B 0]. Requires
/// identity metrics (used for cross-checks against the generic schemes).
MonotoneProblem to_monotone(const SaddleProblem& p);

}  // namespace gss

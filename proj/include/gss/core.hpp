#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gss {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using GradOracle = std::function<Vec(const Vec&)>;
using ValueOracle = std::function<double(const Vec&)>;

/// Strongly monotone operator A(x) = grad_F(x) + N x with N skew-symmetric.
struct MonotoneProblem {
  Eigen::Index dim = 0;
  GradOracle grad_F;
  ValueOracle F_value;  // optional; empty if F values are unavailable
  Mat N;
  double mu = 0.0;
  double L_F = 0.0;
  std::optional<Vec> x_star;

  Vec apply_A(const Vec& x) const { return grad_F(x) + N * x; }
  double residual_norm(const Vec& x) const { return apply_A(x).norm(); }
  bool has_F_value() const { return static_cast<bool>(F_value); }
};

/// Triangular decomposition N = Bsym - 2B = 2B^T - Bsym with B = lower(N).
struct SkewSplit {
  Mat B;      // strictly lower triangular
  Mat Bsym;   // B + B^T
  double L_Bsym = 0.0;
};

struct SpectralEstimates {
  double L_A = 0.0;
  double kappa_A = 0.0;
  double kappa_F = 0.0;
  double kappa_N = 0.0;
  double kappa_Bsym = 0.0;
};

struct TraceEntry {
  long k = 0;
  double lyapunov = 0.0;
  std::optional<double> err_norm;   // ||x_k - x*|| when x* known
  std::optional<double> residual;   // ||A(x_k)||
  long inner_iters = 0;
  double inner_residual = 0.0;
};

struct ConvergenceTrace {
  std::vector<TraceEntry> entries;
  std::optional<double> fitted_rate;
  bool step_size_warning = false;  // precondition on alpha not satisfied

  void push(TraceEntry e) { entries.push_back(std::move(e)); }
  long iterations() const {
    return entries.empty() ? 0 : entries.back().k;
  }
};

/// Relative skew-symmetry tolerance: ||N + N^T||_max <= tol * ||N||_max.
inline constexpr double kSkewTol = 1e-12;

bool is_skew_symmetric(const Mat& N, double rel_tol = kSkewTol);

/// Splits a skew-symmetric N into B = lower(N), Bsym = B + B^T and
/// computes L_Bsym = ||Bsym||. Throws std::invalid_argument on non-square
/// or non-skew input.
SkewSplit split_skew(const Mat& N);

/// Largest |eigenvalue| of a symmetric matrix by power iteration on M^2
/// with a deterministic seeded start. Falls back to a dense symmetric
/// eigendecomposition for dim <= 512 if the iteration stagnates; throws
/// std::runtime_error otherwise.
double spectral_norm_sym(const Mat& M, double rel_tol = 1e-10);

/// Bregman divergence D_F(x, y) = F(x) - F(y) - <grad F(y), x - y>.
/// Throws std::invalid_argument when the value oracle is missing.
double bregman(const ValueOracle& F_value, const GradOracle& grad_F,
               const Vec& x, const Vec& y);
double bregman(const MonotoneProblem& p, const Vec& x, const Vec& y);

/// E_q(x) = 1/2 ||x - x*||^2.
double lyapunov_Eq(const Vec& x, const Vec& x_star);

/// E^{aB}(x) = 1/2 ||x - x*||^2_{I - alpha Bsym}.
double lyapunov_alphaB(const Vec& x, const Vec& x_star, double alpha,
                       const Mat& Bsym);

/// E^{aBD}(x) = 1/2 ||x - x*||^2_{I - alpha Bsym} - alpha D_F(x*, x).
double lyapunov_alphaBD(const Vec& x, const Vec& x_star, double alpha,
                        const Mat& Bsym, const MonotoneProblem& p);

/// E(x, y) = D_F(x, x*) + mu/2 ||y - x*||^2.
double lyapunov_acc(const Vec& x, const Vec& y, const Vec& x_star,
                    const MonotoneProblem& p);

/// E^{aB}(x, y) = D_F(x, x*) + 1/2 ||y - x*||^2_{mu I - alpha Bsym}.
double lyapunov_acc_alphaB(const Vec& x, const Vec& y, const Vec& x_star,
                           double alpha, const Mat& Bsym,
                           const MonotoneProblem& p);

/// kappa_F = L_F/mu, kappa_N = ||N||/mu with ||N|| = ||Bsym||,
/// L_A = L_F + ||N||.
SpectralEstimates condition_numbers(const MonotoneProblem& p,
                                    const SkewSplit& split);

/// Sampled sanity check of the problem invariants (skew-symmetry, zero
/// diagonal, mu <= L_F, monotonicity/Lipschitz bounds on random pairs).
/// Throws std::invalid_argument on violation.
void validate(const MonotoneProblem& p, unsigned seed = 0,
              int samples = 8);

}  // namespace gss

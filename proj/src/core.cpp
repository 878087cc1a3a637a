#include "gss/core.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gss {

bool is_skew_symmetric(const Mat& N, double rel_tol) {
  if (N.rows() != N.cols()) return false;
  const double scale = N.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  const double defect = (N + N.transpose()).cwiseAbs().maxCoeff();
  return defect <= rel_tol * scale;
}

SkewSplit split_skew(const Mat& N) {
  if (N.rows() != N.cols())
    throw std::invalid_argument("split_skew: matrix must be square");
  if (!is_skew_symmetric(N))
    throw std::invalid_argument("split_skew: matrix is not skew-symmetric");
  SkewSplit s;
  // N = Bsym - 2B = 2B^T - Bsym with B strictly lower: B = -lower(N).
  s.B = Mat(N.transpose()).triangularView<Eigen::StrictlyLower>();
  s.Bsym = s.B + s.B.transpose();
  s.L_Bsym = s.Bsym.isZero(0.0) ? 0.0 : spectral_norm_sym(s.Bsym);
  return s;
}

double spectral_norm_sym(const Mat& M, double rel_tol) {
  const Eigen::Index n = M.rows();
  if (n != M.cols())
    throw std::invalid_argument("spectral_norm_sym: matrix must be square");
  const double scale = M.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("spectral_norm_sym: matrix is not symmetric");

  // Power iteration on M^2 so that paired eigenvalues +/-lambda do not
  // cause oscillation for indefinite M.
  const long cap = 10 * static_cast<long>(n) + 50;
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int restart = 0; restart < 3; ++restart) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    v.normalize();
    double lam2 = 0.0;
    for (long it = 0; it < cap; ++it) {
      Vec w = M * (M * v);
      const double nw = w.norm();
      if (nw == 0.0) break;  // v in the null space; restart
      w /= nw;
      const double lam2_new = w.dot(M * (M * w));
      if (std::abs(lam2_new - lam2) <= rel_tol * std::abs(lam2_new)) {
        return std::sqrt(std::abs(lam2_new));
      }
      lam2 = lam2_new;
      v = w;
    }
  }
  if (n <= 512) {
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  throw std::runtime_error("spectral_norm_sym: power iteration stagnated");
}

double bregman(const ValueOracle& F_value, const GradOracle& grad_F,
               const Vec& x, const Vec& y) {
  if (!F_value)
    throw std::invalid_argument("bregman: F value oracle is required");
  return F_value(x) - F_value(y) - grad_F(y).dot(x - y);
}

double bregman(const MonotoneProblem& p, const Vec& x, const Vec& y) {
  return bregman(p.F_value, p.grad_F, x, y);
}

double lyapunov_Eq(const Vec& x, const Vec& x_star) {
  if (x.size() != x_star.size())
    throw std::invalid_argument("lyapunov_Eq: dimension mismatch");
  return 0.5 * (x - x_star).squaredNorm();
}

double lyapunov_alphaB(const Vec& x, const Vec& x_star, double alpha,
                       const Mat& Bsym) {
  if (x.size() != x_star.size() || x.size() != Bsym.rows())
    throw std::invalid_argument("lyapunov_alphaB: dimension mismatch");
  const Vec e = x - x_star;
  return 0.5 * (e.squaredNorm() - alpha * e.dot(Bsym * e));
}

double lyapunov_alphaBD(const Vec& x, const Vec& x_star, double alpha,
                        const Mat& Bsym, const MonotoneProblem& p) {
  return lyapunov_alphaB(x, x_star, alpha, Bsym) -
         alpha * bregman(p, x_star, x);
}

double lyapunov_acc(const Vec& x, const Vec& y, const Vec& x_star,
                    const MonotoneProblem& p) {
  return bregman(p, x, x_star) + 0.5 * p.mu * (y - x_star).squaredNorm();
}

double lyapunov_acc_alphaB(const Vec& x, const Vec& y, const Vec& x_star,
                           double alpha, const Mat& Bsym,
                           const MonotoneProblem& p) {
  const Vec e = y - x_star;
  return bregman(p, x, x_star) +
         0.5 * (p.mu * e.squaredNorm() - alpha * e.dot(Bsym * e));
}

SpectralEstimates condition_numbers(const MonotoneProblem& p,
                                    const SkewSplit& split) {
  if (p.mu <= 0.0)
    throw std::invalid_argument("condition_numbers: mu must be positive");
  SpectralEstimates est;
  // ||N|| is reported as ||Bsym||; the two coincide in the 2-norm.
  const double norm_N = split.L_Bsym;
  est.L_A = p.L_F + norm_N;
  est.kappa_F = p.L_F / p.mu;
  est.kappa_N = norm_N / p.mu;
  est.kappa_Bsym = split.L_Bsym / p.mu;
  est.kappa_A = est.L_A / p.mu;
  return est;
}

void validate(const MonotoneProblem& p, unsigned seed, int samples) {
  if (p.dim <= 0) throw std::invalid_argument("validate: dim must be positive");
  if (p.N.rows() != p.dim || p.N.cols() != p.dim)
    throw std::invalid_argument("validate: N has wrong dimensions");
  if (!is_skew_symmetric(p.N))
    throw std::invalid_argument("validate: N is not skew-symmetric");
  if (p.N.diagonal().cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("validate: N has nonzero diagonal entries");
  if (!(p.mu > 0.0))
    throw std::invalid_argument("validate: mu must be positive");
  if (p.mu > p.L_F)
    throw std::invalid_argument("validate: mu exceeds L_F");
  if (!p.grad_F)
    throw std::invalid_argument("validate: gradient oracle missing");

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double tol = 1e-8;
  for (int s = 0; s < samples; ++s) {
    Vec x(p.dim), y(p.dim);
    for (Eigen::Index i = 0; i < p.dim; ++i) {
      x[i] = gauss(rng);
      y[i] = gauss(rng);
    }
    const Vec d = x - y;
    const Vec g = p.grad_F(x) - p.grad_F(y);
    const double d2 = d.squaredNorm();
    if (g.dot(d) < p.mu * d2 - tol * std::max(1.0, d2))
      throw std::invalid_argument("validate: strong convexity check failed");
    if (g.norm() > p.L_F * d.norm() + tol * std::max(1.0, d.norm()))
      throw std::invalid_argument("validate: Lipschitz check failed");
  }
}

}  // namespace gss

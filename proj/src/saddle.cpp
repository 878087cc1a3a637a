#include "gss/saddle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gss {

// ---------------------------------------------------------------- Metric

Metric::Metric(Vec diag) : kind_(Kind::diagonal), d_(std::move(diag)) {
  if ((d_.array() <= 0.0).any())
    throw std::invalid_argument("Metric: diagonal must be positive");
}

Metric::Metric(Mat dense) : kind_(Kind::dense), M_(std::move(dense)) {
  if (M_.rows() != M_.cols() ||
      (M_ - M_.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * M_.cwiseAbs().maxCoeff())
    throw std::invalid_argument("Metric: dense operator must be symmetric");
  llt_.compute(M_);
  if (llt_.info() != Eigen::Success)
    throw std::invalid_argument("Metric: dense operator must be SPD");
}

Vec Metric::apply(const Vec& v) const {
  switch (kind_) {
    case Kind::identity: return scale_ * v;
    case Kind::diagonal: return scale_ * d_.cwiseProduct(v);
    case Kind::dense: return scale_ * (M_ * v);
  }
  return v;
}

Vec Metric::solve(const Vec& v) const {
  switch (kind_) {
    case Kind::identity: return v / scale_;
    case Kind::diagonal: return v.cwiseQuotient(d_) / scale_;
    case Kind::dense: return llt_.solve(v) / scale_;
  }
  return v;
}

double Metric::quad(const Vec& v) const { return v.dot(apply(v)); }

Metric Metric::scaled(double c) const {
  if (c <= 0.0) throw std::invalid_argument("Metric: scale must be positive");
  Metric out = *this;
  out.scale_ *= c;
  return out;
}

Mat Metric::dense(Eigen::Index dim) const {
  switch (kind_) {
    case Kind::identity:
      return scale_ * Mat::Identity(dim, dim);
    case Kind::diagonal:
      return scale_ * Mat(d_.asDiagonal());
    case Kind::dense:
      return scale_ * M_;
  }
  return Mat::Identity(dim, dim);
}

// ------------------------------------------------------------- validation

void validate(const SaddleProblem& p, unsigned seed, int samples) {
  if (p.m <= 0 || p.n <= 0 || p.n > p.m)
    throw std::invalid_argument("saddle: need 0 < n <= m");
  if (p.B.rows() != p.n || p.B.cols() != p.m)
    throw std::invalid_argument("saddle: B must be n x m");
  if (p.mu_f > p.L_f || p.mu_g > p.L_g)
    throw std::invalid_argument("saddle: need mu <= L");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto draw = [&](Eigen::Index d) {
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = gauss(rng);
    return v;
  };
  for (int s = 0; s < samples; ++s) {
    const Vec u = draw(p.m), q = draw(p.n);
    if (p.I_V.quad(u) <= 0.0 || p.I_Q.quad(q) <= 0.0)
      throw std::invalid_argument("saddle: metrics must be positive definite");
  }
  const Eigen::JacobiSVD<Mat> svd(p.B);
  const auto& sv = svd.singularValues();
  if (sv[p.n - 1] <= 1e-10 * sv[0])
    throw std::invalid_argument("saddle: B must have full row rank");
}

// ---------------------------------------------------------- Schur spectrum

namespace {

Mat dense_schur(const SaddleProblem& p) {
  Mat S(p.n, p.n);
  const Mat Bt = p.B.transpose();
  for (Eigen::Index j = 0; j < p.n; ++j)
    S.col(j) = p.B * p.I_V.solve(Bt.col(j));
  return 0.5 * (S + S.transpose());
}

// Largest generalized eigenvalue of (S, I_Q) by power iteration on the
// I_Q-self-adjoint operator I_Q^{-1} S.
double schur_lmax_iterative(const SaddleProblem& p, double rel_tol) {
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss;
  Vec r(p.n);
  for (Eigen::Index i = 0; i < p.n; ++i) r[i] = gauss(rng);
  r /= std::sqrt(p.I_Q.quad(r));
  double lambda = 0.0;
  for (long it = 0; it < 10 * p.n + 100; ++it) {
    Vec t = p.I_Q.solve(p.apply_S(r));
    const double next = r.dot(p.I_Q.apply(t));  // Rayleigh quotient
    t /= std::sqrt(p.I_Q.quad(t));
    if (it > 2 && std::abs(next - lambda) <= rel_tol * std::abs(next))
      return next;
    lambda = next;
    r = std::move(t);
  }
  return lambda;
}

// Smallest generalized eigenvalue via inverse iteration; S z = I_Q r is
// solved matrix-free by CG.
double schur_lmin_iterative(const SaddleProblem& p, double rel_tol) {
  const auto solve_S = [&](const Vec& rhs) {
    Vec y = Vec::Zero(p.n);
    Vec r = rhs;
    Vec d = r;
    double rs = r.squaredNorm();
    const double stop = 1e-14 * rhs.squaredNorm();
    for (long it = 0; it < 10 * p.n + 100 && rs > stop; ++it) {
      const Vec Sd = p.apply_S(d);
      const double step = rs / d.dot(Sd);
      y += step * d;
      r -= step * Sd;
      const double rs_new = r.squaredNorm();
      d = r + (rs_new / rs) * d;
      rs = rs_new;
    }
    return y;
  };
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss;
  Vec r(p.n);
  for (Eigen::Index i = 0; i < p.n; ++i) r[i] = gauss(rng);
  r /= std::sqrt(p.I_Q.quad(r));
  double lambda = 0.0;
  for (long it = 0; it < 10 * p.n + 100; ++it) {
    Vec t = solve_S(p.I_Q.apply(r));
    const double ray = r.dot(p.I_Q.apply(p.I_Q.solve(p.apply_S(r))));
    t /= std::sqrt(p.I_Q.quad(t));
    if (it > 2 && std::abs(ray - lambda) <= rel_tol * std::abs(ray))
      return ray;
    lambda = ray;
    r = std::move(t);
  }
  return lambda;
}

}  // namespace

SchurSpectrum schur_spectrum(const SaddleProblem& p) {
  SchurSpectrum out;
  if (p.n <= 512) {
    const Mat S = dense_schur(p);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(S, p.I_Q.dense(p.n));
    out.L_S = es.eigenvalues().maxCoeff();
    out.mu_S = es.eigenvalues().minCoeff();
  } else {
    out.L_S = schur_lmax_iterative(p, 1e-10);
    out.mu_S = schur_lmin_iterative(p, 1e-10);
  }
  out.kappa_S = out.L_S / out.mu_S;
  out.B_sym_norm_Imu = (p.mu_f > 0.0 && p.mu_g > 0.0)
                           ? std::sqrt(out.L_S / (p.mu_f * p.mu_g))
                           : 0.0;
  return out;
}

// ------------------------------------------------------------- AGSS saddle

SaddleState agss_saddle_step(const SaddleProblem& p, const SaddleState& s,
                             double alpha) {
  if (p.mu_g <= 0.0)
    throw std::invalid_argument(
        "agss_saddle_step: mu_g = 0; use tpd_gss/atpd");
  SaddleState next;
  next.u_hat = (s.u + alpha * s.v) / (1.0 + alpha);
  next.p_hat = (s.p + alpha * s.q) / (1.0 + alpha);
  // v-update uses q_k; q-update uses 2Bv_{k+1} - Bv_k (order is normative).
  next.v = (s.v + alpha * next.u_hat -
            (alpha / p.mu_f) *
                p.I_V.solve(p.grad_f(next.u_hat) + p.B.transpose() * s.q)) /
           (1.0 + alpha);
  next.q = (s.q + alpha * next.p_hat -
            (alpha / p.mu_g) *
                p.I_Q.solve(p.grad_g(next.p_hat) - 2.0 * (p.B * next.v) +
                            p.B * s.v)) /
           (1.0 + alpha);
  next.u = (s.u + alpha * next.v - 0.5 * alpha * next.u_hat) /
           (1.0 + 0.5 * alpha);
  next.p = (s.p + alpha * next.q - 0.5 * alpha * next.p_hat) /
           (1.0 + 0.5 * alpha);
  return next;
}

// ------------------------------------------------------------- IMEX saddle

namespace {

struct BlockSystem {
  double a;           // alpha
  const SaddleProblem* p;
  Vec b_v, b_q;

  Vec residual(const Vec& v, const Vec& q) const {
    const double c = 1.0 + a;
    Vec rv = b_v - c * p->mu_f * p->I_V.apply(v) - a * (p->B.transpose() * q);
    Vec rq = b_q - c * p->mu_g * p->I_Q.apply(q) + a * (p->B * v);
    Vec r(rv.size() + rq.size());
    r << rv, rq;
    return r;
  }
  double rhs_norm() const { return std::sqrt(b_v.squaredNorm() + b_q.squaredNorm()); }
};

// Dual Schur system: [(1+a)^2 mu_f mu_g I_Q + a^2 B I_V^{-1} B'] q = rhs.
std::pair<Vec, Vec> solve_block_cg(const BlockSystem& sys, double tol,
                                   InnerSolveReport& rep) {
  const SaddleProblem& p = *sys.p;
  const double a = sys.a, c = 1.0 + a;
  const auto apply = [&](const Vec& q) -> Vec {
    return c * c * p.mu_f * p.mu_g * p.I_Q.apply(q) + a * a * p.apply_S(q);
  };
  const Vec rhs =
      c * p.mu_f * sys.b_q + a * (p.B * p.I_V.solve(sys.b_v));
  const auto recover_v = [&](const Vec& q) -> Vec {
    return p.I_V.solve(sys.b_v - a * (p.B.transpose() * q)) / (c * p.mu_f);
  };
  Vec q = Vec::Zero(p.n);
  Vec r = rhs - apply(q);
  Vec d = r;
  double rs = r.squaredNorm();
  const double bnorm = sys.rhs_norm();
  const long cap = 20 * p.n + 200;
  for (long it = 0; it < cap; ++it) {
    const Vec v = recover_v(q);
    rep.residual_norm = sys.residual(v, q).norm();
    if (rep.residual_norm <= tol * bnorm) {
      rep.iterations = it;
      return {v, q};
    }
    const Vec Ad = apply(d);
    const double step = rs / d.dot(Ad);
    q += step * d;
    r -= step * Ad;
    const double rs_new = r.squaredNorm();
    d = r + (rs_new / rs) * d;
    rs = rs_new;
  }
  rep.iterations = cap;
  Vec v = recover_v(q);
  rep.residual_norm = sys.residual(v, q).norm();
  rep.converged = rep.residual_norm <= tol * bnorm;
  return {v, q};
}

// Preconditioned inner AOR iteration in the I_mu inner product, started
// from (v_k, q_k); inner step 1/(2 ||B^sym||_{I_mu}).
std::pair<Vec, Vec> solve_block_aor(const BlockSystem& sys, const Vec& v0,
                                    const Vec& q0, double tol,
                                    InnerSolveReport& rep) {
  const SaddleProblem& p = *sys.p;
  const double a = sys.a, c = 1.0 + a;
  // Cheap estimate of ||B^sym||_{I_mu} = sqrt(L_S / (mu_f mu_g)).
  double L_S;
  if (p.n <= 512) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(dense_schur(p),
                                                     p.I_Q.dense(p.n));
    L_S = es.eigenvalues().maxCoeff();
  } else {
    L_S = schur_lmax_iterative(p, 1e-3) * 1.05;
  }
  const double step = 0.5 * std::sqrt(p.mu_f * p.mu_g / L_S);
  const double bnorm = sys.rhs_norm();
  Vec v = v0, q = q0;
  const long cap = 20 * (p.m + p.n) + 200;
  for (long it = 0; it < cap; ++it) {
    rep.residual_norm = sys.residual(v, q).norm();
    if (rep.residual_norm <= tol * bnorm) {
      rep.iterations = it;
      return {v, q};
    }
    const Vec v_new =
        (v - (step / p.mu_f) * p.I_V.solve(a * (p.B.transpose() * q) - sys.b_v)) /
        (1.0 + step * c);
    const Vec q_new =
        (q - (step / p.mu_g) * p.I_Q.solve(a * (p.B * (v - 2.0 * v_new)) - sys.b_q)) /
        (1.0 + step * c);
    v = v_new;
    q = q_new;
  }
  rep.iterations = cap;
  rep.residual_norm = sys.residual(v, q).norm();
  rep.converged = rep.residual_norm <= tol * bnorm;
  return {v, q};
}

std::pair<Vec, Vec> solve_block_direct(const BlockSystem& sys,
                                       InnerSolveReport& rep) {
  const SaddleProblem& p = *sys.p;
  const double a = sys.a, c = 1.0 + a;
  const Eigen::Index m = p.m, n = p.n;
  Mat K(m + n, m + n);
  K.topLeftCorner(m, m) = c * p.mu_f * p.I_V.dense(m);
  K.topRightCorner(m, n) = a * p.B.transpose();
  K.bottomLeftCorner(n, m) = -a * p.B;
  K.bottomRightCorner(n, n) = c * p.mu_g * p.I_Q.dense(n);
  Vec b(m + n);
  b << sys.b_v, sys.b_q;
  const Vec y = Eigen::PartialPivLU<Mat>(K).solve(b);
  Vec v = y.head(m), q = y.tail(n);
  rep.residual_norm = sys.residual(v, q).norm();
  return {std::move(v), std::move(q)};
}

}  // namespace

std::pair<SaddleState, InnerSolveReport> imex_saddle_step(
    const SaddleProblem& p, const SaddleState& s, double alpha,
    InnerMethod inner, double inner_tol) {
  SaddleState next;
  next.u_hat = (s.u + alpha * s.v) / (1.0 + alpha);
  next.p_hat = (s.p + alpha * s.q) / (1.0 + alpha);

  BlockSystem sys;
  sys.a = alpha;
  sys.p = &p;
  sys.b_v = p.mu_f * p.I_V.apply(s.v + alpha * next.u_hat) -
            alpha * p.grad_f(next.u_hat);
  sys.b_q = p.mu_g * p.I_Q.apply(s.q + alpha * next.p_hat) -
            alpha * p.grad_g(next.p_hat);

  InnerSolveReport rep;
  rep.method = inner;
  std::pair<Vec, Vec> vq;
  switch (inner) {
    case InnerMethod::direct:
      vq = solve_block_direct(sys, rep);
      break;
    case InnerMethod::cg_normal:
      vq = solve_block_cg(sys, inner_tol, rep);
      break;
    case InnerMethod::aor_inner:
      vq = solve_block_aor(sys, s.v, s.q, inner_tol, rep);
      break;
  }
  next.v = std::move(vq.first);
  next.q = std::move(vq.second);
  next.u = (s.u + alpha * next.v) / (1.0 + alpha);
  next.p = (s.p + alpha * next.q) / (1.0 + alpha);
  return {std::move(next), rep};
}

// ------------------------------------------------------------- prox saddle

std::pair<Vec, Vec> prox_saddle_step(const SaddleProblem& p, const Vec& u,
                                     const Vec& p_dual, double alpha) {
  if (!p.prox_f || !p.prox_g)
    throw std::invalid_argument("prox_saddle_step: prox oracles required");
  const double gf = alpha / p.mu_f, gg = alpha / p.mu_g;
  const Vec u_next =
      p.prox_f(u - gf * p.I_V.solve(p.B.transpose() * p_dual), gf);
  const Vec p_next =
      p.prox_g(p_dual - gg * p.I_Q.solve(p.B * (u - 2.0 * u_next)), gg);
  return {u_next, p_next};
}

ProxOracle make_quadratic_prox(double c, Vec a, double metric_scale) {
  return [c, a = std::move(a), s = metric_scale](const Vec& v, double gamma) {
    return (v - (gamma / s) * a) / (1.0 + gamma * c / s);
  };
}

ProxOracle make_l2_penalty_prox(double lambda, double metric_scale) {
  return [lambda, s = metric_scale](const Vec& v, double gamma) -> Vec {
    const double norm = v.norm();
    const double shrink = 1.0 - gamma * lambda / (s * norm);
    if (norm == 0.0 || shrink <= 0.0) return Vec::Zero(v.size());
    return shrink * v;
  };
}

// ---------------------------------------------------------------- TPD/ATPD

GsOracles build_gS(const SaddleProblem& p, const SchurSpectrum& spec) {
  GsOracles out;
  const Mat B = p.B;
  const Metric I_V = p.I_V;
  const GradOracle grad_g = p.grad_g;
  const ValueOracle g_value = p.g_value;
  const auto apply_S = [B, I_V](const Vec& q) -> Vec {
    return B * I_V.solve(B.transpose() * q);
  };
  out.grad_gS = [grad_g, apply_S](const Vec& q) -> Vec {
    return grad_g(q) + apply_S(q);
  };
  if (g_value)
    out.gS_value = [g_value, apply_S](const Vec& q) {
      return g_value(q) + 0.5 * q.dot(apply_S(q));
    };
  out.constants.mu_gS = p.mu_g + spec.mu_S;
  out.constants.L_gS = p.L_g + spec.L_S;
  if (p.H_g && p.n <= 512) {
    const Mat M = 2.0 * (*p.H_g) + (2.0 - p.L_f) * dense_schur(p);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(
        0.5 * (M + M.transpose()), p.I_Q.dense(p.n));
    out.constants.mu_g_plus = es.eigenvalues().minCoeff();
  } else {
    out.constants.mu_g_plus = 2.0 * p.mu_g + (2.0 - p.L_f) * spec.mu_S;
  }
  return out;
}

std::pair<Vec, Vec> tpd_gss_step(const SaddleProblem& p, const GsOracles& gS,
                                 const Vec& u, const Vec& p_dual,
                                 double alpha) {
  if (p.L_f >= 2.0)
    throw std::invalid_argument("tpd_gss_step: needs L_f < 2 (rescale I_V)");
  const Vec u_next =
      u - alpha * p.I_V.solve(p.grad_f(u) + p.B.transpose() * p_dual);
  const Vec p_next =
      p_dual - alpha * p.I_Q.solve(p.B * p.I_V.solve(p.grad_f(u_next)) +
                                   gS.grad_gS(p_dual) -
                                   p.B * (2.0 * u_next - u));
  return {u_next, p_next};
}

SaddleState atpd_step(const SaddleProblem& p, const GsOracles& gS,
                      const SaddleState& s, double alpha) {
  SaddleState next;
  next.u_hat = (s.u + alpha * s.v) / (1.0 + alpha);
  next.p_hat = (s.p + alpha * s.q) / (1.0 + alpha);
  // v-update with the halved drag term.
  next.v = (s.v + 0.5 * alpha * next.u_hat -
            (alpha / p.mu_f) *
                p.I_V.solve(p.grad_f(next.u_hat) + p.B.transpose() * s.q)) /
           (1.0 + 0.5 * alpha);
  // q-update with the transformed gradient, evaluated at the predictor.
  next.q = (s.q + alpha * next.p_hat -
            alpha * p.I_Q.solve(gS.grad_gS(next.p_hat) + p.B * s.v -
                                2.0 * (p.B * next.v) +
                                p.B * p.I_V.solve(p.grad_f(next.u_hat)))) /
           (1.0 + alpha);
  // Extrapolation (1 + a/4)(x+ - x_hat) = a (y+ - y_k).
  const double c = alpha / (1.0 + 0.25 * alpha);
  next.u = next.u_hat + c * (next.v - s.v);
  next.p = next.p_hat + c * (next.q - s.q);
  return next;
}

PreconScaling choose_scaling(const SaddleProblem& p,
                             const SchurSpectrum& spec) {
  PreconScaling sc;
  sc.c_v = (4.0 / 3.0) * p.L_f * spec.kappa_S;
  sc.c_q = 1.5 * spec.mu_S / sc.c_v;
  sc.L_f_scaled = p.L_f / sc.c_v;
  sc.mu_f_scaled = p.mu_f / sc.c_v;
  sc.mu_g_scaled = p.mu_g / sc.c_q;
  sc.L_g_scaled = p.L_g / sc.c_q;
  sc.L_S_scaled = spec.L_S / (sc.c_v * sc.c_q);
  sc.mu_S_scaled = spec.mu_S / (sc.c_v * sc.c_q);
  return sc;
}

SaddleProblem apply_scaling(const SaddleProblem& p, const PreconScaling& sc) {
  SaddleProblem out = p;
  out.I_V = p.I_V.scaled(sc.c_v);
  out.I_Q = p.I_Q.scaled(sc.c_q);
  out.mu_f = sc.mu_f_scaled;
  out.L_f = sc.L_f_scaled;
  out.mu_g = sc.mu_g_scaled;
  out.L_g = sc.L_g_scaled;
  // prox oracles are tied to the original metrics; drop them.
  out.prox_f = nullptr;
  out.prox_g = nullptr;
  return out;
}

AugmentResult augment_objective(const SaddleProblem& p, double beta) {
  if (!p.b_rhs) throw std::invalid_argument("augment_objective: b_rhs required");
  if (beta < 0.0) throw std::invalid_argument("augment_objective: beta >= 0");
  AugmentResult out;
  out.problem = p;
  if (beta == 0.0) return out;

  const Mat BtB = p.B.transpose() * p.B;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(BtB, p.I_V.dense(p.m));
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  out.rank_deficient = lmin <= 1e-12 * lmax;
  out.mu_gain = out.rank_deficient ? 0.0 : beta * lmin;

  const GradOracle grad_f = p.grad_f;
  const ValueOracle f_value = p.f_value;
  const Mat B = p.B;
  const Vec b = *p.b_rhs;
  out.problem.grad_f = [grad_f, B, b, beta](const Vec& u) -> Vec {
    return grad_f(u) + beta * (B.transpose() * (B * u - b));
  };
  if (f_value)
    out.problem.f_value = [f_value, B, b, beta](const Vec& u) {
      return f_value(u) + 0.5 * beta * (B * u - b).squaredNorm();
    };
  if (p.H_f) out.problem.H_f = *p.H_f + beta * BtB;
  out.problem.mu_f = p.mu_f + out.mu_gain;
  out.problem.L_f = p.L_f + beta * lmax;
  return out;
}

double duality_bregman_gap(const SaddleProblem& p, const Vec& u,
                           const Vec& p_dual) {
  if (!p.u_star || !p.p_star || !p.f_value || !p.g_value)
    throw std::invalid_argument(
        "duality_bregman_gap: saddle point and value oracles required");
  const Vec& us = *p.u_star;
  const Vec& ps = *p.p_star;
  return p.f_value(u) - p.g_value(ps) + (p.B * u).dot(ps) -
         (p.f_value(us) - p.g_value(p_dual) + (p.B * us).dot(p_dual));
}

// ------------------------------------------------------- Lyapunov values

namespace {

double breg_f(const SaddleProblem& p, const Vec& a, const Vec& b) {
  return bregman(p.f_value, p.grad_f, a, b);
}
double breg_g(const SaddleProblem& p, const Vec& a, const Vec& b) {
  return bregman(p.g_value, p.grad_g, a, b);
}

void require_star(const SaddleProblem& p, const char* who) {
  if (!p.u_star || !p.p_star)
    throw std::invalid_argument(std::string(who) + ": saddle point required");
}

}  // namespace

double lyapunov_saddle_acc(const SaddleProblem& p, const SaddleState& s) {
  require_star(p, "lyapunov_saddle_acc");
  const Vec du = s.v - *p.u_star, dq = s.q - *p.p_star;
  return breg_f(p, s.u, *p.u_star) + breg_g(p, s.p, *p.p_star) +
         0.5 * p.mu_f * p.I_V.quad(du) + 0.5 * p.mu_g * p.I_Q.quad(dq);
}

double lyapunov_saddle_acc_alphaB(const SaddleProblem& p,
                                  const SaddleState& s, double alpha) {
  require_star(p, "lyapunov_saddle_acc_alphaB");
  const Vec du = s.v - *p.u_star, dq = s.q - *p.p_star;
  return breg_f(p, s.u, *p.u_star) + breg_g(p, s.p, *p.p_star) +
         0.5 * p.mu_f * p.I_V.quad(du) + 0.5 * p.mu_g * p.I_Q.quad(dq) -
         alpha * (p.B * du).dot(dq);
}

double lyapunov_prox_saddle(const SaddleProblem& p, const Vec& u,
                            const Vec& p_dual, double alpha) {
  require_star(p, "lyapunov_prox_saddle");
  const Vec du = u - *p.u_star, dp = p_dual - *p.p_star;
  return 0.5 * p.mu_f * p.I_V.quad(du) + 0.5 * p.mu_g * p.I_Q.quad(dp) -
         2.0 * alpha * (p.B * du).dot(dp);
}

double lyapunov_tpd(const SaddleProblem& p, const GsOracles& gS, const Vec& u,
                    const Vec& p_dual, double alpha) {
  require_star(p, "lyapunov_tpd");
  const Vec du = u - *p.u_star, dp = p_dual - *p.p_star;
  const double breg_back =
      breg_f(p, *p.u_star, u) +
      bregman(gS.gS_value, gS.grad_gS, *p.p_star, p_dual);
  return 0.5 * p.I_V.quad(du) + 0.5 * p.I_Q.quad(dp) -
         alpha * (p.B * du).dot(dp) - alpha * breg_back;
}

double lyapunov_atpd(const SaddleProblem& p, const GsOracles& gS,
                     const SaddleState& s, double alpha) {
  require_star(p, "lyapunov_atpd");
  const Vec dv = s.v - *p.u_star, dq = s.q - *p.p_star;
  return breg_f(p, s.u, *p.u_star) +
         bregman(gS.gS_value, gS.grad_gS, s.p, *p.p_star) +
         0.5 * p.mu_f * p.I_V.quad(dv) + 0.5 * p.I_Q.quad(dq) -
         alpha * (p.B * dv).dot(dq);
}

// ------------------------------------------------------------ outer solver

double default_alpha(SaddleScheme scheme, const SaddleProblem& p,
                     const SchurSpectrum& spec, const TpdConstants* tpd) {
  switch (scheme) {
    case SaddleScheme::agss:
      return std::min({std::sqrt(p.mu_f * p.mu_g / (4.0 * spec.L_S)),
                       std::sqrt(p.mu_f / (2.0 * p.L_f)),
                       std::sqrt(p.mu_g / (2.0 * p.L_g))});
    case SaddleScheme::imex: {
      const double kf = std::sqrt(p.L_f / p.mu_f);
      const double kg = p.mu_g > 0.0 ? std::sqrt(p.L_g / p.mu_g) : 1.0;
      return 1.0 / std::max({kf, kg, 1.0});
    }
    case SaddleScheme::prox:
      return 0.25 * std::sqrt(p.mu_f * p.mu_g / spec.L_S);
    case SaddleScheme::tpd_gss:
      return (1.0 - 1e-6) /
             std::max({2.0 * std::sqrt(spec.L_S), 2.0 * p.L_f,
                       2.0 * tpd->L_gS});
    case SaddleScheme::atpd:
      return std::min({std::sqrt(p.mu_f / (4.0 * spec.L_S)),
                       std::sqrt(p.mu_f / (2.0 * p.L_f)),
                       std::sqrt(1.0 / (2.0 * tpd->L_gS))});
  }
  return 0.0;
}

SaddleResult solve_saddle(const SaddleProblem& p, SaddleScheme scheme,
                          const Vec& u0, const Vec& p0,
                          const SaddleOptions& opts) {
  const StepConfig& cfg = opts.config;
  const bool needs_gS =
      scheme == SaddleScheme::tpd_gss || scheme == SaddleScheme::atpd;
  const SchurSpectrum spec = schur_spectrum(p);
  GsOracles gS;
  if (needs_gS) gS = build_gS(p, spec);
  const double alpha = cfg.alpha > 0.0
                           ? cfg.alpha
                           : default_alpha(scheme, p, spec,
                                           needs_gS ? &gS.constants : nullptr);

  SaddleState st;
  st.u = u0;
  st.p = p0;
  st.v = u0;
  st.q = p0;

  const bool star = p.u_star && p.p_star;
  const bool values = p.f_value && p.g_value;
  const auto lyap = [&]() -> double {
    if (!star) return p.kkt_residual(st.u, st.p);
    switch (scheme) {
      case SaddleScheme::agss:
        return values ? lyapunov_saddle_acc_alphaB(p, st, alpha)
                      : p.kkt_residual(st.u, st.p);
      case SaddleScheme::imex:
        return values ? lyapunov_saddle_acc(p, st)
                      : p.kkt_residual(st.u, st.p);
      case SaddleScheme::prox:
        return lyapunov_prox_saddle(p, st.u, st.p, alpha);
      case SaddleScheme::tpd_gss:
        return values ? lyapunov_tpd(p, gS, st.u, st.p, alpha)
                      : p.kkt_residual(st.u, st.p);
      case SaddleScheme::atpd:
        return values ? lyapunov_atpd(p, gS, st, alpha)
                      : p.kkt_residual(st.u, st.p);
    }
    return p.kkt_residual(st.u, st.p);
  };

  SaddleResult out;
  auto record = [&](long k, const InnerSolveReport* rep) {
    TraceEntry e;
    e.k = k;
    e.lyapunov = lyap();
    if (star)
      e.err_norm = std::sqrt((st.u - *p.u_star).squaredNorm() +
                             (st.p - *p.p_star).squaredNorm());
    e.residual = p.kkt_residual(st.u, st.p);
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
    if (p.kkt_residual(st.u, st.p) <= cfg.stop_tol) break;
    InnerSolveReport rep;
    bool has_rep = false;
    switch (scheme) {
      case SaddleScheme::agss:
        st = agss_saddle_step(p, st, alpha);
        break;
      case SaddleScheme::imex: {
        auto [next, r] =
            imex_saddle_step(p, st, alpha, opts.inner, opts.inner_tol);
        st = std::move(next);
        rep = r;
        has_rep = true;
        break;
      }
      case SaddleScheme::prox: {
        auto [u_next, p_next] = prox_saddle_step(p, st.u, st.p, alpha);
        st.u = std::move(u_next);
        st.p = std::move(p_next);
        break;
      }
      case SaddleScheme::tpd_gss: {
        auto [u_next, p_next] = tpd_gss_step(p, gS, st.u, st.p, alpha);
        st.u = std::move(u_next);
        st.p = std::move(p_next);
        break;
      }
      case SaddleScheme::atpd:
        st = atpd_step(p, gS, st, alpha);
        break;
    }
    if (!st.u.allFinite() || !st.p.allFinite())
      throw std::runtime_error("solve_saddle: non-finite iterate");
    if (has_rep) out.total_inner_iters += rep.iterations;
    record(k + 1, has_rep ? &rep : nullptr);
    const double cur = out.trace.entries.back().lyapunov;
    rising = cur > last ? rising + 1 : 0;
    last = cur;
    if (rising >= 10)
      throw std::runtime_error(
          "solve_saddle: Lyapunov value increased for 10 consecutive steps");
  }
  out.u = st.u;
  out.p = st.p;
  return out;
}

MonotoneProblem to_monotone(const SaddleProblem& p) {
  if (!p.I_V.is_scaled_identity() || !p.I_Q.is_scaled_identity() ||
      p.I_V.scale() != 1.0 || p.I_Q.scale() != 1.0)
    throw std::invalid_argument("to_monotone: identity metrics required");
  MonotoneProblem out;
  const Eigen::Index m = p.m, n = p.n;
  out.dim = m + n;
  out.N = Mat::Zero(m + n, m + n);
  out.N.topRightCorner(m, n) = p.B.transpose();
  out.N.bottomLeftCorner(n, m) = -p.B;
  const GradOracle gf = p.grad_f, gg = p.grad_g;
  out.grad_F = [gf, gg, m, n](const Vec& x) {
    Vec r(m + n);
    r << gf(x.head(m)), gg(x.tail(n));
    return r;
  };
  if (p.f_value && p.g_value) {
    const ValueOracle fv = p.f_value, gv = p.g_value;
    out.F_value = [fv, gv, m, n](const Vec& x) {
      return fv(x.head(m)) + gv(x.tail(n));
    };
  }
  out.mu = std::min(p.mu_f, p.mu_g);
  out.L_F = std::max(p.L_f, p.L_g);
  if (p.u_star && p.p_star) {
    Vec xs(m + n);
    xs << *p.u_star, *p.p_star;
    out.x_star = xs;
  }
  return out;
}

}  // namespace gss

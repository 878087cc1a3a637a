#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gss/harness.hpp"
#include "gss/saddle.hpp"

#include <random>

using namespace gss;

namespace {

Vec randn(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = g(rng);
  return v;
}

ProblemSpec quad_saddle_spec(std::uint64_t seed) {
  ProblemSpec spec;
  spec.kind = ProblemKind::bilinear_saddle;
  spec.m = 40;
  spec.n = 20;
  spec.mu = 1.0;
  spec.kappa_F = 50.0;
  spec.kappa_g = 10.0;
  spec.kappa_S = 9.0;
  spec.seed = seed;
  return spec;
}

SaddleState state_from(const SaddleProblem& p, std::uint64_t seed) {
  SaddleState s;
  s.u = randn(p.m, seed);
  s.p = randn(p.n, seed + 1);
  s.v = s.u;
  s.q = s.p;
  return s;
}

}  // namespace

TEST_CASE("Metric variants agree with dense linear algebra") {
  const Mat M = seeded_spd(6, 0.5, 4.0, 91);
  Metric dense{Mat(M)};
  const Vec v = randn(6, 92);
  CHECK((dense.apply(v) - M * v).norm() <= 1e-13);
  CHECK((dense.solve(M * v) - v).norm() <= 1e-12);
  CHECK(dense.quad(v) == doctest::Approx(v.dot(M * v)).epsilon(1e-13));

  Vec d(3);
  d << 1, 2, 4;
  Metric diag{Vec(d)};
  Vec w(3);
  w << 1, 1, 1;
  CHECK((diag.apply(w) - d).norm() <= 1e-15);
  CHECK(diag.quad(w) == doctest::Approx(7.0));

  Metric id;
  CHECK(id.is_scaled_identity());
  Metric id3 = id.scaled(3.0);
  CHECK(id3.apply(w)(0) == doctest::Approx(3.0));
  CHECK(id3.solve(w)(0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("schur_spectrum hand cases") {
  {
    SaddleProblem p;
    p.m = 2;
    p.n = 1;
    p.B = Mat::Zero(1, 2);
    p.B(0, 0) = 1.0;
    p.mu_f = p.L_f = 1.0;
    p.mu_g = p.L_g = 1.0;
    const SchurSpectrum s = schur_spectrum(p);
    CHECK(s.L_S == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.mu_S == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.B_sym_norm_Imu == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    SaddleProblem p;
    p.m = 2;
    p.n = 2;
    p.B = Mat::Identity(2, 2);
    Vec d(2);
    d << 1, 4;
    p.I_V = Metric{Vec(d)};
    p.mu_f = p.L_f = 1.0;
    p.mu_g = p.L_g = 1.0;
    const SchurSpectrum s = schur_spectrum(p);
    CHECK(s.L_S == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.mu_S == doctest::Approx(0.25).epsilon(1e-10));
  }
  // random seeded (n=20, m=40) vs dense generalized eigensolver oracle
  const SaddleProblem p = generate_saddle(quad_saddle_spec(9));
  const SchurSpectrum s = schur_spectrum(p);
  Mat S(p.n, p.n);
  const Mat Bt = p.B.transpose();
  for (Eigen::Index j = 0; j < p.n; ++j) S.col(j) = p.B * p.I_V.solve(Bt.col(j));
  S = Mat(0.5 * (S + S.transpose()));
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(S, p.I_Q.dense(p.n));
  CHECK(s.mu_S == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-8));
  CHECK(s.L_S == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-8));
  // generator places the S spectrum at [1, kappa_S] exactly
  CHECK(s.mu_S == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.L_S == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("agss_saddle_step: fixed point and B = 0 decoupling") {
  const SaddleProblem p = generate_saddle(quad_saddle_spec(10));
  SaddleState eq;
  eq.u = eq.v = *p.u_star;
  eq.p = eq.q = *p.p_star;
  const double alpha = default_alpha(SaddleScheme::agss, p, schur_spectrum(p),
                                     nullptr);
  const SaddleState st = agss_saddle_step(p, eq, alpha);
  CHECK((st.u - *p.u_star).norm() <= 1e-11);
  CHECK((st.p - *p.p_star).norm() <= 1e-11);

  // B = 0 decouples into two explicit accelerated steps with N = 0
  SaddleProblem dec = p;
  dec.B = Mat::Zero(p.n, p.m);
  dec.u_star.reset();
  dec.p_star.reset();
  SaddleState s0 = state_from(p, 15);
  const double a0 = 0.2;
  const SaddleState s1 = agss_saddle_step(dec, s0, a0);

  MonotoneProblem mf;
  mf.dim = p.m;
  mf.N = Mat::Zero(p.m, p.m);
  mf.grad_F = dec.grad_f;
  mf.F_value = dec.f_value;
  mf.mu = dec.mu_f;
  mf.L_F = dec.L_f;
  const SkewSplit zf = split_skew(mf.N);
  AccState af{s0.u, s0.v, Vec()};
  const AccState rf = agss_explicit_step(mf, zf, af, a0);
  CHECK((s1.u - rf.x).norm() <= 1e-12);
  CHECK((s1.v - rf.y).norm() <= 1e-12);

  MonotoneProblem mg;
  mg.dim = p.n;
  mg.N = Mat::Zero(p.n, p.n);
  mg.grad_F = dec.grad_g;
  mg.F_value = dec.g_value;
  mg.mu = dec.mu_g;
  mg.L_F = dec.L_g;
  const SkewSplit zg = split_skew(mg.N);
  AccState ag{s0.p, s0.q, Vec()};
  const AccState rg = agss_explicit_step(mg, zg, ag, a0);
  CHECK((s1.p - rg.x).norm() <= 1e-12);
  CHECK((s1.q - rg.y).norm() <= 1e-12);
}

TEST_CASE("agss_saddle per-step E^{aB} ratio at the theorem step") {
  const SaddleProblem p = generate_saddle(quad_saddle_spec(11));
  const SchurSpectrum sp = schur_spectrum(p);
  const double alpha = default_alpha(SaddleScheme::agss, p, sp, nullptr);
  SaddleState cur = state_from(p, 16);
  for (int k = 0; k < 400; ++k) {
    const SaddleState next = agss_saddle_step(p, cur, alpha);
    const double en = lyapunov_saddle_acc_alphaB(p, next, alpha);
    const double e = lyapunov_saddle_acc_alphaB(p, cur, alpha);
    CHECK(en <= e / (1.0 + 0.5 * alpha) + 1e-12);
    cur = next;
  }
}

TEST_CASE("imex_saddle_step: fixed point, B = 0 reduction, theorem ratio") {
  const SaddleProblem p = generate_saddle(quad_saddle_spec(12));
  const SchurSpectrum sp = schur_spectrum(p);
  const double alpha = default_alpha(SaddleScheme::imex, p, sp, nullptr);
  SaddleState eq;
  eq.u = eq.v = *p.u_star;
  eq.p = eq.q = *p.p_star;
  const auto [steq, repeq] = imex_saddle_step(p, eq, alpha);
  CHECK((steq.u - *p.u_star).norm() <= 1e-10);
  CHECK((steq.p - *p.p_star).norm() <= 1e-10);

  // B = 0: decoupled IMEX accelerated steps
  SaddleProblem dec = p;
  dec.B = Mat::Zero(p.n, p.m);
  SaddleState s0 = state_from(p, 17);
  const auto [s1, rep1] = imex_saddle_step(dec, s0, alpha);
  MonotoneProblem mf;
  mf.dim = p.m;
  mf.N = Mat::Zero(p.m, p.m);
  mf.grad_F = dec.grad_f;
  mf.F_value = dec.f_value;
  mf.mu = dec.mu_f;
  mf.L_F = dec.L_f;
  AccState af{s0.u, s0.v, Vec()};
  const auto [rf, repf] = agss_imex_step(mf, split_skew(mf.N), af, alpha);
  CHECK((s1.u - rf.x).norm() <= 1e-11);
  CHECK((s1.v - rf.y).norm() <= 1e-11);

  // per-step E ratio <= 1/(1 + alpha) for the three inner methods
  for (InnerMethod inner :
       {InnerMethod::direct, InnerMethod::cg_normal, InnerMethod::aor_inner}) {
    SaddleState cur = state_from(p, 18);
    for (int k = 0; k < 100; ++k) {
      const auto [next, rep] = imex_saddle_step(p, cur, alpha, inner, 1e-13);
      CHECK(rep.converged);
      const double en = lyapunov_saddle_acc(p, next);
      const double e = lyapunov_saddle_acc(p, cur);
      CHECK(en <= e / (1.0 + alpha) + 1e-12);
      cur = next;
    }
  }
}

TEST_CASE("prox oracles and prox_saddle_step") {
  // quadratic prox closed form: f = 1/2||u||^2 -> prox_{g f}(v) = v/(1+g)
  const ProxOracle prox = make_quadratic_prox(1.0, Vec::Zero(3));
  const Vec v = randn(3, 19);
  CHECK((prox(v, 0.5) - v / 1.5).norm() <= 1e-14);

  const ProxOracle shrink = make_l2_penalty_prox(1.0);
  Vec big(2);
  big << 3, 4;  // norm 5 -> shrink by 1 at gamma = 1
  const Vec out = shrink(big, 1.0);
  CHECK(out.norm() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK((shrink(0.1 * big / 5.0, 1.0)).norm() <= 1e-15);  // inside: to zero

  // equilibrium fixed point + theorem ratio + error envelope
  ProblemSpec spec = quad_saddle_spec(13);
  spec.kappa_F = 1.0;  // scalar quadratics so the built-in prox applies
  spec.kappa_g = 1.0;
  const SaddleProblem p = generate_saddle(spec);
  const SchurSpectrum sp = schur_spectrum(p);
  const double alpha = 0.25 * std::sqrt(p.mu_f * p.mu_g / sp.L_S);
  const auto [ue, pe] = prox_saddle_step(p, *p.u_star, *p.p_star, alpha);
  CHECK((ue - *p.u_star).norm() <= 1e-12);
  CHECK((pe - *p.p_star).norm() <= 1e-12);

  Vec u = randn(p.m, 20), q = randn(p.n, 21);
  const double E0 =
      (u - *p.u_star).squaredNorm() + (q - *p.p_star).squaredNorm();
  for (int k = 1; k <= 400; ++k) {
    const double e = lyapunov_prox_saddle(p, u, q, alpha);
    const auto [un, qn] = prox_saddle_step(p, u, q, alpha);
    u = un;
    q = qn;
    const double en = lyapunov_prox_saddle(p, u, q, alpha);
    CHECK(en <= e / (1.0 + alpha) + 1e-12);
    const double err =
        (u - *p.u_star).squaredNorm() + (q - *p.p_star).squaredNorm();
    CHECK(err <= 3.0 * E0 * std::pow(1.0 + alpha, -double(k)) + 1e-12);
  }
}

TEST_CASE("build_gS constants") {
  // g linear: grad gS = b + S p, mu_gS = mu_S
  ProblemSpec spec;
  spec.kind = ProblemKind::constrained_qp;
  spec.m = 30;
  spec.n = 12;
  spec.mu = 1.0;
  spec.kappa_F = 1.5;
  spec.kappa_S = 4.0;
  spec.seed = 23;
  const SaddleProblem p = generate_saddle(spec);
  const SchurSpectrum sp = schur_spectrum(p);
  const GsOracles gS = build_gS(p, sp);
  const Vec q = randn(p.n, 24);
  CHECK((gS.grad_gS(q) - (*p.b_rhs + p.apply_S(q))).norm() <= 1e-12);
  CHECK(gS.constants.mu_gS == doctest::Approx(sp.mu_S).epsilon(1e-10));

  // quadratic g: exact mu_g_plus >= lower bound, verified densely
  // (the bound presumes L_f < 2)
  ProblemSpec qspec = quad_saddle_spec(25);
  qspec.mu = 0.03;  // L_f = 1.5
  const SaddleProblem pq = generate_saddle(qspec);
  const SchurSpectrum spq = schur_spectrum(pq);
  const GsOracles gq = build_gS(pq, spq);
  const double lower = 2.0 * pq.mu_g + (2.0 - pq.L_f) * spq.mu_S;
  CHECK(gq.constants.mu_g_plus >= lower - 1e-8);
  Mat S(pq.n, pq.n);
  const Mat Bt = pq.B.transpose();
  for (Eigen::Index j = 0; j < pq.n; ++j)
    S.col(j) = pq.B * pq.I_V.solve(Bt.col(j));
  S = Mat(0.5 * (S + S.transpose()));
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(
      Mat(2.0 * *pq.H_g + (2.0 - pq.L_f) * S), pq.I_Q.dense(pq.n));
  CHECK(gq.constants.mu_g_plus ==
        doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-8));
}

TEST_CASE("tpd_gss_step: fixed point, KKT convergence, mu_g = 0 contraction") {
  ProblemSpec spec;
  spec.kind = ProblemKind::constrained_qp;
  spec.m = 30;
  spec.n = 12;
  spec.mu = 1.5 / 100.0;
  spec.kappa_F = 100.0;  // L_f = 1.5 < 2
  spec.kappa_S = 4.0;
  spec.seed = 26;
  const SaddleProblem p = generate_saddle(spec);
  const SchurSpectrum sp = schur_spectrum(p);
  const GsOracles gS = build_gS(p, sp);
  const double alpha = default_alpha(SaddleScheme::tpd_gss, p, sp,
                                     &gS.constants);
  {
    const auto [u1, p1] = tpd_gss_step(p, gS, *p.u_star, *p.p_star, alpha);
    CHECK((u1 - *p.u_star).norm() <= 1e-11);
    CHECK((p1 - *p.p_star).norm() <= 1e-11);
  }
  const double mu = std::min(p.mu_f, gS.constants.mu_g_plus);
  Vec u = randn(p.m, 27), q = randn(p.n, 28);
  for (int k = 0; k < 4000; ++k) {
    const double e = lyapunov_tpd(p, gS, u, q, alpha);
    const auto [un, qn] = tpd_gss_step(p, gS, u, q, alpha);
    u = un;
    q = qn;
    const double en = lyapunov_tpd(p, gS, u, q, alpha);
    CHECK(en <= e / (1.0 + 0.5 * mu * alpha) + 1e-12);
    if (en <= 1e-24) break;
  }
  CHECK(p.kkt_residual(u, q) <= 1e-6);

  // L_f >= 2 without rescaling is rejected
  SaddleProblem bad = p;
  bad.L_f = 2.5;
  CHECK_THROWS_AS(tpd_gss_step(bad, gS, u, q, alpha), std::invalid_argument);
}

TEST_CASE("atpd_step: fixed point and theorem ratio with I_Q = S") {
  ProblemSpec spec;
  spec.kind = ProblemKind::constrained_qp;
  spec.m = 30;
  spec.n = 12;
  spec.mu = 0.5 / 100.0;
  spec.kappa_F = 100.0;  // L_f = 0.5 -> lambda_max(S) = 1 <= 1/(2 L_f)
  spec.kappa_S = 4.0;
  spec.seed = 29;
  SaddleProblem p = generate_saddle(spec);
  Mat S(p.n, p.n);
  const Mat Bt = p.B.transpose();
  for (Eigen::Index j = 0; j < p.n; ++j) S.col(j) = p.B * p.I_V.solve(Bt.col(j));
  p.I_Q = Metric{Mat(0.5 * (S + S.transpose()))};
  const SchurSpectrum sp = schur_spectrum(p);
  CHECK(sp.L_S == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sp.mu_S == doctest::Approx(1.0).epsilon(1e-8));
  const GsOracles gS = build_gS(p, sp);
  const double alpha = default_alpha(SaddleScheme::atpd, p, sp, &gS.constants);

  SaddleState eq;
  eq.u = eq.v = *p.u_star;
  eq.p = eq.q = *p.p_star;
  const SaddleState st = atpd_step(p, gS, eq, alpha);
  CHECK((st.u - *p.u_star).norm() <= 1e-10);
  CHECK((st.p - *p.p_star).norm() <= 1e-10);

  SaddleState cur = state_from(p, 30);
  for (int k = 0; k < 2000; ++k) {
    const SaddleState next = atpd_step(p, gS, cur, alpha);
    const double en = lyapunov_atpd(p, gS, next, alpha);
    const double e = lyapunov_atpd(p, gS, cur, alpha);
    CHECK(en <= e / (1.0 + 0.25 * alpha) + 1e-12);
    cur = next;
    if (en <= 1e-24) break;
  }
}

TEST_CASE("choose_scaling formulas and post-condition") {
  // L_f = 3/2, kappa = 2 -> c_v = 4, L_f scaled = 3/8
  {
    SaddleProblem p;
    p.m = 2;
    p.n = 2;
    p.B = Mat::Identity(2, 2);
    Vec d(2);
    d << 1, 2;
    p.I_V = Metric{Vec(d)};  // S = diag(1, 1/2): kappa = 2
    p.mu_f = 0.5;
    p.L_f = 1.5;
    p.mu_g = 0.0;
    p.L_g = 0.0;
    const SchurSpectrum sp = schur_spectrum(p);
    CHECK(sp.kappa_S == doctest::Approx(2.0).epsilon(1e-10));
    const PreconScaling sc = choose_scaling(p, sp);
    CHECK(sc.c_v == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(sc.L_f_scaled == doctest::Approx(3.0 / 8.0).epsilon(1e-10));
  }
  // post-scaling the acceleration condition holds; condition numbers
  // are scale invariant
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ProblemSpec spec;
    spec.kind = ProblemKind::constrained_qp;
    spec.m = 24;
    spec.n = 10;
    spec.mu = 1.0;
    spec.kappa_F = 30.0;
    spec.kappa_S = 6.0;
    spec.seed = seed;
    const SaddleProblem p = generate_saddle(spec);
    const SchurSpectrum sp = schur_spectrum(p);
    const PreconScaling sc = choose_scaling(p, sp);
    // 2/3 - mu_g <= mu_S <= L_S <= 1/(2 L_f) in the scaled metrics
    CHECK(sc.mu_S_scaled >= 2.0 / 3.0 - sc.mu_g_scaled - 1e-10);
    CHECK(sc.L_S_scaled <= 1.0 / (2.0 * sc.L_f_scaled) + 1e-10);
    CHECK(sc.L_f_scaled / sc.mu_f_scaled ==
          doctest::Approx(p.L_f / p.mu_f).epsilon(1e-12));
    CHECK(sc.L_S_scaled / sc.mu_S_scaled ==
          doctest::Approx(sp.kappa_S).epsilon(1e-12));
    // apply_scaling produces a conforming problem
    const SaddleProblem scaled = apply_scaling(p, sc);
    const SchurSpectrum sp2 = schur_spectrum(scaled);
    CHECK(sp2.L_S == doctest::Approx(sc.L_S_scaled).epsilon(1e-8));
    CHECK(scaled.L_f == doctest::Approx(sc.L_f_scaled).epsilon(1e-12));
  }
}

TEST_CASE("augment_objective") {
  ProblemSpec spec;
  spec.kind = ProblemKind::constrained_qp;
  spec.m = 20;
  spec.n = 20;  // full column rank so the augmentation gains strong convexity
  spec.mu = 1.0;
  spec.kappa_F = 5.0;
  spec.kappa_S = 3.0;
  spec.seed = 31;
  const SaddleProblem p = generate_saddle(spec);

  const AugmentResult same = augment_objective(p, 0.0);
  const Vec u = randn(p.m, 32);
  CHECK((same.problem.grad_f(u) - p.grad_f(u)).norm() <= 1e-14);
  CHECK(same.mu_gain == 0.0);

  const double beta = 2.0;
  const AugmentResult aug = augment_objective(p, beta);
  CHECK_FALSE(aug.rank_deficient);
  CHECK(aug.mu_gain > 0.0);
  const Vec expect =
      p.grad_f(u) + beta * p.B.transpose() * (p.B * u - *p.b_rhs);
  CHECK((aug.problem.grad_f(u) - expect).norm() <= 1e-12);
  // quadratic f: constants match dense eigenvalues of H_f + beta B'B
  Eigen::SelfAdjointEigenSolver<Mat> es(
      Mat(*p.H_f + beta * p.B.transpose() * p.B));
  CHECK(aug.problem.mu_f <= es.eigenvalues().minCoeff() + 1e-8);
  CHECK(aug.problem.L_f >= es.eigenvalues().maxCoeff() - 1e-8);
  // saddle point unchanged
  CHECK(aug.problem.kkt_residual(*p.u_star, *p.p_star) <= 1e-9);

  // m > n: flagged, no guaranteed gain on the null space
  ProblemSpec wide = spec;
  wide.m = 30;
  wide.n = 10;
  const SaddleProblem pw = generate_saddle(wide);
  const AugmentResult augw = augment_objective(pw, beta);
  CHECK(augw.rank_deficient);
}

TEST_CASE("duality_bregman_gap") {
  const SaddleProblem p = generate_saddle(quad_saddle_spec(33));
  CHECK(duality_bregman_gap(p, *p.u_star, *p.p_star) ==
        doctest::Approx(0.0).epsilon(1e-10));
  std::mt19937_64 rng(34);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 1000; ++trial) {
    Vec u(p.m), q(p.n);
    for (Eigen::Index i = 0; i < p.m; ++i) u[i] = g(rng);
    for (Eigen::Index i = 0; i < p.n; ++i) q[i] = g(rng);
    const double gap = duality_bregman_gap(p, u, q);
    CHECK(gap >= -1e-10);
    const double sum = bregman(p.f_value, p.grad_f, u, *p.u_star) +
                       bregman(p.g_value, p.grad_g, q, *p.p_star);
    CHECK(gap == doctest::Approx(sum).epsilon(1e-10));
  }
}

TEST_CASE("positivity lemma and LB saddle identity") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    ProblemSpec spec;
    spec.kind = ProblemKind::bilinear_saddle;
    spec.m = 10;
    spec.n = 5;
    spec.mu = 0.5 + 0.01 * double(seed);
    spec.kappa_F = 4.0;
    spec.kappa_g = 3.0;
    spec.kappa_S = 2.0 + 0.05 * double(seed);
    spec.seed = seed;
    const SaddleProblem p = generate_saddle(spec);
    const SchurSpectrum sp = schur_spectrum(p);
    const double alpha = std::sqrt(p.mu_f * p.mu_g / (4.0 * sp.L_S));
    // [mu_f I_V, alpha B'; alpha B, mu_g I_Q] - style positivity:
    // I_mu - alpha Bsym >= 0 on the stacked space with
    // Bsym = [0 B'; B 0] (so the cross terms are -2 alpha (Bv, q)).
    Mat M = Mat::Zero(p.m + p.n, p.m + p.n);
    M.topLeftCorner(p.m, p.m) = p.mu_f * p.I_V.dense(p.m);
    M.bottomRightCorner(p.n, p.n) = p.mu_g * p.I_Q.dense(p.n);
    M.topRightCorner(p.m, p.n) = -alpha * p.B.transpose();
    M.bottomLeftCorner(p.n, p.m) = -alpha * p.B;
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);

    // Lemma "LB saddle": ||Bsym||_{I_mu} = sqrt(L_S/(mu_f mu_g)), checked
    // against a dense generalized eigensolve.
    Mat Bs = Mat::Zero(p.m + p.n, p.m + p.n);
    Bs.topRightCorner(p.m, p.n) = p.B.transpose();
    Bs.bottomLeftCorner(p.n, p.m) = p.B;
    Mat Imu = Mat::Zero(p.m + p.n, p.m + p.n);
    Imu.topLeftCorner(p.m, p.m) = p.mu_f * p.I_V.dense(p.m);
    Imu.bottomRightCorner(p.n, p.n) = p.mu_g * p.I_Q.dense(p.n);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(Bs, Imu);
    const double dense_norm = ges.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(sp.B_sym_norm_Imu == doctest::Approx(dense_norm).epsilon(1e-8));
  }
}

TEST_CASE("strong Lyapunov inequality for the saddle flow") {
  // -grad E . G >= E + 1/2 ||y - x||^2_{I_mu}
  const SaddleProblem p = generate_saddle(quad_saddle_spec(35));
  std::mt19937_64 rng(36);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 1000; ++trial) {
    Vec u(p.m), q(p.n), v(p.m), w(p.n);
    for (Eigen::Index i = 0; i < p.m; ++i) {
      u[i] = g(rng);
      v[i] = g(rng);
    }
    for (Eigen::Index i = 0; i < p.n; ++i) {
      q[i] = g(rng);
      w[i] = g(rng);
    }
    // E = D_f(u,u*) + D_g(q,q*) + 1/2||(v,w) - x*||^2_{I_mu}
    const Vec dEu = p.grad_f(u) - p.grad_f(*p.u_star);
    const Vec dEq = p.grad_g(q) - p.grad_g(*p.p_star);
    const Vec dEv = p.mu_f * p.I_V.apply(v - *p.u_star);
    const Vec dEw = p.mu_g * p.I_Q.apply(w - *p.p_star);
    // G: x' = y - x; y' = x - y - I_mu^{-1}(grad F(x) + N y)
    const Vec Gu = v - u;
    const Vec Gq = w - q;
    const Vec Gv =
        u - v -
        p.I_V.solve(p.grad_f(u) + p.B.transpose() * w) / p.mu_f;
    const Vec Gw = q - w - p.I_Q.solve(p.grad_g(q) - p.B * v) / p.mu_g;
    const double lhs =
        -(dEu.dot(Gu) + dEq.dot(Gq) + dEv.dot(Gv) + dEw.dot(Gw));
    const double E = bregman(p.f_value, p.grad_f, u, *p.u_star) +
                     bregman(p.g_value, p.grad_g, q, *p.p_star) +
                     0.5 * (p.mu_f * p.I_V.quad(v - *p.u_star) +
                            p.mu_g * p.I_Q.quad(w - *p.p_star));
    const double pen = 0.5 * (p.mu_f * p.I_V.quad(v - u) +
                              p.mu_g * p.I_Q.quad(w - q));
    CHECK(lhs >= E + pen - 1e-10 * std::max(1.0, std::abs(E + pen)));
  }
}

TEST_CASE("solve_saddle: all schemes share the fixed point") {
  ProblemSpec spec = quad_saddle_spec(37);
  spec.kappa_F = 1.0;  // prox-friendly so all five schemes can run
  spec.kappa_g = 1.0;
  const SaddleProblem p = generate_saddle(spec);
  SaddleOptions opts;
  opts.config.stop_tol = 1e-9;
  opts.config.max_iter = 50000;
  const Vec u0 = randn(p.m, 38), p0 = randn(p.n, 39);
  for (SaddleScheme scheme :
       {SaddleScheme::agss, SaddleScheme::imex, SaddleScheme::prox}) {
    const SaddleResult r = solve_saddle(p, scheme, u0, p0, opts);
    CHECK(std::sqrt((r.u - *p.u_star).squaredNorm() +
                    (r.p - *p.p_star).squaredNorm()) <= 1e-7);
  }
  // equilibrium start -> 0 iterations
  const SaddleResult eq =
      solve_saddle(p, SaddleScheme::imex, *p.u_star, *p.p_star, opts);
  CHECK(eq.trace.iterations() == 0);
}

TEST_CASE("solve_saddle: ATPD fewer iterations than GSS-TPD at kappa 1e4") {
  ProblemSpec spec;
  spec.kind = ProblemKind::constrained_qp;
  // Few constraints relative to the primal dimension keeps the weak
  // curvature direction of f inside the constraint nullspace, so the
  // non-accelerated method really pays the O(kappa) price.
  spec.m = 100;
  spec.n = 3;
  spec.mu = 0.5 / 1e4;
  spec.kappa_F = 1e4;  // L_f = 0.5
  spec.kappa_S = 4.0;
  spec.seed = 40;
  SaddleProblem p = generate_saddle(spec);
  Mat S(p.n, p.n);
  const Mat Bt = p.B.transpose();
  for (Eigen::Index j = 0; j < p.n; ++j) S.col(j) = p.B * p.I_V.solve(Bt.col(j));
  p.I_Q = Metric{Mat(0.5 * (S + S.transpose()))};
  SaddleOptions opts;
  opts.config.stop_tol = 1e-7;
  opts.config.max_iter = 3000000;
  const Vec u0 = randn(p.m, 41), p0 = randn(p.n, 42);
  const long it_atpd =
      solve_saddle(p, SaddleScheme::atpd, u0, p0, opts).trace.iterations();
  const long it_tpd =
      solve_saddle(p, SaddleScheme::tpd_gss, u0, p0, opts).trace.iterations();
  CHECK(it_atpd < it_tpd);
}

TEST_CASE("to_monotone stacks the saddle system") {
  const SaddleProblem p = generate_saddle(quad_saddle_spec(43));
  const MonotoneProblem m = to_monotone(p);
  CHECK(m.dim == p.m + p.n);
  Vec x(m.dim);
  x << randn(p.m, 44), randn(p.n, 45);
  const Vec Ax = m.apply_A(x);
  const Vec ru = p.kkt_residual_u(x.head(p.m), x.tail(p.n));
  const Vec rp = p.kkt_residual_p(x.head(p.m), x.tail(p.n));
  CHECK((Ax.head(p.m) - ru).norm() <= 1e-12);
  CHECK((Ax.tail(p.n) - rp).norm() <= 1e-12);
  CHECK(m.residual_norm(x.head(p.m).size() ? x : x) > 0.0);
  Vec xs(m.dim);
  xs << *p.u_star, *p.p_star;
  CHECK(m.residual_norm(xs) <= 1e-9);
}

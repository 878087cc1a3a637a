#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gss/core.hpp"
#include "gss/harness.hpp"

#include <random>

using namespace gss;

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat M(2, 2);
  M << a, b, c, d;
  return M;
}

MonotoneProblem quad_problem(const Mat& H, const Vec& b, const Mat& N) {
  MonotoneProblem p;
  p.dim = b.size();
  p.N = N;
  p.grad_F = [H, b](const Vec& x) { return H * x - b; };
  p.F_value = [H, b](const Vec& x) {
    return 0.5 * x.dot(H * x) - b.dot(x);
  };
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  p.mu = es.eigenvalues().minCoeff();
  p.L_F = es.eigenvalues().maxCoeff();
  p.x_star = Eigen::PartialPivLU<Mat>(H + N).solve(b);
  return p;
}

}  // namespace

TEST_CASE("split_skew 2x2 rotation") {
  const Mat N = mat2(0, 1, -1, 0);
  const SkewSplit s = split_skew(N);
  CHECK(s.B == mat2(0, 0, 1, 0));
  CHECK(s.Bsym == mat2(0, 1, 1, 0));
  CHECK(s.L_Bsym == doctest::Approx(1.0).epsilon(1e-12));
  // roundtrip identities N = Bsym - 2B = 2B' - Bsym
  CHECK((s.Bsym - 2 * s.B - N).cwiseAbs().maxCoeff() == 0.0);
  CHECK((2 * s.B.transpose() - s.Bsym - N).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("split_skew zero 3x3") {
  const SkewSplit s = split_skew(Mat::Zero(3, 3));
  CHECK(s.B.isZero(0.0));
  CHECK(s.Bsym.isZero(0.0));
  CHECK(s.L_Bsym == 0.0);
}

TEST_CASE("split_skew 3x3 vs dense eigensolver oracle") {
  Mat N(3, 3);
  N << 0, 1, 2, -1, 0, 3, -2, -3, 0;
  const SkewSplit s = split_skew(N);
  Mat B_expect(3, 3);
  B_expect << 0, 0, 0, 1, 0, 0, 2, 3, 0;
  CHECK((s.B - B_expect).cwiseAbs().maxCoeff() == 0.0);
  Mat Bsym_expect(3, 3);
  Bsym_expect << 0, 1, 2, 1, 0, 3, 2, 3, 0;
  CHECK((s.Bsym - Bsym_expect).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(s.Bsym);
  CHECK(s.L_Bsym ==
        doctest::Approx(es.eigenvalues().cwiseAbs().maxCoeff())
            .epsilon(1e-10));
}

TEST_CASE("split_skew rejects non-skew input") {
  CHECK_THROWS_AS(split_skew(mat2(0, 1, 1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(split_skew(Mat::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("spectral_norm_sym hand cases") {
  CHECK(spectral_norm_sym(mat2(0, 1, 1, 0)) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(spectral_norm_sym(mat2(2, 0, 0, -3)) ==
        doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("spectral_norm_sym seeded 50x50 vs dense oracle") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  Mat M(50, 50);
  for (int j = 0; j < 50; ++j)
    for (int i = 0; i < 50; ++i) M(i, j) = g(rng);
  M = Mat(0.5 * (M + M.transpose()));
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  const double oracle = es.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(spectral_norm_sym(M) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("bregman hand cases") {
  const ValueOracle F = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  const GradOracle dF = [](const Vec& x) { return x; };
  Vec x(2), y(2);
  x << 1, 0;
  y << 0, 0;
  CHECK(bregman(F, dF, x, y) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bregman(F, dF, y, y) == doctest::Approx(0.0).epsilon(1e-14));

  const Mat H = mat2(1, 0, 0, 4);
  const ValueOracle Fh = [H](const Vec& v) { return 0.5 * v.dot(H * v); };
  const GradOracle dFh = [H](const Vec& v) { return H * v; };
  Vec one(2);
  one << 1, 1;
  CHECK(bregman(Fh, dFh, one, y) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("lyapunov_Eq") {
  Vec xs = Vec::Zero(2);
  CHECK(lyapunov_Eq(xs, xs) == 0.0);
  Vec a(2);
  a << 1, 1;
  CHECK(lyapunov_Eq(a, xs) == doctest::Approx(1.0).epsilon(1e-14));
  Vec b(2);
  b << 3, 4;
  CHECK(lyapunov_Eq(b, xs) == doctest::Approx(12.5).epsilon(1e-14));
}

TEST_CASE("lyapunov_alphaB hand cases") {
  const Mat Bsym = mat2(0, 1, 1, 0);
  const Vec xs = Vec::Zero(2);
  CHECK(lyapunov_alphaB(xs, xs, 0.5, Bsym) == 0.0);
  Vec e1(2);
  e1 << 1, 0;
  CHECK(lyapunov_alphaB(e1, xs, 0.5, Bsym) ==
        doctest::Approx(0.5).epsilon(1e-14));
  Vec one(2);
  one << 1, 1;
  CHECK(lyapunov_alphaB(one, xs, 0.5, Bsym) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("lyapunov_alphaBD hand case and compositional oracle") {
  const Mat H = Mat::Identity(2, 2);
  const Vec b = Vec::Zero(2);
  MonotoneProblem p = quad_problem(H, b, Mat::Zero(2, 2));
  const Mat Bsym = Mat::Zero(2, 2);
  Vec e1(2);
  e1 << 1, 0;
  CHECK(lyapunov_alphaBD(*p.x_star, *p.x_star, 0.2, Bsym, p) == 0.0);
  CHECK(lyapunov_alphaBD(e1, *p.x_star, 0.2, Bsym, p) ==
        doctest::Approx(0.4).epsilon(1e-14));

  // random instance vs recomputation from bregman + lyapunov_alphaB
  ProblemSpec spec;
  spec.kind = ProblemKind::quadratic_plus_skew;
  spec.dim = 12;
  spec.kappa_F = 10;
  spec.kappa_Bsym = 3;
  spec.seed = 4;
  const MonotoneProblem q = generate_monotone(spec);
  const SkewSplit s = split_skew(q.N);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Vec x(q.dim);
  for (Eigen::Index i = 0; i < q.dim; ++i) x[i] = g(rng);
  const double alpha = 0.1;
  const double direct = lyapunov_alphaBD(x, *q.x_star, alpha, s.Bsym, q);
  const double recomposed = lyapunov_alphaB(x, *q.x_star, alpha, s.Bsym) -
                            alpha * bregman(q, *q.x_star, x);
  CHECK(direct == doctest::Approx(recomposed).epsilon(1e-12));
}

TEST_CASE("lyapunov_acc hand case and compositional oracle") {
  const Mat H = Mat::Identity(2, 2);
  MonotoneProblem p = quad_problem(H, Vec::Zero(2), Mat::Zero(2, 2));
  Vec x(2), y(2);
  x << 1, 0;
  y << 0, 1;
  CHECK(lyapunov_acc(*p.x_star, *p.x_star, *p.x_star, p) == 0.0);
  CHECK(lyapunov_acc(x, y, *p.x_star, p) ==
        doctest::Approx(1.0).epsilon(1e-14));
  const double recomposed =
      bregman(p, x, *p.x_star) + 0.5 * p.mu * (y - *p.x_star).squaredNorm();
  CHECK(lyapunov_acc(x, y, *p.x_star, p) ==
        doctest::Approx(recomposed).epsilon(1e-14));
}

TEST_CASE("lyapunov_acc_alphaB reduces to lyapunov_acc at Bsym = 0") {
  ProblemSpec spec;
  spec.kind = ProblemKind::quadratic_plus_skew;
  spec.dim = 8;
  spec.kappa_F = 5;
  spec.seed = 1;
  const MonotoneProblem p = generate_monotone(spec);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Vec x(p.dim), y(p.dim);
  for (Eigen::Index i = 0; i < p.dim; ++i) {
    x[i] = g(rng);
    y[i] = g(rng);
  }
  const Mat Z = Mat::Zero(p.dim, p.dim);
  CHECK(lyapunov_acc_alphaB(x, y, *p.x_star, 0.3, Z, p) ==
        doctest::Approx(lyapunov_acc(x, y, *p.x_star, p)).epsilon(1e-12));
  CHECK(lyapunov_acc_alphaB(*p.x_star, *p.x_star, *p.x_star, 0.3, Z, p) ==
        doctest::Approx(0.0).epsilon(1e-14));
  // compositional recomputation with a nonzero Bsym
  const SkewSplit s = split_skew(seeded_skew(p.dim, 0.5, 77));
  const Vec dy = y - *p.x_star;
  const double recomposed = bregman(p, x, *p.x_star) +
                            0.5 * (p.mu * dy.squaredNorm() -
                                   0.3 * dy.dot(s.Bsym * dy));
  CHECK(lyapunov_acc_alphaB(x, y, *p.x_star, 0.3, s.Bsym, p) ==
        doctest::Approx(recomposed).epsilon(1e-12));
}

TEST_CASE("condition_numbers") {
  {
    MonotoneProblem p = quad_problem(Mat::Identity(2, 2), Vec::Zero(2),
                                     Mat::Zero(2, 2));
    const SpectralEstimates e = condition_numbers(p, split_skew(p.N));
    CHECK(e.kappa_F == doctest::Approx(1.0));
    CHECK(e.kappa_N == doctest::Approx(0.0));
    CHECK(e.L_A == doctest::Approx(1.0));
  }
  {
    ProblemSpec spec;
    spec.kind = ProblemKind::quadratic_plus_skew;
    spec.dim = 20;
    spec.kappa_F = 100;
    spec.kappa_Bsym = 10;
    spec.seed = 2;
    const MonotoneProblem p = generate_monotone(spec);
    const SpectralEstimates e = condition_numbers(p, split_skew(p.N));
    CHECK(e.kappa_F == doctest::Approx(100.0).epsilon(1e-10));
    CHECK(e.kappa_N == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(e.L_A == doctest::Approx(110.0).epsilon(1e-10));
    CHECK(e.kappa_A <= e.kappa_F + e.kappa_N + 1e-10);
  }
}

TEST_CASE("validate accepts generated problems and rejects bad constants") {
  ProblemSpec spec;
  spec.kind = ProblemKind::quadratic_plus_skew;
  spec.dim = 15;
  spec.kappa_F = 8;
  spec.kappa_Bsym = 2;
  spec.seed = 6;
  MonotoneProblem p = generate_monotone(spec);
  CHECK_NOTHROW(validate(p));
  p.mu = p.L_F * 2;  // mu > L_F is inconsistent
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

#include <array>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cvm/linalg.hpp"
#include "cvm/lp.hpp"
#include "cvm/rng.hpp"
#include "cvm/special.hpp"
#include "cvm/stats.hpp"

using namespace cvm;

TEST(Linalg, SlParamHasUnitDeterminant) {
  SeededStream s(7, "sl");
  for (int n = 1; n <= kMaxDim; ++n) {
    Eigen::VectorXd theta(sl_param_size(n));
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = s.normal();
    EXPECT_NEAR(sl_param(theta, n).determinant(), 1.0, 1e-10) << "n=" << n;
  }
  EXPECT_THROW(sl_param(Eigen::VectorXd::Zero(2), 2), DimensionMismatch);
}

TEST(Linalg, WhiteningMapsCovarianceToScaledIdentity) {
  Mat cov(3, 3);
  cov << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Mat u = whitening_map(cov);
  EXPECT_NEAR(u.determinant(), 1.0, 1e-10);
  const Mat w = u * cov * u.transpose();
  const double c = w(0, 0);
  EXPECT_LT(max_abs(w - c * Mat::Identity(3, 3)), 1e-10);
  // Determinant is preserved, so c^3 = det(cov).
  EXPECT_NEAR(std::pow(c, 3), cov.determinant(), 1e-9);
}

TEST(Linalg, SpdSqrtSquaresBack) {
  Mat m(2, 2);
  m << 2, 0.3, 0.3, 1;
  const Mat r = spd_sqrt(m);
  EXPECT_LT(max_abs(r * r - m), 1e-12);
}

TEST(Linalg, ExpmOfDiagonal) {
  Mat a = diag_of(vec_of({0.5, -1.0}));
  const Mat e = expm(a);
  EXPECT_NEAR(e(0, 0), std::exp(0.5), 1e-12);
  EXPECT_NEAR(e(1, 1), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(e(0, 1), 0.0, 1e-14);
}

TEST(Linalg, DimensionCap) {
  EXPECT_THROW(require_dim(0), PreconditionError);
  EXPECT_THROW(require_dim(kMaxDim + 1), PreconditionError);
  EXPECT_NO_THROW(require_dim(kMaxDim));
}

TEST(Rng, StreamsAreReproducibleAndLabelled) {
  SeededStream a(42, "x"), b(42, "x"), c(42, "y"), d(43, "x");
  const double va = a.uniform();
  EXPECT_EQ(va, b.uniform());
  EXPECT_NE(va, c.uniform());
  EXPECT_NE(va, d.uniform());
  SeededStream p(42, "x");
  EXPECT_EQ(p.child("k", 3).uniform(), SeededStream(42, "x").child("k", 3).uniform());
  EXPECT_NE(p.child("k", 3).uniform(), p.child("k", 4).uniform());
}

TEST(Rng, NormalAndGammaMoments) {
  SeededStream s(1, "moments");
  Moments z, g;
  for (int i = 0; i < 200000; ++i) {
    z.add(s.normal());
    g.add(s.gamma(2.5));
  }
  EXPECT_NEAR(z.mean, 0.0, 0.01);
  EXPECT_NEAR(z.variance(), 1.0, 0.01);
  EXPECT_NEAR(g.mean, 2.5, 0.02);
  EXPECT_NEAR(g.variance(), 2.5, 0.05);
}

TEST(Special, GeneralizedBinomial) {
  EXPECT_DOUBLE_EQ(gen_binomial(5.0, 2), 10.0);
  EXPECT_DOUBLE_EQ(gen_binomial(4.0, 0), 1.0);
  // C^2_{2.5} = 2.5 * 1.5 / 2.
  EXPECT_NEAR(gen_binomial(2.5, 2), 1.875, 1e-14);
  // C^n_{2n} for n = 3.
  EXPECT_NEAR(gen_binomial(6.0, 3), 20.0, 1e-12);
}

TEST(Special, BallVolumes) {
  EXPECT_NEAR(ball_volume(1, 1.0), 2.0, 1e-12);
  EXPECT_NEAR(ball_volume(2, 1.0), std::numbers::pi, 1e-12);
  EXPECT_NEAR(ball_volume(3, 2.0), 4.0 / 3.0 * std::numbers::pi * 8.0, 1e-10);
  for (int n = 1; n <= 6; ++n) EXPECT_NEAR(ball_volume(n, ball_radius_for_volume(n, 1.0)), 1.0, 1e-12);
}

TEST(Special, DigammaRecurrence) {
  for (double x : {0.5, 1.0, 3.7}) EXPECT_NEAR(digamma(x + 1.0) - digamma(x), 1.0 / x, 1e-12);
  EXPECT_NEAR(digamma(1.0), -0.57721566490153286, 1e-14);
}

TEST(Stats, MergeMatchesSinglePass) {
  SeededStream s(3, "merge");
  Moments all, left, right;
  for (int i = 0; i < 1000; ++i) {
    const double x = s.normal();
    all.add(x);
    (i < 300 ? left : right).add(x);
  }
  left.merge(right);
  EXPECT_NEAR(left.mean, all.mean, 1e-12);
  EXPECT_NEAR(left.variance(), all.variance(), 1e-12);
}

TEST(Stats, ResultsDoNotDependOnWorkers) {
  const SeededStream s(11, "workers");
  auto run = [&](int w) {
    set_workers(w);
    return mc_moments(50000, s, [](SeededStream& st) { return st.normal() * st.uniform(); });
  };
  const Moments one = run(1);
  const Moments many = run(4);
  set_workers(1);
  EXPECT_EQ(one.mean, many.mean);
  EXPECT_EQ(one.m2, many.m2);
}

TEST(Stats, DeltaStderrOfRatio) {
  // g(x, y) = x - y with perfectly correlated inputs has zero error.
  CoMoments cm;
  SeededStream s(5, "delta");
  for (int i = 0; i < 1000; ++i) {
    const double u = s.normal();
    cm.add(u, u);
  }
  EXPECT_NEAR(delta_stderr(cm, 1.0, -1.0), 0.0, 1e-12);
  EXPECT_NEAR(delta_stderr(cm, 1.0, 0.0), cm.x.stderr_of_mean(), 1e-3);
}

TEST(Lp, PointInHull) {
  const std::array<Vec, 3> tri{vec_of({0, 0}), vec_of({1, 0}), vec_of({0, 1})};
  EXPECT_TRUE(lp_point_in_hull(vec_of({0.2, 0.3}), tri));
  EXPECT_TRUE(lp_point_in_hull(vec_of({0.5, 0.5}), tri));
  EXPECT_TRUE(lp_point_in_hull(vec_of({0.0, 0.0}), tri));
  EXPECT_FALSE(lp_point_in_hull(vec_of({0.6, 0.6}), tri));
  EXPECT_FALSE(lp_point_in_hull(vec_of({-0.01, 0.5}), tri));
}

TEST(Lp, FeasibilityOfEqualitySystem) {
  // x + y = 1, x - y = 0.2 with x, y >= 0 is feasible; x + y = -1 is not.
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, -1;
  EXPECT_TRUE(lp_feasible(a, Eigen::Vector2d(1.0, 0.2)));
  Eigen::MatrixXd b(1, 2);
  b << 1, 1;
  EXPECT_FALSE(lp_feasible(b, Eigen::VectorXd::Constant(1, -1.0)));
}

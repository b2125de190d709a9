#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cvm/entropy.hpp"

using namespace cvm;

namespace {
double gaussian_entropy(const Mat& cov) {
  const double n = static_cast<double>(cov.rows());
  return 0.5 * (n * std::log(2.0 * std::numbers::pi * std::numbers::e) + std::log(cov.determinant()));
}
}  // namespace

TEST(Analytic, ClosedFormFamilies) {
  EXPECT_NEAR(entropy_analytic(make_uniform(make_cube(3, 0, 2))).h, 3.0 * std::log(2.0), 1e-12);
  Mat cov(2, 2);
  cov << 2.0, 0.3, 0.3, 0.5;
  EXPECT_NEAR(entropy_analytic(make_gaussian(Vec::Zero(2), cov)).h, gaussian_entropy(cov), 1e-12);
  // Exponential with rate l in R^n: n (1 - log l).
  EXPECT_NEAR(entropy_analytic(make_exponential(2, 3.0)).h, 2.0 * (1.0 - std::log(3.0)), 1e-12);
  // 1D Pareto(3): 3/2 - log 2.
  EXPECT_NEAR(entropy_analytic(make_pareto(1, 3.0)).h, 1.5 - std::log(2.0), 1e-12);
  // 1D power law (p+1)(1-x)^p or (p+1)x^p: -log(p+1) + p/(p+1).
  for (bool facet : {false, true})
    EXPECT_NEAR(entropy_analytic(make_power_simplex(1, 2.5, facet)).h, -std::log(3.5) + 2.5 / 3.5, 1e-12);
}

TEST(Analytic, PushforwardAddsLogDet) {
  Mat u(2, 2);
  u << 3.0, 1.0, 0.0, 2.0;
  const Density d = pushforward(u, make_exponential(2), vec_of({1, 1}));
  EXPECT_NEAR(entropy_analytic(d).h, 2.0 + std::log(6.0), 1e-12);
}

TEST(Plugin, AgreesWithAnalyticForHeavierFamilies) {
  const SeededStream s(1, "plugin");
  for (const Density& d : {make_pareto(2, 4.0), make_pareto(3, 9.0), make_power_simplex(2, 2.0, false),
                           make_power_simplex(3, 1.5, true)}) {
    const auto mc = entropy_plugin_mc(d, 100000, s);
    const auto exact = entropy_analytic(d);
    EXPECT_NEAR(mc.h, exact.h, 4.0 * mc.stderr_ + 1e-3) << d.family();
  }
}

TEST(Smoothed, UniformPairGivesTriangleEntropy) {
  // Triangular density on [0,2] has entropy 1/2.
  const Density u = make_uniform(make_cube(1));
  const auto v = entropy_sum_smoothed(u, u, 50000, 64, SeededStream(2, "tri"));
  EXPECT_NEAR(v.h, 0.5, 4.0 * v.stderr_ + 0.01);
  EXPECT_EQ(v.method, EntropyMethod::smoothed_sum);
}

TEST(Smoothed, GaussianPairMatchesSumCovariance) {
  const Density a = make_gaussian(Vec::Zero(2), Mat::Identity(2, 2));
  const Density b = make_gaussian(Vec::Zero(2), 2.0 * Mat::Identity(2, 2));
  const double exact = gaussian_entropy(3.0 * Mat::Identity(2, 2));
  for (auto scheme : {InnerScheme::one_sided, InnerScheme::balanced}) {
    const auto v = entropy_sum_smoothed(a, b, {40000, 64, scheme}, SeededStream(3, "gauss"));
    EXPECT_NEAR(v.h, exact, 4.0 * v.stderr_ + 0.01);
  }
}

TEST(Smoothed, NonEvaluableSecondSummand) {
  // X + (Y + Z) for i.i.d. uniform[0,1]: Irwin-Hall(3) entropy.
  const Density u = make_uniform(make_cube(1));
  const auto v = entropy_sum_smoothed(u, make_sum_pair(u, u), 40000, 64, SeededStream(4, "ih3"));
  // Oracle by quadrature of the Irwin-Hall(3) density.
  auto f = [](double x) {
    if (x < 1) return 0.5 * x * x;
    if (x < 2) return 0.5 * (-2 * x * x + 6 * x - 3);
    return 0.5 * (3 - x) * (3 - x);
  };
  double h = 0.0;
  const int cells = 30000;
  for (int i = 0; i < cells; ++i) {
    const double x = 3.0 * (i + 0.5) / cells;
    h -= f(x) * std::log(f(x)) * 3.0 / cells;
  }
  EXPECT_NEAR(v.h, h, 4.0 * v.stderr_ + 0.01);
}

TEST(Knn, GaussianEntropy) {
  Mat cov(2, 2);
  cov << 1.0, 0.4, 0.4, 2.0;
  const Density g = make_gaussian(Vec::Zero(2), cov);
  const auto v = entropy_knn(g, 20000, 5, SeededStream(5, "knn"));
  EXPECT_NEAR(v.h, gaussian_entropy(cov), 0.05);
}

TEST(EntropyPower, Definition) {
  EXPECT_NEAR(entropy_power(0.5, 1), std::numbers::e, 1e-12);
  EXPECT_NEAR(entropy_power(std::log(3.0), 2), 3.0, 1e-12);
}

TEST(Renyi, SampledAgainstExact) {
  const Density g = make_gaussian(Vec::Zero(2), diag_of(vec_of({1.0, 4.0})));
  const Estimate r = renyi2_mc(g, 100000, SeededStream(6, "r2"));
  EXPECT_NEAR(r.value, *renyi2_exact(g), 4.0 * r.stderr_);
}

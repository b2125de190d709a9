#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cvm/suite.hpp"

using namespace cvm;

namespace {

Budget quick() {
  Budget b;
  b.samples = 20000;
  b.inner = 32;
  b.msearch.budget = 60;
  b.msearch.samples_per_eval = 2000;
  b.msearch.restarts = 1;
  return b;
}

void expect_no_failures(const std::vector<CheckResult>& rs) {
  ASSERT_FALSE(rs.empty());
  for (const auto& r : rs)
    EXPECT_NE(r.verdict, Verdict::fail) << r.name << " " << r.instance << " lhs=" << r.lhs << " rhs=" << r.rhs
                                        << " se=" << r.stderr_;
}

const CheckResult& find(const std::vector<CheckResult>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return r;
  throw std::runtime_error("missing record " + name);
}

}  // namespace

TEST(Verdicts, FlippedInequalityIsDetected) {
  const auto ok = make_check("x", 1, "i", 1.0, 2.0, 0.0, CheckKind::exact, 0);
  const auto flipped = make_check("x", 1, "i", 2.0, 1.0, 0.0, CheckKind::exact, 0);
  EXPECT_EQ(ok.verdict, Verdict::pass);
  EXPECT_EQ(flipped.verdict, Verdict::fail);
  EXPECT_DOUBLE_EQ(flipped.slack, -1.0);
  // Statistical rule: slack >= -3 stderr.
  EXPECT_EQ(make_check("x", 1, "i", 1.25, 1.0, 0.1, CheckKind::statistical, 0).verdict, Verdict::pass);
  EXPECT_EQ(make_check("x", 1, "i", 1.35, 1.0, 0.1, CheckKind::statistical, 0).verdict, Verdict::fail);
  EXPECT_EQ(make_check("x", 1, "i", 9.0, 1.0, 0.0, CheckKind::report_only, 0).verdict, Verdict::report_only);
  // The exact tolerance scales with the magnitude of the sides.
  EXPECT_EQ(make_check("x", 1, "i", 1e6 + 1e-4, 1e6, 0.0, CheckKind::exact, 0).verdict, Verdict::pass);
  EXPECT_EQ(make_check("x", 1, "i", 1.0 + 1e-6, 1.0, 0.0, CheckKind::exact, 0).verdict, Verdict::fail);
}

TEST(Epi, GaussianEqualityAndUniformPair) {
  const Density a = make_gaussian(Vec::Zero(2), Mat::Identity(2, 2));
  const Density b = make_gaussian(Vec::Zero(2), 3.0 * Mat::Identity(2, 2));
  const auto r = check_epi(a, b, quick(), SeededStream(1, "epi"), "g")[0];
  EXPECT_LE(std::abs(r.slack), 3.0 * r.stderr_ + 1e-2 * r.rhs);
  const Density u = make_uniform(make_cube(1));
  const auto ru = check_epi(u, u, quick(), SeededStream(2, "epi"), "u")[0];
  EXPECT_EQ(ru.verdict, Verdict::pass);
  EXPECT_NEAR(ru.rhs, std::numbers::e, 0.1);
}

TEST(VolumeEntropy, SandwichesOnSimpleBodies) {
  expect_no_failures(check_volsum(make_cube(2), make_standard_simplex(2), quick(), SeededStream(3, "v"), "c+s"));
  expect_no_failures(check_vol_ent({make_cube(2), make_cube(2), make_cube(2)}, quick(), SeededStream(4, "v"), "3c"));
}

TEST(CvxEnt, FacetPowerSimplexIsAnEqualityCase) {
  // Exact oracle: h = -log_norm - p (psi(p+1) - psi(p+n+1)) for the facet law.
  for (int n = 1; n <= 3; ++n) {
    const Density d = make_power_simplex(n, 2.0, true);
    const auto rs = check_cvx_ent(d, quick(), SeededStream(5, "cvx"), "facet");
    const auto& r = find(rs, "cvx_ent");
    EXPECT_NEAR(r.lhs, entropy_analytic(d).h, 1e-10) << n;
    EXPECT_LE(std::abs(r.slack), 4.0 * r.stderr_) << n;
  }
  // Vertex anchoring is strictly above the bound.
  const auto rv = find(check_cvx_ent(make_power_simplex(2, 2.0), quick(), SeededStream(6, "cvx"), "vertex"), "cvx_ent");
  EXPECT_NEAR(entropy_analytic(make_power_simplex(2, 2.0)).h - rv.lhs, std::log(3.0) - 2.0 / 3.0, 1e-10);
  // Uniform laws meet both bounds with zero slack.
  for (const auto& r : check_cvx_ent(make_uniform(make_cube(3)), quick(), SeededStream(7, "cvx"), "u"))
    EXPECT_NEAR(r.slack, 0.0, 4.0 * r.stderr_ + 1e-12) << r.name;
}

TEST(Berwald, ExactMomentsOnTheSimplex) {
  const Body s2 = make_standard_simplex(2);
  // E (sum x)^p = n/(p+n) on the simplex, so for p=1, q=2, n=2: sqrt(6 * 1/2) vs 3 * 2/3.
  const auto r = check_berwald(s2, affine_function(Vec::Ones(2), 0.0), 1.0, 2.0, quick(), SeededStream(8, "b"), "sum")[0];
  EXPECT_NEAR(r.lhs, std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(r.rhs, 2.0, 1e-12);
  EXPECT_EQ(r.stderr_, 0.0);
  // 1 - sum x attains equality.
  const auto e = check_berwald(s2, affine_function(-Vec::Ones(2), 1.0), 1.0, 2.0, quick(), SeededStream(9, "b"), "f")[0];
  EXPECT_NEAR(e.slack, 0.0, 1e-12);
}

TEST(Berwald, SampledPathAgreesWithExact) {
  // A constant piece alongside the affine one forces the sampled path.
  ConcaveFunction phi = affine_function(Vec::Ones(2), 0.0);
  phi.slopes.push_back(Vec::Zero(2));
  phi.offsets.push_back(5.0);
  Budget b = quick();
  b.samples = 200000;
  const auto r = check_berwald(make_standard_simplex(2), phi, 1.0, 2.0, b, SeededStream(10, "b"), "mc")[0];
  EXPECT_GT(r.stderr_, 0.0);
  EXPECT_NEAR(r.lhs, std::sqrt(3.0), 4.0 * r.stderr_ + 2e-3);
  EXPECT_NEAR(r.rhs, 2.0, 4.0 * r.stderr_ + 2e-3);
}

TEST(MaxNorm, ExponentialEqualityAndConvexReportOnly) {
  for (int n = 1; n <= 3; ++n) {
    const auto rs = check_maxnorm(make_exponential(n, 1.0), quick(), SeededStream(11, "m"), "exp");
    expect_no_failures(rs);
    EXPECT_LE(std::abs(find(rs, "maxnorm.upper").slack), 0.02);
  }
  const auto rp = check_maxnorm(make_pareto(2, 6.0), quick(), SeededStream(12, "m"), "pareto");
  EXPECT_EQ(find(rp, "maxnorm.constant").verdict, Verdict::report_only);
  EXPECT_THROW(find(rp, "maxnorm.upper"), std::runtime_error);
}

TEST(InnerProduct, SymmetricLogConcavePairs) {
  expect_no_failures(check_innerprod(make_uniform(make_cube(2, -0.5, 0.5)), make_standard_gaussian(2), quick(),
                                     SeededStream(13, "ip"), "cube,gauss"));
  EXPECT_THROW(check_innerprod(make_exponential(1), make_exponential(1), quick(), SeededStream(14, "ip"), "x"),
               PreconditionError);
}

TEST(VolMaxNorm, IrwinHallPeak) {
  // Density at 0 of a sum of m uniforms on [-1/2, 1/2]: m=2 -> 1, m=3 -> 3/4.
  EXPECT_NEAR(detail::symmetric_uniform_sum_density({0.5, 0.5}, 0.0), 1.0, 1e-14);
  EXPECT_NEAR(detail::symmetric_uniform_sum_density({0.5, 0.5, 0.5}, 0.0), 0.75, 1e-14);
  EXPECT_NEAR(detail::symmetric_uniform_sum_density({0.5}, 0.0), 1.0, 1e-14);
  const Body c = make_cube(2, -0.5, 0.5);
  const auto rs = check_vol_maxnorm({c, c, c}, quick(), SeededStream(15, "vm"), "c3");
  EXPECT_NEAR(rs[0].rhs, 0.75 * 0.75 * 9.0, 1e-12);
  expect_no_failures(rs);
  expect_no_failures(check_vol_maxnorm({c, make_ball(Vec::Zero(2), 0.6)}, quick(), SeededStream(16, "vm"), "cb"));
}

TEST(RogersShephard, SimplexEqualityAndCube) {
  const auto rs = check_rogers_shephard(make_standard_simplex(2), make_standard_simplex(2), quick(),
                                        SeededStream(17, "rs"), "simplex");
  const auto& d = find(rs, "rs.diffbody");
  // |A cap A| |A - A| = C(4,2) |A|^2 for the simplex.
  EXPECT_NEAR(d.lhs / d.rhs, 1.0, 0.03);
  const Body c = make_cube(3, -0.5, 0.5);
  const auto rc = check_rogers_shephard(c, c, quick(), SeededStream(18, "rs"), "cube");
  EXPECT_NEAR(find(rc, "rs.diffbody").lhs, 8.0, 1e-12);
  EXPECT_NEAR(find(rc, "rs.symmsum.upper").lhs, 2.0, 1e-12);
  expect_no_failures(rc);
}

TEST(Renyi2, Bounds) {
  expect_no_failures(check_renyi2(make_exponential(2), quick(), SeededStream(19, "r"), "exp"));
}

TEST(Aep, HypothesisIsEnforced) {
  expect_no_failures(check_aep(make_pareto(2, 6.0), quick(), SeededStream(20, "aep"), "pareto"));
  EXPECT_THROW(check_aep(make_pareto(2, 4.0), quick(), SeededStream(21, "aep"), "pareto"), PreconditionError);
}

TEST(Submod, GaussianClosedFormSlack) {
  SeededStream s(22, "submod");
  for (int t = 0; t < 50; ++t) {
    const double a = s.exponential(), b = s.exponential(), c = s.exponential();
    EXPECT_GE(gaussian_submod_slack(a, b, c), 0.0);
    const auto r = check_submod(make_gaussian(Vec::Zero(1), Mat::Constant(1, 1, a)),
                                make_gaussian(Vec::Zero(1), Mat::Constant(1, 1, b)),
                                make_gaussian(Vec::Zero(1), Mat::Constant(1, 1, c)), quick(), s, "g")[0];
    EXPECT_NEAR(r.slack, gaussian_submod_slack(a, b, c), 1e-12);
  }
}

TEST(Submod, VolumeFormOnZonotopes) {
  SeededStream s(23, "zono");
  for (int t = 0; t < 10; ++t) {
    std::vector<Body> z;
    for (int k = 0; k < 3; ++k) {
      std::vector<Vec> gens;
      for (int g = 0; g < 3; ++g) gens.push_back(s.normal_vec(2));
      z.push_back(make_zonotope(Vec::Zero(2), gens));
    }
    const auto r = check_vol_submod(z[0], z[1], z[2], quick(), s, "z")[0];
    EXPECT_EQ(r.stderr_, 0.0);
    EXPECT_EQ(r.verdict, Verdict::pass);
  }
}

TEST(Plunnecke, EqualCubes) {
  for (int m = 1; m <= 3; ++m) {
    const Body c = make_cube(2);
    const auto r = check_plunnecke(c, std::vector<Body>(static_cast<std::size_t>(m), c), 1, quick(),
                                   SeededStream(24, "p"), "cubes")[0];
    EXPECT_NEAR(r.lhs, 1.0 + m, 1e-12);
    EXPECT_EQ(r.verdict, Verdict::pass);
  }
}

TEST(FracSub, GaussianExact) {
  const int n = 2;
  std::vector<Density> ys;
  for (double v : {0.5, 1.0, 4.0}) ys.push_back(make_gaussian(Vec::Zero(n), v * Mat::Identity(n, n)));
  for (int k = 1; k <= 3; ++k) {
    const auto r = check_fracsub(make_standard_gaussian(n), ys, k, quick(), SeededStream(25, "f"), "g")[0];
    EXPECT_EQ(r.verdict, Verdict::pass) << k;
  }
}

TEST(ReverseEpi, BallPairPipeline) {
  const Body ball = make_ball(Vec::Zero(2), ball_radius_for_volume(2, 1.0));
  const auto rs = check_reverse_epi(make_uniform(ball), make_uniform(ball), quick(), SeededStream(26, "repi"), "balls");
  expect_no_failures(rs);
  EXPECT_NEAR(find(rs, "repi.volsum_ceiling").rhs, 2.0, 1e-9);
  EXPECT_THROW(check_reverse_epi(make_pareto(2, 4.0), make_pareto(2, 4.0), quick(), SeededStream(27, "r"), "p"),
               PreconditionError);
}

TEST(Isotropic, CubePairClosedForm) {
  const auto rs = check_isotropic_repi(make_cube(2), make_cube(2), quick(), SeededStream(28, "iso"), "cubes");
  const auto& r = find(rs, "ball");
  EXPECT_NEAR(r.lhs, 4.0 / (8.0 * std::numbers::pi * std::numbers::e), 1e-12);
  EXPECT_NEAR(r.rhs, 1.0 / 6.0, 1e-12);
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(Counterexample, RejectsDivergentEntropy) {
  EXPECT_THROW(demo_counterexample({3.0, 1.0}, quick(), SeededStream(29, "c")), PreconditionError);
}

TEST(Suite, DeterministicSortedAndWorkerInvariant) {
  SuiteConfig cfg;
  cfg.dims = {1};
  cfg.checks = {"epi", "renyi2", "vol_submod"};
  cfg.budget = quick();
  set_workers(1);
  const auto a = run_suite(cfg);
  set_workers(4);
  const auto b = run_suite(cfg);
  set_workers(1);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].lhs, b[i].lhs);
    EXPECT_EQ(a[i].rhs, b[i].rhs);
    if (i > 0) EXPECT_FALSE(record_less(a[i], a[i - 1]));
  }
  EXPECT_THROW(run_suite(SuiteConfig{{9}, {}, {}, quick(), 1}), PreconditionError);
}

TEST(Suite, PreconditionViolationsAreConfigErrors) {
  const Budget b = quick();
  std::vector<SuiteJob> jobs{{"aep", 2, "too heavy", [b](const SeededStream& s) {
                                return check_aep(make_pareto(2, 4.0), b, s, "too heavy");
                              }}};
  const auto rs = run_jobs(jobs, 1);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].name, "aep.config_error");
  EXPECT_EQ(rs[0].verdict, Verdict::report_only);
  EXPECT_TRUE(has_config_errors(rs));
}

// Acceptance checks: one PASS/FAIL line per criterion.
//   acceptance                 run every criterion
//   acceptance --criterion k   run criterion k only
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cvm/cli.hpp"

using namespace cvm;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const CheckResult& find(const std::vector<CheckResult>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return r;
  throw std::runtime_error("missing record " + name);
}

Body unit_ball(int n) { return make_ball(Vec::Zero(n), ball_radius_for_volume(n, 1.0)); }

// 1. Gaussian EPI equality and the uniform pair.
void epi_equality(Outcome& o) {
  Budget b;
  b.samples = 200000;
  b.inner = 256;
  for (int n = 1; n <= 3; ++n) {
    const Density x = make_gaussian(Vec::Zero(n), Mat::Identity(n, n));
    const Density y = make_gaussian(Vec::Zero(n), 2.0 * Mat::Identity(n, n));
    const auto r = check_epi(x, y, b, SeededStream(1, "epi-gauss").child("n", n), "gauss")[0];
    o.detail << " n=" << n << ":slack=" << r.slack << "(se " << r.stderr_ << ")";
    o.require(std::abs(r.slack) <= 3.0 * r.stderr_, "Gaussian |slack| <= 3 stderr at n=" + std::to_string(n));
  }
  const Density u = make_uniform(make_cube(1));
  const auto t0 = std::chrono::steady_clock::now();
  const auto h = detail::entropy_of_sum(u, u, b, SeededStream(1, "epi-uniform"));
  const double dt = seconds_since(t0);
  o.detail << " uniform H(X+Y)=" << entropy_power(h) << " in " << dt << "s";
  o.require(std::abs(entropy_power(h) - std::numbers::e) <= 0.05, "uniform pair H(X+Y) = e within 0.05");
  o.require(dt <= 30.0, "runtime <= 30 s at N = 2e5");
}

// 2. Entropy-volume sandwich for two unit squares.
void volsum_sandwich(Outcome& o) {
  Budget b;
  b.samples = 200000;
  b.inner = 256;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rs = check_volsum(make_cube(2), make_cube(2), b, SeededStream(2, "volsum"), "squares");
  const double dt = seconds_since(t0);
  const auto& lo = find(rs, "volsum.lower");
  const auto& hi = find(rs, "volsum.upper");
  const double h = lo.rhs;
  o.detail << " H(X+Y)=" << h << " se=" << lo.stderr_ << " oracle e=" << std::numbers::e << " in " << dt << "s";
  o.require(lo.lhs == 1.0 && hi.rhs == 4.0, "volume bounds are 1 and 4");
  o.require(lo.slack >= 3.0 * lo.stderr_ && hi.slack >= 3.0 * hi.stderr_, "3 stderr margin to both ends");
  o.require(std::abs(h - std::numbers::e) <= 3.0 * lo.stderr_ + 0.01, "agreement with the oracle e");
  o.require(dt <= 60.0, "runtime <= 60 s");
}

// 3. Exponential law meets the log-concave max-density bound with equality.
void lc_maxnorm(Outcome& o) {
  for (int n = 1; n <= 3; ++n) {
    const Density e = make_exponential(n, 1.0);
    const double base = 1.0 - std::log(max_density(e)) / n;
    const double analytic = entropy_analytic(e).h / n - base;
    const auto plug = entropy_plugin_mc(e, 200000, SeededStream(3, "maxnorm").child("n", n));
    const double estimate = plug.h / n - base;
    o.detail << " n=" << n << ":analytic=" << analytic << ",plugin=" << estimate;
    o.require(std::abs(analytic) <= 1e-12, "analytic gap is zero at n=" + std::to_string(n));
    o.require(std::abs(estimate) <= 0.02, "plug-in gap within 0.02 at n=" + std::to_string(n));
  }
}

// 4. Berwald with phi = sum x_i on the simplex, (p, q) = (1, 2), n = 2.
void berwald_equality(Outcome& o) {
  const Body s2 = make_standard_simplex(2);
  Budget b;
  const auto r = check_berwald(s2, affine_function(Vec::Ones(2), 0.0), 1.0, 2.0, b, SeededStream(4, "b"), "sum")[0];
  const double rel = r.slack / r.rhs;
  // Independent oracle: int (sum x)^p over the simplex = 1/((n-1)!(p+n)), |A| = 1/2.
  const double m1 = 2.0 * (1.0 / 3.0), m2 = 2.0 * (1.0 / 4.0);
  const double lhs = std::sqrt(gen_binomial(4.0, 2) * m2), rhs = gen_binomial(3.0, 2) * m1;
  o.detail << " lhs=" << r.lhs << " rhs=" << r.rhs << " relative slack=" << rel << " (oracle " << (rhs - lhs) / rhs
           << ")";
  o.require(std::abs(r.lhs - lhs) < 1e-12 && std::abs(r.rhs - rhs) < 1e-12, "moments match the oracle");
  o.require(r.verdict == Verdict::pass, "inequality holds");
  o.require(std::abs(rel) <= 0.01, "relative slack <= 0.01");
}

// 5. Rogers-Shephard: simplex difference body and cubes.
void rogers_shephard(Outcome& o) {
  const Estimate v = volume_mc(difference_body(make_standard_simplex(2)), 200000, SeededStream(5, "hexagon"));
  o.detail << " |T-T|=" << v.value << "+-" << v.stderr_;
  o.require(std::abs(v.value - 3.0) <= 0.03 * 3.0, "hexagon area 3 within 3%");
  for (int n = 1; n <= 6; ++n) {
    const Body c = make_cube(n);
    const double vd = volume_exact(difference_body(c));
    o.require(std::abs(vd - std::pow(2.0, n)) <= 1e-9 * std::pow(2.0, n), "cube difference body 2^n at n=" + std::to_string(n));
  }
  o.detail << " cubes n=1..6 exact";
}

// 6. Essential support of Pareto(6) in the plane and of the 1D Gaussian.
void essential_support_check(Outcome& o) {
  Budget b;
  b.samples = 200000;
  const auto rs = check_aep(make_pareto(2, 6.0), b, SeededStream(6, "aep"), "pareto");
  const auto& mass = find(rs, "aep.mass");
  o.detail << " pareto mass=" << mass.rhs << "+-" << mass.stderr_;
  o.require(mass.verdict == Verdict::pass && mass.rhs >= 0.5, "Pareto mass >= 1/2");
  for (const char* name : {"aep.volume.lower", "aep.volume.upper"}) {
    const auto& r = find(rs, name);
    o.require(r.verdict == Verdict::pass && r.stderr_ == 0.0, std::string(name) + " exact");
  }
  const Density g = make_standard_gaussian(1);
  const auto es = essential_support(g, std::exp(-8.0));
  const auto bb = bounding_box(es.body);
  o.require(std::abs(bb.first(0) + 4.0) < 1e-12 && std::abs(bb.second(0) - 4.0) < 1e-12, "K_f = [-4, 4]");
  const Estimate m = support_mass_mc(g, es, 200000, SeededStream(6, "gauss"));
  const double exact = 2.0 * normal_cdf(4.0) - 1.0;
  // With zero hits outside, the binomial error bar is zero; allow one sample.
  const double tol = 3.0 * std::max(m.stderr_, 1.0 / 200000);
  o.detail << " gaussian mass=" << m.value << " oracle=" << exact;
  o.require(std::abs(m.value - exact) <= tol, "Gaussian mass matches the normal CDF");
  o.require(m.value > 0.8, "Gaussian mass exceeds 1 - 1/5");
}

// 7. Submodularity: Gaussian closed form, entropy form, volume form.
void submodularity(Outcome& o) {
  Budget b;
  const std::vector<std::array<double, 3>> triples{{1, 1, 1}, {0.5, 2, 3}, {10, 0.1, 1}, {1, 4, 0.05}};
  for (const auto& [a, bb, c] : triples) {
    auto g = [](double v) { return make_gaussian(Vec::Zero(1), Mat::Constant(1, 1, v)); };
    const auto r = check_submod(g(a), g(bb), g(c), b, SeededStream(7, "g"), "g")[0];
    const double oracle = 0.5 * std::log((a + c) * (bb + c) / ((a + bb + c) * c));
    o.require(std::abs(r.slack - oracle) <= 1e-12 && oracle >= 0.0, "Gaussian closed-form slack");
  }
  o.detail << " gaussian closed form ok;";
  b.samples = 100000;
  b.inner = 128;
  const Density cube = make_uniform(make_cube(2));
  const auto r = check_submod(cube, cube, make_uniform(unit_ball(2)), b, SeededStream(7, "ccb"), "cube,cube,ball")[0];
  o.detail << " cube/cube/ball slack=" << r.slack << "(se " << r.stderr_ << ");";
  o.require(r.verdict == Verdict::pass, "cube/cube/ball within 3 stderr");
  SeededStream s(7, "zonotopes");
  int exact = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<Body> z;
    for (int k = 0; k < 3; ++k) {
      std::vector<Vec> gens;
      for (int i = 0; i < 3; ++i) gens.push_back(s.normal_vec(2));
      z.push_back(make_zonotope(Vec::Zero(2), gens));
    }
    const auto v = check_vol_submod(z[0], z[1], z[2], b, s, "z")[0];
    exact += v.stderr_ == 0.0 && v.verdict == Verdict::pass;
  }
  o.detail << " zonotope triples exact " << exact << "/20";
  o.require(exact == 20, "volume form exact on zonotope triples");
}

// 8. Plunnecke-Ruzsa on equal cubes and Gaussian fractional subadditivity.
void plunnecke_fracsub(Outcome& o) {
  Budget b;
  for (int n = 1; n <= 3; ++n) {
    for (int m = 1; m <= 4; ++m) {
      const Body c = make_cube(n);
      const auto r = check_plunnecke(c, std::vector<Body>(static_cast<std::size_t>(m), c), 1, b, SeededStream(8, "p"), "c")[0];
      o.require(r.stderr_ == 0.0 && r.verdict == Verdict::pass && std::abs(r.lhs - (1.0 + m)) < 1e-12,
                "equal cubes n=" + std::to_string(n) + " m=" + std::to_string(m));
    }
  }
  o.detail << " equal cubes exact;";
  b.samples = 100000;
  b.inner = 128;
  b.gaussian_closed_form = false;
  std::vector<Density> ys;
  for (double v : {0.5, 2.0, 4.0}) ys.push_back(make_gaussian(Vec::Zero(2), v * Mat::Identity(2, 2)));
  for (int k = 1; k <= 2; ++k) {
    const auto r = check_fracsub(make_standard_gaussian(2), ys, k, b, SeededStream(8, "f").child("k", k), "g")[0];
    o.detail << " k=" << k << ":slack=" << r.slack << "(se " << r.stderr_ << ")";
    o.require(r.verdict == Verdict::pass, "fracsub within 3 stderr at k=" + std::to_string(k));
  }
}

// 9. M-position search.
void m_position(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Mat shape = diag_of(vec_of({10.0, 0.1}));  // semi-axes sqrt(10), 1/sqrt(10): aspect 10, area pi
  const Body e = scale_to_unit_volume(make_ellipsoid(Vec::Zero(2), shape));
  MSearchConfig cfg;  // 500 evaluations x 1e4 samples
  const auto r = m_position_search(e, cfg, SeededStream(9, "ellipse"));
  const double dt = seconds_since(t0);
  o.detail << " objective=" << r.objective << " evals=" << r.iterations << " in " << dt << "s;";
  o.require(r.objective >= 0.98, "objective >= 0.98");
  o.require(r.iterations <= cfg.budget, "within the evaluation budget");
  o.require(dt <= 300.0, "runtime <= 5 min");
  MSearchConfig quick;
  quick.budget = 100;
  quick.samples_per_eval = 2000;
  quick.restarts = 1;
  SeededStream shapes(9, "zonotopes");
  int ok = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec> gens;
    for (int i = 0; i < 4; ++i) gens.push_back(shapes.normal_vec(2));
    const auto z = m_position_search(make_zonotope(Vec::Zero(2), gens), quick, shapes.child("search", t));
    ok += z.objective >= z.identity_objective;
  }
  o.detail << " never-worse " << ok << "/20";
  o.require(ok == 20, "never worse than identity");
}

// 10. Reverse EPI pipeline.
void reverse_epi(Outcome& o) {
  Budget b;
  b.samples = 40000;
  b.inner = 64;
  b.msearch.budget = 150;
  b.msearch.samples_per_eval = 4000;
  b.msearch.restarts = 1;
  for (int n = 1; n <= 2; ++n) {
    const Mat eye = Mat::Identity(n, n);
    Vec d = Vec::Ones(n);
    d(0) = 25.0;
    const std::vector<std::pair<Density, Density>> pairs{
        {make_standard_gaussian(n), make_gaussian(Vec::Zero(n), d.asDiagonal())},
        {make_uniform(make_cube(n)), make_uniform(unit_ball(n))},
        {make_exponential(n, 1.0), make_uniform(make_standard_simplex(n))}};
    int idx = 0;
    for (const auto& [x, y] : pairs) {
      const auto rs = check_reverse_epi(x, y, b, SeededStream(10, "lc").child("n", n).child("pair", idx++), "lc");
      const auto& lo = find(rs, "repi.lower");
      o.require(lo.verdict == Verdict::pass, "h/n >= log sqrt 2 at n=" + std::to_string(n));
    }
    const Density ball = make_uniform(unit_ball(n));
    const auto rb = check_reverse_epi(ball, ball, b, SeededStream(10, "balls").child("n", n), "balls");
    const auto& ceil = find(rb, "repi.volsum_ceiling");
    o.detail << " n=" << n << " ball ratio=" << ceil.lhs << "<=" << ceil.rhs << ";";
    o.require(ceil.verdict == Verdict::pass && std::abs(ceil.rhs - 2.0) < 1e-9, "ball-pair ratio <= 2");
  }
  for (int n = 1; n <= 2; ++n) {
    const double beta = std::max(2.0 * n + 1.0, 3.0 * n);
    Moments ratios;
    bool finite = true;
    for (int seed = 1; seed <= 10; ++seed) {
      const Density p = make_pareto(n, beta);
      const auto rs = check_reverse_epi(p, p, b, SeededStream(static_cast<std::uint64_t>(seed), "pareto"), "pareto");
      const double ratio = find(rs, "repi.ratio").lhs;
      finite = finite && std::isfinite(ratio);
      ratios.add(ratio);
    }
    const double cv = std::sqrt(ratios.variance()) / ratios.mean;
    o.detail << " pareto(" << beta << ") n=" << n << " mean ratio=" << ratios.mean << " cv=" << cv << ";";
    o.require(finite && cv <= 0.2, "Pareto ratio finite with CV <= 20% at n=" + std::to_string(n));
  }
}

// 11. Isotropic reverse inequality.
void isotropic(Outcome& o) {
  Budget b;
  const auto cubes = check_isotropic_repi(make_cube(2), make_cube(2), b, SeededStream(11, "cc"), "cubes");
  const auto& c = find(cubes, "ball");
  o.detail << " cubes " << c.lhs << "<=" << c.rhs << ";";
  o.require(c.stderr_ == 0.0 && std::abs(c.lhs - 4.0 / (8.0 * std::numbers::pi * std::numbers::e)) < 1e-12 &&
                std::abs(c.rhs - 1.0 / 6.0) < 1e-12 && c.verdict == Verdict::pass,
            "cube-cube closed form");
  const auto mixed = check_isotropic_repi(make_cube(2), make_standard_simplex(2), b, SeededStream(11, "cs"), "mixed");
  const auto& m = find(mixed, "ball");
  o.detail << " cube/simplex " << m.lhs << "<=" << m.rhs << "(se " << m.stderr_ << ");";
  o.require(m.verdict == Verdict::pass, "cube/simplex within 3 stderr");
  std::vector<CheckResult> all = cubes;
  all.insert(all.end(), mixed.begin(), mixed.end());
  for (const auto& pair : {std::pair{make_ball(Vec::Zero(3), 1.0), make_cube(3)}}) {
    const auto rs = check_isotropic_repi(pair.first, pair.second, b, SeededStream(11, "bc"), "ball,cube");
    all.insert(all.end(), rs.begin(), rs.end());
  }
  for (const auto& r : all) {
    if (r.name != "isotropic.L2") continue;
    o.require(r.rhs >= r.lhs - 3.0 * r.stderr_, "L^2 >= 1/(2 pi e) for " + r.instance);
  }
}

// 12. Heavy-tail trend along beta = 3, 1.3, 1.1.
void counterexample(Outcome& o) {
  Budget b;
  b.samples = 100000;
  b.inner = 64;
  const auto rs = demo_counterexample({3.0, 1.3, 1.1}, b, SeededStream(12, "counter"));
  for (const auto& r : rs) {
    if (r.name == "counter.ratio") o.detail << " " << r.instance << ":" << r.lhs << "+-" << r.stderr_;
    if (r.name == "counter.monotone") o.require(r.verdict == Verdict::pass, "separation > 3 stderr " + r.instance);
  }
}

// 13. Report bytes do not depend on the worker count.
void determinism(Outcome& o) {
  RunConfig c;
  c.command = "verify";
  c.seed = 42;
  c.samples = 5000;
  c.inner = 32;
  std::ostringstream one, eight, diag;
  c.workers = 1;
  cmd_verify(c, one, diag);
  c.workers = 8;
  cmd_verify(c, eight, diag);
  set_workers(1);
  o.detail << " report bytes=" << one.str().size();
  o.require(!one.str().empty() && one.str() == eight.str(), "byte-identical reports for 1 and 8 workers");
}

struct Criterion {
  const char* title;
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {"EPI equality (Gaussian pairs, uniform pair)", epi_equality},
      {"entropy-volume sandwich for two squares", volsum_sandwich},
      {"exponential law meets the log-concave max-density bound", lc_maxnorm},
      {"Berwald equality for phi = sum x on the simplex", berwald_equality},
      {"Rogers-Shephard sharpness (simplex, cubes)", rogers_shephard},
      {"essential support mass and volume", essential_support_check},
      {"submodularity (closed form, entropy, volume)", submodularity},
      {"Plunnecke-Ruzsa and fractional subadditivity", plunnecke_fracsub},
      {"M-position search", m_position},
      {"reverse EPI pipeline", reverse_epi},
      {"isotropic reverse inequality", isotropic},
      {"heavy-tail counterexample trend", counterexample},
      {"worker-count determinism of verify", determinism}};
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--criterion") only = std::atoi(argv[i + 1]);
  const auto& list = criteria();
  if (only < 0 || only > static_cast<int>(list.size())) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  bool all_pass = true;
  for (int k = 1; k <= static_cast<int>(list.size()); ++k) {
    if (only != 0 && k != only) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      list[static_cast<std::size_t>(k - 1)].run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("criterion %2d: %s - %s (%.1fs)%s\n", k, o.pass ? "PASS" : "FAIL", list[static_cast<std::size_t>(k - 1)].title,
                seconds_since(t0), o.detail.str().c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}

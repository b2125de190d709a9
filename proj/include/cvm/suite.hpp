#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "cvm/inequalities.hpp"

namespace cvm {

struct SuiteConfig {
  std::vector<int> dims{1, 2, 3};
  /// Check families to run; empty means all.
  std::vector<std::string> checks;
  std::vector<double> betas{3.0, 1.3, 1.1};
  Budget budget;
  std::uint64_t seed = 42;
};

/// Families known to run_suite, in a fixed order.
inline const std::vector<std::string>& suite_families() {
  static const std::vector<std::string> names{
      "epi",      "volsum",     "vol_ent",   "cvx_ent",        "berwald",     "maxnorm",
      "innerprod", "vol_maxnorm", "rogers_shephard", "renyi2", "aep",         "submod",
      "vol_submod", "fracsub",   "plunnecke", "reverse_epi",    "isotropic",   "msum",
      "counterexample"};
  return names;
}

struct SuiteJob {
  std::string family;
  int n;
  std::string instance;
  std::function<std::vector<CheckResult>(const SeededStream&)> run;
};

namespace detail {

inline Body unit_ball(int n) { return make_ball(Vec::Zero(n), ball_radius_for_volume(n, 1.0)); }
inline Body centred_cube(int n) { return make_cube(n, -0.5, 0.5); }

/// Random zonotope with n + 1 generators, reproducible from the stream.
inline Body random_zonotope(int n, SeededStream& s) {
  std::vector<Vec> gens;
  for (int i = 0; i <= n; ++i) gens.push_back(s.normal_vec(n));
  return make_zonotope(Vec::Zero(n), gens);
}

/// Rotation by `angle` in the first coordinate plane, as an origin-centred
/// zonotope of the unit cube.
inline Body rotated_cube(int n, double angle) {
  Mat r = Mat::Identity(n, n);
  r(0, 0) = std::cos(angle);
  r(0, 1) = -std::sin(angle);
  r(1, 0) = std::sin(angle);
  r(1, 1) = std::cos(angle);
  std::vector<Vec> gens;
  for (int i = 0; i < n; ++i) gens.push_back(r.col(i));
  return make_zonotope(Vec::Zero(n), gens);
}

inline std::vector<SuiteJob> suite_jobs(const SuiteConfig& cfg) {
  std::vector<SuiteJob> jobs;
  const Budget& b = cfg.budget;
  auto add = [&](std::string family, int n, std::string instance,
                 std::function<std::vector<CheckResult>(const SeededStream&)> fn) {
    jobs.push_back({std::move(family), n, std::move(instance), std::move(fn)});
  };
  const SeededStream shapes(cfg.seed, "instances");

  for (int n : cfg.dims) {
    const Mat eye = Mat::Identity(n, n);
    const Vec zero = Vec::Zero(n);
    const Density g1 = make_gaussian(zero, eye);
    const Density g2 = make_gaussian(zero, 2.0 * eye);
    const Body cube = make_cube(n);
    const Body ccube = centred_cube(n);
    const Body simplex = make_standard_simplex(n);
    const Body ball = unit_ball(n);

    add("epi", n, "gaussian(I)+gaussian(2I)", [=](const SeededStream& s) {
      return check_epi(g1, g2, b, s, "gaussian(I)+gaussian(2I)");
    });
    add("epi", n, "cube01+cube01", [=](const SeededStream& s) {
      return check_epi(make_uniform(cube), make_uniform(cube), b, s, "cube01+cube01");
    });
    add("volsum", n, "cube01+cube01", [=](const SeededStream& s) {
      return check_volsum(cube, cube, b, s, "cube01+cube01");
    });
    if (n == 2) {
      add("volsum", n, "simplex+cube01", [=](const SeededStream& s) {
        return check_volsum(simplex, cube, b, s, "simplex+cube01");
      });
    }
    add("vol_ent", n, "cube01+cube01", [=](const SeededStream& s) {
      return check_vol_ent({cube, cube}, b, s, "cube01+cube01");
    });
    if (n >= 2) {
      add("vol_ent", n, "ball+ball", [=](const SeededStream& s) {
        return check_vol_ent({ball, ball}, b, s, "ball+ball");
      });
    }
    if (n == 2) {
      add("vol_ent", n, "cube01+box+ball", [=](const SeededStream& s) {
        return check_vol_ent({cube, make_box(Vec::Zero(2), vec_of({2.0, 1.0})), ball}, b, s, "cube01+box+ball");
      });
    }
    add("cvx_ent", n, "uniform(cube01)", [=](const SeededStream& s) {
      return check_cvx_ent(make_uniform(cube), b, s, "uniform(cube01)");
    });
    add("cvx_ent", n, "power_simplex(p=2,facet)", [=](const SeededStream& s) {
      return check_cvx_ent(make_power_simplex(n, 2.0, true), b, s, "power_simplex(p=2,facet)");
    });
    add("cvx_ent", n, "power_simplex(p=2,vertex)", [=](const SeededStream& s) {
      return check_cvx_ent(make_power_simplex(n, 2.0, false), b, s, "power_simplex(p=2,vertex)");
    });
    add("berwald", n, "simplex;phi=sum", [=](const SeededStream& s) {
      return check_berwald(simplex, affine_function(Vec::Ones(n), 0.0), 1.0, 2.0, b, s, "simplex;phi=sum");
    });
    add("berwald", n, "simplex;phi=1-sum", [=](const SeededStream& s) {
      return check_berwald(simplex, affine_function(-Vec::Ones(n), 1.0), 1.0, 2.0, b, s, "simplex;phi=1-sum");
    });
    add("berwald", n, "cube01;phi=min3", [=](const SeededStream& s) {
      SeededStream st = shapes.child("berwald", static_cast<std::uint64_t>(n));
      return check_berwald(cube, random_concave_function(cube, 3, st), 0.5, 3.0, b, s, "cube01;phi=min3");
    });
    add("maxnorm", n, "exponential(1)", [=](const SeededStream& s) {
      return check_maxnorm(make_exponential(n, 1.0), b, s, "exponential(1)");
    });
    add("maxnorm", n, "gaussian(I)", [=](const SeededStream& s) { return check_maxnorm(g1, b, s, "gaussian(I)"); });
    add("maxnorm", n, "uniform(cube01)", [=](const SeededStream& s) {
      return check_maxnorm(make_uniform(cube), b, s, "uniform(cube01)");
    });
    add("maxnorm", n, "pareto(3n)", [=](const SeededStream& s) {
      return check_maxnorm(make_pareto(n, 3.0 * n), b, s, "pareto(3n)");
    });
    add("innerprod", n, "gaussian(I)+gaussian(2I)", [=](const SeededStream& s) {
      return check_innerprod(g1, g2, b, s, "gaussian(I)+gaussian(2I)");
    });
    add("innerprod", n, "ccube+ccube", [=](const SeededStream& s) {
      return check_innerprod(make_uniform(ccube), make_uniform(ccube), b, s, "ccube+ccube");
    });
    add("vol_maxnorm", n, "ccube x2", [=](const SeededStream& s) {
      return check_vol_maxnorm({ccube, ccube}, b, s, "ccube x2");
    });
    add("vol_maxnorm", n, "ccube x3", [=](const SeededStream& s) {
      return check_vol_maxnorm({ccube, ccube, ccube}, b, s, "ccube x3");
    });
    if (n >= 2) {
      add("vol_maxnorm", n, "ccube+ball", [=](const SeededStream& s) {
        return check_vol_maxnorm({ccube, ball}, b, s, "ccube+ball");
      });
    }
    add("rogers_shephard", n, "simplex,simplex", [=](const SeededStream& s) {
      return check_rogers_shephard(simplex, simplex, b, s, "simplex,simplex");
    });
    add("rogers_shephard", n, "ccube,ccube", [=](const SeededStream& s) {
      return check_rogers_shephard(ccube, ccube, b, s, "ccube,ccube");
    });
    if (n == 2) {
      add("rogers_shephard", n, "ccube,ball", [=](const SeededStream& s) {
        return check_rogers_shephard(ccube, ball, b, s, "ccube,ball");
      });
    }
    add("renyi2", n, "exponential(1)", [=](const SeededStream& s) {
      return check_renyi2(make_exponential(n, 1.0), b, s, "exponential(1)");
    });
    add("renyi2", n, "gaussian(I)", [=](const SeededStream& s) { return check_renyi2(g1, b, s, "gaussian(I)"); });
    add("renyi2", n, "uniform(cube01)", [=](const SeededStream& s) {
      return check_renyi2(make_uniform(cube), b, s, "uniform(cube01)");
    });
    add("aep", n, "gaussian(I)", [=](const SeededStream& s) { return check_aep(g1, b, s, "gaussian(I)"); });
    add("aep", n, "exponential(1)", [=](const SeededStream& s) {
      return check_aep(make_exponential(n, 1.0), b, s, "exponential(1)");
    });
    {
      const double beta = std::max(n + 1.0, b.beta0 * n);
      const std::string name = "pareto(" + std::to_string(static_cast<int>(beta)) + ")";
      add("aep", n, name, [=](const SeededStream& s) { return check_aep(make_pareto(n, beta), b, s, name); });
    }
    add("submod", n, "gaussian(I,2I,I/2)", [=](const SeededStream& s) {
      return check_submod(g1, g2, make_gaussian(zero, 0.5 * eye), b, s, "gaussian(I,2I,I/2)");
    });
    if (n == 2) {
      add("submod", n, "cube01,cube01,ball", [=](const SeededStream& s) {
        return check_submod(make_uniform(cube), make_uniform(cube), make_uniform(ball), b, s, "cube01,cube01,ball");
      });
    }
    for (int t = 0; t < 2; ++t) {
      const std::string name = "zonotopes#" + std::to_string(t);
      add("vol_submod", n, name, [=](const SeededStream& s) {
        SeededStream st = shapes.child("zonotopes", static_cast<std::uint64_t>(10 * n + t));
        const Body za = random_zonotope(n, st);
        const Body zb = random_zonotope(n, st);
        const Body zd = random_zonotope(n, st);
        return check_vol_submod(za, zb, zd, b, s, name);
      });
    }
    if (n >= 2) {
      add("vol_submod", n, "ccube,rotated,ball", [=](const SeededStream& s) {
        return check_vol_submod2(ccube, rotated_cube(n, M_PI / 4.0), ball, b, s, "ccube,rotated,ball");
      });
    }
    for (int k = 1; k <= 2; ++k) {
      add("fracsub", n, "gaussian m=3", [=](const SeededStream& s) {
        return check_fracsub(g1, {g2, make_gaussian(zero, 0.5 * eye), make_gaussian(zero, 3.0 * eye)}, k, b, s,
                             "gaussian m=3");
      });
    }
    add("plunnecke", n, "cube01 m=3", [=](const SeededStream& s) {
      return check_plunnecke(cube, {cube, cube, cube}, 1, b, s, "cube01 m=3");
    });
    if (n == 2) {
      add("plunnecke", n, "cube01;ball,box,cube01", [=](const SeededStream& s) {
        return check_plunnecke(cube, {ball, make_box(Vec::Zero(2), vec_of({2.0, 1.0})), cube}, 2, b, s,
                               "cube01;ball,box,cube01");
      });
    }
    add("reverse_epi", n, "gaussian(I)+gaussian(diag)", [=](const SeededStream& s) {
      Vec d = Vec::Ones(n);
      d(0) = 10.0;
      return check_reverse_epi(g1, make_gaussian(zero, d.asDiagonal()), b, s, "gaussian(I)+gaussian(diag)");
    });
    add("reverse_epi", n, "ball+ball", [=](const SeededStream& s) {
      return check_reverse_epi(make_uniform(ball), make_uniform(ball), b, s, "ball+ball");
    });
    if (n <= 2) {
      const double beta = std::max(2.0 * n + 1.0, b.beta0 * n);
      const std::string name = "pareto(" + std::to_string(static_cast<int>(beta)) + ")x2";
      add("reverse_epi", n, name, [=](const SeededStream& s) {
        return check_reverse_epi(make_pareto(n, beta), make_pareto(n, beta), b, s, name);
      });
    }
    add("isotropic", n, "cube01,cube01", [=](const SeededStream& s) {
      return check_isotropic_repi(cube, cube, b, s, "cube01,cube01");
    });
    add("isotropic", n, "ball,ball", [=](const SeededStream& s) {
      return check_isotropic_repi(ball, ball, b, s, "ball,ball");
    });
    if (n == 2) {
      add("isotropic", n, "cube01,simplex", [=](const SeededStream& s) {
        return check_isotropic_repi(cube, simplex, b, s, "cube01,simplex");
      });
      add("msum", n, "ccube,ball", [=](const SeededStream& s) { return check_msum(ccube, ball, b, s, "ccube,ball"); });
    }
  }
  if (std::find(cfg.dims.begin(), cfg.dims.end(), 1) != cfg.dims.end()) {
    const auto betas = cfg.betas;
    add("counterexample", 1, "pareto sweep", [=](const SeededStream& s) { return demo_counterexample(betas, b, s); });
  }
  if (!cfg.checks.empty()) {
    std::erase_if(jobs, [&](const SuiteJob& j) {
      return std::find(cfg.checks.begin(), cfg.checks.end(), j.family) == cfg.checks.end();
    });
  }
  return jobs;
}

}  // namespace detail

/// Sort key of the report.
inline bool record_less(const CheckResult& a, const CheckResult& b) {
  return std::tie(a.name, a.n, a.instance, a.seed) < std::tie(b.name, b.n, b.instance, b.seed);
}

/// Runs jobs concurrently, each with its own labelled substream, and sorts
/// the records. A precondition violation becomes a report-only
/// "<family>.config_error" record.
// An instance the checks cannot run becomes a report-only record.
inline std::vector<CheckResult> config_error(const SuiteJob& job, const std::string& what, std::uint64_t seed) {
  return {make_check(job.family + ".config_error", job.n, job.instance + ": " + what, 0.0, 0.0, 0.0,
                     CheckKind::report_only, seed)};
}

inline std::vector<CheckResult> run_jobs(const std::vector<SuiteJob>& jobs, std::uint64_t seed) {
  const SeededStream root(seed, "suite");
  auto parts = map_chunks<std::vector<CheckResult>>(static_cast<std::int64_t>(jobs.size()), [&](std::int64_t i) {
    const auto& job = jobs[static_cast<std::size_t>(i)];
    const SeededStream s = root.child(job.family + "/" + job.instance + "/n" + std::to_string(job.n));
    try {
      return job.run(s);
    } catch (const PreconditionError& e) {
      return config_error(job, e.what(), seed);
    } catch (const OracleUnavailable& e) {
      return config_error(job, e.what(), seed);
    }
  });
  std::vector<CheckResult> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  std::stable_sort(out.begin(), out.end(), record_less);
  return out;
}

inline std::vector<CheckResult> run_suite(const SuiteConfig& cfg) {
  for (int n : cfg.dims) require_dim(n);
  for (const auto& c : cfg.checks) {
    const auto& known = suite_families();
    if (std::find(known.begin(), known.end(), c) == known.end()) throw PreconditionError("unknown check: " + c);
  }
  return run_jobs(detail::suite_jobs(cfg), cfg.seed);
}

inline bool has_config_errors(const std::vector<CheckResult>& rs) {
  return std::any_of(rs.begin(), rs.end(), [](const CheckResult& r) {
    return r.name.size() > 13 && r.name.ends_with(".config_error");
  });
}

}  // namespace cvm

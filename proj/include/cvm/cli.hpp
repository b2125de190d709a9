#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cvm/report.hpp"

namespace cvm {

/// Everything a command needs; fields unused by a command are ignored.
struct RunConfig {
  std::string command;
  std::vector<int> dims{1, 2, 3};
  std::vector<std::string> checks;
  std::vector<double> betas{3.0, 1.3, 1.1};
  double beta0 = 3.0;
  std::int64_t samples = 200000;
  std::int64_t inner = 256;
  std::uint64_t seed = 42;
  int workers = 1;
  std::string out;
  std::string format = "json";
  std::string instances;

  // entropy
  std::string family;
  std::vector<std::string> sum;
  std::string density_file;
  std::string method = "auto";
  double beta = 3.0;
  double rate = 1.0;
  double p = 1.0;
  bool facet = false;
  int k = 5;

  // volume / mposition
  std::string body = "cube";
  std::string body_file;
  double r = 1.0;
  double aspect = 1.0;
  bool monte_carlo = false;
  int budget = 500;
  std::int64_t samples_per_eval = 10000;
};

/// Canonical text of the result-affecting fields (workers and output
/// location are excluded).
inline std::string canonical_config(const RunConfig& c) {
  std::ostringstream o;
  o << std::setprecision(17) << c.command << ";dims=";
  for (int n : c.dims) o << n << ',';
  o << ";checks=";
  for (const auto& s : c.checks) o << s << ',';
  o << ";betas=";
  for (double b : c.betas) o << b << ',';
  o << ";beta0=" << c.beta0 << ";samples=" << c.samples << ";inner=" << c.inner << ";seed=" << c.seed;
  if (!c.instances.empty()) {
    std::ifstream in(c.instances);
    std::stringstream text;
    text << in.rdbuf();
    o << ";instances=" << digest_of(text.str());
  }
  return o.str();
}

inline Budget budget_of(const RunConfig& c) {
  Budget b;
  b.samples = c.samples;
  b.inner = c.inner;
  b.beta0 = c.beta0;
  return b;
}

namespace detail {

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

/// Body from a shorthand name; r scales, aspect stretches the first axis.
inline Body body_from_name(const std::string& name, int n, double r, double aspect) {
  require_dim(n);
  if (!(r > 0.0)) throw PreconditionError("--r must be positive");
  if (name == "cube") return make_cube(n, 0.0, r);
  if (name == "ccube") return make_cube(n, -0.5 * r, 0.5 * r);
  if (name == "ball") return make_ball(Vec::Zero(n), r);
  if (name == "simplex") return make_standard_simplex(n, r);
  if (name == "ellipsoid") {
    if (!(aspect > 0.0)) throw PreconditionError("--aspect must be positive");
    Vec axes = Vec::Constant(n, r);
    axes(0) *= aspect;
    return make_ellipsoid(Vec::Zero(n), Mat(axes.array().square().matrix().asDiagonal()));
  }
  throw PreconditionError("unknown body: " + name);
}

/// Density from a shorthand family name.
inline Density density_from_name(const std::string& name, int n, const RunConfig& c) {
  require_dim(n);
  if (name == "uniform" || name == "uniform01") return make_uniform(make_cube(n));
  if (name == "gaussian") return make_standard_gaussian(n);
  if (name == "exponential") return make_exponential(n, c.rate);
  if (name == "pareto") return make_pareto(n, c.beta);
  if (name == "power_simplex") return make_power_simplex(n, c.p, c.facet);
  throw PreconditionError("unknown family: " + name);
}

inline int single_dim(const RunConfig& c) {
  if (c.dims.size() != 1) throw PreconditionError("this command takes a single --dim");
  require_dim(c.dims.front());
  return c.dims.front();
}

inline void print_json(std::ostream& os, const nlohmann::ordered_json& j) { os << j.dump(2) << '\n'; }

}  // namespace detail

/// Runs the default suite (or an instance file) and writes the report.
/// Exit 0 iff no pass/fail record failed; 2 on configuration errors.
inline int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& diag) {
  if (c.format != "json" && c.format != "csv") throw PreconditionError("--format must be json or csv");
  if (c.samples < 1 || c.inner < 1) throw PreconditionError("--samples and --inner must be positive");
  set_workers(c.workers);
  const Budget b = budget_of(c);
  std::vector<CheckResult> records;
  if (!c.instances.empty()) {
    records = run_jobs(jobs_from_json(detail::read_json_file(c.instances), b), c.seed);
  } else {
    SuiteConfig sc;
    sc.dims = c.dims;
    sc.checks = c.checks;
    sc.betas = c.betas;
    sc.budget = b;
    sc.seed = c.seed;
    records = run_suite(sc);
  }

  const ReportHeader header{kToolVersion, c.seed, digest_of(canonical_config(c))};
  auto write = [&](std::ostream& os) {
    if (c.format == "csv") {
      write_report_csv(os, records);
    } else {
      write_report_json(os, header, records);
    }
  };
  if (c.out.empty() || c.out == "-") {
    write(out);
  } else {
    std::ofstream file(c.out);
    if (!file) throw PreconditionError("cannot write " + c.out);
    write(file);
  }

  int pass = 0, fail = 0, report = 0;
  for (const auto& r : records) {
    if (r.verdict == Verdict::pass) ++pass;
    if (r.verdict == Verdict::fail) ++fail;
    if (r.verdict == Verdict::report_only) ++report;
  }
  diag << records.size() << " records: " << pass << " pass, " << fail << " fail, " << report << " report-only\n";
  for (const auto& r : records)
    if (r.verdict == Verdict::fail) diag << "FAIL " << r.name << " n=" << r.n << ' ' << r.instance << '\n';
  if (has_config_errors(records)) {
    for (const auto& r : records)
      if (r.name.ends_with(".config_error")) diag << "config error: " << r.instance << '\n';
    return 2;
  }
  return fail == 0 ? 0 : 1;
}

/// Entropy of one density or of a sum of independent draws.
inline int cmd_entropy(const RunConfig& c, std::ostream& out) {
  set_workers(c.workers);
  const int n = c.density_file.empty() ? detail::single_dim(c) : 0;
  const SeededStream s(c.seed, "entropy");
  EntropyValue v;
  std::string what;
  if (!c.sum.empty()) {
    if (c.sum.size() != 2) throw PreconditionError("--sum takes exactly two families");
    const Density x = detail::density_from_name(c.sum[0], n, c);
    const Density y = detail::density_from_name(c.sum[1], n, c);
    SmoothedSumConfig cfg{c.samples, c.inner, InnerScheme::one_sided};
    if (detail::heavy_tailed(x) || detail::heavy_tailed(y)) cfg.scheme = InnerScheme::balanced;
    v = entropy_sum_smoothed(x, y, cfg, s);
    what = c.sum[0] + "+" + c.sum[1];
  } else {
    const Density d = c.density_file.empty() ? detail::density_from_name(c.family, n, c)
                                             : density_from_json(detail::read_json_file(c.density_file));
    what = d.family();
    if (c.method == "auto") {
      v = entropy_auto(d, c.samples, s);
    } else if (c.method == "analytic") {
      v = entropy_analytic(d);
    } else if (c.method == "plugin") {
      v = entropy_plugin_mc(d, c.samples, s);
    } else if (c.method == "knn") {
      v = entropy_knn(d, c.samples, c.k, s);
    } else {
      throw PreconditionError("unknown --method: " + c.method);
    }
  }
  nlohmann::ordered_json j;
  j["density"] = what;
  j["n"] = v.n;
  j["method"] = to_string(v.method);
  j["h"] = detail::number(v.h);
  j["H"] = detail::number(entropy_power(v));
  j["stderr"] = detail::number(v.stderr_);
  j["H_stderr"] = detail::number(entropy_power_stderr(v));
  j["samples"] = v.samples;
  if (v.bias_flag) j["bias_flag"] = true;
  detail::print_json(out, j);
  return 0;
}

inline Body body_of(const RunConfig& c) {
  if (!c.body_file.empty()) return body_from_json(detail::read_json_file(c.body_file));
  return detail::body_from_name(c.body, detail::single_dim(c), c.r, c.aspect);
}

/// Volume, exact when a closed form exists unless --mc is given.
inline int cmd_volume(const RunConfig& c, std::ostream& out) {
  set_workers(c.workers);
  const Body body = body_of(c);
  const SeededStream s(c.seed, "volume");
  const bool exact = has_exact_volume(body) && !c.monte_carlo;
  const Estimate v = exact ? Estimate{volume_exact(body), 0.0, 0} : volume_mc(body, c.samples, s);
  nlohmann::ordered_json j;
  j["body"] = body.kind();
  j["n"] = body.dim();
  j["method"] = exact ? "exact" : "monte_carlo";
  j["volume"] = v.value;
  j["stderr"] = v.stderr_;
  detail::print_json(out, j);
  return 0;
}

/// M-position search on a body.
inline int cmd_mposition(const RunConfig& c, std::ostream& out) {
  set_workers(c.workers);
  const Body body = body_of(c);
  MSearchConfig cfg;
  cfg.budget = c.budget;
  cfg.samples_per_eval = c.samples_per_eval;
  const auto r = m_position_search(body, cfg, SeededStream(c.seed, "mposition"));
  nlohmann::ordered_json j;
  j["body"] = body.kind();
  j["n"] = body.dim();
  j["objective"] = r.objective;
  j["stderr"] = r.objective_stderr;
  j["identity_objective"] = r.identity_objective;
  j["evaluations"] = r.iterations;
  j["budget_exhausted"] = r.budget_exhausted;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.map.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index k = 0; k < r.map.cols(); ++k) row.push_back(r.map(i, k));
    rows.push_back(row);
  }
  j["map"] = rows;
  detail::print_json(out, j);
  return 0;
}

/// Pareto sweep table; exit 1 when the minimum ratio is not strictly
/// increasing with separation above 3 combined standard errors.
inline int cmd_demo_counterexample(const RunConfig& c, std::ostream& out) {
  set_workers(c.workers);
  const Budget b = budget_of(c);
  const SeededStream s(c.seed, "counterexample");
  const auto rows = counterexample_sweep(c.betas, b, s);
  char line[256];
  std::snprintf(line, sizeof line, "%8s %14s %14s %14s %14s %12s\n", "beta", "H(X)", "H(X+Y)/H(X)", "H(X-Y)/H(X)",
                "min_ratio", "stderr");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%8.4g %14.6g %14.6g %14.6g %14.6g %12.4g\n", r.beta, std::exp(2.0 * r.h),
                  r.plus, r.minus, r.min_ratio(), r.min_se());
    out << line;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double se = std::hypot(rows[i - 1].min_se(), rows[i].min_se());
    monotone = monotone && rows[i].min_ratio() - rows[i - 1].min_ratio() > kSigmas * se;
  }
  out << (monotone ? "monotone: yes\n" : "monotone: no\n");
  return monotone ? 0 : 1;
}

}  // namespace cvm

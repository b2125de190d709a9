#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvm/suite.hpp"

namespace cvm {

inline constexpr const char* kToolVersion = "0.1.0";

struct ReportHeader {
  std::string tool_version = kToolVersion;
  std::uint64_t root_seed = 0;
  std::string config_digest;
};

/// 64-bit FNV-1a of a canonical config string, as 16 hex digits.
inline std::string digest_of(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

/// Non-finite values have no JSON number form; they are written as null.
inline nlohmann::ordered_json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline double number_from(const nlohmann::ordered_json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const CheckResult& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["n"] = r.n;
  j["instance"] = r.instance;
  j["lhs"] = detail::number(r.lhs);
  j["rhs"] = detail::number(r.rhs);
  j["slack"] = detail::number(r.slack);
  j["stderr"] = detail::number(r.stderr_);
  j["verdict"] = to_string(r.verdict);
  j["seed"] = r.seed;
  return j;
}

inline CheckResult record_from_json(const nlohmann::ordered_json& j) {
  CheckResult r;
  r.name = j.at("name").get<std::string>();
  r.n = j.at("n").get<int>();
  r.instance = j.at("instance").get<std::string>();
  r.lhs = detail::number_from(j.at("lhs"));
  r.rhs = detail::number_from(j.at("rhs"));
  r.slack = detail::number_from(j.at("slack"));
  r.stderr_ = detail::number_from(j.at("stderr"));
  const auto v = j.at("verdict").get<std::string>();
  r.verdict = v == "pass" ? Verdict::pass : v == "fail" ? Verdict::fail : Verdict::report_only;
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

inline void write_report_json(std::ostream& os, const ReportHeader& h, const std::vector<CheckResult>& rs) {
  nlohmann::ordered_json doc;
  doc["header"] = {{"tool_version", h.tool_version}, {"root_seed", h.root_seed}, {"config_digest", h.config_digest}};
  doc["records"] = nlohmann::ordered_json::array();
  for (const auto& r : rs) doc["records"].push_back(to_json(r));
  os << doc.dump(2) << '\n';
}

inline std::vector<CheckResult> read_report_json(std::istream& is) {
  const auto doc = nlohmann::ordered_json::parse(is);
  std::vector<CheckResult> out;
  for (const auto& j : doc.at("records")) out.push_back(record_from_json(j));
  return out;
}

namespace detail {
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace detail

inline void write_report_csv(std::ostream& os, const std::vector<CheckResult>& rs) {
  os << "name,n,instance,lhs,rhs,slack,stderr,verdict,seed\n";
  for (const auto& r : rs) {
    os << detail::csv_field(r.name) << ',' << r.n << ',' << detail::csv_field(r.instance) << ','
       << detail::csv_number(r.lhs) << ',' << detail::csv_number(r.rhs) << ',' << detail::csv_number(r.slack) << ','
       << detail::csv_number(r.stderr_) << ',' << to_string(r.verdict) << ',' << r.seed << '\n';
  }
}

// ---------------------------------------------------------------- literals

using Json = nlohmann::json;

namespace detail {

inline Vec vec_from(const Json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  require_dim(static_cast<int>(v.size()));
  return v;
}

inline Mat mat_from(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) throw PreconditionError("empty matrix literal");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  if (rows > kMaxDim || cols > kMaxDim) throw PreconditionError("matrix literal exceeds the dimension cap");
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols) {
      throw PreconditionError("ragged matrix literal");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline std::vector<Vec> points_from(const Json& j) {
  std::vector<Vec> out;
  for (const auto& p : j) out.push_back(vec_from(p));
  return out;
}

inline int dim_from(const Json& j) {
  const int n = j.at("dim").get<int>();
  require_dim(n);
  return n;
}

}  // namespace detail

/// {"type": "box"|"cube"|"ball"|"ellipsoid"|"simplex"|"standard_simplex"|
///  "polytope"|"zonotope"|"sum", ...numeric fields}
inline Body body_from_json(const Json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "box") return make_box(detail::vec_from(j.at("lo")), detail::vec_from(j.at("hi")));
  if (type == "cube") return make_cube(detail::dim_from(j), j.value("lo", 0.0), j.value("hi", 1.0));
  if (type == "ball") {
    const Vec c = j.contains("center") ? detail::vec_from(j.at("center")) : Vec::Zero(detail::dim_from(j));
    return make_ball(c, j.at("radius").get<double>());
  }
  if (type == "ellipsoid") return make_ellipsoid(detail::vec_from(j.at("center")), detail::mat_from(j.at("shape")));
  if (type == "simplex") return make_simplex(detail::points_from(j.at("vertices")));
  if (type == "standard_simplex") return make_standard_simplex(detail::dim_from(j), j.value("scale", 1.0));
  if (type == "polytope") return make_vpolytope(detail::points_from(j.at("vertices")));
  if (type == "zonotope") {
    const auto gens = detail::points_from(j.at("generators"));
    if (gens.empty()) throw PreconditionError("zonotope literal needs generators");
    const Vec c = j.contains("center") ? detail::vec_from(j.at("center")) : Vec::Zero(gens.front().size());
    return make_zonotope(c, gens);
  }
  if (type == "sum") {
    std::vector<Body> parts;
    for (const auto& c : j.at("children")) parts.push_back(body_from_json(c));
    if (parts.empty()) throw PreconditionError("sum literal needs children");
    return detail::sum_of(parts);
  }
  throw PreconditionError("unknown body type: " + type);
}

/// {"family": "uniform"|"gaussian"|"exponential"|"pareto"|"power_simplex"|
///  "pushforward"|"symmetrized"|"sum", ...}
inline Density density_from_json(const Json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "uniform") return make_uniform(body_from_json(j.at("body")));
  if (family == "gaussian") {
    if (j.contains("cov")) {
      const Mat cov = detail::mat_from(j.at("cov"));
      const Vec mean = j.contains("mean") ? detail::vec_from(j.at("mean")) : Vec::Zero(cov.rows());
      return make_gaussian(mean, cov);
    }
    return make_standard_gaussian(detail::dim_from(j));
  }
  if (family == "exponential") return make_exponential(detail::dim_from(j), j.value("rate", 1.0));
  if (family == "pareto") return make_pareto(detail::dim_from(j), j.at("beta").get<double>());
  if (family == "power_simplex") {
    return make_power_simplex(detail::dim_from(j), j.at("p").get<double>(), j.value("facet", false));
  }
  if (family == "pushforward") {
    const Density child = density_from_json(j.at("of"));
    const Vec offset = j.contains("offset") ? detail::vec_from(j.at("offset")) : Vec::Zero(child.dim());
    return pushforward(detail::mat_from(j.at("map")), child, offset);
  }
  if (family == "symmetrized") return symmetrize(density_from_json(j.at("of")));
  if (family == "sum") return make_sum_pair(density_from_json(j.at("a")), density_from_json(j.at("b")));
  throw PreconditionError("unknown density family: " + family);
}

inline ConcaveFunction concave_from_json(const Json& j) {
  ConcaveFunction f;
  for (const auto& piece : j.at("pieces")) {
    f.slopes.push_back(detail::vec_from(piece.at("slope")));
    f.offsets.push_back(piece.at("offset").get<double>());
  }
  if (f.slopes.empty()) throw PreconditionError("concave function literal needs pieces");
  return f;
}

namespace detail {

inline std::vector<Body> bodies_from(const Json& j) {
  std::vector<Body> out;
  for (const auto& b : j) out.push_back(body_from_json(b));
  return out;
}

inline std::vector<Density> densities_from(const Json& j) {
  std::vector<Density> out;
  for (const auto& d : j) out.push_back(density_from_json(d));
  return out;
}

}  // namespace detail

/// Jobs from an instance document {"checks": [{"check": ..., "label": ..., ...}]}.
/// Literals are parsed eagerly so a malformed file fails before any work.
inline std::vector<SuiteJob> jobs_from_json(const Json& doc, const Budget& b) {
  std::vector<SuiteJob> jobs;
  int index = 0;
  for (const auto& c : doc.at("checks")) {
    const auto check = c.at("check").get<std::string>();
    const std::string label = c.value("label", check + "#" + std::to_string(index++));
    SuiteJob job{check, 1, label, {}};
    auto body = [&](const char* key) { return body_from_json(c.at(key)); };
    auto density = [&](const char* key) { return density_from_json(c.at(key)); };
    if (check == "epi" || check == "innerprod" || check == "reverse_epi") {
      const Density x = density("x"), y = density("y");
      job.n = x.dim();
      if (check == "epi") job.run = [=](const SeededStream& s) { return check_epi(x, y, b, s, label); };
      if (check == "innerprod") job.run = [=](const SeededStream& s) { return check_innerprod(x, y, b, s, label); };
      if (check == "reverse_epi") job.run = [=](const SeededStream& s) { return check_reverse_epi(x, y, b, s, label); };
    } else if (check == "cvx_ent" || check == "maxnorm" || check == "renyi2" || check == "aep") {
      const Density x = density("x");
      job.n = x.dim();
      if (check == "cvx_ent") job.run = [=](const SeededStream& s) { return check_cvx_ent(x, b, s, label); };
      if (check == "maxnorm") job.run = [=](const SeededStream& s) { return check_maxnorm(x, b, s, label); };
      if (check == "renyi2") job.run = [=](const SeededStream& s) { return check_renyi2(x, b, s, label); };
      if (check == "aep") job.run = [=](const SeededStream& s) { return check_aep(x, b, s, label); };
    } else if (check == "volsum" || check == "rogers_shephard" || check == "isotropic" || check == "msum") {
      const Body a = body("a"), bb = body("b");
      job.n = a.dim();
      if (check == "volsum") job.run = [=](const SeededStream& s) { return check_volsum(a, bb, b, s, label); };
      if (check == "rogers_shephard") {
        job.run = [=](const SeededStream& s) { return check_rogers_shephard(a, bb, b, s, label); };
      }
      if (check == "isotropic") job.run = [=](const SeededStream& s) { return check_isotropic_repi(a, bb, b, s, label); };
      if (check == "msum") job.run = [=](const SeededStream& s) { return check_msum(a, bb, b, s, label); };
    } else if (check == "vol_ent" || check == "vol_maxnorm") {
      const auto bodies = detail::bodies_from(c.at("bodies"));
      if (bodies.empty()) throw PreconditionError(check + ": no bodies");
      job.n = bodies.front().dim();
      if (check == "vol_ent") job.run = [=](const SeededStream& s) { return check_vol_ent(bodies, b, s, label); };
      if (check == "vol_maxnorm") job.run = [=](const SeededStream& s) { return check_vol_maxnorm(bodies, b, s, label); };
    } else if (check == "berwald") {
      const Body a = body("body");
      const ConcaveFunction phi = concave_from_json(c.at("phi"));
      const double p = c.value("p", 1.0), q = c.value("q", 2.0);
      job.n = a.dim();
      job.run = [=](const SeededStream& s) { return check_berwald(a, phi, p, q, b, s, label); };
    } else if (check == "submod") {
      const Density x = density("x"), y = density("y"), z = density("z");
      job.n = x.dim();
      job.run = [=](const SeededStream& s) { return check_submod(x, y, z, b, s, label); };
    } else if (check == "vol_submod" || check == "vol_submod2") {
      const Body a = body("a"), bb = body("b"), d = body("d");
      job.n = a.dim();
      if (check == "vol_submod") job.run = [=](const SeededStream& s) { return check_vol_submod(a, bb, d, b, s, label); };
      if (check == "vol_submod2") {
        job.run = [=](const SeededStream& s) { return check_vol_submod2(a, bb, d, b, s, label); };
      }
    } else if (check == "fracsub") {
      const Density x = density("x");
      const auto ys = detail::densities_from(c.at("ys"));
      const int k = c.at("k").get<int>();
      job.n = x.dim();
      job.run = [=](const SeededStream& s) { return check_fracsub(x, ys, k, b, s, label); };
    } else if (check == "plunnecke") {
      const Body a = body("a");
      const auto bs = detail::bodies_from(c.at("bodies"));
      const int k = c.at("k").get<int>();
      job.n = a.dim();
      job.run = [=](const SeededStream& s) { return check_plunnecke(a, bs, k, b, s, label); };
    } else if (check == "counterexample") {
      const auto betas = c.at("betas").get<std::vector<double>>();
      job.run = [=](const SeededStream& s) { return demo_counterexample(betas, b, s); };
    } else {
      throw PreconditionError("unknown check in instance file: " + check);
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

}  // namespace cvm

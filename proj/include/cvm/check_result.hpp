#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace cvm {

enum class Verdict { pass, fail, report_only };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::report_only: return "report-only";
  }
  return "?";
}

/// exact: slack >= -kTolExact (scaled by the magnitude of the sides);
/// statistical: slack >= -kSigmas * stderr; report_only never fails.
enum class CheckKind { exact, statistical, report_only };

inline constexpr double kTolExact = 1e-9;
inline constexpr double kSigmas = 3.0;

/// One inequality instance, oriented so that lhs <= rhs is the claim.
struct CheckResult {
  std::string name;
  int n = 1;
  std::string instance;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double stderr_ = 0.0;
  Verdict verdict = Verdict::report_only;
  std::uint64_t seed = 0;
};

inline Verdict judge(double lhs, double rhs, double stderr_, CheckKind kind) {
  const double slack = rhs - lhs;
  switch (kind) {
    case CheckKind::report_only: return Verdict::report_only;
    case CheckKind::exact: {
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      return slack >= -kTolExact * scale ? Verdict::pass : Verdict::fail;
    }
    case CheckKind::statistical: return slack >= -kSigmas * stderr_ ? Verdict::pass : Verdict::fail;
  }
  return Verdict::fail;
}

inline CheckResult make_check(std::string name, int n, std::string instance, double lhs, double rhs, double stderr_,
                              CheckKind kind, std::uint64_t seed) {
  CheckResult r;
  r.name = std::move(name);
  r.n = n;
  r.instance = std::move(instance);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.stderr_ = stderr_;
  r.verdict = judge(lhs, rhs, stderr_, kind);
  r.seed = seed;
  return r;
}

/// Statistical when any error bar is present, else exact.
inline CheckKind kind_for(double stderr_) { return stderr_ > 0.0 ? CheckKind::statistical : CheckKind::exact; }

inline bool any_failed(const std::vector<CheckResult>& rs) {
  return std::any_of(rs.begin(), rs.end(), [](const CheckResult& r) { return r.verdict == Verdict::fail; });
}

}  // namespace cvm

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cvm/body.hpp"
#include "cvm/check_result.hpp"
#include "cvm/entropy.hpp"
#include "cvm/error.hpp"
#include "cvm/measures.hpp"

namespace cvm {

/// log of exp(-32 beta0 / (beta0 - 1)).
inline double log_c0_convex(double beta0) {
  if (!(beta0 > 1.0)) throw PreconditionError("c0_convex: need beta0 > 1");
  if (beta0 == kInf) return -32.0;
  return -32.0 * beta0 / (beta0 - 1.0);
}

inline double c0_convex(double beta0) { return std::exp(log_c0_convex(beta0)); }

struct LogConcaveConstants {
  double c0;
  double c1;
};

inline LogConcaveConstants c0_logconcave() { return {std::exp(-8.0), 0.2}; }

/// K_f = {f >= c0^n ||f||} as an exact body.
struct EssentialSupport {
  Body body;
  double c0;
  double level;
};

inline EssentialSupport essential_support(const Density& d, double c0) {
  if (!(c0 > 0.0 && c0 < 1.0)) throw PreconditionError("essential_support: need 0 < c0 < 1");
  const int n = d.dim();
  const double log_c0 = std::log(c0);
  const double level = std::exp(n * log_c0) * max_density(d);
  auto body = std::visit(
      [&](const auto& f) -> Body {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return f.body;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return make_ellipsoid(f.mean, 2.0 * n * (-log_c0) * f.cov);
        } else if constexpr (std::is_same_v<T, ExponentialOrthant>) {
          return make_standard_simplex(n, n * (-log_c0) / f.rate);
        } else if constexpr (std::is_same_v<T, ParetoOrthant>) {
          return make_standard_simplex(n, std::expm1(-(n / f.beta) * log_c0));
        } else if constexpr (std::is_same_v<T, PowerSimplex>) {
          if (f.p == 0.0) return make_standard_simplex(n);
          const double t = std::exp((n / f.p) * log_c0);
          if (f.facet) return make_standard_simplex(n, 1.0 - t);
          return make_simplex_slab(n, t, 1.0);
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          return linear_image(f.map, essential_support(*f.child, c0).body, f.offset);
        } else {
          throw OracleUnavailable("no closed-form level set for a " + d.family() + " law");
        }
      },
      d.variant());
  return {std::move(body), c0, level};
}

/// mu(K_f) by Monte Carlo.
inline Estimate support_mass_mc(const Density& d, const EssentialSupport& es, std::int64_t samples,
                                const SeededStream& stream) {
  Moments m = mc_moments(samples, stream, [&](SeededStream& s) { return contains(es.body, sample(d, s)) ? 1.0 : 0.0; });
  const double p = m.mean;
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), samples};
}

/// Mass bound: mu(K_f) >= target (1/2 for convex measures, 1 - c1^n for
/// log-concave ones).
inline CheckResult check_support_mass(const Density& d, const EssentialSupport& es, double target,
                                      std::int64_t samples, const SeededStream& stream, const std::string& instance) {
  const Estimate mass = support_mass_mc(d, es, samples, stream);
  return make_check("aep.mass", d.dim(), instance, target, mass.value, mass.stderr_, CheckKind::statistical,
                    stream.root_seed());
}

/// |K_f| exactly when possible, else hit-or-miss.
inline Estimate support_volume(const EssentialSupport& es, std::int64_t samples, const SeededStream& stream) {
  return volume_auto(es.body, samples, stream);
}

/// (1/2)||f||^{-1/n} <= |K_f|^{1/n} <= c0^{-1} ||f||^{-1/n}, as two records.
inline std::vector<CheckResult> check_support_volume(const Density& d, const EssentialSupport& es,
                                                     std::int64_t samples, const SeededStream& stream,
                                                     const std::string& instance) {
  const int n = d.dim();
  const double norm_root = std::pow(max_density(d), -1.0 / n);
  const Estimate vol = support_volume(es, samples, stream);
  const double root = std::pow(vol.value, 1.0 / n);
  const double root_se = vol.value > 0.0 ? root / (n * vol.value) * vol.stderr_ : 0.0;
  const auto kind = kind_for(root_se);
  return {make_check("aep.volume.lower", n, instance, 0.5 * norm_root, root, root_se, kind, stream.root_seed()),
          make_check("aep.volume.upper", n, instance, root, norm_root / es.c0, root_se, kind, stream.root_seed())};
}

/// H(X) / |K_f|^{2/n}.
inline Estimate typset_ratio(const Density& d, const EssentialSupport& es, std::int64_t samples,
                             const SeededStream& stream) {
  const int n = d.dim();
  const EntropyValue h = entropy_auto(d, samples, stream.child("entropy"));
  const Estimate vol = support_volume(es, samples, stream.child("volume"));
  const double ratio = entropy_power(h) / std::pow(vol.value, 2.0 / n);
  // Relative errors add in quadrature.
  const double rel = std::hypot(2.0 / n * h.stderr_, vol.value > 0.0 ? 2.0 / n * vol.stderr_ / vol.value : 0.0);
  return {ratio, ratio * rel, samples};
}

}  // namespace cvm

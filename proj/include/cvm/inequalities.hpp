#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cvm/body.hpp"
#include "cvm/check_result.hpp"
#include "cvm/entropy.hpp"
#include "cvm/error.hpp"
#include "cvm/measures.hpp"
#include "cvm/positions.hpp"
#include "cvm/special.hpp"
#include "cvm/support.hpp"

namespace cvm {

/// Sample sizes and constants shared by all checks.
struct Budget {
  std::int64_t samples = 200000;
  std::int64_t inner = 256;
  double beta0 = 3.0;
  MSearchConfig msearch{};
  /// Report-only reference for H(X~+Y~)/(H(X)+H(Y)).
  double ratio_ceiling = 50.0;
  /// Floor for the intersection ratio of two bodies in M-position.
  double c_floor = 0.1;
  /// Use closed-form entropies when every law is Gaussian.
  bool gaussian_closed_form = true;
};

namespace detail {

inline double hypot_all(std::initializer_list<double> xs) {
  double s = 0.0;
  for (double x : xs) s += x * x;
  return std::sqrt(s);
}

inline bool heavy_tailed(const Density& d) {
  if (d.as<ParetoOrthant>()) return true;
  if (const auto* lp = d.as<LinearPushforward>()) return heavy_tailed(*lp->child);
  if (const auto* s = d.as<SymmetrizedPair>()) return heavy_tailed(*s->child);
  if (const auto* s = d.as<SumPair>()) return heavy_tailed(*s->a) || heavy_tailed(*s->b);
  return false;
}

inline bool all_gaussian(std::initializer_list<const Density*> ds) {
  return std::all_of(ds.begin(), ds.end(), [](const Density* d) { return d->as<Gaussian>() != nullptr; });
}

inline bool is_log_concave(const Density& d) { return kappa_of(d).kappa >= 0.0; }

// log det of the covariance when known in closed form.
inline std::optional<double> log_spread(const Density& d) {
  const auto mc = exact_mean_cov(d);
  if (!mc) return std::nullopt;
  return std::log(std::max(mc->second.determinant(), 1e-300));
}

/// h(X + Y) by the smoothed estimator. The evaluable summand is placed
/// first; when both are, the wider one is evaluated and the narrower one
/// sampled, which keeps the inner terms flat. Heavy tails switch to the
/// balanced inner scheme.
inline EntropyValue entropy_of_sum(const Density& x, const Density& y, const Budget& b, const SeededStream& s) {
  const Density* first = &x;
  const Density* second = &y;
  if (!is_evaluable(x) && is_evaluable(y)) std::swap(first, second);
  if (is_evaluable(x) && is_evaluable(y)) {
    const auto sx = log_spread(x), sy = log_spread(y);
    if (sx && sy && *sy > *sx) std::swap(first, second);
  }
  SmoothedSumConfig cfg{b.samples, b.inner, InnerScheme::one_sided};
  if ((heavy_tailed(x) || heavy_tailed(y)) && is_evaluable(x) && is_evaluable(y)) cfg.scheme = InnerScheme::balanced;
  return entropy_sum_smoothed(*first, *second, cfg, s);
}

/// Entropy of a single law: plug-in Monte Carlo when evaluable, otherwise
/// through the smoothed estimator on its summands.
inline EntropyValue entropy_of(const Density& d, const Budget& b, const SeededStream& s) {
  if (is_evaluable(d)) return entropy_plugin_mc(d, b.samples, s);
  if (const auto* sp = d.as<SumPair>()) return entropy_of_sum(*sp->a, *sp->b, b, s);
  if (const auto* sy = d.as<SymmetrizedPair>()) {
    const int n = d.dim();
    return entropy_of_sum(*sy->child, pushforward(-Mat::Identity(n, n), *sy->child), b, s);
  }
  const auto& lp = *d.as<LinearPushforward>();
  auto inner = entropy_of(*lp.child, b, s);
  inner.h += lp.log_abs_det;
  return inner;
}

inline Density sum_of(const std::vector<Density>& ds) {
  Density acc = ds.front();
  for (std::size_t i = 1; i < ds.size(); ++i) acc = make_sum_pair(acc, ds[i]);
  return acc;
}

inline Body sum_of(const std::vector<Body>& bs) {
  Body acc = bs.front();
  for (std::size_t i = 1; i < bs.size(); ++i) acc = minkowski_sum(acc, bs[i]);
  return acc;
}

/// Gaussian with covariance equal to the sum of the inputs' (all Gaussian).
inline Density gaussian_sum(const std::vector<const Density*>& ds) {
  const int n = ds.front()->dim();
  Vec mean = Vec::Zero(n);
  Mat cov = Mat::Zero(n, n);
  for (const auto* d : ds) {
    mean += d->as<Gaussian>()->mean;
    cov += d->as<Gaussian>()->cov;
  }
  return make_gaussian(mean, cov);
}

inline bool same_body(const Body& a, const Body& b) {
  if (a.dim() != b.dim() || a.variant().index() != b.variant().index()) return false;
  if (const auto* x = a.as<Box>()) return x->lo == b.as<Box>()->lo && x->hi == b.as<Box>()->hi;
  if (const auto* x = a.as<Ball>()) return x->center == b.as<Ball>()->center && x->radius == b.as<Ball>()->radius;
  if (const auto* x = a.as<Simplex>()) return x->vertices == b.as<Simplex>()->vertices;
  if (const auto* x = a.as<Ellipsoid>()) return x->center == b.as<Ellipsoid>()->center && x->shape == b.as<Ellipsoid>()->shape;
  return false;
}

/// |A cap B| exactly for identical bodies and box pairs, else hit-or-miss.
inline Estimate intersection_volume_auto(const Body& a, const Body& b, std::int64_t samples, const SeededStream& s) {
  if (same_body(a, b) && has_exact_volume(a)) return {volume_exact(a), 0.0, 0};
  if (const auto* x = a.as<Box>()) {
    if (const auto* y = b.as<Box>()) {
      const Vec w = (x->hi.cwiseMin(y->hi) - x->lo.cwiseMax(y->lo)).cwiseMax(0.0);
      return {w.prod(), 0.0, 0};
    }
  }
  return intersection_volume_mc(a, b, samples, s);
}

/// Standard error of v^{1/n} (or any power) from that of v.
inline double power_stderr(double v, double se, double power) {
  return v > 0.0 ? std::abs(power) * std::pow(v, power - 1.0) * se : 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------- entropy power

/// H(X) + H(Y) <= H(X + Y).
inline std::vector<CheckResult> check_epi(const Density& x, const Density& y, const Budget& b,
                                          const SeededStream& s, const std::string& instance) {
  const int n = x.dim();
  const auto hx = detail::entropy_of(x, b, s.child("x"));
  const auto hy = detail::entropy_of(y, b, s.child("y"));
  const auto hs = detail::entropy_of_sum(x, y, b, s.child("sum"));
  const double lhs = entropy_power(hx) + entropy_power(hy);
  const double rhs = entropy_power(hs);
  const double se = detail::hypot_all({entropy_power_stderr(hx), entropy_power_stderr(hy), entropy_power_stderr(hs)});
  return {make_check("epi", n, instance, lhs, rhs, se, kind_for(se), s.root_seed())};
}

/// (1/4)|A+B|^{2/n} <= H(X+Y) <= |A+B|^{2/n} for uniform X on A, Y on B.
inline std::vector<CheckResult> check_volsum(const Body& a, const Body& bb, const Budget& b, const SeededStream& s,
                                             const std::string& instance) {
  const int n = a.dim();
  const auto hs = detail::entropy_of_sum(make_uniform(a, volume_auto(a, b.samples, s.child("va")).value),
                                         make_uniform(bb, volume_auto(bb, b.samples, s.child("vb")).value), b,
                                         s.child("sum"));
  const Estimate v = volume_auto(minkowski_sum(a, bb), b.samples, s.child("vsum"));
  const double vp = std::pow(v.value, 2.0 / n);
  const double vp_se = detail::power_stderr(v.value, v.stderr_, 2.0 / n);
  const double h = entropy_power(hs);
  const double h_se = entropy_power_stderr(hs);
  const double se_lo = std::hypot(h_se, 0.25 * vp_se);
  const double se_hi = std::hypot(h_se, vp_se);
  return {make_check("volsum.lower", n, instance, 0.25 * vp, h, se_lo, kind_for(se_lo), s.root_seed()),
          make_check("volsum.upper", n, instance, h, vp, se_hi, kind_for(se_hi), s.root_seed())};
}

/// log|A_1+...+A_m| - n log m <= h(S_m) <= log|A_1+...+A_m|.
inline std::vector<CheckResult> check_vol_ent(const std::vector<Body>& bodies, const Budget& b,
                                              const SeededStream& s, const std::string& instance) {
  if (bodies.size() < 2) throw PreconditionError("check_vol_ent: need at least two bodies");
  const int n = bodies.front().dim();
  const int m = static_cast<int>(bodies.size());
  std::vector<Density> laws;
  for (std::size_t i = 0; i < bodies.size(); ++i)
    laws.push_back(make_uniform(bodies[i], volume_auto(bodies[i], b.samples, s.child("v", i)).value));
  const Density rest = detail::sum_of(std::vector<Density>(laws.begin() + 1, laws.end()));
  const auto h = detail::entropy_of_sum(laws.front(), rest, b, s.child("sum"));
  const Estimate v = volume_auto(detail::sum_of(bodies), b.samples, s.child("vsum"));
  const double logv = std::log(v.value);
  const double se = std::hypot(h.stderr_, v.value > 0.0 ? v.stderr_ / v.value : 0.0);
  return {make_check("vol_ent.lower", n, instance, logv - n * std::log(m), h.h, se, kind_for(se), s.root_seed()),
          make_check("vol_ent.upper", n, instance, h.h, logv, se, kind_for(se), s.root_seed())};
}

/// Lower entropy bounds for a kappa-concave law supported on A:
///   h >= log|A| + sum_i 1/(1 + kappa~ i) - log C^n_{1/kappa}
///   h >= log|A| + n log(kappa n).
/// Accepts uniform laws and power-simplex laws (A = standard simplex).
inline std::vector<CheckResult> check_cvx_ent(const Density& d, const Budget& b, const SeededStream& s,
                                              const std::string& instance) {
  const int n = d.dim();
  double log_vol;
  if (const auto* u = d.as<UniformOnBody>()) {
    log_vol = std::log(u->volume);
  } else if (d.as<PowerSimplex>()) {
    log_vol = -log_factorial(n);
  } else {
    throw PreconditionError("check_cvx_ent: needs a uniform or power-simplex law");
  }
  const auto params = kappa_of(d);
  double harmonic = 0.0;
  if (std::isfinite(params.kappa_tilde))
    for (int i = 1; i <= n; ++i) harmonic += 1.0 / (1.0 + params.kappa_tilde * i);
  const double rhs3 = log_vol + harmonic - std::log(gen_binomial(1.0 / params.kappa, n));
  const double rhs2 = log_vol + n * std::log(params.kappa * n);
  const auto h = detail::entropy_of(d, b, s.child("h"));
  const auto kind = kind_for(h.stderr_);
  // Oriented as bound <= h.
  return {make_check("cvx_ent", n, instance, rhs3, h.h, h.stderr_, kind, s.root_seed()),
          make_check("cvx_ent2", n, instance, rhs2, h.h, h.stderr_, kind, s.root_seed())};
}

// ---------------------------------------------------------------- Berwald

/// phi(x) = min_k (<a_k, x> + b_k), concave; callers keep it >= 0 on A.
struct ConcaveFunction {
  std::vector<Vec> slopes;
  std::vector<double> offsets;

  double operator()(const Vec& x) const {
    double v = kInf;
    for (std::size_t k = 0; k < slopes.size(); ++k) v = std::min(v, slopes[k].dot(x) + offsets[k]);
    return std::max(0.0, v);
  }
  bool is_affine() const { return slopes.size() == 1; }
};

inline ConcaveFunction affine_function(const Vec& slope, double offset) { return {{slope}, {offset}}; }

/// min of `pieces` random affine functions, each nonnegative on A.
inline ConcaveFunction random_concave_function(const Body& a, int pieces, SeededStream& s) {
  ConcaveFunction f;
  const int n = a.dim();
  for (int k = 0; k < pieces; ++k) {
    const Vec slope = s.normal_vec(n);
    // Smallest value of <slope, x> over A is -h_A(-slope).
    const double offset = support_function(a, -slope) * slope.norm() + s.uniform() * slope.norm();
    f.slopes.push_back(slope);
    f.offsets.push_back(offset);
  }
  return f;
}

namespace detail {

inline bool is_standard_simplex(const Body& a) {
  const auto* sx = a.as<Simplex>();
  if (!sx) return false;
  const int n = a.dim();
  if (sx->vertices[0].cwiseAbs().maxCoeff() != 0.0) return false;
  for (int i = 0; i < n; ++i)
    if ((sx->vertices[static_cast<std::size_t>(i + 1)] - unit_vector(n, i)).cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

/// Mean of phi^p under the uniform law on A, when a closed form applies:
/// constants anywhere; c * sum x_i and c * (1 - sum x_i) on the standard simplex.
inline std::optional<double> berwald_exact_mean(const Body& a, const ConcaveFunction& phi, double p) {
  if (!phi.is_affine()) return std::nullopt;
  const Vec& slope = phi.slopes[0];
  const double off = phi.offsets[0];
  const int n = a.dim();
  if (slope.cwiseAbs().maxCoeff() == 0.0) return std::pow(off, p);
  if (!is_standard_simplex(a)) return std::nullopt;
  const double c = slope(0);
  if ((slope.array() != c).any()) return std::nullopt;
  const double log_fact = log_factorial(n);
  if (off == 0.0 && c > 0.0) {
    // integral of s^p over the simplex is 1 / ((n-1)! (p+n)); |A| = 1/n!.
    return std::pow(c, p) * std::exp(log_fact - log_factorial(n - 1)) / (p + n);
  }
  if (c < 0.0 && off == -c) {
    // integral of (1-s)^p is Gamma(p+1) / Gamma(p+n+1).
    return std::pow(off, p) * std::exp(log_fact + std::lgamma(p + 1.0) - std::lgamma(p + n + 1.0));
  }
  return std::nullopt;
}

}  // namespace detail

/// (C^n_{n+q}/|A|)^{1/q} ||phi||_q <= (C^n_{n+p}/|A|)^{1/p} ||phi||_p, 0 < p < q.
/// With m_r = E phi(U)^r for U uniform on A both sides are (C^n_{n+r} m_r)^{1/r}.
inline std::vector<CheckResult> check_berwald(const Body& a, const ConcaveFunction& phi, double p, double q,
                                              const Budget& b, const SeededStream& s, const std::string& instance) {
  if (!(0.0 < p && p < q)) throw PreconditionError("check_berwald: need 0 < p < q");
  const int n = a.dim();
  const double cp = gen_binomial(n + p, n);
  const double cq = gen_binomial(n + q, n);
  const auto ep = detail::berwald_exact_mean(a, phi, p);
  const auto eq = detail::berwald_exact_mean(a, phi, q);
  double mp, mq, se = 0.0;
  if (ep && eq) {
    mp = *ep;
    mq = *eq;
  } else {
    struct Acc {
      CoMoments cm;
      void merge(const Acc& o) { cm.merge(o.cm); }
    };
    auto acc = mc_reduce<Acc>(b.samples, s.child("phi"), [&](SeededStream& st, std::int64_t count) {
      Acc out;
      for (std::int64_t i = 0; i < count; ++i) {
        const double v = phi(sample_uniform(a, st));
        out.cm.add(std::pow(v, p), std::pow(v, q));
      }
      return out;
    });
    mp = acc.cm.x.mean;
    mq = acc.cm.y.mean;
    const double dp = std::pow(cp, 1.0 / p) * std::pow(mp, 1.0 / p - 1.0) / p;
    const double dq = -std::pow(cq, 1.0 / q) * std::pow(mq, 1.0 / q - 1.0) / q;
    se = delta_stderr(acc.cm, dp, dq);
  }
  const double lhs = std::pow(cq * mq, 1.0 / q);
  const double rhs = std::pow(cp * mp, 1.0 / p);
  return {make_check("berwald", n, instance, lhs, rhs, se, kind_for(se), s.root_seed())};
}

// ---------------------------------------------------------------- max density

/// log||f||^{-1/n} <= h/n always; h/n <= 1 + log||f||^{-1/n} for
/// log-concave laws (report-only measured constant otherwise); and the
/// comparison with the Gaussian of equal maximal density, within +-1/2.
inline std::vector<CheckResult> check_maxnorm(const Density& d, const Budget& b, const SeededStream& s,
                                              const std::string& instance) {
  const int n = d.dim();
  const double log_norm_root = -std::log(max_density(d)) / n;
  const auto h = detail::entropy_of(d, b, s.child("h"));
  const double hn = h.h / n;
  const double se = h.stderr_ / n;
  const auto kind = kind_for(se);
  const auto seed = s.root_seed();
  std::vector<CheckResult> out{make_check("maxnorm.lower", n, instance, log_norm_root, hn, se, kind, seed)};
  if (detail::is_log_concave(d)) {
    out.push_back(make_check("maxnorm.upper", n, instance, hn, 1.0 + log_norm_root, se, kind, seed));
    // Gaussian Z with ||f_Z|| = ||f||: h(Z)/n = 1/2 + log||f||^{-1/n}.
    const double diff = 0.5 + log_norm_root - hn;
    out.push_back(make_check("bm11.lower", n, instance, -0.5, diff, se, kind, seed));
    out.push_back(make_check("bm11.upper", n, instance, diff, 0.5, se, kind, seed));
  } else {
    // Measured constant (1/n)h - log||f||^{-1/n}; reference value 1.
    out.push_back(make_check("maxnorm.constant", n, instance, hn - log_norm_root, 1.0, se, CheckKind::report_only, seed));
  }
  return out;
}

/// (int f g)^{-2/n} <= H(X+Y) <= e^2 (int f g)^{-2/n}, symmetric log-concave f, g.
inline std::vector<CheckResult> check_innerprod(const Density& f, const Density& g, const Budget& b,
                                                const SeededStream& s, const std::string& instance) {
  if (!is_symmetric(f) || !is_symmetric(g)) throw PreconditionError("check_innerprod: densities must be symmetric");
  if (!detail::is_log_concave(f) || !detail::is_log_concave(g)) {
    throw PreconditionError("check_innerprod: densities must be log-concave");
  }
  const int n = f.dim();
  Moments m = mc_moments(b.samples, s.child("fg"), [&](SeededStream& st) { return density_eval(g, sample(f, st)); });
  const double ip = m.mean;
  const double base = std::pow(ip, -2.0 / n);
  const double base_se = detail::power_stderr(ip, m.stderr_of_mean(), -2.0 / n);
  const auto hs = detail::entropy_of_sum(f, g, b, s.child("sum"));
  const double h = entropy_power(hs);
  const double h_se = entropy_power_stderr(hs);
  const double e2 = std::exp(2.0);
  const double se_lo = std::hypot(h_se, base_se);
  const double se_hi = std::hypot(h_se, e2 * base_se);
  return {make_check("innerprod.lower", n, instance, base, h, se_lo, kind_for(se_lo), s.root_seed()),
          make_check("innerprod.upper", n, instance, h, e2 * base, se_hi, kind_for(se_hi), s.root_seed())};
}

namespace detail {

/// Density at x of a sum of uniforms on [-w_i, w_i]:
/// (1/prod 2w_i) (1/(m-1)!) sum_eps (prod eps) (x + sum eps_i w_i)_+^{m-1}.
inline double symmetric_uniform_sum_density(const std::vector<double>& half_widths, double x) {
  const auto m = half_widths.size();
  double scale = 1.0;
  for (double w : half_widths) scale *= 2.0 * w;
  if (m == 1) return std::abs(x) < half_widths[0] ? 1.0 / scale : 0.0;
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    double shift = x;
    double sign = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = (mask >> i) & 1u ? -1.0 : 1.0;
      sign *= e;
      shift += e * half_widths[i];
    }
    if (shift > 0.0) total += sign * std::pow(shift, static_cast<double>(m - 1));
  }
  return total / scale / factorial(static_cast<int>(m) - 1);
}

}  // namespace detail

/// 1 <= ||f_m|| |A_1 + ... + A_m| <= (m e)^n. ||f_m|| is exact for
/// origin-symmetric boxes, an unbiased estimate of f_m(0) for other
/// origin-symmetric bodies, and a report-only sampled maximum otherwise.
inline std::vector<CheckResult> check_vol_maxnorm(const std::vector<Body>& bodies, const Budget& b,
                                                  const SeededStream& s, const std::string& instance) {
  if (bodies.empty()) throw PreconditionError("check_vol_maxnorm: no bodies");
  const int n = bodies.front().dim();
  const int m = static_cast<int>(bodies.size());
  const Estimate vsum = volume_auto(detail::sum_of(bodies), b.samples, s.child("vsum"));
  const bool symmetric = std::all_of(bodies.begin(), bodies.end(), [](const Body& x) { return is_origin_symmetric(x); });
  const bool boxes = std::all_of(bodies.begin(), bodies.end(), [](const Body& x) { return x.as<Box>() != nullptr; });
  double peak = 0.0, peak_se = 0.0;
  CheckKind kind;
  if (symmetric && boxes) {
    peak = 1.0;
    for (int i = 0; i < n; ++i) {
      std::vector<double> w;
      for (const auto& bx : bodies) w.push_back(bx.as<Box>()->hi(i));
      peak *= detail::symmetric_uniform_sum_density(w, 0.0);
    }
    kind = kind_for(vsum.stderr_);
  } else if (symmetric) {
    // f_m(0) = E 1{-(X_2+...+X_m) in A_1} / |A_1|.
    const double v1 = volume_auto(bodies.front(), b.samples, s.child("v1")).value;
    Moments mm = mc_moments(b.samples, s.child("peak"), [&](SeededStream& st) {
      Vec t = Vec::Zero(n);
      for (std::size_t i = 1; i < bodies.size(); ++i) t += sample_uniform(bodies[i], st);
      return contains(bodies.front(), -t) ? 1.0 / v1 : 0.0;
    });
    peak = mm.mean;
    peak_se = mm.stderr_of_mean();
    kind = CheckKind::statistical;
  } else {
    // Sampled maximum of the smoothed density: a lower estimate of the sup.
    std::vector<Density> laws;
    for (const auto& x : bodies) laws.push_back(make_uniform(x, volume_auto(x, b.samples, s.child("v")).value));
    const Density rest = detail::sum_of(std::vector<Density>(laws.begin() + 1, laws.end()));
    SeededStream st = s.child("sampled-max");
    for (int k = 0; k < 64; ++k) {
      const Vec point = sample(laws.front(), st) + sample(rest, st);
      double acc = 0.0;
      for (std::int64_t j = 0; j < b.inner * 16; ++j) acc += density_eval(laws.front(), point - sample(rest, st));
      peak = std::max(peak, acc / static_cast<double>(b.inner * 16));
    }
    kind = CheckKind::report_only;
  }
  const double prod = peak * vsum.value;
  const double se = detail::hypot_all({peak_se * vsum.value, peak * vsum.stderr_});
  const double upper = std::pow(m * M_E, n);
  return {make_check("vol_maxnorm.lower", n, instance, 1.0, prod, se, kind, s.root_seed()),
          make_check("vol_maxnorm.upper", n, instance, prod, upper, se, kind, s.root_seed())};
}

// ---------------------------------------------------------------- Rogers-Shephard

/// |(A - x) cap B| |A - B| <= C^n_{2n} |A| |B| at x = 0 (pass/fail), the
/// sup over a 5^n shift grid (report-only), and for origin-symmetric A, B
/// |A|^{1/n}|B|^{1/n} <= |A cap B|^{1/n} |A + B|^{1/n} <= 4 |A|^{1/n}|B|^{1/n}.
inline std::vector<CheckResult> check_rogers_shephard(const Body& a, const Body& bb, const Budget& b,
                                                      const SeededStream& s, const std::string& instance) {
  const int n = a.dim();
  const auto seed = s.root_seed();
  const Estimate va = volume_auto(a, b.samples, s.child("va"));
  const Estimate vb = volume_auto(bb, b.samples, s.child("vb"));
  const Body diff = minkowski_sum(a, reflect(bb));
  const Estimate vd = volume_auto(diff, b.samples, s.child("vdiff"));
  const double cn = gen_binomial(2.0 * n, n);
  const double rhs = cn * va.value * vb.value;
  const double rhs_se = cn * std::hypot(va.stderr_ * vb.value, va.value * vb.stderr_);

  std::vector<CheckResult> out;
  const Estimate i0 = detail::intersection_volume_auto(a, bb, b.samples, s.child("cap0"));
  const double lhs0 = i0.value * vd.value;
  const double se0 = detail::hypot_all({i0.stderr_ * vd.value, i0.value * vd.stderr_, rhs_se});
  out.push_back(make_check("rs.diffbody", n, instance, lhs0, rhs, se0, kind_for(se0), seed));

  // Shift grid over the bounding box of A - B, plus the origin.
  const auto box = bounding_box(diff);
  const int per_axis = 5;
  const std::int64_t grid_samples = std::max<std::int64_t>(2000, b.samples / 25);
  double best = i0.value;
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  for (std::int64_t g = 0; g < total; ++g) {
    Vec x(n);
    std::int64_t code = g;
    for (int i = 0; i < n; ++i) {
      const int k = static_cast<int>(code % per_axis);
      code /= per_axis;
      x(i) = box.first(i) + (box.second(i) - box.first(i)) * (k + 0.5) / per_axis;
    }
    const Estimate v = intersection_volume_mc(translate(a, -x), bb, grid_samples, s.child("grid", static_cast<std::uint64_t>(g)));
    best = std::max(best, v.value);
  }
  out.push_back(make_check("rs.diffbody.sup", n, instance, best * vd.value, rhs, 0.0, CheckKind::report_only, seed));
  const double root_ab = std::pow(va.value * vb.value, 1.0 / n);
  out.push_back(make_check("rs.diffbody2.lower", n, instance, root_ab, std::pow(best * vd.value, 1.0 / n), 0.0,
                           CheckKind::report_only, seed));

  if (is_origin_symmetric(a) && is_origin_symmetric(bb)) {
    const Estimate vs = volume_auto(minkowski_sum(a, bb), b.samples, s.child("vsum"));
    const double mid = std::pow(i0.value * vs.value, 1.0 / n);
    const double mid_se = detail::power_stderr(i0.value * vs.value,
                                               std::hypot(i0.stderr_ * vs.value, i0.value * vs.stderr_), 1.0 / n);
    const double ab_se = detail::power_stderr(va.value * vb.value,
                                              std::hypot(va.stderr_ * vb.value, va.value * vb.stderr_), 1.0 / n);
    const double se_lo = std::hypot(mid_se, ab_se);
    const double se_hi = std::hypot(mid_se, 4.0 * ab_se);
    out.push_back(make_check("rs.symmsum.lower", n, instance, root_ab, mid, se_lo, kind_for(se_lo), seed));
    out.push_back(make_check("rs.symmsum.upper", n, instance, mid, 4.0 * root_ab, se_hi, kind_for(se_hi), seed));
  }
  return out;
}

// ---------------------------------------------------------------- Renyi-2

/// 2^{-n} ||f|| <= int f^2 <= ||f||.
inline std::vector<CheckResult> check_renyi2(const Density& d, const Budget& b, const SeededStream& s,
                                             const std::string& instance) {
  const int n = d.dim();
  const double norm = max_density(d);
  const Estimate r = renyi2_mc(d, b.samples, s.child("r2"));
  const auto kind = kind_for(r.stderr_);
  return {make_check("renyi.lower", n, instance, std::pow(2.0, -n) * norm, r.value, r.stderr_, kind, s.root_seed()),
          make_check("renyi.upper", n, instance, r.value, norm, r.stderr_, kind, s.root_seed())};
}

// ---------------------------------------------------------------- essential support

/// Mass and volume of K_f. Log-concave laws use c0 = e^{-8} with mass
/// target 1 - 5^{-n}; other convex laws use c0(beta0) with target 1/2 and
/// require beta >= max(n + 1, beta0 n).
inline std::vector<CheckResult> check_aep(const Density& d, const Budget& b, const SeededStream& s,
                                          const std::string& instance) {
  const int n = d.dim();
  double c0, target;
  if (detail::is_log_concave(d)) {
    const auto lc = c0_logconcave();
    c0 = lc.c0;
    target = 1.0 - std::pow(lc.c1, n);
  } else {
    const double beta = kappa_of(d).beta;
    if (!(beta >= n + 1.0 && beta >= b.beta0 * n)) {
      throw PreconditionError("check_aep: need beta >= max(n + 1, beta0 n)");
    }
    c0 = c0_convex(b.beta0);
    target = 0.5;
  }
  const auto es = essential_support(d, c0);
  std::vector<CheckResult> out{check_support_mass(d, es, target, b.samples, s.child("mass"), instance)};
  for (auto& r : check_support_volume(d, es, b.samples, s.child("volume"), instance)) out.push_back(r);
  const Estimate t = typset_ratio(d, es, b.samples, s.child("typset"));
  out.push_back(make_check("typset", n, instance, t.value, t.value, t.stderr_, CheckKind::report_only, s.root_seed()));
  return out;
}

// ---------------------------------------------------------------- submodularity

/// h(X+Y+Z) + h(Z) <= h(X+Z) + h(Y+Z). Closed form for Gaussian triples.
inline std::vector<CheckResult> check_submod(const Density& x, const Density& y, const Density& z, const Budget& b,
                                             const SeededStream& s, const std::string& instance) {
  const int n = x.dim();
  if (b.gaussian_closed_form && detail::all_gaussian({&x, &y, &z})) {
    const double hxyz = entropy_analytic(detail::gaussian_sum({&x, &y, &z})).h;
    const double hxz = entropy_analytic(detail::gaussian_sum({&x, &z})).h;
    const double hyz = entropy_analytic(detail::gaussian_sum({&y, &z})).h;
    const double hz = entropy_analytic(z).h;
    return {make_check("submod", n, instance, hxyz + hz, hxz + hyz, 0.0, CheckKind::exact, s.root_seed())};
  }
  const auto hxyz = detail::entropy_of_sum(x, make_sum_pair(y, z), b, s.child("xyz"));
  const auto hxz = detail::entropy_of_sum(x, z, b, s.child("xz"));
  const auto hyz = detail::entropy_of_sum(y, z, b, s.child("yz"));
  const auto hz = detail::entropy_of(z, b, s.child("z"));
  const double se = detail::hypot_all({hxyz.stderr_, hxz.stderr_, hyz.stderr_, hz.stderr_});
  return {make_check("submod", n, instance, hxyz.h + hz.h, hxz.h + hyz.h, se, kind_for(se), s.root_seed())};
}

/// Closed-form slack of the Gaussian submodularity inequality in one
/// dimension with variances a, b, c: (1/2) log((a+c)(b+c) / ((a+b+c) c)).
inline double gaussian_submod_slack(double a, double b, double c) {
  return 0.5 * std::log((a + c) * (b + c) / ((a + b + c) * c));
}

/// |A+B|^{1/n} |D|^{1/n} <= 2 |A+D|^{1/n} |B+D|^{1/n}.
inline std::vector<CheckResult> check_vol_submod(const Body& a, const Body& bb, const Body& d, const Budget& b,
                                                 const SeededStream& s, const std::string& instance) {
  const int n = a.dim();
  const double p = 1.0 / n;
  const Estimate vab = volume_auto(minkowski_sum(a, bb), b.samples, s.child("ab"));
  const Estimate vd = volume_auto(d, b.samples, s.child("d"));
  const Estimate vad = volume_auto(minkowski_sum(a, d), b.samples, s.child("ad"));
  const Estimate vbd = volume_auto(minkowski_sum(bb, d), b.samples, s.child("bd"));
  const double lhs = std::pow(vab.value * vd.value, p);
  const double rhs = 2.0 * std::pow(vad.value * vbd.value, p);
  const double se = detail::hypot_all(
      {detail::power_stderr(vab.value * vd.value, std::hypot(vab.stderr_ * vd.value, vab.value * vd.stderr_), p),
       2.0 * detail::power_stderr(vad.value * vbd.value, std::hypot(vad.stderr_ * vbd.value, vad.value * vbd.stderr_), p)});
  return {make_check("vol_submod", n, instance, lhs, rhs, se, kind_for(se), s.root_seed())};
}

/// For origin-symmetric A, B, D of volume one:
/// 1/|A cap B|^{1/n} <= |A+B|^{1/n} <= 32 / (|A cap D|^{1/n} |B cap D|^{1/n}).
inline std::vector<CheckResult> check_vol_submod2(const Body& a, const Body& bb, const Body& d, const Budget& b,
                                                  const SeededStream& s, const std::string& instance) {
  for (const Body* x : {&a, &bb, &d}) {
    if (!is_origin_symmetric(*x)) throw PreconditionError("check_vol_submod2: bodies must be origin-symmetric");
    if (has_exact_volume(*x) && std::abs(volume_exact(*x) - 1.0) > 1e-9) {
      throw PreconditionError("check_vol_submod2: bodies must have volume one");
    }
  }
  const int n = a.dim();
  const double p = 1.0 / n;
  const Estimate iab = detail::intersection_volume_auto(a, bb, b.samples, s.child("ab"));
  const Estimate iad = detail::intersection_volume_auto(a, d, b.samples, s.child("ad"));
  const Estimate ibd = detail::intersection_volume_auto(bb, d, b.samples, s.child("bd"));
  const Estimate vs = volume_auto(minkowski_sum(a, bb), b.samples, s.child("sum"));
  const double mid = std::pow(vs.value, p);
  const double mid_se = detail::power_stderr(vs.value, vs.stderr_, p);
  const double lo = std::pow(iab.value, -p);
  const double lo_se = detail::power_stderr(iab.value, iab.stderr_, -p);
  const double prod = iad.value * ibd.value;
  const double hi = 32.0 * std::pow(prod, -p);
  const double hi_se = 32.0 * detail::power_stderr(prod, std::hypot(iad.stderr_ * ibd.value, iad.value * ibd.stderr_), -p);
  const double se_lo = std::hypot(lo_se, mid_se);
  const double se_hi = std::hypot(hi_se, mid_se);
  return {make_check("vol_submod2.lower", n, instance, lo, mid, se_lo, kind_for(se_lo), s.root_seed()),
          make_check("vol_submod2.upper", n, instance, mid, hi, se_hi, kind_for(se_hi), s.root_seed())};
}

namespace detail {
inline void for_each_k_subset(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
  for_each_subset(m, k, fn);
}
}  // namespace detail

/// h(X + sum Y) - h(X) <= (1/C(m-1,k-1)) sum_{|s|=k} [h(X + sum_s Y) - h(X)].
/// Closed form when every law is Gaussian.
inline std::vector<CheckResult> check_fracsub(const Density& x, const std::vector<Density>& ys, int k,
                                              const Budget& b, const SeededStream& s, const std::string& instance) {
  const int m = static_cast<int>(ys.size());
  if (m < 1 || m > 4 || k < 1 || k > m) throw PreconditionError("check_fracsub: need 1 <= k <= m <= 4");
  const int n = x.dim();
  const double weight = 1.0 / gen_binomial(m - 1.0, k - 1);
  bool gaussian = b.gaussian_closed_form && x.as<Gaussian>() != nullptr;
  for (const auto& y : ys) gaussian = gaussian && y.as<Gaussian>() != nullptr;

  auto entropy_with = [&](const std::vector<int>& idx, const SeededStream& st) -> EntropyValue {
    if (idx.empty()) return gaussian ? entropy_analytic(x) : detail::entropy_of(x, b, st);
    if (gaussian) {
      std::vector<const Density*> parts{&x};
      for (int i : idx) parts.push_back(&ys[static_cast<std::size_t>(i)]);
      return entropy_analytic(detail::gaussian_sum(parts));
    }
    std::vector<Density> parts;
    for (int i : idx) parts.push_back(ys[static_cast<std::size_t>(i)]);
    return detail::entropy_of_sum(x, detail::sum_of(parts), b, st);
  };
  const auto hx = entropy_with({}, s.child("x"));
  std::vector<int> all(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
  const auto hall = entropy_with(all, s.child("all"));
  double rhs = 0.0, var = 0.0;
  int count = 0;
  detail::for_each_k_subset(m, k, [&](const std::vector<int>& idx) {
    const auto h = entropy_with(idx, s.child("subset", static_cast<std::uint64_t>(count++)));
    rhs += weight * (h.h - hx.h);
    var += weight * weight * h.stderr_ * h.stderr_;
  });
  // h(X) enters both sides; its error is counted once on each.
  const double subsets = gen_binomial(m, k);
  const double hx_coeff = 1.0 - weight * subsets;
  const double se = std::sqrt(var + hall.stderr_ * hall.stderr_ + hx_coeff * hx_coeff * hx.stderr_ * hx.stderr_);
  return {make_check("fracsub", n, instance + ";k=" + std::to_string(k), hall.h - hx.h, rhs, se, kind_for(se),
                     s.root_seed())};
}

/// |A + sum B_i|^{1/n} <= (1+m) [prod_{|s|=k} c_s]^{1/C(m-1,k-1)} |A|^{1/n},
/// with c_s = |A + sum_s B_i|^{1/n} / |A|^{1/n} computed from the bodies.
inline std::vector<CheckResult> check_plunnecke(const Body& a, const std::vector<Body>& bs, int k, const Budget& b,
                                                const SeededStream& s, const std::string& instance) {
  const int m = static_cast<int>(bs.size());
  if (m < 1 || k < 1 || k > m) throw PreconditionError("check_plunnecke: need 1 <= k <= m");
  const int n = a.dim();
  const double p = 1.0 / n;
  const double weight = 1.0 / gen_binomial(m - 1.0, k - 1);
  const Estimate va = volume_auto(a, b.samples, s.child("a"));
  std::vector<Body> everything{a};
  everything.insert(everything.end(), bs.begin(), bs.end());
  const Estimate vall = volume_auto(detail::sum_of(everything), b.samples, s.child("all"));
  // log of prod c_s^{weight}, with relative errors accumulated.
  double log_prod = 0.0, rel_var = 0.0;
  int count = 0;
  detail::for_each_k_subset(m, k, [&](const std::vector<int>& idx) {
    std::vector<Body> parts{a};
    for (int i : idx) parts.push_back(bs[static_cast<std::size_t>(i)]);
    const Estimate v = volume_auto(detail::sum_of(parts), b.samples, s.child("subset", static_cast<std::uint64_t>(count++)));
    log_prod += weight * p * (std::log(v.value) - std::log(va.value));
    const double rel = v.value > 0.0 ? weight * p * v.stderr_ / v.value : 0.0;
    rel_var += rel * rel;
  });
  const double root_a = std::pow(va.value, p);
  const double rhs = (1.0 + m) * std::exp(log_prod) * root_a;
  const double lhs = std::pow(vall.value, p);
  const double se = std::hypot(detail::power_stderr(vall.value, vall.stderr_, p), rhs * std::sqrt(rel_var));
  return {make_check("plunnecke", n, instance + ";k=" + std::to_string(k), lhs, rhs, se, kind_for(se), s.root_seed())};
}

// ---------------------------------------------------------------- reverse EPI

namespace detail {

/// Rescales x -> ||f||^{1/n} x so the maximal density becomes one.
inline Density normalize_max_density(const Density& d) {
  const int n = d.dim();
  const double c = std::pow(max_density(d), 1.0 / n);
  return pushforward(c * Mat::Identity(n, n), d);
}

inline double c0_for(const Density& d, double beta0) {
  if (is_log_concave(d)) return c0_logconcave().c0;
  return c0_convex(beta0);
}

}  // namespace detail

/// Pipeline: normalize ||f|| = ||g|| = 1, put both laws in M-position,
/// then check h(X~+Y~)/n >= log sqrt 2 and h(X~+Y~) <= h(X~+Z) + h(Y~+Z)
/// with Z uniform on the unit-volume ball; the ratio
/// H(X~+Y~)/(H(X)+H(Y)) and the positions are report-only, and uniform
/// pairs are also held to the ceiling |A~+B~|^{2/n}.
inline std::vector<CheckResult> check_reverse_epi(const Density& x, const Density& y, const Budget& b,
                                                  const SeededStream& s, const std::string& instance) {
  const int n = x.dim();
  const auto seed = s.root_seed();
  for (const Density* d : {&x, &y}) {
    if (!detail::is_log_concave(*d)) {
      const double beta = kappa_of(*d).beta;
      if (!(beta >= std::max(2.0 * n + 1.0, b.beta0 * n))) {
        throw PreconditionError("check_reverse_epi: need beta >= max(2n + 1, beta0 n)");
      }
    }
  }
  const Density xn = detail::normalize_max_density(x);
  const Density yn = detail::normalize_max_density(y);
  const auto px = put_measure_m_position(xn, detail::c0_for(xn, b.beta0), b.msearch, s.child("mpos-x"));
  const auto py = put_measure_m_position(yn, detail::c0_for(yn, b.beta0), b.msearch, s.child("mpos-y"));
  const Density xt = apply_position(px, xn);
  const Density yt = apply_position(py, yn);

  const auto hx = detail::entropy_of(xn, b, s.child("hx"));
  const auto hy = detail::entropy_of(yn, b, s.child("hy"));
  const auto hs = detail::entropy_of_sum(xt, yt, b, s.child("sum"));
  std::vector<CheckResult> out;
  out.push_back(make_check("repi.lower", n, instance, std::log(std::sqrt(2.0)), hs.h / n, hs.stderr_ / n,
                           kind_for(hs.stderr_), seed));

  const double denom = entropy_power(hx) + entropy_power(hy);
  const double ratio = entropy_power(hs) / denom;
  const double ratio_se = ratio * detail::hypot_all({2.0 / n * hs.stderr_,
                                                     std::hypot(entropy_power_stderr(hx), entropy_power_stderr(hy)) / denom});
  out.push_back(make_check("repi.ratio", n, instance, ratio, b.ratio_ceiling, ratio_se, CheckKind::report_only, seed));
  out.push_back(make_check("repi.mposition.x", n, instance, px.objective, px.objective, px.objective_stderr,
                           CheckKind::report_only, seed));
  out.push_back(make_check("repi.mposition.y", n, instance, py.objective, py.objective, py.objective_stderr,
                           CheckKind::report_only, seed));

  const Density z = make_uniform(make_ball(Vec::Zero(n), ball_radius_for_volume(n, 1.0)));
  const auto hxz = detail::entropy_of_sum(xt, z, b, s.child("xz"));
  const auto hyz = detail::entropy_of_sum(yt, z, b, s.child("yz"));
  out.push_back(make_check("repi.xz", n, instance, entropy_power(hxz), entropy_power(hxz), entropy_power_stderr(hxz),
                           CheckKind::report_only, seed));
  out.push_back(make_check("repi.yz", n, instance, entropy_power(hyz), entropy_power(hyz), entropy_power_stderr(hyz),
                           CheckKind::report_only, seed));
  const double sub_se = detail::hypot_all({hs.stderr_, hxz.stderr_, hyz.stderr_});
  out.push_back(make_check("repi.submod", n, instance, hs.h, hxz.h + hyz.h, sub_se, kind_for(sub_se), seed));

  const auto* ux = xt.as<UniformOnBody>();
  const auto* uy = yt.as<UniformOnBody>();
  if (ux && uy) {
    try {
      const Estimate v = volume_auto(minkowski_sum(ux->body, uy->body), b.samples, s.child("vsum"));
      const double ceiling = std::pow(v.value, 2.0 / n) / denom;
      const double ceil_se = detail::power_stderr(v.value, v.stderr_, 2.0 / n) / denom;
      const double se = std::hypot(ratio_se, ceil_se);
      out.push_back(make_check("repi.volsum_ceiling", n, instance, ratio, ceiling, se, kind_for(se), seed));
    } catch (const OracleUnavailable&) {
      // Sum of positioned bodies has no volume oracle; nothing to compare.
    }
  }
  return out;
}

// ---------------------------------------------------------------- isotropic position

/// Uniform law on A in isotropic position, with its isotropic constant.
struct IsotropicBody {
  Body body;
  double volume;
  IsotropicConstant constant;
};

inline IsotropicBody isotropic_body(const Body& a, const Budget& b, const SeededStream& s) {
  const double vol = volume_auto(a, b.samples, s.child("volume")).value;
  const Density u = make_uniform(a, vol);
  const auto pos = isotropic_map(u, b.samples, s.child("moments"));
  const Body image = linear_image(pos.map, a, pos.translation);
  const Density ui = make_uniform(image, vol);
  return {image, vol, isotropic_constant(ui, b.samples, s.child("constant"))};
}

/// (1/(8 pi e)) |A~ + B~|^{2/n} <= L_A^2 |A|^{2/n} + L_B^2 |B|^{2/n}, plus
/// L^2 >= 1/(2 pi e) for each body.
inline std::vector<CheckResult> check_isotropic_repi(const Body& a, const Body& bb, const Budget& b,
                                                     const SeededStream& s, const std::string& instance) {
  const int n = a.dim();
  const auto seed = s.root_seed();
  const auto ia = isotropic_body(a, b, s.child("a"));
  const auto ib = isotropic_body(bb, b, s.child("b"));
  std::vector<CheckResult> out;
  for (const auto* ib_ : {&ia, &ib}) {
    const auto& l2 = ib_->constant.l2;
    out.push_back(make_check("isotropic.L2", n, instance + (ib_ == &ia ? ";A" : ";B"), isotropic_lower_bound(), l2.value,
                             l2.stderr_, kind_for(l2.stderr_), seed));
  }
  const Estimate v = volume_auto(minkowski_sum(ia.body, ib.body), b.samples, s.child("vsum"));
  const double lhs = std::pow(v.value, 2.0 / n) / (8.0 * M_PI * M_E);
  const double lhs_se = detail::power_stderr(v.value, v.stderr_, 2.0 / n) / (8.0 * M_PI * M_E);
  const double ra = ia.constant.l2.value * std::pow(ia.volume, 2.0 / n);
  const double rb = ib.constant.l2.value * std::pow(ib.volume, 2.0 / n);
  const double rhs_se = std::hypot(ia.constant.l2.stderr_ * std::pow(ia.volume, 2.0 / n),
                                   ib.constant.l2.stderr_ * std::pow(ib.volume, 2.0 / n));
  const double se = std::hypot(lhs_se, rhs_se);
  out.push_back(make_check("ball", n, instance, lhs, ra + rb, se, kind_for(se), seed));
  return out;
}

/// Two origin-symmetric unit-volume bodies put in M-position separately:
/// |u_A A cap u_B B|^{1/n} against the configured floor c_floor.
inline std::vector<CheckResult> check_msum(const Body& a, const Body& bb, const Budget& b, const SeededStream& s,
                                           const std::string& instance) {
  const int n = a.dim();
  const auto pa = m_position_search(a, b.msearch, s.child("a"));
  const auto pb = m_position_search(bb, b.msearch, s.child("b"));
  const Body ta = linear_image(pa.map, a);
  const Body tb = linear_image(pb.map, bb);
  const Estimate i = intersection_volume_mc(ta, tb, b.samples, s.child("cap"));
  const double va = volume_auto(a, b.samples, s.child("va")).value;
  const double vb = volume_auto(bb, b.samples, s.child("vb")).value;
  const double floor = b.c_floor * std::pow(std::min(va, vb), 1.0 / n);
  return {make_check("msum", n, instance, floor, std::pow(i.value, 1.0 / n),
                     detail::power_stderr(i.value, i.stderr_, 1.0 / n), CheckKind::statistical, s.root_seed())};
}

// ---------------------------------------------------------------- heavy-tail demonstration

/// One row of the heavy-tail sweep; ratios are H(.)/H(X).
struct CounterexampleRow {
  double beta;
  double h;
  double plus;
  double plus_se;
  double minus;
  double minus_se;
  double min_ratio() const { return std::min(plus, minus); }
  double min_se() const { return plus < minus ? plus_se : minus_se; }
};

/// H(X+Y)/H(X) and H(X-Y)/H(X) for i.i.d. 1D Pareto(beta), betas sorted
/// in decreasing order. H(X) is analytic.
inline std::vector<CounterexampleRow> counterexample_sweep(std::vector<double> betas, const Budget& b,
                                                           const SeededStream& s) {
  for (double beta : betas)
    if (!(beta > 1.0)) throw PreconditionError("demo_counterexample: need beta > 1 (entropy diverges otherwise)");
  std::sort(betas.begin(), betas.end(), std::greater<>());
  std::vector<CounterexampleRow> rows;
  for (double beta : betas) {
    std::ostringstream label;
    label << "pareto(" << beta << ")";
    const Density x = make_pareto(1, beta);
    const Density neg = pushforward(-Mat::Identity(1, 1), x);
    const double hx = entropy_analytic(x).h;
    const SeededStream st = s.child(label.str());
    const auto plus = detail::entropy_of_sum(x, x, b, st.child("plus"));
    const auto minus = detail::entropy_of_sum(x, neg, b, st.child("minus"));
    const double rp = std::exp(2.0 * (plus.h - hx));
    const double rm = std::exp(2.0 * (minus.h - hx));
    rows.push_back({beta, hx, rp, 2.0 * rp * plus.stderr_, rm, 2.0 * rm * minus.stderr_});
  }
  return rows;
}

/// Report-only min ratio per beta, and for consecutive betas a record that
/// passes only when the ratio grows by more than 3 combined standard errors.
inline std::vector<CheckResult> demo_counterexample(std::vector<double> betas, const Budget& b, const SeededStream& s) {
  const auto rows = counterexample_sweep(std::move(betas), b, s);
  std::vector<CheckResult> out;
  const auto seed = s.root_seed();
  auto label = [](double beta) {
    std::ostringstream o;
    o << "pareto(" << beta << ")";
    return o.str();
  };
  for (const auto& r : rows)
    out.push_back(make_check("counter.ratio", 1, label(r.beta), r.min_ratio(), r.min_ratio(), r.min_se(),
                             CheckKind::report_only, seed));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double se = std::hypot(rows[i - 1].min_se(), rows[i].min_se());
    auto r = make_check("counter.monotone", 1, label(rows[i - 1].beta) + "->" + label(rows[i].beta),
                        rows[i - 1].min_ratio(), rows[i].min_ratio(), se, CheckKind::statistical, seed);
    r.verdict = r.slack > kSigmas * se ? Verdict::pass : Verdict::fail;
    out.push_back(r);
  }
  return out;
}

}  // namespace cvm

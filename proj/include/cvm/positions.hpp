#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "cvm/body.hpp"
#include "cvm/error.hpp"
#include "cvm/linalg.hpp"
#include "cvm/measures.hpp"
#include "cvm/rng.hpp"
#include "cvm/special.hpp"
#include "cvm/stats.hpp"
#include "cvm/support.hpp"

namespace cvm {

/// Affine map x -> map * x + translation with det(map) = 1.
struct PositionResult {
  Mat map;
  Vec translation;
  double objective = 0.0;
  double objective_stderr = 0.0;
  double identity_objective = 0.0;
  double identity_stderr = 0.0;
  int iterations = 0;
  bool budget_exhausted = false;

  Vec apply(const Vec& x) const { return map * x + translation; }
};

// ---------------------------------------------------------------- isotropic

/// Centre at the mean, then whiten the covariance with a det-1 map.
inline PositionResult isotropic_map(const Density& d, std::int64_t samples, const SeededStream& stream) {
  const auto [mean, cov] = mean_cov_auto(d, samples, stream);
  PositionResult r;
  r.map = whitening_map(cov);
  r.translation = -(r.map * mean);
  return r;
}

/// Law of the density in isotropic position.
inline Density to_isotropic(const Density& d, std::int64_t samples, const SeededStream& stream) {
  const auto pos = isotropic_map(d, samples, stream);
  return pushforward(pos.map, d, pos.translation);
}

struct IsotropicConstant {
  Estimate l2;
  /// Largest relative deviation of a covariance eigenvalue from their mean.
  double anisotropy = 0.0;
  bool anisotropic = false;
};

inline constexpr double kAnisotropyTol = 0.05;

/// L^2 = ||f||^{2/n} sigma^2 with sigma^2 = trace(cov) / n, for a law in
/// isotropic position. Exact when the family has closed-form moments.
inline IsotropicConstant isotropic_constant(const Density& d, std::int64_t samples, const SeededStream& stream) {
  const int n = d.dim();
  const double norm_factor = std::pow(max_density(d), 2.0 / n);
  IsotropicConstant out;
  Mat cov;
  double sigma2_se = 0.0;
  if (auto e = exact_mean_cov(d)) {
    cov = e->second;
  } else {
    const auto mc = mean_cov_mc(d, samples, stream);
    cov = mc.cov;
    // Error of trace/n from the per-sample squared distance to the mean.
    Moments m = mc_moments(samples, stream.child("trace"),
                           [&](SeededStream& s) { return (sample(d, s) - mc.mean).squaredNorm() / n; });
    sigma2_se = m.stderr_of_mean();
  }
  const double sigma2 = cov.trace() / n;
  const Vec eig = Eigen::SelfAdjointEigenSolver<Mat>(cov).eigenvalues();
  out.anisotropy = (eig.array() / sigma2 - 1.0).abs().maxCoeff();
  out.anisotropic = out.anisotropy > kAnisotropyTol;
  out.l2 = {norm_factor * sigma2, norm_factor * sigma2_se, sigma2_se > 0.0 ? samples : 0};
  return out;
}

/// 1/(2 pi e), the lower bound for every isotropic constant L^2.
inline double isotropic_lower_bound() { return 1.0 / (2.0 * M_PI * M_E); }

// ---------------------------------------------------------------- M functional

namespace detail {

/// Uniform points of the origin-centred ball of volume `volume`, fixed for
/// common-random-number comparisons.
inline std::vector<Vec> ball_points(int n, double volume, std::int64_t count, const SeededStream& stream) {
  const double r = ball_radius_for_volume(n, volume);
  const Body ball = make_ball(Vec::Zero(n), r);
  const std::int64_t chunks = (count + kChunkSize - 1) / kChunkSize;
  auto parts = map_chunks<std::vector<Vec>>(chunks, [&](std::int64_t c) {
    SeededStream s = stream.child("chunk", static_cast<std::uint64_t>(c));
    std::vector<Vec> pts;
    const std::int64_t hi = std::min(count, (c + 1) * kChunkSize);
    for (std::int64_t i = c * kChunkSize; i < hi; ++i) pts.push_back(sample_uniform(ball, s));
    return pts;
  });
  std::vector<Vec> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

/// Number of points x with pred(x), counted chunk-wise.
template <class Pred>
std::int64_t count_if_points(const std::vector<Vec>& pts, Pred&& pred) {
  const auto total = static_cast<std::int64_t>(pts.size());
  const std::int64_t chunks = (total + kChunkSize - 1) / kChunkSize;
  auto parts = map_chunks<std::int64_t>(chunks, [&](std::int64_t c) {
    std::int64_t k = 0;
    const std::int64_t hi = std::min(total, (c + 1) * kChunkSize);
    for (std::int64_t i = c * kChunkSize; i < hi; ++i) k += pred(pts[static_cast<std::size_t>(i)]) ? 1 : 0;
    return k;
  });
  return std::accumulate(parts.begin(), parts.end(), std::int64_t{0});
}

/// p^{1/n} with the delta-method error of a binomial proportion.
inline Estimate root_of_proportion(double p, std::int64_t total, int n) {
  const double se_p = std::sqrt(p * (1.0 - p) / static_cast<double>(total));
  const double v = std::pow(p, 1.0 / n);
  return {v, p > 0.0 ? v / (n * p) * se_p : 0.0, total};
}

inline Estimate root_fraction(std::int64_t hits, std::int64_t total, int n) {
  return root_of_proportion(static_cast<double>(hits) / static_cast<double>(total), total, n);
}

}  // namespace detail

/// |A cap D|^{1/n} / |A|^{1/n} with D the origin-centred ball of volume |A|,
/// estimated as the fraction of uniform points of D lying in A.
inline Estimate m_functional(const Body& a, std::int64_t samples, const SeededStream& stream) {
  const int n = a.dim();
  const double vol = volume_auto(a, samples, stream.child("volume")).value;
  const auto pts = detail::ball_points(n, vol, samples, stream.child("ball"));
  const auto hits = detail::count_if_points(pts, [&](const Vec& x) { return contains(a, x); });
  return detail::root_fraction(hits, samples, n);
}

// ---------------------------------------------------------------- Nelder-Mead

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value;
  int evaluations;
  bool budget_exhausted;
};

/// Minimizes f from x0 with an axis-aligned initial simplex of the given
/// step, restarting from the best vertex `restarts` times. Stops when the
/// simplex values agree within ftol or the evaluation budget runs out.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                    double step, int budget, int restarts = 3, double ftol = 1e-9) {
  const auto dim = x0.size();
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };
  Eigen::VectorXd best = x0;
  double best_val = eval(x0);
  if (dim == 0) return {best, best_val, evals, false};

  for (int round = 0; round <= restarts && evals < budget; ++round) {
    std::vector<Eigen::VectorXd> simplex{best};
    std::vector<double> vals{best_val};
    for (Eigen::Index i = 0; i < dim && evals < budget; ++i) {
      Eigen::VectorXd v = best;
      v(i) += step;
      simplex.push_back(v);
      vals.push_back(eval(v));
    }
    if (static_cast<Eigen::Index>(simplex.size()) < dim + 1) break;
    std::vector<std::size_t> order(simplex.size());
    while (evals < budget) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[order.size() - 2];
      if (std::abs(vals[hi] - vals[lo]) <= ftol * (1.0 + std::abs(vals[lo]))) break;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (std::size_t i = 0; i < simplex.size(); ++i)
        if (i != hi) centroid += simplex[i];
      centroid /= static_cast<double>(dim);
      const Eigen::VectorXd xr = centroid + (centroid - simplex[hi]);
      const double fr = eval(xr);
      if (fr < vals[lo]) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[hi]);
        const double fe = evals < budget ? eval(xe) : kInf;
        if (fe < fr) {
          simplex[hi] = xe;
          vals[hi] = fe;
        } else {
          simplex[hi] = xr;
          vals[hi] = fr;
        }
      } else if (fr < vals[second]) {
        simplex[hi] = xr;
        vals[hi] = fr;
      } else {
        const bool outside = fr < vals[hi];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                           : Eigen::VectorXd(centroid + 0.5 * (simplex[hi] - centroid));
        const double fc = evals < budget ? eval(xc) : kInf;
        if (fc < (outside ? fr : vals[hi])) {
          simplex[hi] = xc;
          vals[hi] = fc;
        } else {
          // Shrink toward the best vertex.
          for (std::size_t i = 0; i < simplex.size() && evals < budget; ++i) {
            if (i == lo) continue;
            simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
            vals[i] = eval(simplex[i]);
          }
        }
      }
    }
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (vals[i] < best_val) {
        best_val = vals[i];
        best = simplex[i];
      }
  }
  return {best, best_val, evals, evals >= budget};
}

// ---------------------------------------------------------------- M-position

struct MSearchConfig {
  int budget = 500;
  std::int64_t samples_per_eval = 10000;
  int restarts = 3;
  double step = 0.5;
};

/// Maximizes the M functional of u(A) over u = sl_param(theta). The same
/// ball points are used for every evaluation (common random numbers). The
/// best map and the identity are then re-scored on fresh points and the
/// better of the two is returned, so the result never loses to identity.
inline PositionResult m_position_search(const Body& a, const MSearchConfig& cfg, const SeededStream& stream) {
  const int n = a.dim();
  const double vol = volume_auto(a, std::max<std::int64_t>(cfg.samples_per_eval, 100000), stream.child("volume")).value;
  const auto pts = detail::ball_points(n, vol, cfg.samples_per_eval, stream.child("crn"));
  auto fraction_for = [&](const Mat& u, const std::vector<Vec>& points) {
    const Mat inv = u.inverse();
    return detail::count_if_points(points, [&](const Vec& x) { return contains(a, inv * x); });
  };
  auto objective = [&](const Eigen::VectorXd& theta) {
    return -static_cast<double>(fraction_for(sl_param(theta, n), pts));
  };
  const auto nm = nelder_mead(objective, Eigen::VectorXd::Zero(sl_param_size(n)), cfg.step, cfg.budget, cfg.restarts,
                              0.0);
  const Mat best = sl_param(nm.x, n);

  const auto fresh = detail::ball_points(n, vol, cfg.samples_per_eval, stream.child("fresh"));
  const auto total = static_cast<std::int64_t>(fresh.size());
  const Estimate found = detail::root_fraction(fraction_for(best, fresh), total, n);
  const Estimate ident = detail::root_fraction(fraction_for(Mat::Identity(n, n), fresh), total, n);

  PositionResult r;
  const bool keep = found.value > ident.value;
  r.map = keep ? best : Mat::Identity(n, n);
  r.translation = Vec::Zero(n);
  r.objective = keep ? found.value : ident.value;
  r.objective_stderr = keep ? found.stderr_ : ident.stderr_;
  r.identity_objective = ident.value;
  r.identity_stderr = ident.stderr_;
  r.iterations = nm.evaluations;
  r.budget_exhausted = nm.budget_exhausted;
  return r;
}

/// Centroid of the uniform law on a body (exact or sampled).
inline Vec body_centroid(const Body& a, std::int64_t samples, const SeededStream& stream) {
  if (auto m = exact_moments(a)) return m->first;
  const Density u = make_uniform(a, 1.0);
  return mean_cov_mc(u, samples, stream).mean;
}

/// Puts a law in M-position through its essential support: K_f is scaled to
/// unit volume and centred, the body search runs on it, and the measure is
/// moved by T(x) = u (x - a) with a the centroid of K_f. The objective is
/// mu(T^{-1} D)^{1/n} for the origin-centred ball D of volume one.
inline PositionResult put_measure_m_position(const Density& d, double c0, const MSearchConfig& cfg,
                                             const SeededStream& stream) {
  const int n = d.dim();
  const auto es = essential_support(d, c0);
  const std::int64_t vol_samples = std::max<std::int64_t>(cfg.samples_per_eval, 100000);
  const double vol = volume_auto(es.body, vol_samples, stream.child("kf-volume")).value;
  const Vec a = body_centroid(es.body, vol_samples, stream.child("kf-centroid"));
  const Body centred = scale(translate(es.body, -a), std::pow(vol, -1.0 / n));
  PositionResult body_pos = m_position_search(centred, cfg, stream.child("search"));

  auto measure_objective = [&](const Mat& u, const SeededStream& s) {
    const double r = ball_radius_for_volume(n, 1.0);
    Moments m = mc_moments(cfg.samples_per_eval, s, [&](SeededStream& st) {
      return (u * (sample(d, st) - a)).norm() <= r ? 1.0 : 0.0;
    });
    return detail::root_of_proportion(m.mean, cfg.samples_per_eval, n);
  };
  const SeededStream eval_stream = stream.child("measure");
  const Estimate after = measure_objective(body_pos.map, eval_stream);
  const Estimate before = measure_objective(Mat::Identity(n, n), eval_stream);

  PositionResult r = body_pos;
  r.translation = -(body_pos.map * a);
  r.objective = after.value;
  r.objective_stderr = after.stderr_;
  r.identity_objective = before.value;
  r.identity_stderr = before.stderr_;
  return r;
}

/// Law of X under a position.
inline Density apply_position(const PositionResult& pos, const Density& d) {
  return pushforward(pos.map, d, pos.translation);
}

}  // namespace cvm

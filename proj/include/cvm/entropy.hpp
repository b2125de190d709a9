#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "cvm/error.hpp"
#include "cvm/linalg.hpp"
#include "cvm/measures.hpp"
#include "cvm/rng.hpp"
#include "cvm/special.hpp"
#include "cvm/stats.hpp"

namespace cvm {

enum class EntropyMethod { analytic, plugin_mc, smoothed_sum, knn };

inline const char* to_string(EntropyMethod m) {
  switch (m) {
    case EntropyMethod::analytic: return "analytic";
    case EntropyMethod::plugin_mc: return "plugin_mc";
    case EntropyMethod::smoothed_sum: return "smoothed_sum";
    case EntropyMethod::knn: return "knn";
  }
  return "?";
}

/// Differential entropy in nats.
struct EntropyValue {
  double h = 0.0;
  int n = 1;
  EntropyMethod method = EntropyMethod::analytic;
  double stderr_ = 0.0;
  bool bias_flag = false;
  std::int64_t samples = 0;
};

/// H = exp(2h/n).
inline double entropy_power(double h, int n) { return std::exp(2.0 * h / n); }
inline double entropy_power(const EntropyValue& v) { return entropy_power(v.h, v.n); }
/// Standard error of H by the delta method.
inline double entropy_power_stderr(const EntropyValue& v) { return entropy_power(v) * 2.0 / v.n * v.stderr_; }

inline bool has_analytic_entropy(const Density& d) {
  if (d.as<SymmetrizedPair>() || d.as<SumPair>()) return false;
  if (const auto* lp = d.as<LinearPushforward>()) return has_analytic_entropy(*lp->child);
  return true;
}

inline EntropyValue entropy_analytic(const Density& d) {
  const int n = d.dim();
  auto value = [&](double h) { return EntropyValue{h, n, EntropyMethod::analytic, 0.0, false, 0}; };
  return std::visit(
      [&](const auto& f) -> EntropyValue {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return value(std::log(f.volume));
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return value(0.5 * n * std::log(2.0 * M_PI * M_E) + 0.5 * std::log(f.cov.determinant()));
        } else if constexpr (std::is_same_v<T, ExponentialOrthant>) {
          return value(n * (1.0 - std::log(f.rate)));
        } else if constexpr (std::is_same_v<T, ParetoOrthant>) {
          // E log(1 + sum X) = psi(beta) - psi(beta - n) from the Gamma-mixture form.
          return value(-f.log_norm + f.beta * (digamma(f.beta) - digamma(f.beta - n)));
        } else if constexpr (std::is_same_v<T, PowerSimplex>) {
          if (f.facet) return value(-f.log_norm - f.p * (digamma(f.p + 1.0) - digamma(f.p + n + 1.0)));
          return value(-f.log_norm + f.p / (f.p + n));
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          auto inner = entropy_analytic(*f.child);
          inner.h += f.log_abs_det;
          return inner;
        } else {
          throw OracleUnavailable("no closed-form entropy for a " + d.family() + " law");
        }
      },
      d.variant());
}

/// -(1/N) sum log f(X_i).
inline EntropyValue entropy_plugin_mc(const Density& d, std::int64_t samples, const SeededStream& stream) {
  if (!is_evaluable(d)) throw PreconditionError("entropy_plugin_mc: density is not evaluable");
  Moments m = mc_moments(samples, stream, [&](SeededStream& s) { return -log_density(d, sample(d, s)); });
  return {m.mean, d.dim(), EntropyMethod::plugin_mc, m.stderr_of_mean(), false, samples};
}

/// Analytic value when available, else plug-in Monte Carlo.
inline EntropyValue entropy_auto(const Density& d, std::int64_t samples, const SeededStream& stream) {
  if (has_analytic_entropy(d)) return entropy_analytic(d);
  return entropy_plugin_mc(d, samples, stream);
}

/// Inner average for the density of X + Y at s.
/// one_sided: mean of f_X(s - Y_j) with Y_j ~ f_Y.
/// balanced: multiple importance sampling with the balance heuristic; half
/// of the draws come from f_Y and half from s - X, each weighted by
/// f_X(s - y) f_Y(y) / (f_X(s - y) + f_Y(y)). Needs f_Y evaluable; keeps
/// the estimate stable when either summand is heavy-tailed.
enum class InnerScheme { one_sided, balanced };

struct SmoothedSumConfig {
  std::int64_t outer = 200000;
  std::int64_t inner = 256;
  InnerScheme scheme = InnerScheme::one_sided;
};

namespace detail {

struct PairMoments {
  Moments primary, doubled, extrapolated;
  void merge(const PairMoments& o) {
    primary.merge(o.primary);
    doubled.merge(o.doubled);
    extrapolated.merge(o.extrapolated);
  }
};

// Sum of inner terms over `count` draws.
inline double inner_sum(const Density& x, const Density& y, const Vec& s, std::int64_t count, InnerScheme scheme,
                        SeededStream& st) {
  double total = 0.0;
  if (scheme == InnerScheme::one_sided) {
    for (std::int64_t j = 0; j < count; ++j) total += density_eval(x, s - sample(y, st));
    return total;
  }
  // Each term pairs one draw from each strategy; count counts terms.
  for (std::int64_t j = 0; j < count; ++j) {
    const Vec y1 = sample(y, st);
    const Vec y2 = s - sample(x, st);
    for (const Vec* yy : {&y1, &y2}) {
      const double fx = density_eval(x, s - *yy);
      const double fy = density_eval(y, *yy);
      if (fx + fy > 0.0) total += fx * fy / (fx + fy);
    }
  }
  return total;
}

}  // namespace detail

/// Smoothed plug-in estimate of h(X + Y):
///   -(1/N) sum_i log[(1/M) sum_j f_X(S_i - Y_j)],  S_i = X_i + Y'_i.
/// Each outer point draws 2M inner samples. -log of an inner average is
/// biased upward by about c/M, so the reported value extrapolates the M and
/// 2M terms of each outer point, (M2 t2 - M1 t1)/(M2 - M1). The bias flag is
/// raised when the M and 2M versions differ by more than one standard error.
/// An all-zero inner batch is extended until a positive term appears (S_i
/// lies in the support, so this terminates).
inline EntropyValue entropy_sum_smoothed(const Density& x, const Density& y, const SmoothedSumConfig& cfg,
                                         const SeededStream& stream) {
  require_same_dim(x.dim(), y.dim(), "entropy_sum_smoothed");
  if (!is_evaluable(x)) throw PreconditionError("entropy_sum_smoothed: first summand must be evaluable");
  if (cfg.scheme == InnerScheme::balanced && !is_evaluable(y)) {
    throw PreconditionError("entropy_sum_smoothed: balanced scheme needs both summands evaluable");
  }
  if (cfg.outer < 2 || cfg.inner < 1) throw PreconditionError("entropy_sum_smoothed: need outer >= 2 and inner >= 1");
  const std::int64_t m = cfg.inner;
  auto acc = mc_reduce<detail::PairMoments>(cfg.outer, stream, [&](SeededStream& st, std::int64_t count) {
    detail::PairMoments pm;
    for (std::int64_t i = 0; i < count; ++i) {
      const Vec xs = sample(x, st);
      const Vec s = xs + sample(y, st);
      double first = detail::inner_sum(x, y, s, m, cfg.scheme, st);
      std::int64_t used = m;
      while (first <= 0.0) {
        if (used > 4096 * m) throw NumericalError("entropy_sum_smoothed: inner average stayed zero");
        first += detail::inner_sum(x, y, s, m, cfg.scheme, st);
        used += m;
      }
      const double second = detail::inner_sum(x, y, s, m, cfg.scheme, st);
      const double t1 = -std::log(first / static_cast<double>(used));
      const double t2 = -std::log((first + second) / static_cast<double>(used + m));
      pm.primary.add(t1);
      pm.doubled.add(t2);
      pm.extrapolated.add((static_cast<double>(used + m) * t2 - static_cast<double>(used) * t1) / static_cast<double>(m));
    }
    return pm;
  });
  EntropyValue v{acc.extrapolated.mean, x.dim(), EntropyMethod::smoothed_sum, acc.extrapolated.stderr_of_mean(), false,
                 cfg.outer};
  v.bias_flag = std::abs(acc.doubled.mean - acc.primary.mean) > acc.primary.stderr_of_mean();
  return v;
}

inline EntropyValue entropy_sum_smoothed(const Density& x, const Density& y, std::int64_t outer, std::int64_t inner,
                                         const SeededStream& stream) {
  return entropy_sum_smoothed(x, y, SmoothedSumConfig{outer, inner, InnerScheme::one_sided}, stream);
}

// ---------------------------------------------------------------- kNN entropy

namespace detail {

/// Static kd-tree over points in R^n, n <= kMaxDim, for k-nearest queries.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec>& pts) : pts_(pts), idx_(pts.size()) {
    std::iota(idx_.begin(), idx_.end(), std::size_t{0});
    if (!pts_.empty()) root_ = build(0, idx_.size());
  }

  /// Squared distance to the k-th nearest neighbour of point i, excluding i.
  double kth_sq_distance(std::size_t i, int k) const {
    std::priority_queue<double> heap;
    search(root_, pts_[i], i, static_cast<std::size_t>(k), heap);
    return heap.top();
  }

 private:
  struct Node {
    std::size_t lo, hi;
    int axis;
    double split;
    int left = -1, right = -1;
  };
  static constexpr std::size_t kLeaf = 16;

  int build(std::size_t lo, std::size_t hi) {
    Node node{lo, hi, -1, 0.0};
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (hi - lo <= kLeaf) return id;
    // Split on the axis of largest spread.
    Vec mn = pts_[idx_[lo]], mx = mn;
    for (std::size_t j = lo; j < hi; ++j) {
      mn = mn.cwiseMin(pts_[idx_[j]]);
      mx = mx.cwiseMax(pts_[idx_[j]]);
    }
    Eigen::Index axis = 0;
    (mx - mn).maxCoeff(&axis);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(lo), idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) { return pts_[a](axis) < pts_[b](axis); });
    const double split = pts_[idx_[mid]](axis);
    const int left = build(lo, mid);
    const int right = build(mid, hi);
    nodes_[static_cast<std::size_t>(id)].axis = static_cast<int>(axis);
    nodes_[static_cast<std::size_t>(id)].split = split;
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  void search(int id, const Vec& q, std::size_t self, std::size_t k, std::priority_queue<double>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.axis < 0) {
      for (std::size_t j = node.lo; j < node.hi; ++j) {
        const std::size_t p = idx_[j];
        if (p == self) continue;
        const double d2 = (pts_[p] - q).squaredNorm();
        if (heap.size() < k) heap.push(d2);
        else if (d2 < heap.top()) {
          heap.pop();
          heap.push(d2);
        }
      }
      return;
    }
    const double diff = q(node.axis) - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search(near, q, self, k, heap);
    if (heap.size() < k || diff * diff < heap.top()) search(far, q, self, k, heap);
  }

  const std::vector<Vec>& pts_;
  std::vector<std::size_t> idx_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace detail

/// Kozachenko-Leonenko estimate:
///   h = psi(N) - psi(k) + log V_n + (n/N) sum_i log eps_i,
/// eps_i the distance to the k-th neighbour (floored at 1e-12).
/// Cross-check only; boundary bias is visible on compact supports.
inline EntropyValue entropy_knn(const std::vector<Vec>& samples, int k) {
  if (k < 1) throw PreconditionError("entropy_knn: k must be >= 1");
  const auto count = static_cast<std::int64_t>(samples.size());
  if (count <= k) throw PreconditionError("entropy_knn: need more samples than k");
  const int n = static_cast<int>(samples[0].size());
  detail::KdTree tree(samples);
  const std::int64_t chunks = (count + kChunkSize - 1) / kChunkSize;
  auto parts = map_chunks<Moments>(chunks, [&](std::int64_t c) {
    Moments m;
    const std::int64_t hi = std::min(count, (c + 1) * kChunkSize);
    for (std::int64_t i = c * kChunkSize; i < hi; ++i) {
      const double eps = std::max(1e-12, std::sqrt(tree.kth_sq_distance(static_cast<std::size_t>(i), k)));
      m.add(n * std::log(eps));
    }
    return m;
  });
  Moments total;
  for (const auto& p : parts) total.merge(p);
  const double h = digamma(static_cast<double>(count)) - digamma(static_cast<double>(k)) + log_ball_volume(n, 1.0) +
                   total.mean;
  return {h, n, EntropyMethod::knn, total.stderr_of_mean(), false, count};
}

/// Draws `samples` points of the law and applies entropy_knn.
inline EntropyValue entropy_knn(const Density& d, std::int64_t samples, int k, const SeededStream& stream) {
  const std::int64_t chunks = (samples + kChunkSize - 1) / kChunkSize;
  auto parts = map_chunks<std::vector<Vec>>(chunks, [&](std::int64_t c) {
    SeededStream s = stream.child("chunk", static_cast<std::uint64_t>(c));
    std::vector<Vec> out;
    const std::int64_t hi = std::min(samples, (c + 1) * kChunkSize);
    for (std::int64_t i = c * kChunkSize; i < hi; ++i) out.push_back(sample(d, s));
    return out;
  });
  std::vector<Vec> all;
  all.reserve(static_cast<std::size_t>(samples));
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return entropy_knn(all, k);
}

// ---------------------------------------------------------------- Renyi-2

/// Integral of f^2 as the sample mean of f(X).
inline Estimate renyi2_mc(const Density& d, std::int64_t samples, const SeededStream& stream) {
  if (!is_evaluable(d)) throw PreconditionError("renyi2_mc: density is not evaluable");
  Moments m = mc_moments(samples, stream, [&](SeededStream& s) { return density_eval(d, sample(d, s)); });
  return {m.mean, m.stderr_of_mean(), samples};
}

}  // namespace cvm

#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "cvm/body.hpp"
#include "cvm/error.hpp"
#include "cvm/linalg.hpp"
#include "cvm/rng.hpp"
#include "cvm/special.hpp"
#include "cvm/stats.hpp"

namespace cvm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// kappa with the derived kappa_tilde = kappa / (1 - n kappa) and
/// beta = 1 / |kappa_tilde|.
struct ConvexityParams {
  int n = 1;
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  double beta = kInf;

  static ConvexityParams from_kappa(double kappa, int n) {
    if (n < 1) throw PreconditionError("ConvexityParams: dimension must be positive");
    if (kappa > 1.0 / n + 1e-15) throw PreconditionError("ConvexityParams: kappa exceeds 1/n");
    ConvexityParams p;
    p.n = n;
    p.kappa = kappa;
    if (kappa == -kInf) {
      p.kappa_tilde = -1.0 / n;
      p.beta = n;
    } else if (std::abs(kappa - 1.0 / n) <= 1e-15) {
      p.kappa = 1.0 / n;
      p.kappa_tilde = kInf;
      p.beta = 0.0;
    } else {
      p.kappa_tilde = kappa / (1.0 - n * kappa);
      p.beta = kappa == 0.0 ? kInf : 1.0 / std::abs(p.kappa_tilde);
    }
    return p;
  }

  /// kappa from kappa_tilde (inverse map kappa = kt / (1 + n kt)).
  static ConvexityParams from_kappa_tilde(double kappa_tilde, int n) {
    if (kappa_tilde == kInf) return from_kappa(1.0 / n, n);
    if (!(kappa_tilde > -1.0 / n)) throw PreconditionError("ConvexityParams: kappa_tilde must exceed -1/n");
    return from_kappa(kappa_tilde / (1.0 + n * kappa_tilde), n);
  }
};

/// kappa of the convolution: 1/kappa = 1/k1 + 1/k2, requiring k1 + k2 > 0
/// and both in [-1, 1], or both zero.
inline ConvexityParams convolution_kappa(const ConvexityParams& a, const ConvexityParams& b) {
  require_same_dim(a.n, b.n, "convolution_kappa");
  if (a.kappa == 0.0 && b.kappa == 0.0) return ConvexityParams::from_kappa(0.0, a.n);
  if (!(a.kappa + b.kappa > 0.0)) throw PreconditionError("convolution_kappa: need kappa' + kappa'' > 0");
  if (a.kappa < -1.0 || a.kappa > 1.0 || b.kappa < -1.0 || b.kappa > 1.0) {
    throw PreconditionError("convolution_kappa: kappa outside [-1, 1]");
  }
  return ConvexityParams::from_kappa(a.kappa * b.kappa / (a.kappa + b.kappa), a.n);
}

class Density;

struct UniformOnBody {
  Body body;
  double volume;
};

struct Gaussian {
  Vec mean;
  Mat cov;
  Mat chol;
  Mat inv;
  double log_norm;
};

/// lambda^n exp(-lambda (x_1 + ... + x_n)) on the positive orthant.
struct ExponentialOrthant {
  int n;
  double rate;
};

/// (beta-1)...(beta-n) (1 + x_1 + ... + x_n)^{-beta} on the positive orthant.
struct ParetoOrthant {
  int n;
  double beta;
  double log_norm;
};

/// Density on the standard simplex proportional to s^p (vertex anchored,
/// largest on the face s = 1) or (1 - s)^p (facet anchored), s = sum x_i.
struct PowerSimplex {
  int n;
  double p;
  bool facet;
  double log_norm;
};

/// Law of u X + offset.
struct LinearPushforward {
  Mat map;
  Mat inverse;
  Vec offset;
  double log_abs_det;
  std::shared_ptr<const Density> child;
};

/// Law of X - X' for an independent copy X'.
struct SymmetrizedPair {
  std::shared_ptr<const Density> child;
};

/// Law of X + Y for independent X, Y.
struct SumPair {
  std::shared_ptr<const Density> a, b;
};

class Density {
 public:
  using Variant = std::variant<UniformOnBody, Gaussian, ExponentialOrthant, ParetoOrthant, PowerSimplex,
                               LinearPushforward, SymmetrizedPair, SumPair>;

  Density(Variant v, int n) : v_(std::move(v)), n_(n) {}

  int dim() const { return n_; }
  const Variant& variant() const { return v_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&v_);
  }
  std::string family() const {
    static const char* names[] = {"uniform", "gaussian", "exponential", "pareto", "power_simplex",
                                  "pushforward", "symmetrized", "sum"};
    return names[v_.index()];
  }

 private:
  Variant v_;
  int n_;
};

// ---------------------------------------------------------------- factories

inline Density make_uniform(const Body& body) { return {UniformOnBody{body, volume_exact(body)}, body.dim()}; }

/// Uniform law with an externally supplied volume (e.g. a Monte Carlo value).
inline Density make_uniform(const Body& body, double volume) {
  if (!(volume > 0.0)) throw PreconditionError("uniform: volume must be positive");
  return {UniformOnBody{body, volume}, body.dim()};
}

inline Density make_gaussian(const Vec& mean, const Mat& cov) {
  const int n = static_cast<int>(mean.size());
  require_dim(n);
  require_same_dim(cov.rows(), n, "gaussian covariance");
  spd_eigen(cov, "gaussian covariance");
  Eigen::LLT<Mat> llt(cov);
  const Mat l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double log_norm = -0.5 * n * std::log(2.0 * M_PI) - 0.5 * log_det;
  return {Gaussian{mean, cov, l, cov.inverse(), log_norm}, n};
}

inline Density make_standard_gaussian(int n) {
  require_dim(n);
  return make_gaussian(Vec::Zero(n), Mat::Identity(n, n));
}

inline Density make_exponential(int n, double rate = 1.0) {
  require_dim(n);
  if (!(rate > 0.0)) throw PreconditionError("exponential: rate must be positive");
  return {ExponentialOrthant{n, rate}, n};
}

inline Density make_pareto(int n, double beta) {
  require_dim(n);
  if (!(beta > n + 1e-6)) throw PreconditionError("pareto: need beta > n");
  double log_norm = 0.0;
  for (int i = 1; i <= n; ++i) log_norm += std::log(beta - i);
  return {ParetoOrthant{n, beta, log_norm}, n};
}

/// p = 1 / kappa_tilde >= 0.
inline Density make_power_simplex(int n, double p, bool facet = false) {
  require_dim(n);
  if (!(p >= 0.0) || !std::isfinite(p)) throw PreconditionError("power_simplex: need finite p >= 0");
  double log_norm;
  if (facet) {
    log_norm = std::lgamma(n + p + 1.0) - std::lgamma(p + 1.0);
  } else {
    log_norm = log_factorial(n - 1) + std::log(p + n);
  }
  return {PowerSimplex{n, p, facet, log_norm}, n};
}

inline Density pushforward(const Mat& u, const Density& d, const Vec& offset);

inline Density pushforward(const Mat& u, const Density& d) { return pushforward(u, d, Vec::Zero(d.dim())); }

/// Law of u X + offset; closed forms for uniform and Gaussian laws.
inline Density pushforward(const Mat& u, const Density& d, const Vec& offset) {
  const int n = d.dim();
  require_same_dim(u.rows(), n, "pushforward map");
  require_same_dim(u.cols(), n, "pushforward map");
  require_same_dim(offset.size(), n, "pushforward offset");
  const double det = u.determinant();
  if (std::abs(det) < 1e-300) throw PreconditionError("pushforward: singular map");
  if (const auto* un = d.as<UniformOnBody>()) return make_uniform(linear_image(u, un->body, offset), un->volume * std::abs(det));
  if (const auto* g = d.as<Gaussian>()) {
    Mat c = u * g->cov * u.transpose();
    return make_gaussian(u * g->mean + offset, 0.5 * (c + c.transpose()));
  }
  if (const auto* lp = d.as<LinearPushforward>()) return pushforward(u * lp->map, *lp->child, u * lp->offset + offset);
  return {LinearPushforward{u, u.inverse(), offset, std::log(std::abs(det)), std::make_shared<const Density>(d)}, n};
}

inline Density symmetrize(const Density& d) { return {SymmetrizedPair{std::make_shared<const Density>(d)}, d.dim()}; }

inline Density make_sum_pair(const Density& a, const Density& b) {
  require_same_dim(a.dim(), b.dim(), "sum pair");
  return {SumPair{std::make_shared<const Density>(a), std::make_shared<const Density>(b)}, a.dim()};
}

// ---------------------------------------------------------------- parameters

inline ConvexityParams kappa_of(const Density& d) {
  const int n = d.dim();
  return std::visit(
      [&](const auto& f) -> ConvexityParams {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return ConvexityParams::from_kappa(1.0 / n, n);
        } else if constexpr (std::is_same_v<T, Gaussian> || std::is_same_v<T, ExponentialOrthant>) {
          return ConvexityParams::from_kappa(0.0, n);
        } else if constexpr (std::is_same_v<T, ParetoOrthant>) {
          return ConvexityParams::from_kappa(-1.0 / (f.beta - n), n);
        } else if constexpr (std::is_same_v<T, PowerSimplex>) {
          return ConvexityParams::from_kappa(1.0 / (f.p + n), n);
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          return kappa_of(*f.child);
        } else if constexpr (std::is_same_v<T, SymmetrizedPair>) {
          const auto k = kappa_of(*f.child);
          return convolution_kappa(k, k);
        } else {
          return convolution_kappa(kappa_of(*f.a), kappa_of(*f.b));
        }
      },
      d.variant());
}

inline bool is_evaluable(const Density& d) {
  if (d.as<SymmetrizedPair>() || d.as<SumPair>()) return false;
  if (const auto* lp = d.as<LinearPushforward>()) return is_evaluable(*lp->child);
  return true;
}

/// Symmetric about the origin (sufficient test for composite laws).
inline bool is_symmetric(const Density& d) {
  return std::visit(
      [&](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return is_origin_symmetric(f.body);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return f.mean.cwiseAbs().maxCoeff() == 0.0;
        } else if constexpr (std::is_same_v<T, SymmetrizedPair>) {
          return true;
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          return f.offset.cwiseAbs().maxCoeff() == 0.0 && is_symmetric(*f.child);
        } else if constexpr (std::is_same_v<T, SumPair>) {
          return is_symmetric(*f.a) && is_symmetric(*f.b);
        } else {
          return false;
        }
      },
      d.variant());
}

// ---------------------------------------------------------------- evaluation

/// log f(x); -inf outside the support.
inline double log_density(const Density& d, const Vec& x) {
  require_same_dim(x.size(), d.dim(), "log_density");
  const int n = d.dim();
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return contains(f.body, x, 0.0) ? -std::log(f.volume) : -kInf;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          const Vec z = x - f.mean;
          return f.log_norm - 0.5 * z.dot(f.inv * z);
        } else if constexpr (std::is_same_v<T, ExponentialOrthant>) {
          if (x.minCoeff() < 0.0) return -kInf;
          return n * std::log(f.rate) - f.rate * x.sum();
        } else if constexpr (std::is_same_v<T, ParetoOrthant>) {
          if (x.minCoeff() < 0.0) return -kInf;
          return f.log_norm - f.beta * std::log1p(x.sum());
        } else if constexpr (std::is_same_v<T, PowerSimplex>) {
          const double s = x.sum();
          if (x.minCoeff() < 0.0 || s > 1.0) return -kInf;
          const double base = f.facet ? 1.0 - s : s;
          if (f.p == 0.0) return f.log_norm;
          return base > 0.0 ? f.log_norm + f.p * std::log(base) : -kInf;
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          return log_density(*f.child, f.inverse * (x - f.offset)) - f.log_abs_det;
        } else {
          throw PreconditionError("density of a " + d.family() + " law is not directly evaluable");
        }
      },
      d.variant());
}

inline double density_eval(const Density& d, const Vec& x) {
  if (const auto* u = d.as<UniformOnBody>()) {
    require_same_dim(x.size(), d.dim(), "density_eval");
    return contains(u->body, x, 0.0) ? 1.0 / u->volume : 0.0;
  }
  return std::exp(log_density(d, x));
}

/// ||f|| = ess sup f.
inline double max_density(const Density& d) {
  const int n = d.dim();
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return 1.0 / f.volume;
        } else if constexpr (std::is_same_v<T, Gaussian> || std::is_same_v<T, ParetoOrthant> ||
                             std::is_same_v<T, PowerSimplex>) {
          return std::exp(f.log_norm);
        } else if constexpr (std::is_same_v<T, ExponentialOrthant>) {
          return std::pow(f.rate, n);
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          return max_density(*f.child) * std::exp(-f.log_abs_det);
        } else {
          throw PreconditionError("max density of a " + d.family() + " law is not available in closed form");
        }
      },
      d.variant());
}

/// Closed-form integral of f^2 where available.
inline std::optional<double> renyi2_exact(const Density& d) {
  const int n = d.dim();
  return std::visit(
      [&](const auto& f) -> std::optional<double> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return 1.0 / f.volume;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return std::pow(4.0 * M_PI, -0.5 * n) / std::sqrt(f.cov.determinant());
        } else if constexpr (std::is_same_v<T, ExponentialOrthant>) {
          return std::pow(0.5 * f.rate, n);
        } else if constexpr (std::is_same_v<T, ParetoOrthant>) {
          double log_int = 0.0;
          for (int i = 1; i <= n; ++i) log_int -= std::log(2.0 * f.beta - i);
          return std::exp(2.0 * f.log_norm + log_int);
        } else if constexpr (std::is_same_v<T, PowerSimplex>) {
          const double log_int = f.facet ? std::lgamma(2.0 * f.p + 1.0) - std::lgamma(2.0 * f.p + n + 1.0)
                                         : -log_factorial(n - 1) - std::log(2.0 * f.p + n);
          return std::exp(2.0 * f.log_norm + log_int);
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          auto inner = renyi2_exact(*f.child);
          if (!inner) return std::nullopt;
          return *inner * std::exp(-f.log_abs_det);
        } else {
          return std::nullopt;
        }
      },
      d.variant());
}

// ---------------------------------------------------------------- sampling

inline Vec sample(const Density& d, SeededStream& s) {
  const int n = d.dim();
  return std::visit(
      [&](const auto& f) -> Vec {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return sample_uniform(f.body, s);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return f.mean + f.chol * s.normal_vec(n);
        } else if constexpr (std::is_same_v<T, ExponentialOrthant>) {
          Vec x(n);
          for (int i = 0; i < n; ++i) x(i) = s.exponential() / f.rate;
          return x;
        } else if constexpr (std::is_same_v<T, ParetoOrthant>) {
          // X = E / G with E_i ~ Exp(1), G ~ Gamma(beta - n).
          const double g = s.gamma(f.beta - n);
          Vec x(n);
          for (int i = 0; i < n; ++i) x(i) = s.exponential() / g;
          return x;
        } else if constexpr (std::is_same_v<T, PowerSimplex>) {
          double r;
          if (f.facet) {
            const double g1 = s.gamma(n);
            const double g2 = s.gamma(f.p + 1.0);
            r = g1 / (g1 + g2);
          } else {
            r = std::pow(s.uniform(), 1.0 / (f.p + n));
          }
          Vec w(n);
          double total = 0.0;
          for (int i = 0; i < n; ++i) {
            w(i) = s.exponential();
            total += w(i);
          }
          return r * w / total;
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          return f.map * sample(*f.child, s) + f.offset;
        } else if constexpr (std::is_same_v<T, SymmetrizedPair>) {
          const Vec a = sample(*f.child, s);
          return a - sample(*f.child, s);
        } else {
          const Vec a = sample(*f.a, s);
          return a + sample(*f.b, s);
        }
      },
      d.variant());
}

// ---------------------------------------------------------------- moments

struct MeanCov {
  Vec mean;
  Mat cov;
  Vec mean_stderr;
  Mat cov_stderr;
};

/// Exact mean and covariance where closed forms exist.
inline std::optional<std::pair<Vec, Mat>> exact_mean_cov(const Density& d) {
  const int n = d.dim();
  return std::visit(
      [&](const auto& f) -> std::optional<std::pair<Vec, Mat>> {
        using T = std::decay_t<decltype(f)>;
        using P = std::pair<Vec, Mat>;
        if constexpr (std::is_same_v<T, UniformOnBody>) {
          return exact_moments(f.body);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return P{f.mean, f.cov};
        } else if constexpr (std::is_same_v<T, ExponentialOrthant>) {
          return P{Vec::Constant(n, 1.0 / f.rate), Mat::Identity(n, n) / (f.rate * f.rate)};
        } else if constexpr (std::is_same_v<T, ParetoOrthant>) {
          const double a = f.beta - n;
          if (!(a > 2.0)) return std::nullopt;
          // E[1/G] = 1/(a-1), E[1/G^2] = 1/((a-1)(a-2)).
          const double m1 = 1.0 / (a - 1.0);
          const double m2 = 1.0 / ((a - 1.0) * (a - 2.0));
          Mat second = Mat::Constant(n, n, m2) + Mat::Identity(n, n) * m2;
          return P{Vec::Constant(n, m1), second - Mat::Constant(n, n, m1 * m1)};
        } else if constexpr (std::is_same_v<T, PowerSimplex>) {
          // x = r D with D ~ Dirichlet(1,...,1) independent of r.
          double er, er2;
          if (f.facet) {
            const double t = n + f.p + 1.0;
            er = n / t;
            er2 = n * (n + 1.0) / (t * (t + 1.0));
          } else {
            const double k = f.p + n;
            er = k / (k + 1.0);
            er2 = k / (k + 2.0);
          }
          const double ed = 1.0 / n;
          const double edd_off = 1.0 / (n * (n + 1.0));
          const double edd_diag = 2.0 / (n * (n + 1.0));
          Mat second = Mat::Constant(n, n, er2 * edd_off);
          second.diagonal().setConstant(er2 * edd_diag);
          const Vec mean = Vec::Constant(n, er * ed);
          return P{mean, second - mean * mean.transpose()};
        } else if constexpr (std::is_same_v<T, LinearPushforward>) {
          auto inner = exact_mean_cov(*f.child);
          if (!inner) return std::nullopt;
          return P{f.map * inner->first + f.offset, f.map * inner->second * f.map.transpose()};
        } else if constexpr (std::is_same_v<T, SymmetrizedPair>) {
          auto inner = exact_mean_cov(*f.child);
          if (!inner) return std::nullopt;
          return P{Vec::Zero(n), 2.0 * inner->second};
        } else {
          auto a = exact_mean_cov(*f.a);
          auto b = exact_mean_cov(*f.b);
          if (!a || !b) return std::nullopt;
          return P{a->first + b->first, a->second + b->second};
        }
      },
      d.variant());
}

namespace detail {
struct CovAccumulator {
  int n = 0;
  double count = 0.0;
  Vec mean;
  Mat m2;

  void init(int dim) {
    n = dim;
    mean = Vec::Zero(n);
    m2 = Mat::Zero(n, n);
  }
  void add(const Vec& x) {
    count += 1.0;
    const Vec d = x - mean;
    mean += d / count;
    m2 += d * (x - mean).transpose();
  }
  void merge(const CovAccumulator& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double total = count + o.count;
    const Vec d = o.mean - mean;
    mean += d * (o.count / total);
    m2 += o.m2 + d * d.transpose() * (count * o.count / total);
    count = total;
  }
};
}  // namespace detail

/// Sample mean and covariance with per-entry standard errors. The
/// covariance stderr uses the fourth-moment-free approximation
/// sqrt((S_ii S_jj + S_ij^2) / N).
inline MeanCov mean_cov_mc(const Density& d, std::int64_t samples, const SeededStream& stream) {
  if (samples < 2) throw PreconditionError("mean_cov_mc: need at least two samples");
  const int n = d.dim();
  auto acc = mc_reduce<detail::CovAccumulator>(samples, stream, [&](SeededStream& s, std::int64_t count) {
    detail::CovAccumulator a;
    a.init(n);
    for (std::int64_t i = 0; i < count; ++i) a.add(sample(d, s));
    return a;
  });
  MeanCov out;
  out.mean = acc.mean;
  out.cov = acc.m2 / (acc.count - 1.0);
  out.mean_stderr = (out.cov.diagonal() / acc.count).cwiseSqrt();
  out.cov_stderr = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.cov_stderr(i, j) = std::sqrt((out.cov(i, i) * out.cov(j, j) + out.cov(i, j) * out.cov(i, j)) / acc.count);
  return out;
}

/// Exact moments when known, otherwise Monte Carlo.
inline std::pair<Vec, Mat> mean_cov_auto(const Density& d, std::int64_t samples, const SeededStream& stream) {
  if (auto e = exact_mean_cov(d)) return *e;
  auto mc = mean_cov_mc(d, samples, stream);
  return {mc.mean, mc.cov};
}

}  // namespace cvm

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cvm/error.hpp"
#include "cvm/linalg.hpp"
#include "cvm/lp.hpp"
#include "cvm/rng.hpp"
#include "cvm/special.hpp"
#include "cvm/stats.hpp"

namespace cvm {

class Body;

/// Axis-aligned box prod [lo_i, hi_i].
struct Box {
  Vec lo, hi;
};

struct Ball {
  Vec center;
  double radius = 1.0;
};

/// {x : (x - c)^T Q^{-1} (x - c) <= 1} for SPD shape Q.
struct Ellipsoid {
  Vec center;
  Mat shape;
  Mat shape_inv;
  Mat chol;  // lower factor, Q = L L^T
};

struct Simplex {
  std::vector<Vec> vertices;
  Mat edge_inv;  // inverse of [v1 - v0, ..., vn - v0]
};

struct VPolytope {
  std::vector<Vec> vertices;
};

/// center + sum t_i g_i with t_i in [-1/2, 1/2].
struct Zonotope {
  Vec center;
  std::vector<Vec> generators;
  // Unit facet normals and half-widths; empty when the generators do not span.
  std::vector<Vec> normals;
  std::vector<double> half_widths;
};

/// {x >= 0 : lo <= x_1 + ... + x_n <= hi}, the convex hull of lo e_i and hi e_i.
struct SimplexSlab {
  int n = 1;
  double lo = 0.0;
  double hi = 1.0;
};

struct SumNode {
  std::vector<Body> children;
};

/// {u x + offset : x in child}.
struct LinearImage {
  Mat map;
  Mat inverse;
  Vec offset;
  std::shared_ptr<const Body> child;
};

/// A convex body in R^n, n <= kMaxDim. Immutable value type.
class Body {
 public:
  using Variant = std::variant<Box, Ball, Ellipsoid, Simplex, VPolytope, Zonotope, SimplexSlab, SumNode, LinearImage>;

  Body(Variant v, int n) : v_(std::move(v)), n_(n) {}

  int dim() const { return n_; }
  const Variant& variant() const { return v_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&v_);
  }
  std::string kind() const {
    static const char* names[] = {"box", "ball", "ellipsoid", "simplex", "vpolytope", "zonotope", "slab", "sum", "linear_image"};
    return names[v_.index()];
  }

 private:
  Variant v_;
  int n_;
};

// ---------------------------------------------------------------- factories

inline Body make_box(const Vec& lo, const Vec& hi) {
  require_same_dim(lo.size(), hi.size(), "box bounds");
  require_dim(static_cast<int>(lo.size()));
  if ((hi - lo).minCoeff() < 0.0) throw PreconditionError("box: hi < lo");
  return {Box{lo, hi}, static_cast<int>(lo.size())};
}

inline Body make_cube(int n, double lo = 0.0, double hi = 1.0) {
  require_dim(n);
  return make_box(Vec::Constant(n, lo), Vec::Constant(n, hi));
}

inline Body make_ball(const Vec& center, double radius) {
  require_dim(static_cast<int>(center.size()));
  if (!(radius > 0.0)) throw PreconditionError("ball: radius must be positive");
  return {Ball{center, radius}, static_cast<int>(center.size())};
}

inline Body make_ellipsoid(const Vec& center, const Mat& shape) {
  const int n = static_cast<int>(center.size());
  require_dim(n);
  require_same_dim(shape.rows(), n, "ellipsoid shape");
  spd_eigen(shape, "ellipsoid shape");
  Eigen::LLT<Mat> llt(shape);
  return {Ellipsoid{center, shape, shape.inverse(), llt.matrixL()}, n};
}

inline Body make_simplex(std::vector<Vec> vertices) {
  if (vertices.empty()) throw PreconditionError("simplex: no vertices");
  const int n = static_cast<int>(vertices[0].size());
  require_dim(n);
  if (static_cast<int>(vertices.size()) != n + 1) throw PreconditionError("simplex: need n+1 vertices");
  Mat edges(n, n);
  for (int j = 0; j < n; ++j) {
    require_same_dim(vertices[j + 1].size(), n, "simplex vertex");
    edges.col(j) = vertices[j + 1] - vertices[0];
  }
  const double det = edges.determinant();
  if (std::abs(det) < 1e-14 * std::max(1.0, max_abs(edges))) throw PreconditionError("simplex: vertices are affinely dependent");
  Simplex s{std::move(vertices), edges.inverse()};
  return {std::move(s), n};
}

/// conv{0, e_1, ..., e_n}.
inline Body make_standard_simplex(int n, double scale = 1.0) {
  require_dim(n);
  std::vector<Vec> vs{Vec::Zero(n)};
  for (int i = 0; i < n; ++i) vs.push_back(scale * unit_vector(n, i));
  return make_simplex(std::move(vs));
}

inline Body make_vpolytope(std::vector<Vec> vertices) {
  if (vertices.empty()) throw PreconditionError("vpolytope: no vertices");
  const int n = static_cast<int>(vertices[0].size());
  require_dim(n);
  for (const auto& v : vertices) require_same_dim(v.size(), n, "vpolytope vertex");
  return {VPolytope{std::move(vertices)}, n};
}

namespace detail {

// Normal to the span of n-1 vectors in R^n via signed cofactors.
inline Vec cofactor_normal(const std::vector<const Vec*>& cols, int n) {
  Vec nu(n);
  if (n == 1) {
    nu(0) = 1.0;
    return nu;
  }
  Mat m(n, n - 1);
  for (int j = 0; j < n - 1; ++j) m.col(j) = *cols[static_cast<std::size_t>(j)];
  for (int i = 0; i < n; ++i) {
    Mat minor(n - 1, n - 1);
    for (int r = 0, rr = 0; r < n; ++r) {
      if (r == i) continue;
      minor.row(rr++) = m.row(r);
    }
    nu(i) = ((i % 2) ? -1.0 : 1.0) * minor.determinant();
  }
  return nu;
}

template <class F>
void for_each_subset(int total, int size, F&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (size > total) return;
  for (;;) {
    fn(idx);
    int i = size - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == total - size + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace detail

inline Body make_zonotope(const Vec& center, std::vector<Vec> generators) {
  const int n = static_cast<int>(center.size());
  require_dim(n);
  for (const auto& g : generators) require_same_dim(g.size(), n, "zonotope generator");
  Zonotope z{center, std::move(generators), {}, {}};
  const int g = static_cast<int>(z.generators.size());
  if (g >= n && g <= 24) {
    Eigen::MatrixXd gm(n, g);
    for (int j = 0; j < g; ++j) gm.col(j) = z.generators[static_cast<std::size_t>(j)];
    if (Eigen::FullPivLU<Eigen::MatrixXd>(gm).rank() == n) {
      detail::for_each_subset(g, n - 1, [&](const std::vector<int>& idx) {
        std::vector<const Vec*> cols;
        for (int i : idx) cols.push_back(&z.generators[static_cast<std::size_t>(i)]);
        Vec nu = detail::cofactor_normal(cols, n);
        const double len = nu.norm();
        if (len < 1e-12) return;
        nu /= len;
        double hw = 0.0;
        for (const auto& gen : z.generators) hw += 0.5 * std::abs(gen.dot(nu));
        z.normals.push_back(nu);
        z.half_widths.push_back(hw);
      });
    }
  }
  return {std::move(z), n};
}

/// The segment [a, b] as a one-generator zonotope.
inline Body make_segment(const Vec& a, const Vec& b) {
  require_same_dim(a.size(), b.size(), "segment");
  return make_zonotope(0.5 * (a + b), {b - a});
}

inline Body make_simplex_slab(int n, double lo, double hi) {
  require_dim(n);
  if (!(lo >= 0.0 && hi > lo)) throw PreconditionError("simplex slab: need 0 <= lo < hi");
  return {SimplexSlab{n, lo, hi}, n};
}

namespace detail {
inline void flatten_into(const Body& b, std::vector<Body>& out) {
  if (const auto* s = b.as<SumNode>()) {
    for (const auto& c : s->children) flatten_into(c, out);
  } else {
    out.push_back(b);
  }
}
}  // namespace detail

inline Body make_sum(const std::vector<Body>& children) {
  if (children.empty()) throw PreconditionError("sum: no children");
  const int n = children[0].dim();
  SumNode s;
  for (const auto& c : children) {
    require_same_dim(c.dim(), n, "sum child");
    detail::flatten_into(c, s.children);
  }
  return {std::move(s), n};
}

// ------------------------------------------------------------ support function

namespace detail {

inline double support_raw(const Body& body, const Vec& d) {
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          double s = 0.0;
          for (Eigen::Index i = 0; i < d.size(); ++i) s += std::max(d(i) * b.lo(i), d(i) * b.hi(i));
          return s;
        } else if constexpr (std::is_same_v<T, Ball>) {
          return b.center.dot(d) + b.radius * d.norm();
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return b.center.dot(d) + std::sqrt(std::max(0.0, d.dot(b.shape * d)));
        } else if constexpr (std::is_same_v<T, Simplex> || std::is_same_v<T, VPolytope>) {
          double s = -INFINITY;
          for (const auto& v : b.vertices) s = std::max(s, v.dot(d));
          return s;
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          double s = b.center.dot(d);
          for (const auto& g : b.generators) s += 0.5 * std::abs(g.dot(d));
          return s;
        } else if constexpr (std::is_same_v<T, SimplexSlab>) {
          const double m = d.maxCoeff();
          return std::max(b.lo * m, b.hi * m);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          double s = 0.0;
          for (const auto& c : b.children) s += support_raw(c, d);
          return s;
        } else {
          const Vec pulled = b.map.transpose() * d;
          return b.offset.dot(d) + support_raw(*b.child, pulled);
        }
      },
      body.variant());
}

}  // namespace detail

/// h_A(theta) = sup_{x in A} <x, theta> for the normalized direction.
inline double support_function(const Body& body, const Vec& direction) {
  require_same_dim(direction.size(), body.dim(), "support direction");
  const double len = direction.norm();
  if (!(len > 0.0)) throw PreconditionError("support_function: zero direction");
  return detail::support_raw(body, direction / len);
}

inline std::pair<Vec, Vec> bounding_box(const Body& body) {
  const int n = body.dim();
  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    const Vec e = unit_vector(n, i);
    hi(i) = detail::support_raw(body, e);
    lo(i) = -detail::support_raw(body, -e);
  }
  return {lo, hi};
}

// ------------------------------------------------------------ vertex lists

inline std::optional<std::vector<Vec>> vertex_list(const Body& body);

namespace detail {

inline std::vector<Vec> box_corners(const Vec& lo, const Vec& hi) {
  const auto n = lo.size();
  std::vector<Vec> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = (mask >> i) & 1u ? hi(i) : lo(i);
    out.push_back(v);
  }
  return out;
}

inline std::vector<Vec> pairwise_sums(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  std::vector<Vec> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) {
      Vec s = x + y;
      bool dup = false;
      for (const auto& z : out)
        if ((z - s).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + s.cwiseAbs().maxCoeff())) {
          dup = true;
          break;
        }
      if (!dup) out.push_back(std::move(s));
    }
  return out;
}

}  // namespace detail

/// Vertex (or generating point) list for polytopal variants; nullopt for
/// smooth bodies.
inline std::optional<std::vector<Vec>> vertex_list(const Body& body) {
  return std::visit(
      [&](const auto& b) -> std::optional<std::vector<Vec>> {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          return detail::box_corners(b.lo, b.hi);
        } else if constexpr (std::is_same_v<T, Simplex> || std::is_same_v<T, VPolytope>) {
          return b.vertices;
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          if (b.generators.size() > 16) return std::nullopt;
          std::vector<Vec> pts{b.center};
          for (const auto& g : b.generators) {
            std::vector<Vec> next;
            next.reserve(pts.size() * 2);
            for (const auto& p : pts) {
              next.push_back(p - 0.5 * g);
              next.push_back(p + 0.5 * g);
            }
            pts = std::move(next);
          }
          return pts;
        } else if constexpr (std::is_same_v<T, SimplexSlab>) {
          std::vector<Vec> pts;
          if (b.lo == 0.0) pts.push_back(Vec::Zero(b.n));
          for (int i = 0; i < b.n; ++i) {
            if (b.lo > 0.0) pts.push_back(b.lo * unit_vector(b.n, i));
            pts.push_back(b.hi * unit_vector(b.n, i));
          }
          return pts;
        } else if constexpr (std::is_same_v<T, SumNode>) {
          std::vector<Vec> acc{Vec::Zero(body.dim())};
          for (const auto& c : b.children) {
            auto vs = vertex_list(c);
            if (!vs) return std::nullopt;
            acc = detail::pairwise_sums(acc, *vs);
            if (acc.size() > 4096) return std::nullopt;
          }
          return acc;
        } else if constexpr (std::is_same_v<T, LinearImage>) {
          auto vs = vertex_list(*b.child);
          if (!vs) return std::nullopt;
          for (auto& v : *vs) v = b.map * v + b.offset;
          return vs;
        } else {
          return std::nullopt;
        }
      },
      body.variant());
}

// ------------------------------------------------------------ membership

namespace detail {

// Parts of a flattened Minkowski sum grouped by membership strategy.
struct SumParts {
  bool has_box = false;
  Vec box_lo, box_hi;
  bool has_ball = false;
  Vec ball_center;
  double ball_radius = 0.0;
  std::vector<std::vector<Vec>> polytopes;
  bool unsupported = false;
};

inline SumParts split_sum(const SumNode& s, int n) {
  SumParts p;
  p.box_lo = Vec::Zero(n);
  p.box_hi = Vec::Zero(n);
  p.ball_center = Vec::Zero(n);
  for (const auto& c : s.children) {
    if (const auto* bx = c.as<Box>()) {
      p.has_box = true;
      p.box_lo += bx->lo;
      p.box_hi += bx->hi;
    } else if (const auto* bl = c.as<Ball>()) {
      p.has_ball = true;
      p.ball_center += bl->center;
      p.ball_radius += bl->radius;
    } else if (auto vs = vertex_list(c)) {
      p.polytopes.push_back(std::move(*vs));
    } else {
      p.unsupported = true;
    }
  }
  return p;
}

// x in sum_k conv(V_k): sum_k sum_j l_kj v_kj = x, sum_j l_kj = 1, l >= 0.
inline bool in_polytope_sum(const Vec& x, const std::vector<std::vector<Vec>>& parts, double tol) {
  const auto n = x.size();
  const auto k = static_cast<Eigen::Index>(parts.size());
  Eigen::Index vars = 0;
  for (const auto& p : parts) vars += static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + k, vars);
  Eigen::VectorXd b(n + k);
  b.head(n) = x;
  b.tail(k).setOnes();
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (const auto& v : parts[static_cast<std::size_t>(i)]) {
      a.col(col).head(n) = v;
      a(n + i, col) = 1.0;
      ++col;
    }
  }
  return lp_feasible(a, b, tol);
}

}  // namespace detail

inline bool contains(const Body& body, const Vec& x, double tol = kTolLp);

/// True when contains() can decide membership without an oracle error.
inline bool has_exact_membership(const Body& body) {
  if (const auto* s = body.as<SumNode>()) {
    auto parts = detail::split_sum(*s, body.dim());
    if (parts.unsupported) return false;
    if (parts.has_ball && !parts.polytopes.empty()) return false;
    return true;
  }
  if (const auto* li = body.as<LinearImage>()) return has_exact_membership(*li->child);
  return true;
}

/// Exact membership (up to tol). Sums mixing a ball with a general polytope,
/// or containing ellipsoids, have no oracle here and throw OracleUnavailable;
/// such sums are used only through sampling X + Y.
inline bool contains(const Body& body, const Vec& x, double tol) {
  require_same_dim(x.size(), body.dim(), "contains");
  return std::visit(
      [&](const auto& b) -> bool {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) < b.lo(i) - tol || x(i) > b.hi(i) + tol) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Ball>) {
          return (x - b.center).norm() <= b.radius + tol;
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          const Vec d = x - b.center;
          return d.dot(b.shape_inv * d) <= 1.0 + tol;
        } else if constexpr (std::is_same_v<T, Simplex>) {
          const Vec lam = b.edge_inv * (x - b.vertices[0]);
          return lam.minCoeff() >= -tol && lam.sum() <= 1.0 + tol;
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          return lp_point_in_hull(x, b.vertices, tol);
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          if (!b.normals.empty()) {
            const Vec d = x - b.center;
            for (std::size_t i = 0; i < b.normals.size(); ++i)
              if (std::abs(d.dot(b.normals[i])) > b.half_widths[i] + tol) return false;
            return true;
          }
          // Lower-dimensional zonotope: t in [0,1]^g with G t = x - c + G/2.
          const auto n = x.size();
          const auto g = static_cast<Eigen::Index>(b.generators.size());
          Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + g, 2 * g);
          Eigen::VectorXd rhs(n + g);
          Vec shifted = x - b.center;
          for (Eigen::Index j = 0; j < g; ++j) {
            const Vec& gen = b.generators[static_cast<std::size_t>(j)];
            a.col(j).head(n) = gen;
            shifted += 0.5 * gen;
            a(n + j, j) = 1.0;
            a(n + j, g + j) = 1.0;
          }
          rhs.head(n) = shifted;
          rhs.tail(g).setOnes();
          return lp_feasible(a, rhs, tol);
        } else if constexpr (std::is_same_v<T, SimplexSlab>) {
          if (x.minCoeff() < -tol) return false;
          const double s = x.sum();
          return s >= b.lo - tol && s <= b.hi + tol;
        } else if constexpr (std::is_same_v<T, SumNode>) {
          auto parts = detail::split_sum(b, body.dim());
          if (parts.unsupported || (parts.has_ball && !parts.polytopes.empty())) {
            throw OracleUnavailable("membership oracle unavailable for this Minkowski sum; use sampled X + Y instead");
          }
          if (parts.polytopes.empty()) {
            // Box + ball: distance from x - c to the box.
            Vec y = x - parts.ball_center;
            double d2 = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
              const double lo = parts.has_box ? parts.box_lo(i) : 0.0;
              const double hi = parts.has_box ? parts.box_hi(i) : 0.0;
              const double e = y(i) < lo ? lo - y(i) : (y(i) > hi ? y(i) - hi : 0.0);
              d2 += e * e;
            }
            return std::sqrt(d2) <= parts.ball_radius + tol;
          }
          if (parts.has_box) parts.polytopes.push_back(detail::box_corners(parts.box_lo, parts.box_hi));
          return detail::in_polytope_sum(x, parts.polytopes, tol);
        } else {
          return contains(*b.child, b.inverse * (x - b.offset), tol);
        }
      },
      body.variant());
}

// ------------------------------------------------------------ transforms

inline Body scale(const Body& body, double f);
inline Body translate(const Body& body, const Vec& shift);

/// Image {u x + offset}. Closed forms for ellipsoids, balls, zonotopes,
/// boxes under diagonal maps, and vertex-listed polytopes.
inline Body linear_image(const Mat& u, const Body& body, const Vec& offset) {
  const int n = body.dim();
  require_same_dim(u.rows(), n, "linear_image map rows");
  require_same_dim(u.cols(), n, "linear_image map cols");
  require_same_dim(offset.size(), n, "linear_image offset");
  const double det = u.determinant();
  if (std::abs(det) < 1e-300) throw PreconditionError("linear_image: singular map");
  const bool is_identity = max_abs(u - Mat::Identity(n, n)) == 0.0;
  if (is_identity) return translate(body, offset);

  return std::visit(
      [&](const auto& b) -> Body {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          const Mat off_diag = u - diag_of(u.diagonal());
          if (max_abs(off_diag) == 0.0) {
            Vec lo(n), hi(n);
            for (int i = 0; i < n; ++i) {
              const double a = u(i, i) * b.lo(i) + offset(i);
              const double c = u(i, i) * b.hi(i) + offset(i);
              lo(i) = std::min(a, c);
              hi(i) = std::max(a, c);
            }
            return make_box(lo, hi);
          }
          std::vector<Vec> gens;
          for (int i = 0; i < n; ++i) gens.push_back(u.col(i) * (b.hi(i) - b.lo(i)));
          return make_zonotope(u * (0.5 * (b.lo + b.hi)) + offset, std::move(gens));
        } else if constexpr (std::is_same_v<T, Ball>) {
          return make_ellipsoid(u * b.center + offset, b.radius * b.radius * (u * u.transpose()));
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          Mat q = u * b.shape * u.transpose();
          q = 0.5 * (q + q.transpose());
          return make_ellipsoid(u * b.center + offset, q);
        } else if constexpr (std::is_same_v<T, Simplex>) {
          std::vector<Vec> vs;
          for (const auto& v : b.vertices) vs.push_back(u * v + offset);
          return make_simplex(std::move(vs));
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          std::vector<Vec> vs;
          for (const auto& v : b.vertices) vs.push_back(u * v + offset);
          return make_vpolytope(std::move(vs));
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          std::vector<Vec> gens;
          for (const auto& g : b.generators) gens.push_back(u * g);
          return make_zonotope(u * b.center + offset, std::move(gens));
        } else if constexpr (std::is_same_v<T, LinearImage>) {
          return linear_image(u * b.map, *b.child, u * b.offset + offset);
        } else {
          LinearImage li{u, u.inverse(), offset, std::make_shared<const Body>(body)};
          return Body(std::move(li), n);
        }
      },
      body.variant());
}

inline Body linear_image(const Mat& u, const Body& body) { return linear_image(u, body, Vec::Zero(body.dim())); }

inline Body translate(const Body& body, const Vec& shift) {
  require_same_dim(shift.size(), body.dim(), "translate");
  if (shift.cwiseAbs().maxCoeff() == 0.0) return body;
  const int n = body.dim();
  return std::visit(
      [&](const auto& b) -> Body {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          return make_box(b.lo + shift, b.hi + shift);
        } else if constexpr (std::is_same_v<T, Ball>) {
          return make_ball(b.center + shift, b.radius);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return make_ellipsoid(b.center + shift, b.shape);
        } else if constexpr (std::is_same_v<T, Simplex>) {
          std::vector<Vec> vs;
          for (const auto& v : b.vertices) vs.push_back(v + shift);
          return make_simplex(std::move(vs));
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          std::vector<Vec> vs;
          for (const auto& v : b.vertices) vs.push_back(v + shift);
          return make_vpolytope(std::move(vs));
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          Zonotope z = b;
          z.center += shift;
          return Body(std::move(z), n);
        } else if constexpr (std::is_same_v<T, LinearImage>) {
          LinearImage li = b;
          li.offset += shift;
          return Body(std::move(li), n);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          SumNode s = b;
          s.children[0] = translate(s.children[0], shift);
          return Body(std::move(s), n);
        } else {
          LinearImage li{Mat::Identity(n, n), Mat::Identity(n, n), shift, std::make_shared<const Body>(body)};
          return Body(std::move(li), n);
        }
      },
      body.variant());
}

/// f * A about the origin.
inline Body scale(const Body& body, double f) {
  if (!(f > 0.0)) throw PreconditionError("scale: factor must be positive");
  const int n = body.dim();
  return std::visit(
      [&](const auto& b) -> Body {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          return make_box(f * b.lo, f * b.hi);
        } else if constexpr (std::is_same_v<T, Ball>) {
          return make_ball(f * b.center, f * b.radius);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return make_ellipsoid(f * b.center, f * f * b.shape);
        } else if constexpr (std::is_same_v<T, Simplex>) {
          std::vector<Vec> vs;
          for (const auto& v : b.vertices) vs.push_back(f * v);
          return make_simplex(std::move(vs));
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          std::vector<Vec> vs;
          for (const auto& v : b.vertices) vs.push_back(f * v);
          return make_vpolytope(std::move(vs));
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          std::vector<Vec> gens;
          for (const auto& g : b.generators) gens.push_back(f * g);
          return make_zonotope(f * b.center, std::move(gens));
        } else if constexpr (std::is_same_v<T, SimplexSlab>) {
          return make_simplex_slab(b.n, f * b.lo, f * b.hi);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          std::vector<Body> cs;
          for (const auto& c : b.children) cs.push_back(scale(c, f));
          return make_sum(cs);
        } else {
          LinearImage li = b;
          li.offset *= f;
          li.child = std::make_shared<const Body>(scale(*b.child, f));
          return Body(std::move(li), n);
        }
      },
      body.variant());
}

/// -A.
inline Body reflect(const Body& body) {
  const int n = body.dim();
  return std::visit(
      [&](const auto& b) -> Body {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          return make_box(-b.hi, -b.lo);
        } else if constexpr (std::is_same_v<T, Ball>) {
          return make_ball(-b.center, b.radius);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return make_ellipsoid(-b.center, b.shape);
        } else if constexpr (std::is_same_v<T, Simplex>) {
          std::vector<Vec> vs;
          for (const auto& v : b.vertices) vs.push_back(-v);
          return make_simplex(std::move(vs));
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          std::vector<Vec> vs;
          for (const auto& v : b.vertices) vs.push_back(-v);
          return make_vpolytope(std::move(vs));
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          // Generators are sign-symmetric.
          Zonotope z = b;
          z.center = -z.center;
          return Body(std::move(z), n);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          std::vector<Body> cs;
          for (const auto& c : b.children) cs.push_back(reflect(c));
          return make_sum(cs);
        } else if constexpr (std::is_same_v<T, LinearImage>) {
          LinearImage li = b;
          li.offset = -b.offset;
          li.child = std::make_shared<const Body>(reflect(*b.child));
          return Body(std::move(li), n);
        } else {
          LinearImage li{-Mat::Identity(n, n), -Mat::Identity(n, n), Vec::Zero(n), std::make_shared<const Body>(body)};
          return Body(std::move(li), n);
        }
      },
      body.variant());
}

/// A + B with closed forms: box+box, ball+ball, zonotope(+box)+zonotope,
/// and vertex-listed polytopes; otherwise a SumNode.
inline Body minkowski_sum(const Body& a, const Body& b) {
  require_same_dim(a.dim(), b.dim(), "minkowski_sum");
  const int n = a.dim();
  if (const auto* x = a.as<Box>())
    if (const auto* y = b.as<Box>()) return make_box(x->lo + y->lo, x->hi + y->hi);
  if (const auto* x = a.as<Ball>())
    if (const auto* y = b.as<Ball>()) return make_ball(x->center + y->center, x->radius + y->radius);

  auto as_zonotope = [n](const Body& body) -> std::optional<Zonotope> {
    if (const auto* z = body.as<Zonotope>()) return *z;
    if (const auto* bx = body.as<Box>()) {
      Zonotope z{0.5 * (bx->lo + bx->hi), {}, {}, {}};
      for (int i = 0; i < n; ++i) z.generators.push_back((bx->hi(i) - bx->lo(i)) * unit_vector(n, i));
      return z;
    }
    return std::nullopt;
  };
  if (a.as<Zonotope>() || b.as<Zonotope>()) {
    auto za = as_zonotope(a);
    auto zb = as_zonotope(b);
    if (za && zb) {
      std::vector<Vec> gens = za->generators;
      gens.insert(gens.end(), zb->generators.begin(), zb->generators.end());
      return make_zonotope(za->center + zb->center, std::move(gens));
    }
  }
  auto vertex_poly = [](const Body& body) -> const std::vector<Vec>* {
    if (const auto* s = body.as<Simplex>()) return &s->vertices;
    if (const auto* p = body.as<VPolytope>()) return &p->vertices;
    return nullptr;
  };
  if (const auto* va = vertex_poly(a))
    if (const auto* vb = vertex_poly(b)) return make_vpolytope(detail::pairwise_sums(*va, *vb));
  return make_sum({a, b});
}

inline Body difference_body(const Body& a) { return minkowski_sum(a, reflect(a)); }

// ------------------------------------------------------------ volumes

inline bool has_exact_volume(const Body& body) {
  if (body.as<SumNode>() || body.as<VPolytope>()) return false;
  if (const auto* li = body.as<LinearImage>()) return has_exact_volume(*li->child);
  return true;
}

inline double volume_exact(const Body& body) {
  const int n = body.dim();
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          return (b.hi - b.lo).prod();
        } else if constexpr (std::is_same_v<T, Ball>) {
          return ball_volume(n, b.radius);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return ball_volume(n, 1.0) * std::sqrt(b.shape.determinant());
        } else if constexpr (std::is_same_v<T, Simplex>) {
          return 1.0 / std::abs(b.edge_inv.determinant()) / factorial(n);
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          const int g = static_cast<int>(b.generators.size());
          double v = 0.0;
          detail::for_each_subset(g, n, [&](const std::vector<int>& idx) {
            Mat m(n, n);
            for (int j = 0; j < n; ++j) m.col(j) = b.generators[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            v += std::abs(m.determinant());
          });
          return v;
        } else if constexpr (std::is_same_v<T, SimplexSlab>) {
          return (std::pow(b.hi, n) - std::pow(b.lo, n)) / factorial(n);
        } else if constexpr (std::is_same_v<T, LinearImage>) {
          return std::abs(b.map.determinant()) * volume_exact(*b.child);
        } else {
          throw OracleUnavailable("exact volume unavailable for " + body.kind());
        }
      },
      body.variant());
}

namespace detail {
inline void require_bounded(const std::pair<Vec, Vec>& bb) {
  if (!bb.first.allFinite() || !bb.second.allFinite()) throw PreconditionError("body is unbounded");
}
}  // namespace detail

/// Hit-or-miss volume over the tight axis bounding box.
inline Estimate volume_mc(const Body& body, std::int64_t samples, const SeededStream& stream) {
  if (samples <= 0) throw PreconditionError("volume_mc: samples must be positive");
  const auto bb = bounding_box(body);
  detail::require_bounded(bb);
  const Vec lo = bb.first;
  const Vec width = bb.second - bb.first;
  const double box_vol = width.prod();
  const int n = body.dim();
  Moments m = mc_moments(samples, stream, [&](SeededStream& s) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = lo(i) + width(i) * s.uniform();
    return contains(body, x) ? 1.0 : 0.0;
  });
  const double p = m.mean;
  return {box_vol * p, box_vol * std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), samples};
}

inline Estimate intersection_volume_mc(const Body& a, const Body& b, std::int64_t samples, const SeededStream& stream) {
  require_same_dim(a.dim(), b.dim(), "intersection_volume_mc");
  if (samples <= 0) throw PreconditionError("intersection_volume_mc: samples must be positive");
  const auto ba = bounding_box(a);
  const auto bb = bounding_box(b);
  detail::require_bounded(ba);
  detail::require_bounded(bb);
  const Vec lo = ba.first.cwiseMax(bb.first);
  const Vec hi = ba.second.cwiseMin(bb.second);
  if ((hi - lo).minCoeff() <= 0.0) return {0.0, 0.0, samples};
  const Vec width = hi - lo;
  const double box_vol = width.prod();
  const int n = a.dim();
  Moments m = mc_moments(samples, stream, [&](SeededStream& s) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = lo(i) + width(i) * s.uniform();
    return (contains(a, x) && contains(b, x)) ? 1.0 : 0.0;
  });
  const double p = m.mean;
  return {box_vol * p, box_vol * std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), samples};
}

/// Exact volume when available, else a hit-or-miss estimate.
inline Estimate volume_auto(const Body& body, std::int64_t samples, const SeededStream& stream) {
  if (has_exact_volume(body)) return {volume_exact(body), 0.0, 0};
  return volume_mc(body, samples, stream);
}

/// |A|^{-1/n} A using the exact volume.
inline Body scale_to_unit_volume(const Body& body) {
  const double v = volume_exact(body);
  if (!(v > 0.0)) throw PreconditionError("scale_to_unit_volume: degenerate body");
  return scale(body, std::pow(v, -1.0 / body.dim()));
}

/// As above but falls back to a Monte Carlo volume.
inline Body scale_to_unit_volume(const Body& body, std::int64_t samples, const SeededStream& stream) {
  const double v = volume_auto(body, samples, stream).value;
  if (!(v > 0.0)) throw PreconditionError("scale_to_unit_volume: degenerate body");
  return scale(body, std::pow(v, -1.0 / body.dim()));
}

// ------------------------------------------------------------ geometry helpers

/// A point in the relative interior (centroid where cheap).
inline Vec interior_point(const Body& body) {
  const int n = body.dim();
  return std::visit(
      [&](const auto& b) -> Vec {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          return 0.5 * (b.lo + b.hi);
        } else if constexpr (std::is_same_v<T, Ball> || std::is_same_v<T, Ellipsoid> || std::is_same_v<T, Zonotope>) {
          return b.center;
        } else if constexpr (std::is_same_v<T, Simplex> || std::is_same_v<T, VPolytope>) {
          Vec c = Vec::Zero(n);
          for (const auto& v : b.vertices) c += v;
          return c / static_cast<double>(b.vertices.size());
        } else if constexpr (std::is_same_v<T, SimplexSlab>) {
          return Vec::Constant(n, 0.5 * (b.lo + b.hi) / n);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          Vec c = Vec::Zero(n);
          for (const auto& ch : b.children) c += interior_point(ch);
          return c;
        } else {
          return b.map * interior_point(*b.child) + b.offset;
        }
      },
      body.variant());
}

/// Mean and covariance of the uniform law, where closed forms exist.
inline std::optional<std::pair<Vec, Mat>> exact_moments(const Body& body) {
  const int n = body.dim();
  return std::visit(
      [&](const auto& b) -> std::optional<std::pair<Vec, Mat>> {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          const Vec w = b.hi - b.lo;
          return std::pair<Vec, Mat>{0.5 * (b.lo + b.hi), diag_of(w.cwiseProduct(w) / 12.0)};
        } else if constexpr (std::is_same_v<T, Ball>) {
          return std::pair<Vec, Mat>{b.center, Mat::Identity(n, n) * (b.radius * b.radius / (n + 2.0))};
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return std::pair<Vec, Mat>{b.center, b.shape / (n + 2.0)};
        } else if constexpr (std::is_same_v<T, Simplex>) {
          Vec s = Vec::Zero(n);
          Mat m2 = Mat::Zero(n, n);
          for (const auto& v : b.vertices) {
            s += v;
            m2 += v * v.transpose();
          }
          const Vec mean = s / (n + 1.0);
          const Mat second = (m2 + s * s.transpose()) / ((n + 1.0) * (n + 2.0));
          return std::pair<Vec, Mat>{mean, second - mean * mean.transpose()};
        } else if constexpr (std::is_same_v<T, Zonotope>) {
          if (static_cast<int>(b.generators.size()) != n) return std::nullopt;
          Mat g(n, n);
          for (int j = 0; j < n; ++j) g.col(j) = b.generators[static_cast<std::size_t>(j)];
          return std::pair<Vec, Mat>{b.center, g * g.transpose() / 12.0};
        } else if constexpr (std::is_same_v<T, LinearImage>) {
          auto inner = exact_moments(*b.child);
          if (!inner) return std::nullopt;
          return std::pair<Vec, Mat>{b.map * inner->first + b.offset, b.map * inner->second * b.map.transpose()};
        } else {
          return std::nullopt;
        }
      },
      body.variant());
}

/// Central symmetry about the origin (sufficient test for sums).
inline bool is_origin_symmetric(const Body& body, double tol = 1e-12) {
  return std::visit(
      [&](const auto& b) -> bool {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Box>) {
          return (b.lo + b.hi).cwiseAbs().maxCoeff() <= tol;
        } else if constexpr (std::is_same_v<T, Ball> || std::is_same_v<T, Ellipsoid> || std::is_same_v<T, Zonotope>) {
          return b.center.cwiseAbs().maxCoeff() <= tol;
        } else if constexpr (std::is_same_v<T, Simplex> || std::is_same_v<T, VPolytope>) {
          for (const auto& v : b.vertices) {
            bool found = false;
            for (const auto& w : b.vertices)
              if ((v + w).cwiseAbs().maxCoeff() <= tol) found = true;
            if (!found) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, SumNode>) {
          for (const auto& c : b.children)
            if (!is_origin_symmetric(c, tol)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, LinearImage>) {
          return b.offset.cwiseAbs().maxCoeff() <= tol && is_origin_symmetric(*b.child, tol);
        } else {
          return false;
        }
      },
      body.variant());
}

// ------------------------------------------------------------ uniform sampling

/// Hit-and-run mixing parameters (heuristic; no certified mixing time).
struct HitAndRunConfig {
  int burn_in = 1000;
  int thinning_per_dim = 50;
  int rejection_cap = 10000;
};

namespace detail {

inline bool has_direct_sampler(const Body& body) {
  if (body.as<Box>() || body.as<Ball>() || body.as<Ellipsoid>() || body.as<Simplex>() || body.as<SimplexSlab>()) return true;
  if (const auto* li = body.as<LinearImage>()) return has_direct_sampler(*li->child);
  return false;
}

inline Vec dirichlet_ones(int k, SeededStream& s) {
  Vec w(k);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    w(i) = s.exponential();
    total += w(i);
  }
  return w / total;
}

inline Vec sample_direct(const Body& body, SeededStream& s) {
  const int n = body.dim();
  if (const auto* b = body.as<Box>()) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = b->lo(i) + (b->hi(i) - b->lo(i)) * s.uniform();
    return x;
  }
  if (const auto* b = body.as<Ball>()) {
    return b->center + b->radius * std::pow(s.uniform(), 1.0 / n) * s.direction(n);
  }
  if (const auto* b = body.as<Ellipsoid>()) {
    const Vec z = std::pow(s.uniform(), 1.0 / n) * s.direction(n);
    return b->center + b->chol * z;
  }
  if (const auto* b = body.as<Simplex>()) {
    // Exponential spacings give uniform barycentric weights.
    const Vec w = dirichlet_ones(n + 1, s);
    Vec x = Vec::Zero(n);
    for (int i = 0; i <= n; ++i) x += w(i) * b->vertices[static_cast<std::size_t>(i)];
    return x;
  }
  if (const auto* b = body.as<SimplexSlab>()) {
    const double lo_n = std::pow(b->lo, n);
    const double hi_n = std::pow(b->hi, n);
    const double t = std::pow(lo_n + s.uniform() * (hi_n - lo_n), 1.0 / n);
    return t * dirichlet_ones(n, s);
  }
  const auto& li = *body.as<LinearImage>();
  return li.map * sample_direct(*li.child, s) + li.offset;
}

// Largest t >= 0 with x + t d in K, by expansion then bisection.
inline double chord_extent(const Body& body, const Vec& x, const Vec& d, double diameter) {
  double lo = 0.0;
  double hi = diameter;
  while (contains(body, x + hi * d)) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 60 && hi - lo > 1e-12 * diameter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (contains(body, x + mid * d)) lo = mid;
    else hi = mid;
  }
  return lo;
}

inline Vec hit_and_run_step(const Body& body, const Vec& x, double diameter, SeededStream& s) {
  const Vec d = s.direction(body.dim());
  const double tp = chord_extent(body, x, d, diameter);
  const double tm = chord_extent(body, x, -d, diameter);
  return x + (-tm + (tp + tm) * s.uniform()) * d;
}

}  // namespace detail

/// Hit-and-run chain from an interior point; returns `count` thinned states.
inline std::vector<Vec> hit_and_run(const Body& body, std::int64_t count, SeededStream& stream,
                                    const HitAndRunConfig& cfg = {}) {
  if (!has_exact_membership(body)) {
    throw OracleUnavailable("hit-and-run needs a membership oracle; unavailable for " + body.kind());
  }
  const auto bb = bounding_box(body);
  detail::require_bounded(bb);
  const double diameter = (bb.second - bb.first).norm();
  Vec x = interior_point(body);
  for (int i = 0; i < cfg.burn_in; ++i) x = detail::hit_and_run_step(body, x, diameter, stream);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  const int thin = std::max(1, cfg.thinning_per_dim * body.dim());
  for (std::int64_t k = 0; k < count; ++k) {
    for (int i = 0; i < thin; ++i) x = detail::hit_and_run_step(body, x, diameter, stream);
    out.push_back(x);
  }
  return out;
}

/// One uniform point in the body. Closed-form samplers where available;
/// otherwise rejection from the bounding box, falling back to a fresh
/// hit-and-run chain when the attempt cap is exceeded.
inline Vec sample_uniform(const Body& body, SeededStream& stream, const HitAndRunConfig& cfg = {}) {
  if (detail::has_direct_sampler(body)) return detail::sample_direct(body, stream);
  if (!has_exact_membership(body)) {
    throw OracleUnavailable("uniform sampling needs a membership oracle; unavailable for " + body.kind());
  }
  const auto bb = bounding_box(body);
  detail::require_bounded(bb);
  const int n = body.dim();
  Vec x(n);
  for (int attempt = 0; attempt < cfg.rejection_cap; ++attempt) {
    for (int i = 0; i < n; ++i) x(i) = bb.first(i) + (bb.second(i) - bb.first(i)) * stream.uniform();
    if (contains(body, x)) return x;
  }
  return hit_and_run(body, 1, stream, cfg).front();
}

inline std::vector<Vec> sample_uniform_batch(const Body& body, std::int64_t count, SeededStream& stream,
                                             const HitAndRunConfig& cfg = {}) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) out.push_back(sample_uniform(body, stream, cfg));
  return out;
}

}  // namespace cvm

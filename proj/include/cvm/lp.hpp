#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "cvm/error.hpp"
#include "cvm/linalg.hpp"

namespace cvm {

inline constexpr double kTolLp = 1e-9;

/// Phase-one simplex: decides whether {lambda >= 0 : A lambda = b} is
/// non-empty. Dense tableau with one artificial per row; pivots follow
/// Bland's rule, so the method cannot cycle.
inline bool lp_feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol = kTolLp) {
  require_same_dim(a.rows(), b.size(), "lp_feasible rows");
  const Eigen::Index m = a.rows();
  const Eigen::Index nv = a.cols();
  const Eigen::Index cols = nv + m;  // structural + artificial; rhs kept separately

  Eigen::MatrixXd t(m, cols);
  Eigen::VectorXd rhs(m);
  t.setZero();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0 ? -1.0 : 1.0;
    t.row(i).head(nv) = sign * a.row(i);
    t(i, nv + i) = 1.0;
    rhs(i) = sign * b(i);
  }
  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = nv + i;

  // Reduced costs of the phase-one objective (sum of artificials).
  Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(cols);
  for (Eigen::Index j = 0; j < nv; ++j) cost(j) = -t.col(j).sum();

  const double scale = 1.0 + rhs.cwiseAbs().maxCoeff() + a.cwiseAbs().maxCoeff();
  const double eps = 1e-12 * scale;
  const int max_iter = 50 * static_cast<int>(cols + m) + 100;
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (cost(j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > eps) {
        const double ratio = rhs(i) / t(i, enter);
        if (leave < 0 || ratio < best - eps || (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur for a bounded-below phase one
    const double piv = t(leave, enter);
    t.row(leave) /= piv;
    rhs(leave) /= piv;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != leave && t(i, enter) != 0.0) {
        const double f = t(i, enter);
        t.row(i) -= f * t.row(leave);
        rhs(i) -= f * rhs(leave);
      }
    }
    const double fc = cost(enter);
    cost -= fc * t.row(leave);
    basis[leave] = enter;
  }
  double objective = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[i] >= nv) objective += rhs(i);
  return objective <= tol * scale;
}

/// True iff point lies in conv(vertices): sum l_i v_i = x, sum l_i = 1, l >= 0.
inline bool lp_point_in_hull(const Vec& point, std::span<const Vec> vertices, double tol = kTolLp) {
  if (vertices.empty()) throw PreconditionError("lp_point_in_hull: no vertices");
  const auto n = point.size();
  for (const auto& v : vertices) require_same_dim(v.size(), n, "lp_point_in_hull");
  const auto k = static_cast<Eigen::Index>(vertices.size());
  Eigen::MatrixXd a(n + 1, k);
  Eigen::VectorXd b(n + 1);
  for (Eigen::Index j = 0; j < k; ++j) {
    a.col(j).head(n) = vertices[static_cast<std::size_t>(j)];
    a(n, j) = 1.0;
  }
  b.head(n) = point;
  b(n) = 1.0;
  return lp_feasible(a, b, tol);
}

}  // namespace cvm

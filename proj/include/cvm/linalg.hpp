#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "cvm/error.hpp"

namespace cvm {

/// Working dimension cap. Every Monte Carlo path in the library degrades
/// exponentially with n, so vectors and matrices are stack-sized to this.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline void require_dim(int n) {
  if (n < 1 || n > kMaxDim) {
    throw PreconditionError("dimension " + std::to_string(n) + " outside 1.." + std::to_string(kMaxDim));
  }
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) throw DimensionMismatch(std::string(what) + " (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

inline Vec unit_vector(int n, int axis) {
  Vec e = Vec::Zero(n);
  e(axis) = 1.0;
  return e;
}

inline Vec vec_of(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Mat identity(int n) { return Mat::Identity(n, n); }

inline Mat diag_of(const Vec& d) {
  Mat m = Mat::Zero(d.size(), d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) m(i, i) = d(i);
  return m;
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_symmetric(const Mat& m, double tol = 1e-10) {
  return m.rows() == m.cols() && max_abs(m - m.transpose()) <= tol * (1.0 + max_abs(m));
}

/// Symmetric eigendecomposition with an SPD check; throws on failure.
inline Eigen::SelfAdjointEigenSolver<Mat> spd_eigen(const Mat& m, const char* what) {
  if (!is_symmetric(m)) throw PreconditionError(std::string(what) + ": matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw NumericalError(std::string(what) + ": eigendecomposition failed");
  if (es.eigenvalues().minCoeff() <= 0.0) throw PreconditionError(std::string(what) + ": matrix is not positive definite");
  return es;
}

inline Mat spd_sqrt(const Mat& m) {
  auto es = spd_eigen(m, "spd_sqrt");
  return es.eigenvectors() * diag_of(es.eigenvalues().cwiseSqrt()) * es.eigenvectors().transpose();
}

inline Mat spd_inv_sqrt(const Mat& m) {
  auto es = spd_eigen(m, "spd_inv_sqrt");
  return es.eigenvectors() * diag_of(es.eigenvalues().cwiseSqrt().cwiseInverse()) * es.eigenvectors().transpose();
}

/// Matrix exponential by scaling and squaring with a diagonal Padé(6,6)
/// approximant. Sized for the small orders used here (n <= 6).
inline Mat expm(const Mat& a) {
  const auto n = a.rows();
  constexpr int q = 6;
  // c_k = (2q-k)! q! / ((2q)! k! (q-k)!)
  double c[q + 1];
  c[0] = 1.0;
  for (int k = 1; k <= q; ++k) c[k] = c[k - 1] * double(q - k + 1) / double(k * (2 * q - k + 1));

  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  const Mat x = a / std::ldexp(1.0, squarings);

  Mat power = Mat::Identity(n, n);
  Mat num = c[0] * power;
  Mat den = c[0] * power;
  for (int k = 1; k <= q; ++k) {
    power = power * x;
    num += c[k] * power;
    den += ((k % 2) ? -c[k] : c[k]) * power;
  }
  Mat r = den.partialPivLu().solve(num);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

/// Volume-preserving matrix exp(M(theta)) with M traceless. theta holds the
/// n(n-1) off-diagonal entries in row-major order followed by the first n-1
/// diagonal entries; the last diagonal entry is minus their sum.
inline Mat sl_param(const Eigen::VectorXd& theta, int n) {
  require_dim(n);
  if (theta.size() != n * n - 1) {
    throw DimensionMismatch("sl_param expects n^2-1 = " + std::to_string(n * n - 1) + " parameters");
  }
  Mat m = Mat::Zero(n, n);
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) m(i, j) = theta(k++);
  double trace = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    m(i, i) = theta(k++);
    trace += m(i, i);
  }
  m(n - 1, n - 1) = -trace;
  return expm(m);
}

inline int sl_param_size(int n) { return n * n - 1; }

/// W = det(cov)^{1/(2n)} cov^{-1/2}: symmetric, det W = 1, and W cov W^T is
/// det(cov)^{1/n} times the identity.
inline Mat whitening_map(const Mat& cov) {
  const auto n = static_cast<int>(cov.rows());
  auto es = spd_eigen(cov, "whitening_map");
  const Vec ev = es.eigenvalues();
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(ev(i));
  Vec scale(n);
  for (int i = 0; i < n; ++i) scale(i) = std::exp(log_det / (2.0 * n) - 0.5 * std::log(ev(i)));
  return es.eigenvectors() * diag_of(scale) * es.eigenvectors().transpose();
}

}  // namespace cvm

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "cvm/rng.hpp"

namespace cvm {

/// A Monte Carlo value with its standard error.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t samples = 0;
};

/// Running mean and centred second moment; merges are exact-order
/// deterministic (Chan et al. pairwise update).
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / total;
    m2 += o.m2 + d * d * count * o.count / total;
    count = total;
  }
  double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
  double stderr_of_mean() const { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }
  Estimate estimate() const { return {mean, stderr_of_mean(), static_cast<std::int64_t>(count)}; }
};

/// Bivariate version used for ratios and delta-method errors.
struct CoMoments {
  Moments x, y;
  double cxy = 0.0;

  void add(double a, double b) {
    const double dx = a - x.mean;
    x.add(a);
    y.add(b);
    cxy += dx * (b - y.mean);
  }
  void merge(const CoMoments& o) {
    if (o.x.count == 0.0) return;
    if (x.count == 0.0) {
      *this = o;
      return;
    }
    const double total = x.count + o.x.count;
    const double dx = o.x.mean - x.mean;
    const double dy = o.y.mean - y.mean;
    cxy += o.cxy + dx * dy * x.count * o.x.count / total;
    x.merge(o.x);
    y.merge(o.y);
  }
  /// Covariance of the two sample means.
  double cov_of_means() const { return x.count > 1.0 ? cxy / (x.count - 1.0) / x.count : 0.0; }
};

namespace detail {
inline int& worker_setting() {
  static int workers = 1;
  return workers;
}
inline bool& inside_worker() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// Worker count for Monte Carlo loops. The CVM_WORKERS environment variable
/// overrides the programmatic setting. Results never depend on this value.
inline int workers() {
  if (const char* env = std::getenv("CVM_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return detail::worker_setting();
}
inline void set_workers(int w) { detail::worker_setting() = std::max(1, w); }

inline constexpr std::int64_t kChunkSize = 4096;

/// Runs fn(chunk_index) for every chunk on a small thread pool and returns
/// the results in chunk order. Chunk boundaries depend only on the total.
template <class R, class F>
std::vector<R> map_chunks(std::int64_t chunks, F&& fn) {
  std::vector<R> out(static_cast<std::size_t>(chunks));
  const int w = detail::inside_worker() ? 1 : static_cast<int>(std::min<std::int64_t>(workers(), chunks));
  if (w <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) out[static_cast<std::size_t>(c)] = fn(c);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      detail::inside_worker() = true;
      try {
        for (std::int64_t c = t; c < chunks; c += w) out[static_cast<std::size_t>(c)] = fn(c);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Accumulates per-sample values produced by draw(stream) over `samples`
/// draws, split into fixed chunks with their own labelled substreams.
template <class F>
Moments mc_moments(std::int64_t samples, const SeededStream& stream, F&& draw) {
  const std::int64_t chunks = (samples + kChunkSize - 1) / kChunkSize;
  auto parts = map_chunks<Moments>(chunks, [&](std::int64_t c) {
    SeededStream s = stream.child("chunk", static_cast<std::uint64_t>(c));
    Moments m;
    const std::int64_t lo = c * kChunkSize;
    const std::int64_t hi = std::min(samples, lo + kChunkSize);
    for (std::int64_t i = lo; i < hi; ++i) m.add(draw(s));
    return m;
  });
  Moments total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

/// General chunked reduction: chunk_fn(stream, count) builds an
/// accumulator for `count` draws; accumulators merge in chunk order.
template <class Acc, class F>
Acc mc_reduce(std::int64_t samples, const SeededStream& stream, F&& chunk_fn) {
  const std::int64_t chunks = (samples + kChunkSize - 1) / kChunkSize;
  auto parts = map_chunks<Acc>(chunks, [&](std::int64_t c) {
    SeededStream s = stream.child("chunk", static_cast<std::uint64_t>(c));
    const std::int64_t count = std::min(samples - c * kChunkSize, kChunkSize);
    return chunk_fn(s, count);
  });
  Acc total{};
  for (const auto& p : parts) total.merge(p);
  return total;
}

/// Delta-method standard error for g(mean_x, mean_y).
inline double delta_stderr(const CoMoments& m, double dgdx, double dgdy) {
  const double vx = m.x.variance() / std::max(1.0, m.x.count);
  const double vy = m.y.variance() / std::max(1.0, m.y.count);
  const double v = dgdx * dgdx * vx + dgdy * dgdy * vy + 2.0 * dgdx * dgdy * m.cov_of_means();
  return std::sqrt(std::max(0.0, v));
}

}  // namespace cvm

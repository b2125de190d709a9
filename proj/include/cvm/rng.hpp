#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "cvm/linalg.hpp"

namespace cvm {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// A labelled random substream. The engine seed is a hash of
/// (root_seed, label), so a stream's output depends only on its label and
/// never on which thread or in which order it is consumed.
class SeededStream {
 public:
  SeededStream(std::uint64_t root_seed, std::string label)
      : root_seed_(root_seed), label_(std::move(label)), engine_(derive(root_seed_, label_)) {}

  [[nodiscard]] SeededStream child(std::string_view sub) const {
    std::string l = label_;
    l += '/';
    l += sub;
    return {root_seed_, std::move(l)};
  }
  [[nodiscard]] SeededStream child(std::string_view sub, std::uint64_t index) const {
    return child(std::string(sub) + "#" + std::to_string(index));
  }

  std::uint64_t root_seed() const { return root_seed_; }
  const std::string& label() const { return label_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(engine_); }
  double exponential() { return -std::log(uniform()); }
  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
  }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  /// Uniform direction on the unit sphere.
  Vec direction(int n) {
    for (;;) {
      Vec v = normal_vec(n);
      const double r = v.norm();
      if (r > 1e-300) return v / r;
    }
  }

 private:
  static std::uint64_t derive(std::uint64_t root, const std::string& label) {
    return detail::splitmix64(detail::splitmix64(root) ^ detail::fnv1a(label));
  }

  std::uint64_t root_seed_;
  std::string label_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cvm

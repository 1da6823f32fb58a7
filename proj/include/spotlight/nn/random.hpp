#pragma once

#include "spotlight/nn/feature_map.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace spotlight::nn {

/// Seeded generator whose outputs are identical on every platform:
/// std::mt19937_64 is fully specified, and the conversions below avoid the
/// implementation-defined standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform integer in [0, n) by rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  /// Fisher-Yates shuffle of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const auto j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
  }

  template <typename Scalar>
  Matrix<Scalar> uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    Matrix<Scalar> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(uniform(lo, hi));
    return m;
  }

  template <typename Scalar>
  Vector<Scalar> uniform_vector(Eigen::Index n, double lo, double hi) {
    Vector<Scalar> v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<Scalar>(uniform(lo, hi));
    return v;
  }

  template <typename Scalar>
  FeatureMap<Scalar> feature_map(Shape shape, double lo = -1.0, double hi = 1.0) {
    return FeatureMap<Scalar>(shape, uniform_matrix<Scalar>(shape.channels,
                                                            static_cast<Eigen::Index>(shape.height) * shape.width,
                                                            lo, hi));
  }

  /// He-style uniform weights: U(-b, b) with b = sqrt(6 / fan_in).
  template <typename Scalar>
  Matrix<Scalar> he_uniform(Eigen::Index rows, Eigen::Index fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    return uniform_matrix<Scalar>(rows, fan_in, -bound, bound);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spotlight::nn

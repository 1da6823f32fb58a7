#pragma once

// Seeded test inputs shared by unit and acceptance tests.

#include "spotlight/nn/random.hpp"
#include "spotlight/types.hpp"

#include <algorithm>
#include <cstdint>

namespace spotlight::testing {

/// Union of a few random discs and rectangles, occasionally with speckle noise.
inline BinaryMask random_mask(int width, int height, std::uint64_t seed) {
  nn::Rng rng(seed);
  Plane<std::uint8_t> m = Plane<std::uint8_t>::Zero(height, width);
  const int shapes = 1 + static_cast<int>(rng.below(3));
  for (int s = 0; s < shapes; ++s) {
    const double cx = rng.uniform(0, width);
    const double cy = rng.uniform(0, height);
    const double rx = rng.uniform(1.0, std::max(2.0, width / 3.0));
    const double ry = rng.uniform(1.0, std::max(2.0, height / 3.0));
    const bool disc = rng.below(2) == 0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = (x - cx) / rx;
        const double dy = (y - cy) / ry;
        const bool inside = disc ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (inside) m(y, x) = 1;
      }
    }
  }
  if (rng.below(4) == 0) {
    for (int i = 0; i < width * height / 20; ++i) {
      m(static_cast<int>(rng.below(static_cast<std::uint64_t>(height))),
        static_cast<int>(rng.below(static_cast<std::uint64_t>(width)))) ^= 1;
    }
  }
  return BinaryMask(std::move(m));
}

/// A noisy soft prediction loosely correlated with gt. Every fourth seed is
/// quantized to 8 bits like an exported PNG.
inline PredictionMap random_prediction(const BinaryMask& gt, std::uint64_t seed) {
  nn::Rng rng(seed);
  const double fidelity = rng.uniform(0.0, 1.0);
  Plane<double> p(gt.height(), gt.width());
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      const double target = gt.at(x, y) ? 1.0 : 0.0;
      const double v = fidelity * target + (1.0 - fidelity) * rng.unit() + rng.uniform(-0.15, 0.15);
      p(y, x) = std::clamp(v, 0.0, 1.0);
    }
  }
  if (seed % 4 == 0) p = (p * 255.0).round() / 255.0;
  return PredictionMap(std::move(p));
}

/// Mask with a filled axis-aligned square [x0, x0+size) x [y0, y0+size).
inline BinaryMask square_mask(int width, int height, int x0, int y0, int size) {
  BinaryMask m(width, height);
  for (int y = y0; y < y0 + size; ++y) {
    for (int x = x0; x < x0 + size; ++x) m.set(x, y, true);
  }
  return m;
}

/// Mask with a filled disc, center (cx, cy), radius r (x^2 + y^2 <= r^2 on pixel centers).
inline BinaryMask disc_mask(int width, int height, double cx, double cy, double r) {
  BinaryMask m(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y, true);
    }
  }
  return m;
}

}  // namespace spotlight::testing

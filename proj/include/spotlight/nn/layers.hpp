#pragma once

#include "spotlight/nn/feature_map.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace spotlight::nn {

/// Convolution followed by inference-mode batch normalization.
template <typename Scalar>
struct ConvBn {
  int kernel = 1;
  /// out_channels x (in_channels * kernel * kernel), input-channel-major then row, col.
  Matrix<Scalar> weight;
  Vector<Scalar> bn_scale;
  Vector<Scalar> bn_shift;
  Vector<Scalar> bn_mean;
  Vector<Scalar> bn_var;

  int in_channels() const { return static_cast<int>(weight.cols()) / (kernel * kernel); }
  int out_channels() const { return static_cast<int>(weight.rows()); }
};

/// k x k convolution + batch norm + ReLU, repeated layers.size() times. The
/// rectifier can be switched off for blocks that emit logits.
template <typename Scalar>
struct ConvBlockParams {
  int kernel = 3;
  std::vector<ConvBn<Scalar>> layers;
  bool relu = true;

  int iterations() const { return static_cast<int>(layers.size()); }
  int in_channels() const { return layers.front().in_channels(); }
  int out_channels() const { return layers.back().out_channels(); }
};

inline constexpr double kBatchNormEps = 1e-5;

/// Patch matrix (C*k*k) x (H*W) for a zero-padded, stride-1, same-size convolution.
template <typename Scalar>
Matrix<Scalar> im2col(const FeatureMap<Scalar>& x, int k) {
  const int pad = k / 2;
  const int h = x.height();
  const int w = x.width();
  Matrix<Scalar> cols = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(x.channels()) * k * k, x.plane_size());
  for (int c = 0; c < x.channels(); ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const Eigen::Index row = (static_cast<Eigen::Index>(c) * k + ky) * k + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          for (int xx = 0; xx < w; ++xx) {
            const int sx = xx + kx - pad;
            if (sx < 0 || sx >= w) continue;
            cols(row, static_cast<Eigen::Index>(y) * w + xx) = x(c, sy, sx);
          }
        }
      }
    }
  }
  return cols;
}

/// Same-size stride-1 convolution without bias.
template <typename Scalar>
FeatureMap<Scalar> conv2d(const FeatureMap<Scalar>& x, const Matrix<Scalar>& weight, int k) {
  if (k % 2 == 0 || k < 1) throw ShapeError("conv2d: kernel size must be odd");
  if (weight.cols() != static_cast<Eigen::Index>(x.channels()) * k * k) {
    throw ShapeError("conv2d: weight expects " + std::to_string(weight.cols() / (k * k)) +
                     " input channels, got " + std::to_string(x.channels()));
  }
  Matrix<Scalar> out = k == 1 ? Matrix<Scalar>(weight * x.matrix()) : Matrix<Scalar>(weight * im2col(x, k));
  return FeatureMap<Scalar>({static_cast<int>(weight.rows()), x.height(), x.width()}, std::move(out));
}

/// 1x1 convolution, weight is out x in.
template <typename Scalar>
FeatureMap<Scalar> pointwise(const FeatureMap<Scalar>& x, const Matrix<Scalar>& weight) {
  return conv2d(x, weight, 1);
}

/// Depthwise 3x3 same-size convolution, weight is channels x 9 (row-major taps).
template <typename Scalar>
FeatureMap<Scalar> depthwise3x3(const FeatureMap<Scalar>& x, const Matrix<Scalar>& weight) {
  if (weight.rows() != x.channels() || weight.cols() != 9) {
    throw ShapeError("depthwise3x3: weight must be " + std::to_string(x.channels()) + "x9");
  }
  FeatureMap<Scalar> out(x.shape());
  const int h = x.height();
  const int w = x.width();
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        Scalar acc(0);
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= w) continue;
            acc += weight(c, ky * 3 + kx) * x(c, sy, sx);
          }
        }
        out(c, y, xx) = acc;
      }
    }
  }
  return out;
}

template <typename Scalar>
void batch_norm_inplace(FeatureMap<Scalar>& x, const ConvBn<Scalar>& p) {
  const Vector<Scalar> inv_std = (p.bn_var.array() + Scalar(kBatchNormEps)).rsqrt().matrix();
  const Vector<Scalar> gain = p.bn_scale.cwiseProduct(inv_std);
  const Vector<Scalar> bias = p.bn_shift - p.bn_mean.cwiseProduct(gain);
  x.matrix() = (x.matrix().array().colwise() * gain.array()).colwise() + bias.array();
}

template <typename Scalar>
void relu_inplace(FeatureMap<Scalar>& x) {
  x.matrix() = x.matrix().cwiseMax(Scalar(0));
}

/// Applies each (conv -> batch norm -> ReLU) repeat in order.
template <typename Scalar>
FeatureMap<Scalar> bconv(const FeatureMap<Scalar>& x, const ConvBlockParams<Scalar>& p) {
  if (p.layers.empty()) throw ShapeError("bconv: block has no layers");
  FeatureMap<Scalar> y = x;
  for (const auto& layer : p.layers) {
    if (layer.kernel != p.kernel) throw ShapeError("bconv: inconsistent kernel size");
    if (y.channels() != layer.in_channels()) {
      throw ShapeError("bconv: layer expects " + std::to_string(layer.in_channels()) + " channels, got " +
                       std::to_string(y.channels()));
    }
    y = conv2d(y, layer.weight, layer.kernel);
    batch_norm_inplace(y, layer);
    if (p.relu) relu_inplace(y);
  }
  return y;
}

template <typename Scalar>
Scalar logistic(Scalar v) {
  return Scalar(1) / (Scalar(1) + std::exp(-v));
}

/// Single-channel map squashed through the logistic function.
template <typename Scalar>
Plane<Scalar> to_probability(const FeatureMap<Scalar>& logits) {
  if (logits.channels() != 1) throw ShapeError("to_probability: expected 1 channel, got " + logits.shape().str());
  return logits.plane(0).unaryExpr([](Scalar v) { return logistic(v); });
}

/// n-fold downsampling by average pooling, kernel = stride = n.
template <typename Scalar>
FeatureMap<Scalar> avg_pool(const FeatureMap<Scalar>& x, int n) {
  if (n < 1 || x.height() % n != 0 || x.width() % n != 0) {
    throw ShapeError("avg_pool: " + x.shape().str() + " is not divisible by " + std::to_string(n));
  }
  if (n == 1) return x;
  FeatureMap<Scalar> out(x.channels(), x.height() / n, x.width() / n);
  const Scalar inv = Scalar(1) / Scalar(n * n);
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int xx = 0; xx < out.width(); ++xx) {
        Scalar acc(0);
        for (int dy = 0; dy < n; ++dy) {
          for (int dx = 0; dx < n; ++dx) acc += x(c, y * n + dy, xx * n + dx);
        }
        out(c, y, xx) = acc * inv;
      }
    }
  }
  return out;
}

/// 2x bilinear upsampling with half-pixel centers (align_corners off), edges clamped.
template <typename Scalar>
FeatureMap<Scalar> upsample2x(const FeatureMap<Scalar>& x) {
  const int h = x.height();
  const int w = x.width();
  FeatureMap<Scalar> out(x.channels(), 2 * h, 2 * w);
  auto source = [](int dst, int size, int& i0, int& i1, Scalar& frac) {
    Scalar s = (Scalar(dst) + Scalar(0.5)) / Scalar(2) - Scalar(0.5);
    if (s < Scalar(0)) s = Scalar(0);
    i0 = static_cast<int>(s);
    i1 = std::min(i0 + 1, size - 1);
    frac = s - Scalar(i0);
  };
  for (int y = 0; y < 2 * h; ++y) {
    int y0, y1;
    Scalar fy;
    source(y, h, y0, y1, fy);
    for (int xx = 0; xx < 2 * w; ++xx) {
      int x0, x1;
      Scalar fx;
      source(xx, w, x0, x1, fx);
      for (int c = 0; c < x.channels(); ++c) {
        const Scalar top = (Scalar(1) - fx) * x(c, y0, x0) + fx * x(c, y0, x1);
        const Scalar bottom = (Scalar(1) - fx) * x(c, y1, x0) + fx * x(c, y1, x1);
        out(c, y, xx) = (Scalar(1) - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

/// Channel concatenation a ++ b.
template <typename Scalar>
FeatureMap<Scalar> concat(const FeatureMap<Scalar>& a, const FeatureMap<Scalar>& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError("concat: spatial mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
  Matrix<Scalar> data(a.channels() + b.channels(), a.plane_size());
  data << a.matrix(), b.matrix();
  return FeatureMap<Scalar>({a.channels() + b.channels(), a.height(), a.width()}, std::move(data));
}

/// Element-wise product of equally shaped maps.
template <typename Scalar>
FeatureMap<Scalar> multiply(const FeatureMap<Scalar>& a, const FeatureMap<Scalar>& b) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError("multiply: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
  return FeatureMap<Scalar>(a.shape(), a.matrix().cwiseProduct(b.matrix()));
}

/// Output channel k is input channel perm[k].
template <typename Scalar>
FeatureMap<Scalar> permute_channels(const FeatureMap<Scalar>& x, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != x.channels()) {
    throw ShapeError("permute_channels: permutation of size " + std::to_string(perm.size()) + " for " +
                     std::to_string(x.channels()) + " channels");
  }
  std::vector<bool> seen(perm.size(), false);
  Matrix<Scalar> data(x.channels(), x.plane_size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const int src = perm[k];
    if (src < 0 || src >= x.channels() || seen[static_cast<std::size_t>(src)]) {
      throw DomainError("permute_channels: not a bijection");
    }
    seen[static_cast<std::size_t>(src)] = true;
    data.row(static_cast<Eigen::Index>(k)) = x.matrix().row(src);
  }
  return FeatureMap<Scalar>(x.shape(), std::move(data));
}

}  // namespace spotlight::nn

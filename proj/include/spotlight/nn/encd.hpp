#pragma once

#include "spotlight/nn/conv_block.hpp"

#include <array>

namespace spotlight::nn {

/// Four pyramid levels, finest first: level 0 is f1, level 3 is f4.
template <typename Scalar>
using Pyramid = std::array<FeatureMap<Scalar>, 4>;

/// One fusion step F(x, y) = Bconv3(Bconv3(up2(x)) ++ y).
template <typename Scalar>
struct FuseParams {
  ConvBlockParams<Scalar> up;     // nc -> nc, 3x3
  ConvBlockParams<Scalar> merge;  // 2nc -> nc, 3x3
};

template <typename Scalar>
struct EncdParams {
  int channels = 32;  // N_C
  /// Pointwise transitions of f1..f4 onto N_C channels.
  std::array<Matrix<Scalar>, 4> transition;
  ConvBlockParams<Scalar> from_f4;        // f3' = f3 * up2(B(f4))
  ConvBlockParams<Scalar> from_f3;        // first factor of f2'
  ConvBlockParams<Scalar> from_f3_prime;  // second factor of f2'
  ConvBlockParams<Scalar> from_f2_prime;  // f1' = f1 * up2(B(f2'))
  /// Applied in order: F(f4', f3'), then with f2', then with f1'.
  std::array<FuseParams<Scalar>, 3> fuse;
  /// 1x1 head onto a single logit channel (no rectifier).
  ConvBlockParams<Scalar> head;
};

template <typename Scalar>
EncdParams<Scalar> make_encd_params(Rng& rng, const std::array<int, 4>& in_channels, int nc) {
  EncdParams<Scalar> p;
  p.channels = nc;
  for (std::size_t l = 0; l < 4; ++l) p.transition[l] = rng.he_uniform<Scalar>(nc, in_channels[l]);
  p.from_f4 = make_conv_block<Scalar>(rng, nc, nc, 3, 1);
  p.from_f3 = make_conv_block<Scalar>(rng, nc, nc, 3, 1);
  p.from_f3_prime = make_conv_block<Scalar>(rng, nc, nc, 3, 1);
  p.from_f2_prime = make_conv_block<Scalar>(rng, nc, nc, 3, 1);
  for (auto& f : p.fuse) {
    f.up = make_conv_block<Scalar>(rng, nc, nc, 3, 1);
    f.merge = make_conv_block<Scalar>(rng, 2 * nc, nc, 3, 1);
  }
  p.head = make_conv_block<Scalar>(rng, nc, 1, 1, 1, false);
  return p;
}

/// Checks that each level has N_C channels and is twice the size of the next.
template <typename Scalar>
void check_pyramid_chain(const Pyramid<Scalar>& f, int nc, const std::string& who) {
  for (std::size_t l = 0; l < 4; ++l) {
    if (f[l].channels() != nc) {
      throw ShapeError(who + ": level " + std::to_string(l + 1) + " has " + std::to_string(f[l].channels()) +
                       " channels, expected " + std::to_string(nc));
    }
    if (l < 3 && (f[l].height() != 2 * f[l + 1].height() || f[l].width() != 2 * f[l + 1].width())) {
      throw ShapeError(who + ": level " + std::to_string(l + 1) + " " + f[l].shape().str() +
                       " is not twice level " + std::to_string(l + 2) + " " + f[l + 1].shape().str());
    }
  }
}

/// Maps each level onto N_C channels with its pointwise transition.
template <typename Scalar>
Pyramid<Scalar> encd_transition(const Pyramid<Scalar>& f, const EncdParams<Scalar>& p) {
  Pyramid<Scalar> out;
  for (std::size_t l = 0; l < 4; ++l) out[l] = pointwise(f[l], p.transition[l]);
  return out;
}

/// Neighbor-connection aggregation with the extra high-resolution path:
///   f4' = f4
///   f3' = f3 * up2(B(f4))
///   f2' = f2 * up2(B(f3)) * up2(B'(f3'))
///   f1' = f1 * up2(B(f2'))
template <typename Scalar>
Pyramid<Scalar> encd_aggregate(const Pyramid<Scalar>& f, const EncdParams<Scalar>& p) {
  check_pyramid_chain(f, p.channels, "encd_aggregate");
  Pyramid<Scalar> out;
  out[3] = f[3];
  out[2] = multiply(f[2], upsample2x(bconv(f[3], p.from_f4)));
  out[1] = multiply(multiply(f[1], upsample2x(bconv(f[2], p.from_f3))), upsample2x(bconv(out[2], p.from_f3_prime)));
  out[0] = multiply(f[0], upsample2x(bconv(out[1], p.from_f2_prime)));
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> fuse(const FeatureMap<Scalar>& coarse, const FeatureMap<Scalar>& fine, const FuseParams<Scalar>& p) {
  return bconv(concat(bconv(upsample2x(coarse), p.up), fine), p.merge);
}

/// Decoder logits: head(F(F(F(f4', f3'), f2'), f1')), one channel at f1' size.
template <typename Scalar>
FeatureMap<Scalar> encd_decode_logits(const Pyramid<Scalar>& fp, const EncdParams<Scalar>& p) {
  check_pyramid_chain(fp, p.channels, "encd_decode");
  FeatureMap<Scalar> acc = fuse(fp[3], fp[2], p.fuse[0]);
  acc = fuse(acc, fp[1], p.fuse[1]);
  acc = fuse(acc, fp[0], p.fuse[2]);
  return bconv(acc, p.head);
}

/// Decoder prediction in [0,1].
template <typename Scalar>
Plane<Scalar> encd_decode(const Pyramid<Scalar>& fp, const EncdParams<Scalar>& p) {
  return to_probability(encd_decode_logits(fp, p));
}

}  // namespace spotlight::nn

#pragma once

#include "spotlight/nn/encd.hpp"
#include "spotlight/nn/paa.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace spotlight::nn {

/// Sizes of the desk-scale network. Defaults carry the published head count
/// (4) and decoder width (32).
struct NetworkConfig {
  int heads = 4;
  int decoder_channels = 32;
  /// Channels of the backbone features x1..x4 (strides 4, 8, 16, 32).
  std::array<int, 4> x_channels{32, 32, 32, 32};
  /// Channels of x0 (stride 2). Accepted and ignored by the forward pass.
  int x0_channels = 16;
  int psi_channels = 32;
  int attention_channels = 32;
  int paa_out_channels = 32;
  /// Spatial size of x1; the pyramid halves from there.
  int base_size = 32;
  std::uint64_t seed = 42;

  void validate() const {
    for (const int c : x_channels) {
      if (c < 1) throw DomainError("x channels must be >= 1");
    }
    if (heads < 1) throw DomainError("heads must be >= 1");
    if (decoder_channels < 1 || psi_channels < 1 || attention_channels < 1 || paa_out_channels < 1 || x0_channels < 1) {
      throw DomainError("channel counts must be >= 1");
    }
    if (base_size < 8 || base_size % 8 != 0) throw DomainError("base_size must be a positive multiple of 8");
  }

  /// Shapes of x0..x4.
  std::array<Shape, 5> pyramid_shapes() const {
    std::array<Shape, 5> s;
    s[0] = {x0_channels, 2 * base_size, 2 * base_size};
    for (int l = 0; l < 4; ++l) s[static_cast<std::size_t>(l) + 1] = {x_channels[static_cast<std::size_t>(l)], base_size >> l, base_size >> l};
    return s;
  }
};

/// Shadow projection head: psi = Bconv3 x3(x1), P_s = logistic(head(psi)).
template <typename Scalar>
struct ShadowHeadParams {
  ConvBlockParams<Scalar> feature;  // 3x3, three repeats
  ConvBlockParams<Scalar> predict;  // 1x1 onto one logit channel
};

template <typename Scalar>
struct ShadowHeadOutput {
  FeatureMap<Scalar> psi;
  Plane<Scalar> shadow;  // P_s in [0,1]
};

template <typename Scalar>
ShadowHeadOutput<Scalar> shadow_head(const FeatureMap<Scalar>& x1, const ShadowHeadParams<Scalar>& p) {
  ShadowHeadOutput<Scalar> out;
  out.psi = bconv(x1, p.feature);
  out.shadow = to_probability(bconv(out.psi, p.predict));
  return out;
}

template <typename Scalar>
struct NetworkParams {
  NetworkConfig config;
  ShadowHeadParams<Scalar> shadow;
  PaaParams<Scalar> paa;
  EncdParams<Scalar> encd;
};

/// Deterministic parameters drawn from config.seed.
template <typename Scalar>
NetworkParams<Scalar> make_network_params(const NetworkConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  NetworkParams<Scalar> p;
  p.config = cfg;
  p.shadow.feature = make_conv_block<Scalar>(rng, cfg.x_channels[0], cfg.psi_channels, 3, 3);
  p.shadow.predict = make_conv_block<Scalar>(rng, cfg.psi_channels, 1, 1, 1, false);
  p.paa.heads = cfg.heads;
  int prev = cfg.psi_channels;
  for (std::size_t s = 0; s < 3; ++s) {
    p.paa.stages[s] = make_paa_stage<Scalar>(
        rng, {prev, cfg.x_channels[s + 1], cfg.psi_channels, cfg.attention_channels, cfg.paa_out_channels});
    prev = cfg.paa_out_channels;
  }
  p.encd = make_encd_params<Scalar>(
      rng, {cfg.psi_channels, cfg.paa_out_channels, cfg.paa_out_channels, cfg.paa_out_channels}, cfg.decoder_channels);
  return p;
}

/// Everything a forward pass produces, stage by stage.
template <typename Scalar>
struct ForwardResult {
  FeatureMap<Scalar> psi;
  Plane<Scalar> shadow;           // P_s
  Pyramid<Scalar> refined;        // f1..f4 (f1 = psi)
  Pyramid<Scalar> transited;      // f1..f4 on N_C channels
  Pyramid<Scalar> aggregated;     // f1'..f4'
  FeatureMap<Scalar> logits;      // decoder logits
  Plane<Scalar> prediction;       // P_GT
  std::array<AttentionTrace<Scalar>, 3> attention;
};

/// Validates every stage's shape contract for x1..x4 before any arithmetic.
/// Errors name the stage that would fail.
template <typename Scalar>
void check_forward_shapes(const std::array<Shape, 4>& x, const NetworkParams<Scalar>& p) {
  validate(p.shadow.feature, "shadow head");
  validate(p.shadow.predict, "shadow head");
  if (x[0].channels != p.shadow.feature.in_channels()) {
    throw ShapeError("shadow head: x1 has " + std::to_string(x[0].channels) + " channels, expected " +
                     std::to_string(p.shadow.feature.in_channels()));
  }
  const Shape psi{p.shadow.feature.out_channels(), x[0].height, x[0].width};
  Shape prev = psi;
  std::array<Shape, 4> f{psi};
  for (int i = 2; i <= 4; ++i) {
    check_paa_stage(prev, x[static_cast<std::size_t>(i - 1)], psi, i, p.paa);
    prev = {p.paa.stage(i).out_channels(), x[static_cast<std::size_t>(i - 1)].height,
            x[static_cast<std::size_t>(i - 1)].width};
    f[static_cast<std::size_t>(i - 1)] = prev;
  }
  for (std::size_t l = 0; l < 4; ++l) {
    if (p.encd.transition[l].cols() != f[l].channels || p.encd.transition[l].rows() != p.encd.channels) {
      throw ShapeError("encd transition " + std::to_string(l + 1) + ": expects " +
                       std::to_string(p.encd.transition[l].cols()) + " channels, got " + f[l].str());
    }
  }
}

/// Shadow head, three attention stages, transition, aggregation and decoding.
/// pyramid holds x0..x4; x0 is not used.
template <typename Scalar>
ForwardResult<Scalar> forward(const std::array<FeatureMap<Scalar>, 5>& pyramid, const NetworkParams<Scalar>& p) {
  check_forward_shapes<Scalar>({pyramid[1].shape(), pyramid[2].shape(), pyramid[3].shape(), pyramid[4].shape()}, p);

  ForwardResult<Scalar> r;
  auto head = shadow_head(pyramid[1], p.shadow);
  r.psi = std::move(head.psi);
  r.shadow = std::move(head.shadow);
  r.refined[0] = r.psi;
  for (int i = 2; i <= 4; ++i) {
    const auto l = static_cast<std::size_t>(i - 1);
    r.refined[l] = paa_stage(r.refined[l - 1], pyramid[l + 1], r.psi, i, p.paa, &r.attention[l - 1]);
  }
  r.transited = encd_transition(r.refined, p.encd);
  r.aggregated = encd_aggregate(r.transited, p.encd);
  r.logits = encd_decode_logits(r.aggregated, p.encd);
  r.prediction = to_probability(r.logits);
  return r;
}

/// Seeded uniform(-1, 1) backbone pyramid x0..x4 matching cfg.
template <typename Scalar>
std::array<FeatureMap<Scalar>, 5> make_pyramid(const NetworkConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  std::array<FeatureMap<Scalar>, 5> out;
  const auto shapes = cfg.pyramid_shapes();
  for (std::size_t l = 0; l < 5; ++l) out[l] = rng.feature_map<Scalar>(shapes[l]);
  return out;
}

}  // namespace spotlight::nn

#pragma once

#include "spotlight/nn/conv_block.hpp"

#include <array>
#include <vector>

namespace spotlight::nn {

/// Channel concatenation of a and b followed by the channel permutation perm
/// (output channel k is concatenated channel perm[k]).
template <typename Scalar>
FeatureMap<Scalar> chaotic_mix(const FeatureMap<Scalar>& a, const FeatureMap<Scalar>& b, std::span<const int> perm) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError("chaotic_mix: spatial mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
  return permute_channels(concat(a, b), perm);
}

/// Weights of one projection-aware attention stage.
template <typename Scalar>
struct PaaStageParams {
  Matrix<Scalar> kv_point;   // attn x (prev + x)
  Matrix<Scalar> kv_depth;   // attn x 9
  Matrix<Scalar> q_point;    // attn x (psi + prev + x)
  Matrix<Scalar> q_depth;    // attn x 9
  Matrix<Scalar> out_point;  // out x attn
  Scalar alpha = Scalar(1);  // softmax temperature
  std::vector<int> mix_perm; // bijection on psi + prev + x channels

  int attention_channels() const { return static_cast<int>(kv_point.rows()); }
  int out_channels() const { return static_cast<int>(out_point.rows()); }
};

template <typename Scalar>
struct PaaParams {
  int heads = 4;
  /// Stages 2, 3 and 4, in that order.
  std::array<PaaStageParams<Scalar>, 3> stages;

  const PaaStageParams<Scalar>& stage(int i) const { return stages.at(static_cast<std::size_t>(i - 2)); }
};

/// Channel sizes a stage is built for.
struct PaaStageDims {
  int prev_channels = 0;
  int x_channels = 0;
  int psi_channels = 0;
  int attention_channels = 0;
  int out_channels = 0;
};

template <typename Scalar>
PaaStageParams<Scalar> make_paa_stage(Rng& rng, const PaaStageDims& d) {
  PaaStageParams<Scalar> s;
  const int fused = d.prev_channels + d.x_channels;
  const int mixed = d.psi_channels + fused;
  s.kv_point = rng.he_uniform<Scalar>(d.attention_channels, fused);
  s.kv_depth = rng.he_uniform<Scalar>(d.attention_channels, 9);
  s.q_point = rng.he_uniform<Scalar>(d.attention_channels, mixed);
  s.q_depth = rng.he_uniform<Scalar>(d.attention_channels, 9);
  s.out_point = rng.he_uniform<Scalar>(d.out_channels, d.attention_channels);
  s.alpha = static_cast<Scalar>(rng.uniform(0.5, 2.0));
  s.mix_perm = rng.permutation(mixed);
  return s;
}

/// Per-head attention matrices of one forward pass, recorded on request.
template <typename Scalar>
struct AttentionTrace {
  std::vector<Matrix<Scalar>> heads;
};

/// Multi-head transposed attention: per head, A = softmax_rows(Q K^T / alpha)
/// is (c_h x c_h) with Q, K flattened to (c_h x H*W); the result is A V.
template <typename Scalar>
Matrix<Scalar> channel_attention(const Matrix<Scalar>& q, const Matrix<Scalar>& k, const Matrix<Scalar>& v,
                                 int heads, Scalar alpha, AttentionTrace<Scalar>* trace = nullptr) {
  if (heads < 1 || q.rows() % heads != 0) {
    throw ShapeError("channel_attention: " + std::to_string(q.rows()) + " channels are not divisible by " +
                     std::to_string(heads) + " heads");
  }
  if (k.rows() != q.rows() || v.rows() != q.rows() || k.cols() != q.cols() || v.cols() != q.cols()) {
    throw ShapeError("channel_attention: Q, K, V shapes differ");
  }
  if (!(alpha > Scalar(0))) throw DomainError("channel_attention: alpha must be > 0");

  const Eigen::Index ch = q.rows() / heads;
  Matrix<Scalar> out(q.rows(), q.cols());
  for (int h = 0; h < heads; ++h) {
    const Eigen::Index r0 = h * ch;
    Matrix<Scalar> logits = q.middleRows(r0, ch) * k.middleRows(r0, ch).transpose() / alpha;
    // numerically stable row softmax
    logits = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
    const Vector<Scalar> row_sums = logits.rowwise().sum();
    logits = logits.array().colwise() / row_sums.array();
    out.middleRows(r0, ch) = logits * v.middleRows(r0, ch);
    if (trace) trace->heads.push_back(std::move(logits));
  }
  return out;
}

/// Validates the shape algebra of stage i without computing anything.
template <typename Scalar>
void check_paa_stage(const Shape& f_prev, const Shape& x_i, const Shape& psi, int i, const PaaParams<Scalar>& params) {
  const int heads = params.heads;
  const std::string tag = "paa stage " + std::to_string(i);
  if (i < 2 || i > 4) throw DomainError(tag + ": stage index must be 2, 3 or 4");
  const auto& p = params.stage(i);
  if (heads < 1 || p.attention_channels() % heads != 0) {
    throw ShapeError(tag + ": " + std::to_string(p.attention_channels()) + " attention channels are not divisible by " +
                     std::to_string(heads) + " heads");
  }
  if (f_prev.height != 2 * x_i.height || f_prev.width != 2 * x_i.width) {
    throw ShapeError(tag + ": previous feature " + f_prev.str() + " is not twice the size of x " +
                     x_i.str());
  }
  const int factor = 1 << (i - 1);
  if (psi.height != factor * x_i.height || psi.width != factor * x_i.width) {
    throw ShapeError(tag + ": shadow feature " + psi.str() + " is not " + std::to_string(factor) +
                     "x the size of x " + x_i.str());
  }
  const int fused = f_prev.channels + x_i.channels;
  const int mixed = psi.channels + fused;
  if (p.kv_point.cols() != fused || p.q_point.cols() != mixed ||
      static_cast<int>(p.mix_perm.size()) != mixed) {
    throw ShapeError(tag + ": parameters expect other input channel counts");
  }
  if (p.q_point.rows() != p.kv_point.rows() || p.kv_depth.rows() != p.kv_point.rows() ||
      p.q_depth.rows() != p.kv_point.rows() || p.out_point.cols() != p.kv_point.rows()) {
    throw ShapeError(tag + ": inconsistent attention width");
  }
  if (!(p.alpha > Scalar(0))) throw DomainError(tag + ": alpha must be > 0");
}

/// One projection-aware attention stage, i in {2, 3, 4}:
///   fused = D2(f_prev) ++ x_i
///   K = V = DConv(PConv(fused))
///   Q     = DConv(PConv(Mix(D^(2^(i-1))(psi), fused)))
///   f_i   = PConv(softmax(Q K^T / alpha) V)
/// All shape and channel checks run before any arithmetic.
template <typename Scalar>
FeatureMap<Scalar> paa_stage(const FeatureMap<Scalar>& f_prev, const FeatureMap<Scalar>& x_i,
                             const FeatureMap<Scalar>& psi, int i, const PaaParams<Scalar>& params,
                             AttentionTrace<Scalar>* trace = nullptr) {
  check_paa_stage(f_prev.shape(), x_i.shape(), psi.shape(), i, params);
  const auto& p = params.stage(i);

  const FeatureMap<Scalar> fused = concat(avg_pool(f_prev, 2), x_i);
  const FeatureMap<Scalar> kv = depthwise3x3(pointwise(fused, p.kv_point), p.kv_depth);
  const FeatureMap<Scalar> mixed = chaotic_mix(avg_pool(psi, 1 << (i - 1)), fused, p.mix_perm);
  const FeatureMap<Scalar> q = depthwise3x3(pointwise(mixed, p.q_point), p.q_depth);

  Matrix<Scalar> attended = channel_attention(q.matrix(), kv.matrix(), kv.matrix(), params.heads, p.alpha, trace);
  return pointwise(FeatureMap<Scalar>(kv.shape(), std::move(attended)), p.out_point);
}

}  // namespace spotlight::nn

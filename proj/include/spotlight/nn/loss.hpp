#pragma once

#include "spotlight/types.hpp"

#include <algorithm>
#include <cmath>

namespace spotlight::nn {

/// Boundary-aware pixel weighting omega = 1 + factor * |meanpool_window(G) - G|.
struct LossWeights {
  int window = 31;
  double factor = 5.0;

  void validate() const {
    if (window < 1 || window % 2 == 0) throw DomainError("LossWeights: window must be odd and >= 1");
    if (factor < 0.0) throw DomainError("LossWeights: factor must be >= 0");
  }
};

/// Predictions are clamped to [eps, 1 - eps] before the logarithms.
inline constexpr double kLossClamp = 1e-7;

/// Zero-padded box mean; the divisor is always window^2.
template <typename Scalar>
Plane<Scalar> mean_pool_same(const Plane<Scalar>& in, int window) {
  const Eigen::Index h = in.rows();
  const Eigen::Index w = in.cols();
  const Eigen::Index r = window / 2;
  // summed-area table with a zero first row and column
  Plane<Scalar> sat = Plane<Scalar>::Zero(h + 1, w + 1);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      sat(y + 1, x + 1) = in(y, x) + sat(y, x + 1) + sat(y + 1, x) - sat(y, x);
    }
  }
  Plane<Scalar> out(h, w);
  const Scalar inv = Scalar(1) / Scalar(window * window);
  for (Eigen::Index y = 0; y < h; ++y) {
    const Eigen::Index y0 = std::max<Eigen::Index>(0, y - r);
    const Eigen::Index y1 = std::min<Eigen::Index>(h, y + r + 1);
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index x0 = std::max<Eigen::Index>(0, x - r);
      const Eigen::Index x1 = std::min<Eigen::Index>(w, x + r + 1);
      out(y, x) = (sat(y1, x1) - sat(y0, x1) - sat(y1, x0) + sat(y0, x0)) * inv;
    }
  }
  return out;
}

template <typename Scalar>
Plane<Scalar> boundary_weights(const Plane<Scalar>& gt, const LossWeights& w) {
  w.validate();
  return Scalar(1) + Scalar(w.factor) * (mean_pool_same(gt, w.window) - gt).abs();
}

template <typename Scalar>
struct LossResult {
  Scalar total = 0;
  Scalar weighted_bce = 0;
  Scalar weighted_iou = 0;
  Scalar shadow_mse = 0;
  Plane<Scalar> grad_prediction;  // dL / dP_GT
  Plane<Scalar> grad_shadow;      // dL / dP_s
};

/// Weighted BCE + weighted IoU of a prediction against its mask, with the
/// gradient with respect to the (probability) prediction. Clamped pixels get
/// zero gradient.
template <typename Scalar>
void weighted_structure_loss(const Plane<Scalar>& pred, const Plane<Scalar>& gt, const LossWeights& w,
                             LossResult<Scalar>& out) {
  const Scalar eps(kLossClamp);
  const Plane<Scalar> weight = boundary_weights(gt, w);
  const Plane<Scalar> p = pred.max(eps).min(Scalar(1) - eps);
  const Plane<Scalar> inside = ((pred >= eps) && (pred <= Scalar(1) - eps)).template cast<Scalar>();

  const Scalar weight_sum = weight.sum();
  const Plane<Scalar> bce = -(gt * p.log() + (Scalar(1) - gt) * (Scalar(1) - p).log());
  out.weighted_bce = (weight * bce).sum() / weight_sum;
  const Plane<Scalar> dbce = weight * (-gt / p + (Scalar(1) - gt) / (Scalar(1) - p)) / weight_sum;

  const Scalar inter = (p * gt * weight).sum();
  const Scalar uni = ((p + gt) * weight).sum();
  const Scalar denom = uni - inter + Scalar(1);
  out.weighted_iou = Scalar(1) - (inter + Scalar(1)) / denom;
  // d inter / dp = g w ; d (union - inter) / dp = (1 - g) w
  const Plane<Scalar> diou =
      -((gt * weight) * denom - (inter + Scalar(1)) * ((Scalar(1) - gt) * weight)) / (denom * denom);

  out.grad_prediction = (dbce + diou) * inside;
}

/// Composite loss L = wBCE(P_GT, M_GT) + wIoU(P_GT, M_GT) + MSE(P_s, M_S).
template <typename Scalar>
LossResult<Scalar> loss_total(const Plane<Scalar>& pred, const Plane<Scalar>& gt, const Plane<Scalar>& shadow_pred,
                              const Plane<Scalar>& shadow_gt, const LossWeights& w = {}) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw ShapeError("loss_total: prediction and mask sizes differ");
  }
  if (shadow_pred.rows() != shadow_gt.rows() || shadow_pred.cols() != shadow_gt.cols()) {
    throw ShapeError("loss_total: shadow prediction and shadow map sizes differ");
  }
  LossResult<Scalar> out;
  weighted_structure_loss(pred, gt, w, out);
  const Plane<Scalar> diff = shadow_pred - shadow_gt;
  const Scalar n = Scalar(diff.size());
  out.shadow_mse = diff.square().sum() / n;
  out.grad_shadow = Scalar(2) * diff / n;
  out.total = out.weighted_bce + out.weighted_iou + out.shadow_mse;
  return out;
}

/// Typed entry point for maps produced elsewhere in the library.
inline LossResult<double> loss_total(const PredictionMap& pred, const BinaryMask& gt, const PredictionMap& shadow_pred,
                                     const ShadowMap& shadow_gt, const LossWeights& w = {}) {
  require_same_size(pred, gt, "loss_total");
  require_same_size(shadow_pred, shadow_gt, "loss_total");
  return loss_total<double>(pred.data(), gt.as<double>(), shadow_pred.data(), shadow_gt.data(), w);
}

}  // namespace spotlight::nn

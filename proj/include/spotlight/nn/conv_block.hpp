#pragma once

#include "spotlight/nn/layers.hpp"
#include "spotlight/nn/random.hpp"

namespace spotlight::nn {

/// Seeded block: He-uniform kernels and perturbed batch-norm statistics so that
/// every stage of the transform is exercised.
template <typename Scalar>
ConvBlockParams<Scalar> make_conv_block(Rng& rng, int in_channels, int out_channels, int kernel, int iterations,
                                        bool relu = true) {
  ConvBlockParams<Scalar> block;
  block.kernel = kernel;
  block.relu = relu;
  int in = in_channels;
  for (int i = 0; i < iterations; ++i) {
    ConvBn<Scalar> layer;
    layer.kernel = kernel;
    layer.weight = rng.he_uniform<Scalar>(out_channels, static_cast<Eigen::Index>(in) * kernel * kernel);
    layer.bn_scale = rng.uniform_vector<Scalar>(out_channels, 0.5, 1.5);
    layer.bn_shift = rng.uniform_vector<Scalar>(out_channels, -0.1, 0.1);
    layer.bn_mean = rng.uniform_vector<Scalar>(out_channels, -0.1, 0.1);
    layer.bn_var = rng.uniform_vector<Scalar>(out_channels, 0.5, 1.5);
    block.layers.push_back(std::move(layer));
    in = out_channels;
  }
  return block;
}

template <typename Scalar>
void validate(const ConvBlockParams<Scalar>& block, const std::string& name) {
  if (block.kernel != 1 && block.kernel != 3) throw DomainError(name + ": kernel must be 1 or 3");
  if (block.layers.empty()) throw DomainError(name + ": at least one repeat is required");
  int in = block.layers.front().in_channels();
  for (const auto& layer : block.layers) {
    if (layer.kernel != block.kernel) throw DomainError(name + ": inconsistent kernel size");
    if (layer.in_channels() != in) throw ShapeError(name + ": channel chain broken");
    const auto n = layer.weight.rows();
    if (layer.bn_scale.size() != n || layer.bn_shift.size() != n || layer.bn_mean.size() != n ||
        layer.bn_var.size() != n) {
      throw ShapeError(name + ": batch-norm vectors do not match output channels");
    }
    if ((layer.bn_var.array() <= Scalar(0)).any()) throw DomainError(name + ": batch-norm variance must be > 0");
    in = layer.out_channels();
  }
}

}  // namespace spotlight::nn

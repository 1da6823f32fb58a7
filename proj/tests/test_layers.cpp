#include "bridge.hpp"

#include "spotlight/nn/network.hpp"

#include <doctest.h>

using namespace spotlight;
using namespace spotlight::nn;
using spotlight::testing::max_abs_diff;
using spotlight::testing::to_block;
using spotlight::testing::to_tensor;

namespace {

/// Batch norm that leaves values untouched up to the variance epsilon.
ConvBn<double> unit_bn(Matrix<double> weight, int k) {
  const auto n = weight.rows();
  ConvBn<double> l;
  l.kernel = k;
  l.weight = std::move(weight);
  l.bn_scale = Vector<double>::Constant(n, std::sqrt(1.0 + kBatchNormEps));
  l.bn_shift = Vector<double>::Zero(n);
  l.bn_mean = Vector<double>::Zero(n);
  l.bn_var = Vector<double>::Ones(n);
  return l;
}

}  // namespace

TEST_SUITE("layers") {

TEST_CASE("bconv: identity kernel with unit batch norm returns nonnegative input") {
  Rng rng(1);
  const FeatureMap<double> x = rng.feature_map<double>({3, 5, 6}, 0.0, 1.0);
  ConvBlockParams<double> p;
  p.kernel = 1;
  p.layers.push_back(unit_bn(Matrix<double>::Identity(3, 3), 1));
  p.layers.push_back(unit_bn(Matrix<double>::Identity(3, 3), 1));
  CHECK(bconv(x, p).matrix().isApprox(x.matrix(), 1e-12));
}

TEST_CASE("bconv: output is nonnegative") {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const auto p = make_conv_block<double>(rng, 4, 5, t % 2 ? 3 : 1, 1 + t % 3);
    const auto y = bconv(rng.feature_map<double>({4, 7, 7}), p);
    CHECK(y.matrix().minCoeff() >= 0.0);
    CHECK(y.shape() == Shape{5, 7, 7});
  }
}

TEST_CASE("bconv: seeded 3x3 block on a 2x4x4 input equals the nested-loop oracle") {
  Rng rng(3);
  const auto p = make_conv_block<double>(rng, 2, 3, 3, 2);
  const auto x = rng.feature_map<double>({2, 4, 4});
  CHECK(max_abs_diff(bconv(x, p), oracle::block(to_tensor(x), to_block(p))) < 1e-12);
}

TEST_CASE("bconv: float block agrees with the oracle at 1e-5") {
  Rng rng(4);
  const auto p = make_conv_block<float>(rng, 2, 3, 3, 1);
  const auto x = rng.feature_map<float>({2, 4, 4});
  CHECK(max_abs_diff(bconv(x, p), oracle::block(to_tensor(x), to_block(p))) < 1e-5);
}

TEST_CASE("bconv: channel mismatch is rejected") {
  Rng rng(5);
  const auto p = make_conv_block<double>(rng, 4, 4, 3, 1);
  CHECK_THROWS_AS(bconv(rng.feature_map<double>({3, 6, 6}), p), ShapeError);
}

TEST_CASE("bconv: maps smaller than the kernel are zero padded") {
  Rng rng(5);
  const auto p = make_conv_block<double>(rng, 4, 4, 3, 2);
  for (const Shape s : {Shape{4, 2, 6}, Shape{4, 1, 1}, Shape{4, 2, 2}}) {
    const auto x = rng.feature_map<double>(s);
    CHECK(max_abs_diff(bconv(x, p), oracle::block(to_tensor(x), to_block(p))) < 1e-12);
  }
}

TEST_CASE("depthwise and pointwise agree with the oracle") {
  Rng rng(6);
  const auto x = rng.feature_map<double>({4, 5, 3});
  const Matrix<double> dw = rng.uniform_matrix<double>(4, 9, -1, 1);
  const Matrix<double> pw = rng.uniform_matrix<double>(6, 4, -1, 1);
  CHECK(max_abs_diff(depthwise3x3(x, dw), oracle::depthwise(to_tensor(x), spotlight::testing::to_mat(dw))) < 1e-12);
  CHECK(max_abs_diff(pointwise(x, pw), oracle::pointwise(to_tensor(x), spotlight::testing::to_mat(pw))) < 1e-12);
}

TEST_CASE("avg_pool and upsample2x agree with the oracle") {
  Rng rng(7);
  const auto x = rng.feature_map<double>({3, 8, 4});
  CHECK(max_abs_diff(avg_pool(x, 2), oracle::down(to_tensor(x), 2)) < 1e-12);
  CHECK(max_abs_diff(avg_pool(x, 4), oracle::down(to_tensor(x), 4)) < 1e-12);
  CHECK(max_abs_diff(upsample2x(x), oracle::up2(to_tensor(x))) < 1e-12);
  CHECK_THROWS_AS(avg_pool(x, 3), ShapeError);
}

TEST_CASE("upsample2x: constant maps stay constant and pooling undoes it") {
  FeatureMap<double> c({2, 3, 3}, Matrix<double>::Constant(2, 9, 0.7));
  CHECK(upsample2x(c).matrix().isApproxToConstant(0.7, 1e-12));
  Rng rng(8);
  const auto x = rng.feature_map<double>({2, 4, 4});
  // pooling the upsampled map is a separable (1/8, 3/4, 1/8) blur in the interior
  const auto back = avg_pool(upsample2x(x), 2);
  for (int ch = 0; ch < 2; ++ch) {
    for (int y = 1; y < 3; ++y) {
      for (int xx = 1; xx < 3; ++xx) {
        const double expect = 0.5625 * x(ch, y, xx) +
                              0.015625 * (x(ch, y - 1, xx - 1) + x(ch, y - 1, xx + 1) + x(ch, y + 1, xx - 1) + x(ch, y + 1, xx + 1)) +
                              0.09375 * (x(ch, y - 1, xx) + x(ch, y + 1, xx) + x(ch, y, xx - 1) + x(ch, y, xx + 1));
        CHECK(back(ch, y, xx) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("permute_channels: validates bijections") {
  Rng rng(9);
  const auto x = rng.feature_map<double>({3, 2, 2});
  const std::vector<int> ok{2, 0, 1};
  const auto y = permute_channels(x, ok);
  CHECK(y.matrix().row(0) == x.matrix().row(2));
  const std::vector<int> dup{0, 0, 1};
  CHECK_THROWS_AS(permute_channels(x, dup), DomainError);
  const std::vector<int> short_perm{0, 1};
  CHECK_THROWS_AS(permute_channels(x, short_perm), ShapeError);
}

TEST_CASE("shadow_head: zero input with zero-centered batch norm gives psi 0 and P_s 0.5") {
  Rng rng(10);
  ShadowHeadParams<double> p;
  p.feature = make_conv_block<double>(rng, 4, 6, 3, 3);
  p.predict = make_conv_block<double>(rng, 6, 1, 1, 1, false);
  for (auto* b : {&p.feature, &p.predict}) {
    for (auto& l : b->layers) {
      l.bn_shift.setZero();
      l.bn_mean.setZero();
    }
  }
  const auto out = shadow_head(FeatureMap<double>(4, 8, 8), p);
  CHECK(out.psi.matrix().cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.shadow == 0.5).all());
}

TEST_CASE("shadow_head: shapes and composition oracle") {
  Rng rng(11);
  ShadowHeadParams<double> p;
  p.feature = make_conv_block<double>(rng, 5, 6, 3, 3);
  p.predict = make_conv_block<double>(rng, 6, 1, 1, 1, false);
  const auto x = rng.feature_map<double>({5, 9, 7});
  const auto out = shadow_head(x, p);
  CHECK(out.psi.shape() == Shape{6, 9, 7});
  CHECK(out.shadow.rows() == 9);
  CHECK(out.shadow.cols() == 7);
  CHECK(out.shadow.minCoeff() > 0.0);
  CHECK(out.shadow.maxCoeff() < 1.0);
  const auto ref = oracle::shadow_head(to_tensor(x), to_block(p.feature), to_block(p.predict));
  CHECK(max_abs_diff(out.psi, ref.psi) < 1e-12);
  CHECK(max_abs_diff(out.shadow, ref.shadow) < 1e-12);
}

TEST_CASE("Rng: fixed streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.unit() == b.unit());
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.below(7) < 7u);
  }
  auto perm = Rng(5).permutation(10);
  std::sort(perm.begin(), perm.end());
  for (int i = 0; i < 10; ++i) CHECK(perm[static_cast<std::size_t>(i)] == i);
}

}  // TEST_SUITE

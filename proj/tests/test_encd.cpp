#include "bridge.hpp"

#include "spotlight/nn/network.hpp"

#include <doctest.h>

using namespace spotlight;
using namespace spotlight::nn;
using spotlight::testing::max_abs_diff;
using spotlight::testing::to_block;
using spotlight::testing::to_decoder;
using spotlight::testing::to_stage;
using spotlight::testing::to_tensor;

namespace {

Pyramid<double> seeded_pyramid(Rng& rng, int c, int size) {
  Pyramid<double> f;
  for (int l = 0; l < 4; ++l) f[static_cast<std::size_t>(l)] = rng.feature_map<double>({c, size >> l, size >> l});
  return f;
}

std::vector<oracle::Tensor> to_tensors(const Pyramid<double>& f) {
  std::vector<oracle::Tensor> out;
  for (const auto& l : f) out.push_back(to_tensor(l));
  return out;
}

}  // namespace

TEST_SUITE("encd") {

TEST_CASE("encd_aggregate: seeded 32-channel pyramid equals the oracle") {
  Rng rng(21);
  const auto p = make_encd_params<double>(rng, {32, 32, 32, 32}, 32);
  const auto f = seeded_pyramid(rng, 32, 32);
  const auto out = encd_aggregate(f, p);
  const auto ref = oracle::encd_aggregate(to_tensors(f), to_decoder(p));
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(out[l].shape() == f[l].shape());
    CHECK(max_abs_diff(out[l], ref[l]) < 1e-9);
  }
}

TEST_CASE("encd_decode: seeded pyramid equals the oracle") {
  Rng rng(22);
  const auto p = make_encd_params<double>(rng, {32, 32, 32, 32}, 32);
  const auto f = seeded_pyramid(rng, 32, 32);
  const auto pred = encd_decode(f, p);
  CHECK(pred.rows() == 32);
  CHECK(pred.cols() == 32);
  CHECK(max_abs_diff(pred, oracle::encd_decode(to_tensors(f), to_decoder(p))) < 1e-9);
}

TEST_CASE("encd_aggregate: all-ones pyramid with identity-like blocks keeps shapes and positivity") {
  Rng rng(23);
  auto p = make_encd_params<double>(rng, {4, 4, 4, 4}, 4);
  for (auto* b : {&p.from_f4, &p.from_f3, &p.from_f3_prime, &p.from_f2_prime}) {
    for (auto& l : b->layers) {
      l.weight.setZero();
      for (int c = 0; c < 4; ++c) l.weight(c, c * 9 + 4) = 1.0;  // center tap
      l.bn_scale.setOnes();
      l.bn_shift.setZero();
      l.bn_mean.setZero();
      l.bn_var.setConstant(1.0 - kBatchNormEps);
    }
  }
  Pyramid<double> f;
  for (int l = 0; l < 4; ++l) f[static_cast<std::size_t>(l)] = FeatureMap<double>({4, 16 >> l, 16 >> l}, Matrix<double>::Ones(4, (16 >> l) * (16 >> l)));
  const auto out = encd_aggregate(f, p);
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(out[l].shape() == f[l].shape());
    CHECK(out[l].matrix().isApproxToConstant(1.0, 1e-12));
  }
}

TEST_CASE("encd_aggregate: f3 = 0 absorbs f3' and f2'") {
  Rng rng(24);
  auto p = make_encd_params<double>(rng, {8, 8, 8, 8}, 8);
  auto f = seeded_pyramid(rng, 8, 16);
  f[2].matrix().setZero();
  CHECK(encd_aggregate(f, p)[2].matrix().cwiseAbs().maxCoeff() == 0.0);
  // Bconv(0) is only 0 when batch norm adds no offset
  for (auto* b : {&p.from_f3, &p.from_f3_prime, &p.from_f2_prime}) {
    for (auto& l : b->layers) {
      l.bn_shift.setZero();
      l.bn_mean.setZero();
    }
  }
  const auto out = encd_aggregate(f, p);
  CHECK(out[2].matrix().cwiseAbs().maxCoeff() == 0.0);
  CHECK(out[1].matrix().cwiseAbs().maxCoeff() == 0.0);
  CHECK(out[0].matrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encd_decode: zero weights and zero-centered batch norm give 0.5 everywhere") {
  Rng rng(25);
  auto p = make_encd_params<double>(rng, {8, 8, 8, 8}, 8);
  auto clear = [](ConvBlockParams<double>& b) {
    for (auto& l : b.layers) {
      l.weight.setZero();
      l.bn_shift.setZero();
      l.bn_mean.setZero();
    }
  };
  for (auto& fu : p.fuse) {
    clear(fu.up);
    clear(fu.merge);
  }
  clear(p.head);
  const auto pred = encd_decode(seeded_pyramid(rng, 8, 16), p);
  CHECK((pred == 0.5).all());
}

TEST_CASE("encd: broken shape chains are rejected") {
  Rng rng(26);
  const auto p = make_encd_params<double>(rng, {8, 8, 8, 8}, 8);
  auto f = seeded_pyramid(rng, 8, 16);
  f[1] = rng.feature_map<double>({8, 6, 6});
  CHECK_THROWS_AS(encd_aggregate(f, p), ShapeError);
  CHECK_THROWS_AS(encd_decode(f, p), ShapeError);
  auto g = seeded_pyramid(rng, 8, 16);
  g[3] = rng.feature_map<double>({7, 2, 2});
  CHECK_THROWS_AS(encd_aggregate(g, p), ShapeError);
}

TEST_CASE("forward: default configuration equals the chained oracles") {
  NetworkConfig cfg;
  cfg.base_size = 16;
  const auto params = make_network_params<double>(cfg);
  const auto x = make_pyramid<double>(cfg, 3);
  const auto r = forward(x, params);

  const auto head = oracle::shadow_head(to_tensor(x[1]), to_block(params.shadow.feature), to_block(params.shadow.predict));
  CHECK(max_abs_diff(r.psi, head.psi) < 1e-9);
  CHECK(max_abs_diff(r.shadow, head.shadow) < 1e-9);
  std::vector<oracle::Tensor> refined{head.psi};
  for (int i = 2; i <= 4; ++i) {
    refined.push_back(oracle::paa_stage(refined.back(), to_tensor(x[static_cast<std::size_t>(i)]), head.psi, i,
                                        cfg.heads, to_stage(params.paa.stage(i)))
                          .f);
  }
  std::vector<oracle::Tensor> transited;
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(max_abs_diff(r.refined[l], refined[l]) < 1e-9);
    transited.push_back(oracle::pointwise(refined[l], spotlight::testing::to_mat(params.encd.transition[l])));
  }
  const auto decoder = to_decoder(params.encd);
  const auto agg = oracle::encd_aggregate(transited, decoder);
  for (std::size_t l = 0; l < 4; ++l) CHECK(max_abs_diff(r.aggregated[l], agg[l]) < 1e-9);
  CHECK(max_abs_diff(r.prediction, oracle::encd_decode(agg, decoder)) < 1e-9);

  CHECK(r.refined[1].shape() == Shape{32, 8, 8});
  CHECK(r.refined[3].shape() == Shape{32, 2, 2});
}

TEST_CASE("forward: contract violations name the failing stage") {
  NetworkConfig cfg;
  cfg.base_size = 16;
  cfg.attention_channels = 30;
  cfg.heads = 4;
  const auto params = make_network_params<float>(cfg);
  CHECK_THROWS_WITH(forward(make_pyramid<float>(cfg, 1), params), doctest::Contains("paa stage 2"));

  NetworkConfig ok;
  ok.base_size = 16;
  const auto good = make_network_params<float>(ok);
  auto x = make_pyramid<float>(ok, 1);
  x[3] = Rng(2).feature_map<float>({32, 3, 3});
  CHECK_THROWS_WITH(forward(x, good), doctest::Contains("paa stage 3"));
  CHECK_THROWS_AS(NetworkConfig{.base_size = 12}.validate(), DomainError);
}

TEST_CASE("forward: fixed seeds are bit-identical") {
  NetworkConfig cfg;
  cfg.base_size = 8;
  const auto a = forward(make_pyramid<float>(cfg, 9), make_network_params<float>(cfg));
  const auto b = forward(make_pyramid<float>(cfg, 9), make_network_params<float>(cfg));
  CHECK((a.prediction == b.prediction).all());
  CHECK(a.aggregated[0].matrix() == b.aggregated[0].matrix());
}

}  // TEST_SUITE

#pragma once

#include "spotlight/nn/network.hpp"

#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

namespace spotlight::nn {

/// A parameter flattened to float32, row-major.
struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> values;
};

/// Calls fn(name, member) for every parameter of p in a fixed order. Members are
/// Matrix, Vector, Scalar (attention temperature) or std::vector<int> (mixing permutation).
template <typename Params, typename Fn>
void visit_tensors(Params& p, Fn&& fn) {
  auto block = [&](const std::string& prefix, auto& b) {
    for (std::size_t i = 0; i < b.layers.size(); ++i) {
      const std::string n = prefix + ".layer" + std::to_string(i);
      fn(n + ".weight", b.layers[i].weight);
      fn(n + ".bn_scale", b.layers[i].bn_scale);
      fn(n + ".bn_shift", b.layers[i].bn_shift);
      fn(n + ".bn_mean", b.layers[i].bn_mean);
      fn(n + ".bn_var", b.layers[i].bn_var);
    }
  };
  block("shadow.feature", p.shadow.feature);
  block("shadow.predict", p.shadow.predict);
  for (std::size_t s = 0; s < 3; ++s) {
    const std::string n = "paa.stage" + std::to_string(s + 2);
    auto& st = p.paa.stages[s];
    fn(n + ".kv_point", st.kv_point);
    fn(n + ".kv_depth", st.kv_depth);
    fn(n + ".q_point", st.q_point);
    fn(n + ".q_depth", st.q_depth);
    fn(n + ".out_point", st.out_point);
    fn(n + ".alpha", st.alpha);
    fn(n + ".mix_perm", st.mix_perm);
  }
  for (std::size_t l = 0; l < 4; ++l) fn("encd.transition" + std::to_string(l + 1), p.encd.transition[l]);
  block("encd.from_f4", p.encd.from_f4);
  block("encd.from_f3", p.encd.from_f3);
  block("encd.from_f3_prime", p.encd.from_f3_prime);
  block("encd.from_f2_prime", p.encd.from_f2_prime);
  for (std::size_t f = 0; f < 3; ++f) {
    block("encd.fuse" + std::to_string(f) + ".up", p.encd.fuse[f].up);
    block("encd.fuse" + std::to_string(f) + ".merge", p.encd.fuse[f].merge);
  }
  block("encd.head", p.encd.head);
}

template <typename Scalar>
std::vector<NamedTensor> flatten(const NetworkParams<Scalar>& p) {
  std::vector<NamedTensor> out;
  visit_tensors(p, [&](const std::string& name, const auto& member) {
    using T = std::decay_t<decltype(member)>;
    NamedTensor t{name, {}, {}};
    if constexpr (std::is_same_v<T, std::vector<int>>) {
      t.shape = {static_cast<int>(member.size())};
      for (const int v : member) t.values.push_back(static_cast<float>(v));
    } else if constexpr (std::is_arithmetic_v<T>) {
      t.shape = {1};
      t.values = {static_cast<float>(member)};
    } else if constexpr (T::ColsAtCompileTime == 1) {
      t.shape = {static_cast<int>(member.size())};
      for (Eigen::Index i = 0; i < member.size(); ++i) t.values.push_back(static_cast<float>(member[i]));
    } else {
      t.shape = {static_cast<int>(member.rows()), static_cast<int>(member.cols())};
      for (Eigen::Index i = 0; i < member.size(); ++i) t.values.push_back(static_cast<float>(member.data()[i]));
    }
    out.push_back(std::move(t));
  });
  return out;
}

/// Fills a parameter set built for `config` from named tensors. Every tensor must
/// be present with exactly the expected shape.
template <typename Scalar>
NetworkParams<Scalar> unflatten(const NetworkConfig& config, const std::vector<NamedTensor>& tensors) {
  NetworkParams<Scalar> p = make_network_params<Scalar>(config);
  std::size_t next = 0;
  visit_tensors(p, [&](const std::string& name, auto& member) {
    using T = std::decay_t<decltype(member)>;
    if (next >= tensors.size() || tensors[next].name != name) {
      throw DomainError("archive: expected tensor '" + name + "'");
    }
    const NamedTensor& t = tensors[next++];
    auto expect = [&](std::vector<int> shape) {
      if (t.shape != shape) throw ShapeError("archive: tensor '" + name + "' has an unexpected shape");
    };
    if constexpr (std::is_same_v<T, std::vector<int>>) {
      expect({static_cast<int>(member.size())});
      for (std::size_t i = 0; i < member.size(); ++i) member[i] = static_cast<int>(t.values[i]);
    } else if constexpr (std::is_arithmetic_v<T>) {
      expect({1});
      member = static_cast<Scalar>(t.values[0]);
    } else if constexpr (T::ColsAtCompileTime == 1) {
      expect({static_cast<int>(member.size())});
      for (Eigen::Index i = 0; i < member.size(); ++i) member[i] = static_cast<Scalar>(t.values[static_cast<std::size_t>(i)]);
    } else {
      expect({static_cast<int>(member.rows()), static_cast<int>(member.cols())});
      for (Eigen::Index i = 0; i < member.size(); ++i) {
        member.data()[i] = static_cast<Scalar>(t.values[static_cast<std::size_t>(i)]);
      }
    }
  });
  if (next != tensors.size()) throw DomainError("archive: unexpected extra tensors");
  return p;
}

/// Writes `<stem>.json` (manifest: name, shape, byte offset) and `<stem>.bin`
/// (little-endian float32, concatenated in manifest order).
void write_archive(const std::filesystem::path& stem, const NetworkConfig& config,
                   const std::vector<NamedTensor>& tensors);

struct Archive {
  NetworkConfig config;
  std::vector<NamedTensor> tensors;
};
Archive read_archive(const std::filesystem::path& stem);

template <typename Scalar>
void save_params(const std::filesystem::path& stem, const NetworkParams<Scalar>& p) {
  write_archive(stem, p.config, flatten(p));
}

template <typename Scalar>
NetworkParams<Scalar> load_params(const std::filesystem::path& stem) {
  const Archive a = read_archive(stem);
  return unflatten<Scalar>(a.config, a.tensors);
}

}  // namespace spotlight::nn

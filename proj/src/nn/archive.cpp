#include "spotlight/nn/archive.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

namespace spotlight::nn {
namespace {

constexpr const char* kFormat = "spotlight-tensor-archive";

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

nlohmann::ordered_json config_to_json(const NetworkConfig& c) {
  nlohmann::ordered_json j;
  j["heads"] = c.heads;
  j["decoder_channels"] = c.decoder_channels;
  j["x_channels"] = c.x_channels;
  j["x0_channels"] = c.x0_channels;
  j["psi_channels"] = c.psi_channels;
  j["attention_channels"] = c.attention_channels;
  j["paa_out_channels"] = c.paa_out_channels;
  j["base_size"] = c.base_size;
  j["seed"] = c.seed;
  return j;
}

NetworkConfig config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.heads = j.at("heads").get<int>();
  c.decoder_channels = j.at("decoder_channels").get<int>();
  c.x_channels = j.at("x_channels").get<std::array<int, 4>>();
  c.x0_channels = j.at("x0_channels").get<int>();
  c.psi_channels = j.at("psi_channels").get<int>();
  c.attention_channels = j.at("attention_channels").get<int>();
  c.paa_out_channels = j.at("paa_out_channels").get<int>();
  c.base_size = j.at("base_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

std::size_t element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (const int d : shape) {
    if (d < 0) throw DomainError("archive: negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

void write_archive(const std::filesystem::path& stem, const NetworkConfig& config,
                   const std::vector<NamedTensor>& tensors) {
  const auto bin_path = with_suffix(stem, ".bin");
  nlohmann::ordered_json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = 1;
  manifest["dtype"] = "float32";
  manifest["byte_order"] = "little";
  manifest["data_file"] = bin_path.filename().string();
  manifest["config"] = config_to_json(config);
  auto& list = manifest["tensors"] = nlohmann::ordered_json::array();

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw DomainError("cannot write " + bin_path.string());
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    if (element_count(t.shape) != t.values.size()) throw ShapeError("archive: tensor '" + t.name + "' size mismatch");
    nlohmann::ordered_json entry;
    entry["name"] = t.name;
    entry["shape"] = t.shape;
    entry["offset"] = offset;
    list.push_back(std::move(entry));
    for (const float v : t.values) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                             static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
      bin.write(bytes, 4);
    }
    offset += 4 * t.values.size();
  }
  manifest["total_bytes"] = offset;
  std::ofstream json(with_suffix(stem, ".json"));
  if (!json) throw DomainError("cannot write manifest for " + stem.string());
  json << manifest.dump(2) << '\n';
}

Archive read_archive(const std::filesystem::path& stem) {
  std::ifstream json_in(with_suffix(stem, ".json"));
  if (!json_in) throw DomainError("cannot read manifest for " + stem.string());
  const nlohmann::json manifest = nlohmann::json::parse(json_in);
  if (manifest.at("format") != kFormat || manifest.at("dtype") != "float32" || manifest.at("byte_order") != "little") {
    throw DomainError("archive: unsupported manifest");
  }
  const auto bin_path = stem.parent_path() / manifest.at("data_file").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DomainError("cannot read " + bin_path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  Archive a;
  a.config = config_from_json(manifest.at("config"));
  for (const auto& entry : manifest.at("tensors")) {
    NamedTensor t;
    t.name = entry.at("name").get<std::string>();
    t.shape = entry.at("shape").get<std::vector<int>>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const std::size_t n = element_count(t.shape);
    if (offset + 4 * n > bytes.size()) throw DomainError("archive: tensor '" + t.name + "' runs past the data file");
    t.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b = static_cast<std::size_t>(offset) + 4 * i;
      const std::uint32_t bits = static_cast<std::uint32_t>(bytes[b]) | (static_cast<std::uint32_t>(bytes[b + 1]) << 8) |
                                 (static_cast<std::uint32_t>(bytes[b + 2]) << 16) |
                                 (static_cast<std::uint32_t>(bytes[b + 3]) << 24);
      t.values[i] = std::bit_cast<float>(bits);
    }
    a.tensors.push_back(std::move(t));
  }
  return a;
}

}  // namespace spotlight::nn

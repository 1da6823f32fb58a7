#pragma once

#include "spotlight/nn/network.hpp"
#include "spotlight/shadow_synth.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace spotlight::cli {

enum class ReportFormat { Csv, Json };

struct RunConfig {
  std::filesystem::path input;   // generate: mask directory
  std::filesystem::path gt;      // evaluate: ground-truth directory
  std::filesystem::path pred;    // evaluate: prediction directory
  std::filesystem::path output;  // directory every command writes into
  DilationConfig dilation;
  int threads = 1;
  ReportFormat format = ReportFormat::Csv;

  nn::NetworkConfig network;     // smoke
  std::uint64_t pyramid_seed = 7;
  std::filesystem::path params;  // smoke: optional archive stem to load
  bool export_params = false;    // smoke: write params.{json,bin} into output
};

/// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;  // some files failed, the rest were written
inline constexpr int kExitError = 2;    // nothing useful was produced

/// One shadow-map PNG per input mask (same filename) plus manifest.json.
int cmd_generate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// metrics.csv or metrics.json in the output directory (stdout without one).
int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Seeded forward pass printing each stage's shape and checksum.
int cmd_smoke(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// FNV-1a 64 over the little-endian float32 encoding of the values, row by row.
template <typename Derived>
std::uint64_t checksum(const Eigen::DenseBase<Derived>& values) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto& d = values.derived();
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(d(r, c)));
      for (int b = 0; b < 4; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 0x100000001b3ull;
      }
    }
  }
  return h;
}

}  // namespace spotlight::cli

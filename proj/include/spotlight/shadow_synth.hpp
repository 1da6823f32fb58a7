#pragma once

#include "spotlight/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spotlight {

/// Image corner a spotlight is anchored to.
enum class Corner { TopLeft, TopRight, BottomLeft, BottomRight };

std::string to_string(Corner c);
/// Accepts "tl", "tr", "bl", "br" (case-insensitive) and the long names.
Corner parse_corner(std::string_view text);
/// Comma-separated corner list, e.g. "tl,br".
std::vector<Corner> parse_corner_list(std::string_view text);
std::string to_string(std::span<const Corner> corners);

/// Pixel position of a corner on a width x height image.
Pixel corner_point(Corner c, int width, int height);

struct DilationConfig {
  /// Edge-pixel radii are min-max scaled onto [0, max_radius].
  int max_radius = 30;
  std::vector<Corner> spotlights{Corner::TopLeft, Corner::BottomRight};
  /// Radius used when every edge pixel is equidistant from the spotlight.
  /// Unset means max_radius / 2.
  std::optional<int> degenerate_radius;

  int effective_degenerate_radius() const { return degenerate_radius.value_or(max_radius / 2); }
  /// Throws DomainError when an invariant does not hold.
  void validate() const;
};

/// Plain-text `key = value` config: max_radius, spotlights, degenerate_radius.
/// Blank lines and lines starting with '#' are ignored; unknown keys are errors.
DilationConfig parse_dilation_config(std::istream& in);
DilationConfig load_dilation_config(const std::filesystem::path& path);
std::string format_dilation_config(const DilationConfig& cfg);

struct EdgeRadius {
  Pixel pixel;
  double distance = 0.0;  // Euclidean distance to the spotlight
  int radius = 0;         // scaled, rounded disk radius
};

/// Inner morphological gradient: foreground pixels that have at least one
/// 4-neighbour outside the foreground. Pixels beyond the border count as background.
BinaryMask extract_edge(const BinaryMask& gt);

/// Distance of every edge pixel (raster order) to `spotlight`, min-max scaled
/// onto [0, max_radius] and rounded to the nearest integer.
std::vector<EdgeRadius> compute_radii(const BinaryMask& edge, Pixel spotlight, const DilationConfig& cfg);

/// Union of discrete Euclidean disks {(dx,dy) : dx^2 + dy^2 <= r^2} around each
/// pixel, clipped to the image.
BinaryMask circular_dilate(std::span<const EdgeRadius> disks, int width, int height);

/// Shadow map for one spotlight: gt masked union of distance-scaled disks.
ShadowMap synthesize_shadow_map(const BinaryMask& gt, Pixel spotlight, const DilationConfig& cfg);

/// Pixel-wise sum saturated at 1.
ShadowMap combine_shadow_maps(std::span<const ShadowMap> maps);

struct SpotlightSummary {
  Corner corner;
  Pixel spotlight;
  std::size_t edge_pixels = 0;
  int min_radius = 0;
  int max_radius = 0;
  double mean_radius = 0.0;
  std::size_t shadow_pixels = 0;
};

struct CosupervisionTarget {
  ShadowMap target;
  std::vector<SpotlightSummary> spotlights;
};

/// Shadow maps for every configured spotlight, fused with combine_shadow_maps,
/// along with per-spotlight radius statistics.
CosupervisionTarget synthesize_cosupervision(const BinaryMask& gt, const DilationConfig& cfg);

inline ShadowMap generate_cosupervision_target(const BinaryMask& gt, const DilationConfig& cfg) {
  return synthesize_cosupervision(gt, cfg).target;
}

}  // namespace spotlight

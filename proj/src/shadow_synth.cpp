#include "spotlight/shadow_synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace spotlight {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

int parse_int(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DomainError("config: " + std::string(key) + " expects an integer, got '" + std::string(value) + "'");
  }
}

}  // namespace

std::string to_string(Corner c) {
  switch (c) {
    case Corner::TopLeft: return "tl";
    case Corner::TopRight: return "tr";
    case Corner::BottomLeft: return "bl";
    case Corner::BottomRight: return "br";
  }
  return "?";
}

Corner parse_corner(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "tl" || t == "top-left") return Corner::TopLeft;
  if (t == "tr" || t == "top-right") return Corner::TopRight;
  if (t == "bl" || t == "bottom-left") return Corner::BottomLeft;
  if (t == "br" || t == "bottom-right") return Corner::BottomRight;
  throw DomainError("unknown spotlight corner '" + std::string(text) + "'");
}

std::vector<Corner> parse_corner_list(std::string_view text) {
  std::vector<Corner> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!trim(item).empty()) out.push_back(parse_corner(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw DomainError("spotlight list is empty");
  return out;
}

std::string to_string(std::span<const Corner> corners) {
  std::string out;
  for (const Corner c : corners) {
    if (!out.empty()) out += ',';
    out += to_string(c);
  }
  return out;
}

Pixel corner_point(Corner c, int width, int height) {
  switch (c) {
    case Corner::TopLeft: return {0, 0};
    case Corner::TopRight: return {width - 1, 0};
    case Corner::BottomLeft: return {0, height - 1};
    case Corner::BottomRight: return {width - 1, height - 1};
  }
  return {0, 0};
}

void DilationConfig::validate() const {
  if (max_radius < 0) throw DomainError("max_radius must be >= 0");
  if (spotlights.empty()) throw DomainError("at least one spotlight is required");
  if (effective_degenerate_radius() < 0) throw DomainError("degenerate_radius must be >= 0");
}

DilationConfig parse_dilation_config(std::istream& in) {
  DilationConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = lower(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));
    if (key == "max_radius") {
      cfg.max_radius = parse_int(key, value);
    } else if (key == "degenerate_radius") {
      cfg.degenerate_radius = parse_int(key, value);
    } else if (key == "spotlights") {
      cfg.spotlights = parse_corner_list(value);
    } else {
      throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

DilationConfig load_dilation_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config " + path.string());
  return parse_dilation_config(in);
}

std::string format_dilation_config(const DilationConfig& cfg) {
  std::ostringstream out;
  out << "max_radius = " << cfg.max_radius << '\n'
      << "spotlights = " << to_string(cfg.spotlights) << '\n'
      << "degenerate_radius = " << cfg.effective_degenerate_radius() << '\n';
  return out.str();
}

BinaryMask extract_edge(const BinaryMask& gt) {
  const int w = gt.width();
  const int h = gt.height();
  BinaryMask edge(w, h);
  auto fg = [&](int x, int y) { return gt.contains(x, y) && gt.at(x, y); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!gt.at(x, y)) continue;
      // erosion under the 3x3 cross keeps a pixel only if all 4 neighbours are set
      const bool interior = fg(x - 1, y) && fg(x + 1, y) && fg(x, y - 1) && fg(x, y + 1);
      if (!interior) edge.set(x, y, true);
    }
  }
  return edge;
}

std::vector<EdgeRadius> compute_radii(const BinaryMask& edge, Pixel spotlight, const DilationConfig& cfg) {
  cfg.validate();
  if (!edge.contains(spotlight.x, spotlight.y)) {
    throw DomainError("spotlight (" + std::to_string(spotlight.x) + "," + std::to_string(spotlight.y) +
                      ") lies outside the image");
  }

  std::vector<EdgeRadius> out;
  std::vector<long long> squared;
  for (int y = 0; y < edge.height(); ++y) {
    for (int x = 0; x < edge.width(); ++x) {
      if (!edge.at(x, y)) continue;
      const long long dx = x - spotlight.x;
      const long long dy = y - spotlight.y;
      squared.push_back(dx * dx + dy * dy);
      out.push_back({{x, y}, std::sqrt(static_cast<double>(squared.back())), 0});
    }
  }
  if (out.empty()) return out;

  const auto [lo, hi] = std::minmax_element(squared.begin(), squared.end());
  if (*lo == *hi) {
    for (auto& e : out) e.radius = cfg.effective_degenerate_radius();
    return out;
  }
  const double dmin = std::sqrt(static_cast<double>(*lo));
  const double dmax = std::sqrt(static_cast<double>(*hi));
  for (auto& e : out) {
    const double scaled = (e.distance - dmin) / (dmax - dmin) * cfg.max_radius;
    e.radius = static_cast<int>(std::lround(scaled));
  }
  return out;
}

BinaryMask circular_dilate(std::span<const EdgeRadius> disks, int width, int height) {
  BinaryMask out(width, height);
  for (const auto& d : disks) {
    if (!out.contains(d.pixel.x, d.pixel.y)) throw DomainError("circular_dilate: pixel out of bounds");
    if (d.radius < 0) throw DomainError("circular_dilate: negative radius");
    const long long r2 = static_cast<long long>(d.radius) * d.radius;
    const int y0 = std::max(0, d.pixel.y - d.radius);
    const int y1 = std::min(height - 1, d.pixel.y + d.radius);
    for (int y = y0; y <= y1; ++y) {
      const long long dy = y - d.pixel.y;
      // half-width of the disk's chord on this row
      const int span = static_cast<int>(std::sqrt(static_cast<double>(r2 - dy * dy)));
      int reach = span;
      while (static_cast<long long>(reach + 1) * (reach + 1) + dy * dy <= r2) ++reach;
      while (reach > 0 && static_cast<long long>(reach) * reach + dy * dy > r2) --reach;
      const int x0 = std::max(0, d.pixel.x - reach);
      const int x1 = std::min(width - 1, d.pixel.x + reach);
      for (int x = x0; x <= x1; ++x) out.set(x, y, true);
    }
  }
  return out;
}

ShadowMap synthesize_shadow_map(const BinaryMask& gt, Pixel spotlight, const DilationConfig& cfg) {
  const BinaryMask edge = extract_edge(gt);
  const auto radii = compute_radii(edge, spotlight, cfg);
  const BinaryMask dilated = circular_dilate(radii, gt.width(), gt.height());
  return ShadowMap((gt.data() * dilated.data()).cast<double>());
}

ShadowMap combine_shadow_maps(std::span<const ShadowMap> maps) {
  if (maps.empty()) throw DomainError("combine_shadow_maps: no maps given");
  Plane<double> sum = maps.front().data();
  for (const auto& m : maps.subspan(1)) {
    require_same_size(maps.front(), m, "combine_shadow_maps");
    sum += m.data();
  }
  return ShadowMap(sum.min(1.0));
}

CosupervisionTarget synthesize_cosupervision(const BinaryMask& gt, const DilationConfig& cfg) {
  cfg.validate();
  const BinaryMask edge = extract_edge(gt);
  std::vector<ShadowMap> maps;
  std::vector<SpotlightSummary> summaries;
  for (const Corner corner : cfg.spotlights) {
    const Pixel q = corner_point(corner, gt.width(), gt.height());
    const auto radii = compute_radii(edge, q, cfg);
    const BinaryMask dilated = circular_dilate(radii, gt.width(), gt.height());
    ShadowMap shadow((gt.data() * dilated.data()).cast<double>());

    SpotlightSummary s{corner, q};
    s.edge_pixels = radii.size();
    if (!radii.empty()) {
      auto [lo, hi] = std::minmax_element(radii.begin(), radii.end(),
                                          [](const auto& a, const auto& b) { return a.radius < b.radius; });
      s.min_radius = lo->radius;
      s.max_radius = hi->radius;
      double total = 0.0;
      for (const auto& r : radii) total += r.radius;
      s.mean_radius = total / static_cast<double>(radii.size());
    }
    s.shadow_pixels = static_cast<std::size_t>((shadow.data() > 0.0).count());
    summaries.push_back(s);
    maps.push_back(std::move(shadow));
  }
  return {combine_shadow_maps(maps), std::move(summaries)};
}

}  // namespace spotlight

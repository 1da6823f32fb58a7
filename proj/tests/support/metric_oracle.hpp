#pragma once

// Reference transcriptions of the structure, enhanced-alignment and weighted-F
// measures over plain row-major vectors. Deliberately naive: per-pixel loops,
// per-threshold binarization, brute-force nearest-foreground search.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace spotlight::oracle {

struct Image {
  int w = 0;
  int h = 0;
  std::vector<double> v;  // row-major
  double at(int x, int y) const { return v[static_cast<std::size_t>(y * w + x)]; }
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double oracle_mae(const Image& p, const Image& g) {
  double s = 0;
  for (std::size_t i = 0; i < p.v.size(); ++i) s += std::abs(p.v[i] - g.v[i]);
  return s / static_cast<double>(p.v.size());
}

// ---- structure measure ------------------------------------------------------

inline double oracle_object_score(const std::vector<double>& x) {
  const double m = mean_of(x);
  double var = 0;
  for (double v : x) var += (v - m) * (v - m);
  const double sd = x.size() > 1 ? std::sqrt(var / static_cast<double>(x.size() - 1)) : 0.0;
  return 2 * m / (m * m + 1 + sd);
}

inline double oracle_ssim(const std::vector<double>& p, const std::vector<double>& g) {
  const std::size_t n = p.size();
  if (n == 0) return 0.0;
  const double x = mean_of(p), y = mean_of(g);
  double sx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += (p[i] - x) * (p[i] - x);
    sy += (g[i] - y) * (g[i] - y);
    sxy += (p[i] - x) * (g[i] - y);
  }
  const double d = n > 1 ? static_cast<double>(n - 1) : 1.0;
  sx /= d;
  sy /= d;
  sxy /= d;
  const double a = 4 * x * y * sxy;
  const double b = (x * x + y * y) * (sx + sy);
  if (a != 0) return a / b;
  return b == 0 ? 1.0 : 0.0;
}

inline double oracle_s_measure(const Image& p, const Image& g) {
  const double y = mean_of(g.v);
  if (y == 0) return 1 - mean_of(p.v);
  if (y == 1) return mean_of(p.v);

  std::vector<double> fg, bg;
  for (std::size_t i = 0; i < g.v.size(); ++i) {
    if (g.v[i] > 0.5) {
      fg.push_back(p.v[i]);
    } else {
      bg.push_back(1 - p.v[i]);
    }
  }
  const double object = y * oracle_object_score(fg) + (1 - y) * oracle_object_score(bg);

  // centroid of foreground coordinates, rounded half to even, then +1
  double sr = 0, sc = 0, cnt = 0;
  for (int r = 0; r < g.h; ++r) {
    for (int c = 0; c < g.w; ++c) {
      if (g.at(c, r) > 0.5) {
        sr += r;
        sc += c;
        cnt += 1;
      }
    }
  }
  auto round_even = [](double v) {
    const double f = std::floor(v);
    const double diff = v - f;
    if (diff > 0.5) return f + 1;
    if (diff < 0.5) return f;
    return std::fmod(f, 2.0) == 0.0 ? f : f + 1;
  };
  const int X = static_cast<int>(round_even(sc / cnt)) + 1;
  const int Y = static_cast<int>(round_even(sr / cnt)) + 1;

  auto block = [&](const Image& im, int x0, int x1, int y0, int y1) {
    std::vector<double> out;
    for (int r = y0; r < y1; ++r) {
      for (int c = x0; c < x1; ++c) out.push_back(im.at(c, r));
    }
    return out;
  };
  const double area = static_cast<double>(g.w) * g.h;
  const double w1 = static_cast<double>(X) * Y / area;
  const double w2 = static_cast<double>(g.w - X) * Y / area;
  const double w3 = static_cast<double>(X) * (g.h - Y) / area;
  const double w4 = 1 - w1 - w2 - w3;
  const double region = w1 * oracle_ssim(block(p, 0, X, 0, Y), block(g, 0, X, 0, Y)) +
                        w2 * oracle_ssim(block(p, X, g.w, 0, Y), block(g, X, g.w, 0, Y)) +
                        w3 * oracle_ssim(block(p, 0, X, Y, g.h), block(g, 0, X, Y, g.h)) +
                        w4 * oracle_ssim(block(p, X, g.w, Y, g.h), block(g, X, g.w, Y, g.h));
  return std::max(0.0, 0.5 * object + 0.5 * region);
}

// ---- enhanced alignment -----------------------------------------------------

/// Per-pixel enhanced alignment of a binary map against a binary gt.
inline double oracle_enhanced(const std::vector<double>& fm, const Image& g) {
  const std::size_t n = fm.size();
  const double gt_sum = [&] {
    double s = 0;
    for (double v : g.v) s += v;
    return s;
  }();
  double total = 0;
  if (gt_sum == 0) {
    for (double v : fm) total += 1 - v;
  } else if (gt_sum == static_cast<double>(n)) {
    for (double v : fm) total += v;
  } else {
    const double mf = mean_of(fm), mg = mean_of(g.v);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = fm[i] - mf;
      const double b = g.v[i] - mg;
      const double align = 2 * a * b / (a * a + b * b);
      total += (align + 1) * (align + 1) / 4;
    }
  }
  return total / static_cast<double>(n);
}

inline double oracle_e_measure(const Image& p, const Image& g) {
  double sum = 0;
  for (int k = 0; k < 256; ++k) {
    const double t = (k + 0.5) / 256.0;
    std::vector<double> fm(p.v.size());
    for (std::size_t i = 0; i < p.v.size(); ++i) fm[i] = p.v[i] >= t ? 1.0 : 0.0;
    sum += oracle_enhanced(fm, g);
  }
  return sum / 256.0;
}

// ---- weighted F -------------------------------------------------------------

inline double oracle_weighted_f(const Image& p, const Image& g) {
  const int w = g.w, h = g.h;
  const std::size_t n = g.v.size();
  bool any = false;
  for (double v : g.v) any = any || v > 0.5;
  if (!any) return 0.0;

  // nearest foreground pixel by exhaustive search, ties to smallest (row, col)
  std::vector<double> dist(n);
  std::vector<std::size_t> idx(n);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      long long best = std::numeric_limits<long long>::max();
      std::size_t best_i = 0;
      for (int rr = 0; rr < h; ++rr) {
        for (int cc = 0; cc < w; ++cc) {
          if (g.at(cc, rr) < 0.5) continue;
          const long long d = static_cast<long long>(rr - r) * (rr - r) + static_cast<long long>(cc - c) * (cc - c);
          if (d < best) {
            best = d;
            best_i = static_cast<std::size_t>(rr * w + cc);
          }
        }
      }
      dist[static_cast<std::size_t>(r * w + c)] = std::sqrt(static_cast<double>(best));
      idx[static_cast<std::size_t>(r * w + c)] = best_i;
    }
  }

  std::vector<double> E(n), Et(n);
  for (std::size_t i = 0; i < n; ++i) E[i] = std::abs(p.v[i] - g.v[i]);
  for (std::size_t i = 0; i < n; ++i) Et[i] = g.v[i] > 0.5 ? E[i] : E[idx[i]];

  double K[7][7], ks = 0;
  for (int a = 0; a < 7; ++a) {
    for (int b = 0; b < 7; ++b) {
      K[a][b] = std::exp(-((a - 3) * (a - 3) + (b - 3) * (b - 3)) / 50.0);
      ks += K[a][b];
    }
  }
  std::vector<double> EA(n, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0;
      for (int a = 0; a < 7; ++a) {
        for (int b = 0; b < 7; ++b) {
          const int rr = r + a - 3, cc = c + b - 3;
          if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
          acc += K[a][b] / ks * Et[static_cast<std::size_t>(rr * w + cc)];
        }
      }
      EA[static_cast<std::size_t>(r * w + c)] = acc;
    }
  }

  double tp = 0, fp = 0, fg_err = 0, fg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool in_gt = g.v[i] > 0.5;
    double m = E[i];
    if (in_gt && EA[i] < E[i]) m = EA[i];
    const double B = in_gt ? 1.0 : 2.0 - std::exp(std::log(0.5) / 5.0 * dist[i]);
    const double ew = m * B;
    if (in_gt) {
      fg += 1;
      fg_err += ew;
    } else {
      fp += ew;
    }
  }
  tp = fg - fg_err;
  const double R = 1 - fg_err / fg;
  const double P = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  return R + P > 0 ? 2 * R * P / (R + P) : 0.0;
}

}  // namespace spotlight::oracle

#include "spotlight/metrics.hpp"

#include "spotlight/image_io.hpp"
#include "spotlight/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>

namespace spotlight::metrics {
namespace {

struct Moments {
  double mean = 0.0;
  double sample_std = 0.0;
};

/// Mean and sample standard deviation (n - 1 denominator; 0 for n <= 1).
template <typename Derived>
Moments moments(const Eigen::ArrayBase<Derived>& v) {
  Moments m;
  const auto n = v.size();
  if (n == 0) return m;
  m.mean = v.mean();
  if (n > 1) m.sample_std = std::sqrt((v - m.mean).square().sum() / static_cast<double>(n - 1));
  return m;
}

Eigen::ArrayXd select(const Plane<double>& values, const Plane<std::uint8_t>& mask, bool keep) {
  Eigen::ArrayXd out(values.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if ((mask.data()[i] != 0) == keep) out[k++] = values.data()[i];
  }
  out.conservativeResize(k);
  return out;
}

double object_similarity(const Eigen::ArrayXd& values) {
  const Moments m = moments(values);
  return 2.0 * m.mean / (m.mean * m.mean + 1.0 + m.sample_std);
}

double s_object(const Plane<double>& pred, const BinaryMask& gt) {
  const double u = static_cast<double>(gt.count()) / static_cast<double>(pred.size());
  const double fg = object_similarity(select(pred, gt.data(), true));
  const double bg = object_similarity(select(1.0 - pred, gt.data(), false));
  return u * fg + (1.0 - u) * bg;
}

/// SSIM-style similarity of one block; variances use the n - 1 denominator.
template <typename P, typename G>
double block_ssim(const Eigen::DenseBase<P>& pred, const Eigen::DenseBase<G>& gt) {
  const auto n = pred.size();
  if (n == 0) return 0.0;
  const double x = pred.derived().mean();
  const double y = gt.derived().mean();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const double sx = (pred.derived().array() - x).square().sum() / denom;
  const double sy = (gt.derived().array() - y).square().sum() / denom;
  const double sxy = ((pred.derived().array() - x) * (gt.derived().array() - y)).sum() / denom;
  const double alpha = 4.0 * x * y * sxy;
  const double beta = (x * x + y * y) * (sx + sy);
  // |alpha| <= beta, so beta > 0 whenever alpha != 0
  if (alpha != 0.0) return alpha / beta;
  return beta == 0.0 ? 1.0 : 0.0;
}

double s_region(const Plane<double>& pred, const BinaryMask& gt) {
  const Eigen::Index h = pred.rows();
  const Eigen::Index w = pred.cols();
  double sum_r = 0.0;
  double sum_c = 0.0;
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      if (gt.data()(r, c)) {
        sum_r += static_cast<double>(r);
        sum_c += static_cast<double>(c);
      }
    }
  }
  const double n = static_cast<double>(gt.count());
  // split lines sit just after the rounded (half-to-even) centroid
  const Eigen::Index cx = static_cast<Eigen::Index>(std::nearbyint(sum_c / n)) + 1;
  const Eigen::Index cy = static_cast<Eigen::Index>(std::nearbyint(sum_r / n)) + 1;

  const Plane<double> g = gt.as<double>();
  const double area = static_cast<double>(h * w);
  const double w1 = static_cast<double>(cx * cy) / area;
  const double w2 = static_cast<double>(cy * (w - cx)) / area;
  const double w3 = static_cast<double>((h - cy) * cx) / area;
  const double w4 = 1.0 - w1 - w2 - w3;

  const double q1 = block_ssim(pred.block(0, 0, cy, cx), g.block(0, 0, cy, cx));
  const double q2 = block_ssim(pred.block(0, cx, cy, w - cx), g.block(0, cx, cy, w - cx));
  const double q3 = block_ssim(pred.block(cy, 0, h - cy, cx), g.block(cy, 0, h - cy, cx));
  const double q4 = block_ssim(pred.block(cy, cx, h - cy, w - cx), g.block(cy, cx, h - cy, w - cx));
  return w1 * q1 + w2 * q2 + w3 * q3 + w4 * q4;
}

/// Normalized 7x7 Gaussian with sigma 5.
Eigen::Matrix<double, 7, 7> gaussian_kernel() {
  Eigen::Matrix<double, 7, 7> k;
  for (int r = 0; r < 7; ++r) {
    for (int c = 0; c < 7; ++c) {
      const double dr = r - 3;
      const double dc = c - 3;
      k(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * 25.0));
    }
  }
  return k / k.sum();
}

/// Zero-padded same-size filtering with a symmetric kernel.
Plane<double> filter_zero_padded(const Plane<double>& in, const Eigen::Matrix<double, 7, 7>& k) {
  const Eigen::Index h = in.rows();
  const Eigen::Index w = in.cols();
  Plane<double> padded = Plane<double>::Zero(h + 6, w + 6);
  padded.block(3, 3, h, w) = in;
  Plane<double> out(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      out(r, c) = (padded.block<7, 7>(r, c) * k.array()).sum();
    }
  }
  return out;
}

}  // namespace

double mae(const PredictionMap& pred, const BinaryMask& gt) {
  require_same_size(pred, gt, "mae");
  return (pred.data() - gt.as<double>()).abs().mean();
}

double s_measure(const PredictionMap& pred, const BinaryMask& gt, double alpha) {
  require_same_size(pred, gt, "s_measure");
  const auto fg = gt.count();
  const auto total = static_cast<std::size_t>(pred.data().size());
  if (fg == 0) return 1.0 - pred.data().mean();
  if (fg == total) return pred.data().mean();
  const double score = alpha * s_object(pred.data(), gt) + (1.0 - alpha) * s_region(pred.data(), gt);
  return std::max(0.0, score);
}

double enhanced_alignment(const BinaryMask& binary_pred, const BinaryMask& gt) {
  require_same_size(binary_pred, gt, "enhanced_alignment");
  const double n = static_cast<double>(gt.data().size());
  const double gt_fg = static_cast<double>(gt.count());
  const double tp = static_cast<double>((binary_pred.data() * gt.data()).cast<int>().sum());
  const double fp = static_cast<double>(binary_pred.count()) - tp;

  if (gt_fg == 0.0) return (n - fp) / n;
  if (gt_fg == n) return tp / n;

  const double fn = gt_fg - tp;
  const double tn = n - gt_fg - fp;
  const double mu_pred = (tp + fp) / n;
  const double mu_gt = gt_fg / n;
  auto enhanced = [](double a, double b) {
    const double align = 2.0 * (a * b) / (a * a + b * b);
    return (align + 1.0) * (align + 1.0) / 4.0;
  };
  const double sum = tp * enhanced(1.0 - mu_pred, 1.0 - mu_gt) + fp * enhanced(1.0 - mu_pred, -mu_gt) +
                     fn * enhanced(-mu_pred, 1.0 - mu_gt) + tn * enhanced(-mu_pred, -mu_gt);
  return sum / n;
}

double e_measure(const PredictionMap& pred, const BinaryMask& gt) {
  require_same_size(pred, gt, "e_measure");
  constexpr int kT = kEMeasureThresholds;
  auto threshold = [](int k) { return (k + 0.5) / kT; };

  // level = number of thresholds a pixel clears
  std::array<double, kT + 1> hist_fg{};
  std::array<double, kT + 1> hist_bg{};
  for (Eigen::Index i = 0; i < pred.data().size(); ++i) {
    const double p = pred.data().data()[i];
    int level = std::clamp(static_cast<int>(std::floor(p * kT + 0.5)), 0, kT);
    while (level > 0 && p < threshold(level - 1)) --level;
    while (level < kT && p >= threshold(level)) ++level;
    (gt.data().data()[i] ? hist_fg : hist_bg)[static_cast<std::size_t>(level)] += 1.0;
  }

  const double n = static_cast<double>(gt.data().size());
  const double gt_fg = static_cast<double>(gt.count());
  const double gt_bg = n - gt_fg;
  auto enhanced = [](double a, double b) {
    const double align = 2.0 * (a * b) / (a * a + b * b);
    return (align + 1.0) * (align + 1.0) / 4.0;
  };

  double total = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  // thresholds from the highest down, so counts accumulate as suffix sums
  std::array<double, kT> scores{};
  for (int k = kT - 1; k >= 0; --k) {
    tp += hist_fg[static_cast<std::size_t>(k) + 1];
    fp += hist_bg[static_cast<std::size_t>(k) + 1];
    double sum;
    if (gt_fg == 0.0) {
      sum = n - fp;
    } else if (gt_bg == 0.0) {
      sum = tp;
    } else {
      const double mu_pred = (tp + fp) / n;
      const double mu_gt = gt_fg / n;
      sum = tp * enhanced(1.0 - mu_pred, 1.0 - mu_gt) + fp * enhanced(1.0 - mu_pred, -mu_gt) +
            (gt_fg - tp) * enhanced(-mu_pred, 1.0 - mu_gt) + (gt_bg - fp) * enhanced(-mu_pred, -mu_gt);
    }
    scores[static_cast<std::size_t>(k)] = sum / n;
  }
  for (const double s : scores) total += s;
  return total / kT;
}

NearestForeground nearest_foreground(const BinaryMask& mask) {
  const int h = mask.height();
  const int w = mask.width();
  constexpr int kNone = -1;

  // nearest foreground row within each column; ties go to the upper row
  Plane<int> column_row(h, w);
  for (int c = 0; c < w; ++c) {
    int above = kNone;
    for (int r = 0; r < h; ++r) {
      if (mask.at(c, r)) above = r;
      column_row(r, c) = above;
    }
    int below = kNone;
    for (int r = h - 1; r >= 0; --r) {
      if (mask.at(c, r)) below = r;
      const int up = column_row(r, c);
      if (below != kNone && (up == kNone || below - r < r - up)) column_row(r, c) = below;
    }
  }

  NearestForeground out{Plane<double>::Constant(h, w, std::numeric_limits<double>::infinity()),
                        Plane<Eigen::Index>::Constant(h, w, -1)};
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      long long best_d2 = std::numeric_limits<long long>::max();
      int best_r = 0;
      int best_c = 0;
      auto consider = [&](int col) {
        const int row = column_row(r, col);
        if (row == kNone) return;
        const long long dr = row - r;
        const long long dc = col - c;
        const long long d2 = dr * dr + dc * dc;
        if (d2 < best_d2 || (d2 == best_d2 && (row < best_r || (row == best_r && col < best_c)))) {
          best_d2 = d2;
          best_r = row;
          best_c = col;
        }
      };
      for (int off = 0; off < w; ++off) {
        if (static_cast<long long>(off) * off > best_d2) break;
        if (c - off >= 0) consider(c - off);
        if (off > 0 && c + off < w) consider(c + off);
      }
      if (best_d2 != std::numeric_limits<long long>::max()) {
        out.distance(r, c) = std::sqrt(static_cast<double>(best_d2));
        out.index(r, c) = static_cast<Eigen::Index>(best_r) * w + best_c;
      }
    }
  }
  return out;
}

double weighted_f(const PredictionMap& pred, const BinaryMask& gt, double beta2) {
  require_same_size(pred, gt, "weighted_f");
  if (!gt.any()) return 0.0;

  const Plane<double> g = gt.as<double>();
  const Plane<double> err = (pred.data() - g).abs();
  const NearestForeground nearest = nearest_foreground(gt);

  // pixel dependency: background errors take the error of their nearest foreground pixel
  Plane<double> err_t = err;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    if (!gt.data().data()[i]) err_t.data()[i] = err.data()[nearest.index.data()[i]];
  }
  const Plane<double> err_a = filter_zero_padded(err_t, gaussian_kernel());
  const Plane<double> min_err = (g > 0.0 && err_a < err).select(err_a, err);

  // pixel importance grows with the distance from the foreground
  const Plane<double> importance =
      (g > 0.0).select(Plane<double>::Ones(g.rows(), g.cols()), 2.0 - (std::log(0.5) / 5.0 * nearest.distance).exp());
  const Plane<double> weighted = min_err * importance;

  const double fg = static_cast<double>(gt.count());
  const double fg_err = (g > 0.0).select(weighted, 0.0).sum();
  const double tp = fg - fg_err;
  const double fp = (g > 0.0).select(0.0, weighted).sum();
  const double recall = 1.0 - fg_err / fg;
  const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  const double denom = recall + beta2 * precision;
  return denom > 0.0 ? (1.0 + beta2) * recall * precision / denom : 0.0;
}

ImageScores score_image(const PredictionMap& pred, const BinaryMask& gt, std::string name) {
  require_same_size(pred, gt, name.empty() ? "score_image" : name);
  ImageScores s;
  s.name = std::move(name);
  s.s_measure = s_measure(pred, gt);
  s.e_measure = e_measure(pred, gt);
  s.weighted_f = weighted_f(pred, gt);
  s.weighted_f_undefined = !gt.any();
  s.mae = mae(pred, gt);
  return s;
}

void aggregate(MetricReport& report) {
  report.count = report.images.size();
  report.s_measure = report.e_measure = report.weighted_f = report.mae = 0.0;
  if (report.count == 0) return;
  for (const auto& s : report.images) {
    report.s_measure += s.s_measure;
    report.e_measure += s.e_measure;
    report.weighted_f += s.weighted_f;
    report.mae += s.mae;
  }
  const double n = static_cast<double>(report.count);
  report.s_measure /= n;
  report.e_measure /= n;
  report.weighted_f /= n;
  report.mae /= n;
}

namespace {

std::map<std::string, std::filesystem::path> png_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<std::string, std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.emplace(entry.path().stem().string(), entry.path());
  }
  return out;
}

}  // namespace

MetricReport evaluate_directory(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                                int threads) {
  const auto preds = png_files(pred_dir);
  const auto gts = png_files(gt_dir);

  MetricReport report;
  std::vector<std::string> names;
  for (const auto& [stem, path] : gts) {
    if (preds.count(stem)) {
      names.push_back(stem);
    } else {
      report.missing_predictions.push_back(stem);
    }
  }
  for (const auto& [stem, path] : preds) {
    if (!gts.count(stem)) report.extra_predictions.push_back(stem);
  }
  if (names.empty()) throw DomainError("no paired images");

  std::vector<std::optional<ImageScores>> scores(names.size());
  std::vector<std::string> errors(names.size());
  parallel_for(names.size(), threads, [&](std::size_t i) {
    try {
      const auto pred = PredictionMap::from_gray(read_gray_png(preds.at(names[i])));
      const auto gt = BinaryMask::from_gray(read_gray_png(gts.at(names[i])));
      scores[i] = score_image(pred, gt, names[i]);
    } catch (const std::exception& e) {
      errors[i] = names[i] + ": " + e.what();
    }
  });

  for (std::size_t i = 0; i < names.size(); ++i) {
    if (scores[i]) {
      report.images.push_back(std::move(*scores[i]));
    } else {
      report.failed.push_back(errors[i]);
    }
  }
  aggregate(report);
  return report;
}

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10f", v);
  return buf;
}

}  // namespace

std::string to_csv(const MetricReport& report) {
  std::string out = "name,s_measure,e_measure,weighted_f,mae\n";
  for (const auto& s : report.images) {
    out += s.name + ',' + fixed(s.s_measure) + ',' + fixed(s.e_measure) + ',' + fixed(s.weighted_f) + ',' +
           fixed(s.mae) + '\n';
  }
  out += "aggregate," + fixed(report.s_measure) + ',' + fixed(report.e_measure) + ',' + fixed(report.weighted_f) +
         ',' + fixed(report.mae) + '\n';
  return out;
}

std::string to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  auto scores = [](double s, double e, double f, double m) {
    nlohmann::ordered_json o;
    o["s_measure"] = s;
    o["e_measure"] = e;
    o["weighted_f"] = f;
    o["mae"] = m;
    return o;
  };
  auto& images = j["images"] = nlohmann::ordered_json::array();
  for (const auto& s : report.images) {
    auto row = scores(s.s_measure, s.e_measure, s.weighted_f, s.mae);
    row["weighted_f_undefined"] = s.weighted_f_undefined;
    nlohmann::ordered_json entry;
    entry["name"] = s.name;
    entry.update(row);
    images.push_back(std::move(entry));
  }
  auto agg = scores(report.s_measure, report.e_measure, report.weighted_f, report.mae);
  agg["count"] = report.count;
  j["aggregate"] = std::move(agg);
  j["missing_predictions"] = report.missing_predictions;
  j["extra_predictions"] = report.extra_predictions;
  j["failed"] = report.failed;
  return j.dump(2) + '\n';
}

}  // namespace spotlight::metrics

#pragma once

#include "spotlight/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace spotlight::metrics {

/// Mean absolute error between a prediction and a binary ground truth.
double mae(const PredictionMap& pred, const BinaryMask& gt);

/// Structure measure, alpha * S_object + (1 - alpha) * S_region.
/// An all-background gt scores 1 - mean(pred); an all-foreground gt scores mean(pred).
double s_measure(const PredictionMap& pred, const BinaryMask& gt, double alpha = 0.5);

/// Enhanced-alignment measure of a binary map against a binary gt.
double enhanced_alignment(const BinaryMask& binary_pred, const BinaryMask& gt);

/// Number of thresholds swept by e_measure. Threshold k is (k + 0.5) / 256.
inline constexpr int kEMeasureThresholds = 256;

/// Mean enhanced-alignment measure over kEMeasureThresholds uniform thresholds.
double e_measure(const PredictionMap& pred, const BinaryMask& gt);

/// Weighted F-measure (beta^2 = 1). An all-background gt scores 0.
double weighted_f(const PredictionMap& pred, const BinaryMask& gt, double beta2 = 1.0);

/// Euclidean distance from each pixel to the nearest foreground pixel of `mask`,
/// plus the index (row-major) of that pixel. Ties go to the smallest (row, col).
/// Foreground pixels map to themselves with distance 0.
struct NearestForeground {
  Plane<double> distance;
  Plane<Eigen::Index> index;
};
NearestForeground nearest_foreground(const BinaryMask& mask);

struct ImageScores {
  std::string name;
  double s_measure = 0.0;
  double e_measure = 0.0;
  double weighted_f = 0.0;
  double mae = 0.0;
  /// Set when gt has no foreground and weighted_f was defined as 0.
  bool weighted_f_undefined = false;
};

ImageScores score_image(const PredictionMap& pred, const BinaryMask& gt, std::string name = {});

struct MetricReport {
  std::vector<ImageScores> images;  // sorted by name
  double s_measure = 0.0;
  double e_measure = 0.0;
  double weighted_f = 0.0;
  double mae = 0.0;
  std::size_t count = 0;

  std::vector<std::string> missing_predictions;  // gt without a prediction
  std::vector<std::string> extra_predictions;    // prediction without a gt
  std::vector<std::string> failed;               // "name: reason"

  bool ok() const { return failed.empty(); }
};

/// Unweighted arithmetic mean over per-image scores, summed in the given order.
void aggregate(MetricReport& report);

/// Pairs `*.png` files by exact stem, scores each pair and aggregates.
/// Throws DomainError("no paired images") when no stems match.
MetricReport evaluate_directory(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                                int threads = 1);

/// One row per image then an "aggregate" row; columns S, E, Fw, MAE.
std::string to_csv(const MetricReport& report);
std::string to_json(const MetricReport& report);

}  // namespace spotlight::metrics

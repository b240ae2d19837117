#pragma once

#include "handsynth/dataset_io.hpp"
#include "handsynth/geometry.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace handsynth {

// Similarity transform mapping predictions onto ground truth:
// aligned = scale * rotation * p + translation.
struct AlignmentResult {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double residual_rms = 0.0;  // meters

  Points3d apply(const Points3d& points) const;
};

// Euclidean distance per row, in millimeters. Throws DimensionMismatch.
std::vector<double> point_errors_mm(const Points3d& pred, const Points3d& gt);

// Mean per-joint Euclidean error in millimeters. Throws DimensionMismatch.
double mpjpe(const Points3d& pred, const Points3d& gt);

// Least-squares scale and translation (no rotation); a non-positive optimal
// scale is clamped to 1e-9. Falls back to the identity when that fits at least
// as well. Throws DegenerateInput, DimensionMismatch.
AlignmentResult sta_align(const Points3d& pred, const Points3d& gt);

// Least-squares similarity transform with a proper rotation (det = +1).
// Falls back to sta_align when that fits at least as well. Throws DegenerateInput when the centered predictions have rank < 2.
AlignmentResult procrustes_align(const Points3d& pred, const Points3d& gt);

double sta_mpjpe(const Points3d& pred, const Points3d& gt);
double pa_mpjpe(const Points3d& pred, const Points3d& gt);

inline constexpr double kDefaultAucMaxMm = 50.0;
inline constexpr int kDefaultAucSteps = 100;

// Trapezoidal area under PCK(t) = fraction of errors <= t over t in [0, t_max],
// normalized by t_max. Throws EmptyInput, DegenerateInput (negative error).
double pck_auc(const std::vector<double>& errors_mm, double t_max_mm = kDefaultAucMaxMm,
               int steps = kDefaultAucSteps);

enum class FscoreAlign { None, Procrustes };

// Nearest-neighbour precision/recall at threshold tau. Throws EmptyInput.
double fscore(const Points3d& pred, const Points3d& gt, double tau_mm, FscoreAlign align = FscoreAlign::None);

// Neumaier-compensated mean; 0 for an empty input.
double compensated_mean(const std::vector<double>& values);

struct EvalOptions {
  double auc_max_mm = kDefaultAucMaxMm;
  int auc_steps = kDefaultAucSteps;
  bool pooled_auc = true;      // false: mean of per-sample AUCs
  bool require_mesh = false;   // missing vertices become an error instead of skipping mesh metrics
};

struct SampleMetrics {
  std::string sample_id;
  double mpjpe = 0.0;      // mm
  double sta_mpjpe = 0.0;  // mm
  double pa_mpjpe = 0.0;   // mm
  std::optional<double> pa_mpvpe;  // mm
  std::optional<double> f5, f15, f_al5, f_al15;
};

struct MetricsReport {
  std::vector<SampleMetrics> samples;  // sorted by sample id
  double mpjpe = 0.0;
  double sta_mpjpe = 0.0;
  double pa_mpjpe = 0.0;
  std::optional<double> pa_mpvpe;
  double auc_j = 0.0;
  std::optional<double> auc_v;
  std::optional<double> f5, f15, f_al5, f_al15;
  std::size_t count = 0;

  // Lengths in "mm" or "cm"; AUC and F-scores are unitless.
  std::string to_json(const std::string& units = "mm", bool include_samples = true) const;
  std::string to_text(const std::string& units = "mm") const;
};

// Ground truth and predictions keyed by sample id. Every GT id needs a
// prediction (MissingSample) with matching joint count (DimensionMismatch).
// Mesh metrics are reported when every pair carries vertices.
MetricsReport evaluate(const Predictions& ground_truth, const Predictions& predictions,
                       const EvalOptions& options = {});

MetricsReport evaluate_dataset(const std::filesystem::path& dataset_dir, const Predictions& predictions,
                               const EvalOptions& options = {});

}  // namespace handsynth

#pragma once

#include "handsynth/camera.hpp"
#include "handsynth/compositor.hpp"
#include "handsynth/hand_model.hpp"
#include "handsynth/image.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace handsynth {

// Per-scene sampling record kept alongside each sample for dataset statistics
// and replay.
struct SceneInfo {
  std::uint64_t seed = 0;  // master seed of the run
  std::string branch = "single";
  double fov_y_deg = 0.0;
  double camera_distance = 0.0;  // meters from the world origin
  std::vector<std::string> light_kinds;
  int shape_idx = -1;
  int texture_idx = 0;
  double hue_shift = 0.0;
  double sat_scale = 1.0;
  int arm_texture_idx = 0;
  int background_idx = 0;
  std::array<int, 4> background_crop{};  // x, y, width, height
  int grasp_idx = -1;

  friend bool operator==(const SceneInfo&, const SceneInfo&) = default;
};

struct SampleRecord {
  std::uint64_t scene_id = 0;
  int view = 0;
  ImageRGB8 rgb;
  DepthMap depth;  // meters; stored as 16-bit millimeters
  LabelMap mask;
  BBox bbox;
  Intrinsics intrinsics;
  Eigen::Matrix4d world_from_camera = Eigen::Matrix4d::Identity();
  Eigen::VectorXd beta;
  HandPose theta;
  Points3d joints_3d;  // K x 3, camera frame, meters
  Points2d joints_2d;  // K x 2, pixels
  std::optional<Points3d> vertices_3d;  // V x 3, camera frame, meters
  SceneInfo info;

  std::string sample_id() const;
};

inline constexpr double kMaxReprojectionErrorPx = 0.5;

// "scene_00000003_view_1"
std::string make_sample_id(std::uint64_t scene_id, int view);
// Throws MissingSample on a malformed id.
void parse_sample_id(const std::string& sample_id, std::uint64_t& scene_id, int& view);
std::filesystem::path sample_dir(const std::filesystem::path& root, std::uint64_t scene_id, int view);
std::filesystem::path scene_dir(const std::filesystem::path& root, std::uint64_t scene_id);

// round-half-even of millimeters; 0 for invalid, non-finite, or > 65.535 m.
std::uint16_t quantize_depth_mm(double meters);
Image<std::uint16_t> depth_to_mm(const DepthMap& depth);
DepthMap depth_from_mm(const Image<std::uint16_t>& depth_mm);

// Throws InvariantViolation when image shapes disagree, a foreground pixel
// has no (quantized) depth, or a 3D joint does not reproject onto its 2D joint.
void check_record(const SampleRecord& record);

// Writes rgb.png, depth.png, mask.png and meta.json under
// root/scene_%08d/view_%d/ and returns their paths. Throws InvariantViolation
// or IoError.
std::vector<std::filesystem::path> write_sample(const SampleRecord& record, const std::filesystem::path& root);

// Throws MissingSample, IoError, ParseError.
SampleRecord read_sample(const std::filesystem::path& root, const std::string& sample_id);

// Sample ids found on disk, sorted.
std::vector<std::string> list_samples(const std::filesystem::path& root);

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr std::array<const char*, 4> kSampleFiles = {"rgb.png", "depth.png", "mask.png", "meta.json"};

struct ManifestEntry {
  std::string sample_id;
  std::map<std::string, std::string> sha256;  // file name -> hex digest

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Hashes every sample file and writes root/manifest.json (entries sorted by id).
std::vector<ManifestEntry> write_manifest(const std::filesystem::path& root);
// Throws MissingManifest, ParseError.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& root);
// Re-hashes every listed file. Throws MissingManifest or ManifestMismatch
// naming the first offending files.
void verify_manifest(const std::filesystem::path& root);

struct Prediction {
  Points3d joints;                   // K x 3, camera frame, meters
  std::optional<Points3d> vertices;  // V x 3
};
using Predictions = std::map<std::string, Prediction>;

// JSON array of {"sample_id", "joints", "vertices"?}. Throws ParseError,
// DuplicateId, IoError.
Predictions load_predictions(const std::filesystem::path& path);
Predictions parse_predictions(const std::string& text);
void write_predictions(const std::filesystem::path& path, const Predictions& predictions);

// Ground truth of a dataset in prediction-file form.
Predictions ground_truth_predictions(const std::filesystem::path& root, bool include_vertices);

}  // namespace handsynth

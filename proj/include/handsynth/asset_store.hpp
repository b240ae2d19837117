#pragma once

#include "handsynth/geometry.hpp"
#include "handsynth/image.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace handsynth {

inline constexpr std::int32_t kRootParent = -1;

// Rigged template hand. Stored in single precision to match the on-disk
// blobs bit for bit; the forward pass promotes to double.
struct ModelAsset {
  Points3f template_vertices;       // V x 3, meters
  Triangles faces;                  // F x 3
  MatrixXfR skinning_weights;       // V x J
  MatrixXfR shape_blendshapes;      // B_s x (V*3), meters per unit beta
  MatrixXfR pose_blendshapes;       // B_p x (V*3), may have zero rows
  MatrixXfR joint_regressor;        // J x V
  std::vector<std::int32_t> parent; // J entries, kRootParent for the root
  Points2f uv;                      // V x 2, in [0,1]
  std::vector<std::int32_t> wrist_ring;   // ordered boundary loop at the wrist
  std::vector<std::int32_t> tip_vertices; // appended to the regressed joints as keypoints

  Eigen::Index num_vertices() const { return template_vertices.rows(); }
  Eigen::Index num_faces() const { return faces.rows(); }
  Eigen::Index num_joints() const { return static_cast<Eigen::Index>(parent.size()); }
  Eigen::Index num_shape_blendshapes() const { return shape_blendshapes.rows(); }
  Eigen::Index num_pose_blendshapes() const { return pose_blendshapes.rows(); }
  Eigen::Index num_keypoints() const {
    return num_joints() + static_cast<Eigen::Index>(tip_vertices.size());
  }
  int root_joint() const;

  // Throws Error(InvalidWeights | InvalidAsset | ShapeMismatch) on the first
  // violated invariant.
  void validate() const;
};

enum class BackgroundKind { Indoor, EnvMap };

struct Background {
  ImageRGBf image;  // 3 channels in [0,1]
  DepthMap depth;   // meters, same resolution as image, 0 = invalid
  BackgroundKind kind = BackgroundKind::Indoor;
};

struct GraspRecord {
  Eigen::VectorXf hand_shape;  // B_s
  Eigen::VectorXf hand_pose;   // J*3 axis-angle, root first
  std::string object_id;
  Eigen::Matrix4f object_to_wrist = Eigen::Matrix4f::Identity();  // maps object coords into the wrist frame
};

struct AssetPack {
  ModelAsset model;
  MatrixXfR shape_bank;  // N_s x B_s
  MatrixXfR pose_bank;   // N_p x (J*3)
  std::vector<ImageRGBf> textures;
  std::vector<ImageRGBf> arm_textures;
  std::vector<Background> backgrounds;
  std::vector<GraspRecord> grasps;
  std::map<std::string, Mesh> objects;

  // Cross-bank checks: every bank row has the model's dimensionality and every
  // grasp resolves to a loaded object.
  void validate() const;
};

bool operator==(const ModelAsset& a, const ModelAsset& b);
bool operator==(const AssetPack& a, const AssetPack& b);

struct LoadOptions {
  bool verify_checksums = true;
};

// Reads a pack directory (meta.json + blobs/). Throws Error with MissingBlob,
// ShapeMismatch, ChecksumMismatch, InvalidWeights or InvalidAsset.
AssetPack load_asset_pack(const std::filesystem::path& root, const LoadOptions& options = {});

// Writes `pack` into `root`, creating it if needed. Output is byte-stable:
// writing the same pack twice yields identical files.
void write_asset_pack(const AssetPack& pack, const std::filesystem::path& root);

std::string_view to_string(BackgroundKind kind);

}  // namespace handsynth

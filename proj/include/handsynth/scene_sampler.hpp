#pragma once

#include "handsynth/asset_store.hpp"
#include "handsynth/camera.hpp"
#include "handsynth/hand_model.hpp"
#include "handsynth/light.hpp"
#include "handsynth/random.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace handsynth {

enum class PoseSource { Bank, Interpolate };
enum class Branch { Single, Interact };

std::string_view to_string(PoseSource s);
std::string_view to_string(Branch b);

struct SamplerConfig {
  std::vector<double> distance_means = {0.6, 0.7, 1.0};  // meters, equal mixture weights
  double distance_std = 0.1;
  double distance_floor = 0.2;
  double fov_min_deg = 30.0;
  double fov_max_deg = 40.0;
  double hue_range = 0.08;  // turns
  double sat_range = 0.3;
  double vivid_probability = 0.3;
  double ambient_min = 0.2;
  double ambient_max = 0.6;
  int max_extra_lights = 4;
  PoseSource pose_source = PoseSource::Bank;
};

struct CropRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct BackgroundChoice {
  int index = 0;
  CropRect crop;
};

struct TextureJitter {
  double hue_shift = 0.0;  // turns
  double sat_scale = 1.0;
};

// Fully seeded description of one scene. Everything downstream (posing,
// rendering, compositing) is a pure function of this plus the asset pack.
struct SceneSpec {
  std::uint64_t scene_id = 0;
  std::uint64_t seed = 0;
  Branch branch = Branch::Single;
  int shape_idx = -1;  // -1 when the shape comes from a grasp record
  HandShape shape;
  HandPose pose;
  int texture_idx = 0;
  TextureJitter texture_jitter;
  int arm_texture_idx = 0;
  BackgroundChoice background;
  Vec3 background_mean = Vec3::Zero();
  std::vector<LightSpec> lights;
  std::array<CameraSpec, 2> cameras;
  std::optional<int> grasp_idx;
};

// Uniform bank row. Throws EmptyBank.
HandShape sample_shape(const MatrixXfR& bank, RandomStream& rng, int* index_out = nullptr);

// Bank mode: a uniform bank row. Interpolate mode: two rows A, B and
// t ~ U[0,1], slerped per joint. Throws EmptyBank.
HandPose sample_pose(PoseSource source, const MatrixXfR& bank, RandomStream& rng);

// Per-joint quaternion slerp of rotations, linear interpolation of translation.
HandPose interpolate_poses(const HandPose& a, const HandPose& b, double t);

CameraSpec sample_camera(RandomStream& rng, const SamplerConfig& config, int width, int height);

// Ambient light tinted by the background mean (normalized to max channel 1)
// plus 0..max_extra_lights point/directional/spot lights.
std::vector<LightSpec> sample_lights(RandomStream& rng, const Vec3& background_mean, const SamplerConfig& config);

// Ambient tint for a background mean color; white for a black background.
Vec3 ambient_color_for(const Vec3& background_mean);

// Picks a background and an aspect-matched crop of at least the render
// resolution, fully inside the source. Throws EmptyPool, SourceTooSmall.
BackgroundChoice sample_background(const std::vector<Background>& pool, RandomStream& rng, int width, int height);

TextureJitter sample_texture_jitter(RandomStream& rng, const SamplerConfig& config);

// Hue shift (turns) and saturation scale in HSV space. Identity parameters
// return the input unchanged.
ImageRGBf perturb_texture(const ImageRGBf& texture, const TextureJitter& jitter);

// Bilinear resample of `crop` in `src` to width x height.
ImageRGBf crop_resample(const ImageRGBf& src, const CropRect& crop, int width, int height);
// Nearest-neighbour resample; depth values are never blended.
DepthMap crop_resample_depth(const DepthMap& src, const CropRect& crop, int width, int height);

Vec3 mean_color(const ImageRGBf& image, const CropRect& crop);

// Draws a complete scene from per-factor substreams of
// (master_seed, scene_id). Throws EmptyBank / EmptyPool / SourceTooSmall.
SceneSpec sample_scene(const AssetPack& pack, const SamplerConfig& config, Branch branch,
                       std::uint64_t master_seed, std::uint64_t scene_id, int width, int height);

}  // namespace handsynth

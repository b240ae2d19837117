#pragma once

#include "handsynth/asset_store.hpp"
#include "handsynth/dataset_io.hpp"
#include "handsynth/interact.hpp"
#include "handsynth/renderer.hpp"
#include "handsynth/scene_sampler.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace handsynth {

struct GenerateConfig {
  std::string assets = "toy";  // asset-pack directory, or "toy" for the built-in fixture
  std::uint64_t toy_seed = 0;
  Branch branch = Branch::Single;
  std::uint64_t n_scenes = 10;
  std::uint64_t seed = 0;
  int width = 256;
  int height = 256;
  int workers = 1;
  std::filesystem::path out = "dataset";
  bool overwrite = false;        // clear existing scene directories in `out`
  bool export_vertices = true;   // store camera-frame hand vertices in meta.json
  bool center_hand = true;       // translate the hand so its keypoint centroid sits at the world origin
  bool feather = false;          // 1-px coverage blend at the mask boundary
  SamplerConfig sampler;
  RenderConfig render;
  AssemblyOptions assembly;
};

// Parses the JSON generation config. Unknown keys and type errors throw
// ConfigError; omitted keys keep their defaults.
GenerateConfig parse_generate_config(const std::string& json_text);
GenerateConfig load_generate_config(const std::filesystem::path& path);
// Full config with every default filled in.
std::string generate_config_to_json(const GenerateConfig& config);

AssetPack load_assets(const GenerateConfig& config);

struct RenderedView {
  RenderOutput render;  // foreground only
  SampleRecord record;  // composited, ready to write
};

struct RenderedScene {
  SceneSpec spec;
  AssembledScene assembled;
  ImageRGBf background_rgb;
  DepthMap background_depth;
  std::array<RenderedView, 2> views;
};

// Everything for one scene id, in memory. Pure function of its arguments.
RenderedScene render_scene(const AssetPack& pack, const GenerateConfig& config, std::uint64_t scene_id);

struct GenerateResult {
  std::uint64_t scenes = 0;
  std::uint64_t samples = 0;
  std::vector<ManifestEntry> manifest;
};

using ProgressFn = std::function<void(std::uint64_t done, std::uint64_t total)>;

// Renders and writes n_scenes scenes on `workers` threads, then the manifest.
// Output bytes do not depend on the worker count. A failing scene removes its
// partial directory and aborts the run with an Error naming the scene and seed.
GenerateResult generate_dataset(const GenerateConfig& config, const AssetPack& pack, const ProgressFn& progress = {});

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  Histogram(double lo, double hi, int bins);
  void add(double x);
  std::uint64_t total() const;
};

struct DatasetStats {
  std::uint64_t scenes = 0;
  std::uint64_t samples = 0;
  std::map<int, std::uint64_t> views_per_scene;    // views -> scene count
  std::map<std::string, std::uint64_t> branches;   // branch -> scene count
  std::map<int, std::uint64_t> light_counts;       // lights incl. ambient -> scene count
  Histogram fov_deg{30.0, 40.0, 10};
  Histogram camera_distance{0.0, 1.6, 16};
  double fov_min = 0.0, fov_max = 0.0;
  double distance_mean = 0.0;
  double coverage_mean = 0.0, coverage_min = 0.0, coverage_max = 0.0;  // mask > 0 fraction per view
  std::uint64_t empty_masks = 0;

  std::string to_text() const;
  std::string to_json() const;
};

// Summaries over the samples listed in the manifest. Throws MissingManifest.
DatasetStats compute_stats(const std::filesystem::path& dataset_dir);

}  // namespace handsynth

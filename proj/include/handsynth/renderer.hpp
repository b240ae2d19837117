#pragma once

#include "handsynth/camera.hpp"
#include "handsynth/geometry.hpp"
#include "handsynth/image.hpp"
#include "handsynth/light.hpp"

#include <memory>
#include <vector>

namespace handsynth {

struct Material {
  std::shared_ptr<const ImageRGBf> texture;  // optional albedo map, sampled bilinearly
  Vec3 albedo = Vec3(0.8, 0.8, 0.8);         // used when texture is null
  double specular = 0.15;
  double shininess = 24.0;
};

struct SceneItem {
  Mesh mesh;
  Material material;
  std::uint8_t instance_id = kHand;
};

struct RenderConfig {
  int supersample = 2;        // RGB samples per pixel along each axis
  double near_plane = 0.01;   // meters; geometry closer than this is clipped
  bool clamp_output = true;   // clamp RGB to [0,1]
};

struct RenderOutput {
  ImageRGBf rgb;      // H x W x 3
  DepthMap depth;     // camera-space z in meters, 0 = no hit
  LabelMap mask;      // instance labels
  Image<float> coverage;  // fraction of RGB subsamples covered by geometry
  bool empty_viewport = false;  // nothing visible; mask and depth are all zero
};

// Z-buffered rasterization with perspective-correct interpolation. Depth and
// mask are sampled once at each pixel center; RGB averages the covered
// samples of a supersample x supersample grid. Shading is ambient plus
// per-light Lambert diffuse and Blinn-Phong specular with two-sided normals
// (no back-face culling). Throws EmptyInput when `lights` is empty.
RenderOutput rasterize(const std::vector<SceneItem>& scene, const CameraSpec& camera,
                       const std::vector<LightSpec>& lights, const RenderConfig& config = {});

// Bilinear texture lookup with repeat wrapping; v = 0 is the bottom row.
Vec3 sample_texture(const ImageRGBf& texture, double u, double v);

// Area-weighted vertex normals.
Points3d vertex_normals(const Mesh& mesh);

}  // namespace handsynth

#include "handsynth/scene_sampler.hpp"

#include "handsynth/color.hpp"
#include "handsynth/error.hpp"
#include "handsynth/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace handsynth {
namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

Vec3 warm_white(RandomStream& rng) {
  return {1.0, 1.0 - rng.uniform(0.0, 0.08), 1.0 - rng.uniform(0.0, 0.25)};
}

Vec3 vivid(RandomStream& rng) {
  return hsv_to_rgb({rng.uniform(), rng.uniform(0.6, 1.0), 1.0});
}

}  // namespace

std::string_view to_string(PoseSource s) { return s == PoseSource::Bank ? "bank" : "interpolate"; }
std::string_view to_string(Branch b) { return b == Branch::Single ? "single" : "interact"; }

std::string_view to_string(LightKind kind) {
  switch (kind) {
    case LightKind::Ambient: return "ambient";
    case LightKind::Point: return "point";
    case LightKind::Directional: return "directional";
    case LightKind::Spot: return "spot";
  }
  return "ambient";
}

LightKind light_kind_from_string(std::string_view s) {
  if (s == "ambient") return LightKind::Ambient;
  if (s == "point") return LightKind::Point;
  if (s == "directional") return LightKind::Directional;
  if (s == "spot") return LightKind::Spot;
  throw Error(ErrorCode::ParseError, "unknown light kind '" + std::string(s) + "'");
}

HandShape sample_shape(const MatrixXfR& bank, RandomStream& rng, int* index_out) {
  if (bank.rows() == 0) throw Error(ErrorCode::EmptyBank, "shape bank is empty");
  const auto idx = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(bank.rows())));
  if (index_out) *index_out = static_cast<int>(idx);
  return {bank.row(idx).transpose().cast<double>()};
}

HandPose interpolate_poses(const HandPose& a, const HandPose& b, double t) {
  if (a.joint_rotations.rows() != b.joint_rotations.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "poses have different joint counts");
  }
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  HandPose out;
  out.global_orient = slerp_axis_angle(a.global_orient, b.global_orient, t);
  out.joint_rotations.resize(a.joint_rotations.rows(), 3);
  for (Eigen::Index j = 0; j < a.joint_rotations.rows(); ++j) {
    out.joint_rotations.row(j) =
        slerp_axis_angle(a.joint_rotations.row(j).transpose(), b.joint_rotations.row(j).transpose(), t).transpose();
  }
  out.global_translation = (1.0 - t) * a.global_translation + t * b.global_translation;
  return out;
}

HandPose sample_pose(PoseSource source, const MatrixXfR& bank, RandomStream& rng) {
  if (bank.rows() == 0) throw Error(ErrorCode::EmptyBank, "pose bank is empty");
  const auto n = static_cast<std::uint64_t>(bank.rows());
  auto row = [&](std::uint64_t i) {
    return HandPose::from_flat(bank.row(static_cast<Eigen::Index>(i)).transpose().cast<double>());
  };
  if (source == PoseSource::Bank) return row(rng.uniform_index(n));
  if (n < 2) throw Error(ErrorCode::EmptyBank, "pose interpolation needs at least two bank entries");
  const auto ia = rng.uniform_index(n);
  const auto ib = rng.uniform_index(n);
  const double t = rng.uniform();
  return interpolate_poses(row(ia), row(ib), t);
}

CameraSpec sample_camera(RandomStream& rng, const SamplerConfig& config, int width, int height) {
  const double fov = deg2rad(rng.uniform(config.fov_min_deg, config.fov_max_deg));
  const auto component = rng.uniform_index(config.distance_means.size());
  double distance;
  do {
    distance = rng.normal(config.distance_means[component], config.distance_std);
  } while (distance < config.distance_floor);
  const Vec3 eye = distance * rng.unit_vector();
  const double roll = rng.uniform(0.0, 2.0 * kPi);
  Rigid pose = Rigid::Identity();
  pose.linear() = look_at_rotation(eye, Vec3::Zero(), roll);
  pose.translation() = eye;
  return CameraSpec::from_fov(fov, width, height, pose);
}

Vec3 ambient_color_for(const Vec3& background_mean) {
  const double mx = background_mean.maxCoeff();
  if (!(mx > 0.0)) return Vec3::Ones();
  return (background_mean / mx).cwiseMax(0.0).cwiseMin(1.0);
}

std::vector<LightSpec> sample_lights(RandomStream& rng, const Vec3& background_mean, const SamplerConfig& config) {
  std::vector<LightSpec> lights;
  LightSpec ambient;
  ambient.kind = LightKind::Ambient;
  ambient.color = ambient_color_for(background_mean);
  ambient.intensity = rng.uniform(config.ambient_min, config.ambient_max);
  lights.push_back(ambient);

  const auto extra = rng.uniform_index(static_cast<std::uint64_t>(config.max_extra_lights) + 1);
  for (std::uint64_t i = 0; i < extra; ++i) {
    LightSpec l;
    switch (rng.uniform_index(3)) {
      case 0: l.kind = LightKind::Point; break;
      case 1: l.kind = LightKind::Directional; break;
      default: l.kind = LightKind::Spot; break;
    }
    l.color = rng.bernoulli(config.vivid_probability) ? vivid(rng) : warm_white(rng);
    l.intensity = rng.uniform(0.4, 1.0);
    l.position = rng.unit_vector() * rng.uniform(0.5, 2.0);
    if (l.kind == LightKind::Directional) {
      l.direction = rng.unit_vector();
    } else if (l.kind == LightKind::Spot) {
      l.direction = (-l.position.normalized() + 0.2 * rng.unit_vector()).normalized();
      l.cone_angle = deg2rad(rng.uniform(15.0, 45.0));
    }
    lights.push_back(l);
  }
  return lights;
}

BackgroundChoice sample_background(const std::vector<Background>& pool, RandomStream& rng, int width, int height) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, "background pool is empty");
  BackgroundChoice choice;
  choice.index = static_cast<int>(rng.uniform_index(pool.size()));
  const auto& img = pool[static_cast<std::size_t>(choice.index)].image;
  const double kmax = std::min(static_cast<double>(img.width()) / width, static_cast<double>(img.height()) / height);
  if (kmax < 1.0) {
    throw Error(ErrorCode::SourceTooSmall, "background " + std::to_string(choice.index) + " is " +
                                               std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                               ", render is " + std::to_string(width) + "x" +
                                               std::to_string(height));
  }
  const double k = rng.uniform(1.0, kmax);
  CropRect& c = choice.crop;
  c.width = std::clamp(static_cast<int>(std::lround(width * k)), width, img.width());
  c.height = std::clamp(static_cast<int>(std::lround(height * k)), height, img.height());
  c.x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(img.width() - c.width + 1)));
  c.y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(img.height() - c.height + 1)));
  return choice;
}

TextureJitter sample_texture_jitter(RandomStream& rng, const SamplerConfig& config) {
  TextureJitter j;
  j.hue_shift = rng.uniform(-config.hue_range, config.hue_range);
  j.sat_scale = rng.uniform(1.0 - config.sat_range, 1.0 + config.sat_range);
  return j;
}

ImageRGBf perturb_texture(const ImageRGBf& texture, const TextureJitter& jitter) {
  if (jitter.hue_shift == 0.0 && jitter.sat_scale == 1.0) return texture;
  ImageRGBf out(texture.width(), texture.height(), 3);
  for (int r = 0; r < texture.height(); ++r) {
    for (int c = 0; c < texture.width(); ++c) {
      Hsv hsv = rgb_to_hsv({texture(r, c, 0), texture(r, c, 1), texture(r, c, 2)});
      hsv.h += jitter.hue_shift;
      hsv.s = std::clamp(hsv.s * jitter.sat_scale, 0.0, 1.0);
      const Vec3 rgb = hsv_to_rgb(hsv);
      for (int ch = 0; ch < 3; ++ch) out(r, c, ch) = static_cast<float>(std::clamp(rgb[ch], 0.0, 1.0));
    }
  }
  return out;
}

ImageRGBf crop_resample(const ImageRGBf& src, const CropRect& crop, int width, int height) {
  ImageRGBf out(width, height, 3);
  const double sx = static_cast<double>(crop.width) / width;
  const double sy = static_cast<double>(crop.height) / height;
  for (int r = 0; r < height; ++r) {
    const double y = std::clamp(crop.y + (r + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double fy = y - y0;
    for (int c = 0; c < width; ++c) {
      const double x = std::clamp(crop.x + (c + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double fx = x - x0;
      for (int ch = 0; ch < 3; ++ch) {
        if (fx == 0.0 && fy == 0.0) {
          out(r, c, ch) = src(y0, x0, ch);
          continue;
        }
        const double top = (1.0 - fx) * src(y0, x0, ch) + fx * src(y0, x1, ch);
        const double bot = (1.0 - fx) * src(y1, x0, ch) + fx * src(y1, x1, ch);
        out(r, c, ch) = static_cast<float>((1.0 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

DepthMap crop_resample_depth(const DepthMap& src, const CropRect& crop, int width, int height) {
  DepthMap out(width, height, 1);
  for (int r = 0; r < height; ++r) {
    const int y = std::min(crop.y + static_cast<int>((r + 0.5) * crop.height / height), src.height() - 1);
    for (int c = 0; c < width; ++c) {
      const int x = std::min(crop.x + static_cast<int>((c + 0.5) * crop.width / width), src.width() - 1);
      out(r, c) = src(y, x);
    }
  }
  return out;
}

Vec3 mean_color(const ImageRGBf& image, const CropRect& crop) {
  Vec3 sum = Vec3::Zero();
  for (int r = crop.y; r < crop.y + crop.height; ++r) {
    for (int c = crop.x; c < crop.x + crop.width; ++c) {
      sum += Vec3(image(r, c, 0), image(r, c, 1), image(r, c, 2));
    }
  }
  const double n = static_cast<double>(crop.width) * crop.height;
  return n > 0 ? Vec3(sum / n) : Vec3(Vec3::Zero());
}

SceneSpec sample_scene(const AssetPack& pack, const SamplerConfig& config, Branch branch,
                       std::uint64_t master_seed, std::uint64_t scene_id, int width, int height) {
  auto stream = [&](std::string_view tag) { return RandomStream::for_scene(master_seed, scene_id, tag); };
  SceneSpec s;
  s.scene_id = scene_id;
  s.seed = master_seed;
  s.branch = branch;

  if (branch == Branch::Interact) {
    if (pack.grasps.empty()) throw Error(ErrorCode::EmptyBank, "grasp pack is empty");
    auto rng = stream("grasp");
    const auto g = static_cast<int>(rng.uniform_index(pack.grasps.size()));
    const auto& rec = pack.grasps[static_cast<std::size_t>(g)];
    s.grasp_idx = g;
    s.shape = {rec.hand_shape.cast<double>()};
    s.pose = HandPose::from_flat(rec.hand_pose.cast<double>());
  } else {
    auto shape_rng = stream("shape");
    s.shape = sample_shape(pack.shape_bank, shape_rng, &s.shape_idx);
    auto pose_rng = stream("pose");
    s.pose = sample_pose(config.pose_source, pack.pose_bank, pose_rng);
  }

  if (pack.textures.empty()) throw Error(ErrorCode::EmptyBank, "texture bank is empty");
  if (pack.arm_textures.empty()) throw Error(ErrorCode::EmptyBank, "arm texture bank is empty");
  {
    auto rng = stream("texture");
    s.texture_idx = static_cast<int>(rng.uniform_index(pack.textures.size()));
    s.texture_jitter = sample_texture_jitter(rng, config);
  }
  {
    auto rng = stream("arm_texture");
    s.arm_texture_idx = static_cast<int>(rng.uniform_index(pack.arm_textures.size()));
  }
  {
    auto rng = stream("background");
    s.background = sample_background(pack.backgrounds, rng, width, height);
    s.background_mean =
        mean_color(pack.backgrounds[static_cast<std::size_t>(s.background.index)].image, s.background.crop);
  }
  {
    auto rng = stream("lights");
    s.lights = sample_lights(rng, s.background_mean, config);
  }
  for (int v = 0; v < 2; ++v) {
    auto rng = stream(v == 0 ? "camera0" : "camera1");
    s.cameras[static_cast<std::size_t>(v)] = sample_camera(rng, config, width, height);
  }
  return s;
}

}  // namespace handsynth

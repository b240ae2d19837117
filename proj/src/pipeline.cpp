#include "handsynth/pipeline.hpp"

#include "handsynth/compositor.hpp"
#include "handsynth/error.hpp"
#include "handsynth/metrics.hpp"
#include "handsynth/png_io.hpp"
#include "handsynth/toy_assets.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace handsynth {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Reads `key` into `out` when present; type errors become ConfigError.
template <typename T>
void read_opt(const json& obj, const char* key, T& out, const std::string& section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ConfigError, section + key + " has the wrong type");
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& section) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, (section.empty() ? "config" : section) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw Error(ErrorCode::ConfigError, "unknown config key '" + section + key + "'");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

Branch parse_branch(const std::string& s) {
  if (s == "single") return Branch::Single;
  if (s == "interact") return Branch::Interact;
  throw Error(ErrorCode::ConfigError, "branch must be 'single' or 'interact', got '" + s + "'");
}

PoseSource parse_pose_source(const std::string& s) {
  if (s == "bank") return PoseSource::Bank;
  if (s == "interpolate") return PoseSource::Interpolate;
  throw Error(ErrorCode::ConfigError, "sampler.pose_source must be 'bank' or 'interpolate', got '" + s + "'");
}

Vec3 keypoint_centroid(const ModelAsset& model, const PosedHand& hand) {
  return keypoints(model, hand).colwise().mean().transpose();
}

Points3d to_camera(const Rigid& camera_from_world, const Points3d& world) {
  return transform_points(camera_from_world, world);
}

}  // namespace

GenerateConfig parse_generate_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"assets", "toy_seed", "branch", "n_scenes", "seed", "resolution", "workers", "out", "overwrite",
                  "export_vertices", "center_hand", "pose_correctives", "sampler", "render", "forearm", "object"},
                 "");
  GenerateConfig c;
  read_opt(doc, "assets", c.assets, "");
  read_opt(doc, "toy_seed", c.toy_seed, "");
  std::string branch = "single";
  read_opt(doc, "branch", branch, "");
  c.branch = parse_branch(branch);
  read_opt(doc, "n_scenes", c.n_scenes, "");
  read_opt(doc, "seed", c.seed, "");
  if (doc.contains("resolution")) {
    std::array<int, 2> res{};
    read_opt(doc, "resolution", res, "");
    c.width = res[0];
    c.height = res[1];
  }
  read_opt(doc, "workers", c.workers, "");
  std::string out = c.out.string();
  read_opt(doc, "out", out, "");
  c.out = out;
  read_opt(doc, "overwrite", c.overwrite, "");
  read_opt(doc, "export_vertices", c.export_vertices, "");
  read_opt(doc, "center_hand", c.center_hand, "");
  read_opt(doc, "pose_correctives", c.assembly.pose_correctives, "");

  if (doc.contains("sampler")) {
    const json& s = doc["sampler"];
    const std::string sec = "sampler.";
    reject_unknown(s,
                   {"distance_means", "distance_std", "distance_floor", "fov_min_deg", "fov_max_deg", "hue_range",
                    "sat_range", "vivid_probability", "ambient_min", "ambient_max", "max_extra_lights", "pose_source"},
                   sec);
    SamplerConfig& sc = c.sampler;
    read_opt(s, "distance_means", sc.distance_means, sec);
    read_opt(s, "distance_std", sc.distance_std, sec);
    read_opt(s, "distance_floor", sc.distance_floor, sec);
    read_opt(s, "fov_min_deg", sc.fov_min_deg, sec);
    read_opt(s, "fov_max_deg", sc.fov_max_deg, sec);
    read_opt(s, "hue_range", sc.hue_range, sec);
    read_opt(s, "sat_range", sc.sat_range, sec);
    read_opt(s, "vivid_probability", sc.vivid_probability, sec);
    read_opt(s, "ambient_min", sc.ambient_min, sec);
    read_opt(s, "ambient_max", sc.ambient_max, sec);
    read_opt(s, "max_extra_lights", sc.max_extra_lights, sec);
    std::string source = "bank";
    read_opt(s, "pose_source", source, sec);
    sc.pose_source = parse_pose_source(source);
  }
  if (doc.contains("render")) {
    const json& r = doc["render"];
    reject_unknown(r, {"supersample", "near_plane", "feather"}, "render.");
    read_opt(r, "supersample", c.render.supersample, "render.");
    read_opt(r, "near_plane", c.render.near_plane, "render.");
    read_opt(r, "feather", c.feather, "render.");
  }
  if (doc.contains("forearm")) {
    const json& f = doc["forearm"];
    reject_unknown(f, {"enabled", "length", "socket_radius", "elbow_radius", "segments", "match_socket_radius"},
                   "forearm.");
    read_opt(f, "enabled", c.assembly.forearm, "forearm.");
    read_opt(f, "length", c.assembly.forearm_params.length, "forearm.");
    read_opt(f, "socket_radius", c.assembly.forearm_params.socket_radius, "forearm.");
    read_opt(f, "elbow_radius", c.assembly.forearm_params.elbow_radius, "forearm.");
    read_opt(f, "segments", c.assembly.forearm_params.segments, "forearm.");
    read_opt(f, "match_socket_radius", c.assembly.match_socket_radius, "forearm.");
  }
  if (doc.contains("object")) {
    const json& o = doc["object"];
    reject_unknown(o, {"albedo", "specular", "shininess"}, "object.");
    if (o.contains("albedo")) {
      std::array<double, 3> a{};
      read_opt(o, "albedo", a, "object.");
      c.assembly.object_material.albedo = Vec3(a[0], a[1], a[2]);
    }
    read_opt(o, "specular", c.assembly.object_material.specular, "object.");
    read_opt(o, "shininess", c.assembly.object_material.shininess, "object.");
  }

  require(c.width > 0 && c.height > 0, "resolution must be positive");
  require(c.workers >= 1, "workers must be >= 1");
  require(c.render.supersample >= 1 && c.render.supersample <= 8, "render.supersample must be in [1, 8]");
  require(c.render.near_plane > 0.0, "render.near_plane must be positive");
  const SamplerConfig& sc = c.sampler;
  require(!sc.distance_means.empty(), "sampler.distance_means must not be empty");
  require(sc.distance_std >= 0.0, "sampler.distance_std must be >= 0");
  require(sc.distance_floor > 0.0, "sampler.distance_floor must be > 0");
  for (double m : sc.distance_means) require(m > sc.distance_floor || sc.distance_std > 0.0, "sampler.distance_means must exceed the floor");
  require(sc.fov_min_deg > 0.0 && sc.fov_min_deg <= sc.fov_max_deg && sc.fov_max_deg < 180.0,
          "sampler fov range must satisfy 0 < min <= max < 180");
  require(sc.ambient_min >= 0.0 && sc.ambient_min <= sc.ambient_max, "sampler ambient range is invalid");
  require(sc.vivid_probability >= 0.0 && sc.vivid_probability <= 1.0, "sampler.vivid_probability must be in [0, 1]");
  require(sc.max_extra_lights >= 0, "sampler.max_extra_lights must be >= 0");
  require(c.assembly.forearm_params.segments >= 1, "forearm.segments must be >= 1");
  require(c.assembly.forearm_params.length > 0.0, "forearm.length must be positive");
  return c;
}

GenerateConfig load_generate_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_generate_config(ss.str());
}

std::string generate_config_to_json(const GenerateConfig& c) {
  const SamplerConfig& s = c.sampler;
  const Vec3& a = c.assembly.object_material.albedo;
  json doc = {
      {"assets", c.assets},
      {"toy_seed", c.toy_seed},
      {"branch", std::string(to_string(c.branch))},
      {"n_scenes", c.n_scenes},
      {"seed", c.seed},
      {"resolution", {c.width, c.height}},
      {"workers", c.workers},
      {"out", c.out.string()},
      {"overwrite", c.overwrite},
      {"export_vertices", c.export_vertices},
      {"center_hand", c.center_hand},
      {"pose_correctives", c.assembly.pose_correctives},
      {"sampler",
       {{"distance_means", s.distance_means},
        {"distance_std", s.distance_std},
        {"distance_floor", s.distance_floor},
        {"fov_min_deg", s.fov_min_deg},
        {"fov_max_deg", s.fov_max_deg},
        {"hue_range", s.hue_range},
        {"sat_range", s.sat_range},
        {"vivid_probability", s.vivid_probability},
        {"ambient_min", s.ambient_min},
        {"ambient_max", s.ambient_max},
        {"max_extra_lights", s.max_extra_lights},
        {"pose_source", std::string(to_string(s.pose_source))}}},
      {"render", {{"supersample", c.render.supersample}, {"near_plane", c.render.near_plane}, {"feather", c.feather}}},
      {"forearm",
       {{"enabled", c.assembly.forearm},
        {"length", c.assembly.forearm_params.length},
        {"socket_radius", c.assembly.forearm_params.socket_radius},
        {"elbow_radius", c.assembly.forearm_params.elbow_radius},
        {"segments", c.assembly.forearm_params.segments},
        {"match_socket_radius", c.assembly.match_socket_radius}}},
      {"object",
       {{"albedo", {a[0], a[1], a[2]}},
        {"specular", c.assembly.object_material.specular},
        {"shininess", c.assembly.object_material.shininess}}},
  };
  return doc.dump(2);
}

AssetPack load_assets(const GenerateConfig& config) {
  if (config.assets == "toy") return make_toy_assets(config.toy_seed);
  return load_asset_pack(config.assets);
}

RenderedScene render_scene(const AssetPack& pack, const GenerateConfig& config, std::uint64_t scene_id) {
  RenderedScene out;
  SceneSpec& spec = out.spec;
  spec = sample_scene(pack, config.sampler, config.branch, config.seed, scene_id, config.width, config.height);
  const ModelAsset& model = pack.model;

  Material hand_mat;
  hand_mat.texture = std::make_shared<const ImageRGBf>(
      perturb_texture(pack.textures[static_cast<std::size_t>(spec.texture_idx)], spec.texture_jitter));
  Material arm_mat;
  arm_mat.texture = std::make_shared<const ImageRGBf>(pack.arm_textures[static_cast<std::size_t>(spec.arm_texture_idx)]);

  if (spec.grasp_idx) {
    const GraspRecord& grasp = pack.grasps[static_cast<std::size_t>(*spec.grasp_idx)];
    Rigid hand_global = Rigid::Identity();
    if (config.center_hand) {
      const PosedHand raw = pose_mesh(model, spec.shape, grasp_hand_pose(grasp), config.assembly.pose_correctives);
      hand_global.translation() = -keypoint_centroid(model, raw);
    }
    spec.pose = grasp_hand_pose(grasp, hand_global);
    out.assembled = assemble_interaction_scene(pack, grasp, hand_mat, arm_mat, config.assembly, hand_global);
  } else {
    if (config.center_hand) {
      const PosedHand raw = pose_mesh(model, spec.shape, spec.pose, config.assembly.pose_correctives);
      spec.pose.global_translation -= keypoint_centroid(model, raw);
    }
    out.assembled = assemble_hand_scene(model, spec.shape, spec.pose, hand_mat, arm_mat, config.assembly);
  }

  const Background& bg = pack.backgrounds[static_cast<std::size_t>(spec.background.index)];
  out.background_rgb = crop_resample(bg.image, spec.background.crop, config.width, config.height);
  out.background_depth = crop_resample_depth(bg.depth, spec.background.crop, config.width, config.height);

  const Points3d world_keypoints = keypoints(model, out.assembled.hand);
  SceneInfo info;
  info.seed = config.seed;
  info.branch = std::string(to_string(spec.branch));
  for (const auto& l : spec.lights) info.light_kinds.emplace_back(to_string(l.kind));
  info.shape_idx = spec.shape_idx;
  info.texture_idx = spec.texture_idx;
  info.hue_shift = spec.texture_jitter.hue_shift;
  info.sat_scale = spec.texture_jitter.sat_scale;
  info.arm_texture_idx = spec.arm_texture_idx;
  info.background_idx = spec.background.index;
  const CropRect& crop = spec.background.crop;
  info.background_crop = {crop.x, crop.y, crop.width, crop.height};
  info.grasp_idx = spec.grasp_idx.value_or(-1);

  for (int v = 0; v < 2; ++v) {
    const CameraSpec& cam = spec.cameras[static_cast<std::size_t>(v)];
    RenderedView& view = out.views[static_cast<std::size_t>(v)];
    view.render = rasterize(out.assembled.items, cam, spec.lights, config.render);

    SampleRecord& r = view.record;
    r.scene_id = scene_id;
    r.view = v;
    r.rgb = to_rgb8(composite_rgb(view.render, out.background_rgb, config.feather));
    r.depth = fuse_depth(view.render, out.background_depth);
    r.mask = view.render.mask;
    if (view.render.empty_viewport) {
      r.bbox = {0, 0, -1, -1};
    } else {
      r.bbox = bbox_from_mask(r.mask, 0);
    }
    r.intrinsics = cam.intrinsics;
    r.world_from_camera = cam.world_from_camera.matrix();
    r.beta = spec.shape.beta;
    r.theta = spec.pose;
    const Rigid camera_from_world = cam.world_from_camera.inverse();
    r.joints_3d = to_camera(camera_from_world, world_keypoints);
    r.joints_2d.resize(r.joints_3d.rows(), 2);
    for (Eigen::Index k = 0; k < r.joints_3d.rows(); ++k) {
      const Projection p = project_camera_point(cam.intrinsics, r.joints_3d.row(k).transpose());
      r.joints_2d(k, 0) = p.u;
      r.joints_2d(k, 1) = p.v;
    }
    if (config.export_vertices) r.vertices_3d = to_camera(camera_from_world, out.assembled.hand.vertices);
    r.info = info;
    r.info.fov_y_deg = cam.fov_y * kRadToDeg;
    r.info.camera_distance = cam.position().norm();
  }
  return out;
}

namespace {

void prepare_output(const GenerateConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + config.out.string() + ": " + ec.message());
  std::vector<fs::path> stale;
  for (const auto& entry : fs::directory_iterator(config.out)) {
    const std::string name = entry.path().filename().string();
    if (name == kManifestFile || (entry.is_directory() && name.rfind("scene_", 0) == 0)) stale.push_back(entry.path());
  }
  if (stale.empty()) return;
  if (!config.overwrite) {
    throw Error(ErrorCode::ConfigError,
                config.out.string() + " already holds a dataset; pass --overwrite or choose another --out");
  }
  for (const auto& p : stale) fs::remove_all(p);
}

}  // namespace

GenerateResult generate_dataset(const GenerateConfig& config, const AssetPack& pack, const ProgressFn& progress) {
  prepare_output(config);
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> done{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::exception_ptr first_error;
  std::uint64_t failed_scene = 0;

  auto worker = [&]() {
    while (!failed.load()) {
      const std::uint64_t id = next.fetch_add(1);
      if (id >= config.n_scenes) return;
      try {
        const RenderedScene scene = render_scene(pack, config, id);
        for (const auto& view : scene.views) write_sample(view.record, config.out);
      } catch (...) {
        std::error_code ec;
        fs::remove_all(scene_dir(config.out, id), ec);
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error || id < failed_scene) {
          first_error = std::current_exception();
          failed_scene = id;
        }
        failed.store(true);
        return;
      }
      const std::uint64_t n = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(mu);
        progress(n, config.n_scenes);
      }
    }
  };

  const int workers = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(config.workers),
                                                               std::max<std::uint64_t>(config.n_scenes, 1)));
  std::vector<std::thread> threads;
  for (int i = 1; i < workers; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  if (first_error) {
    const std::string where = "scene " + std::to_string(failed_scene) + " (seed " + std::to_string(config.seed) +
                              ", replay with --seed " + std::to_string(config.seed) + ")";
    try {
      std::rethrow_exception(first_error);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }

  GenerateResult result;
  result.scenes = config.n_scenes;
  result.manifest = write_manifest(config.out);
  result.samples = result.manifest.size();
  return result;
}

Histogram::Histogram(double lo_, double hi_, int bins) : lo(lo_), hi(hi_), counts(static_cast<std::size_t>(bins), 0) {}

void Histogram::add(double x) {
  if (x < lo) {
    ++underflow;
    return;
  }
  if (x > hi) {
    ++overflow;
    return;
  }
  auto bin = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(counts.size()));
  bin = std::min(bin, counts.size() - 1);
  ++counts[bin];
}

std::uint64_t Histogram::total() const {
  std::uint64_t n = underflow + overflow;
  for (auto c : counts) n += c;
  return n;
}

DatasetStats compute_stats(const fs::path& dataset_dir) {
  const auto manifest = read_manifest(dataset_dir);
  DatasetStats st;
  std::map<std::uint64_t, int> views;
  std::map<std::uint64_t, std::pair<std::string, int>> per_scene;
  std::vector<double> coverage, distance;
  st.fov_min = std::numeric_limits<double>::infinity();
  st.fov_max = -std::numeric_limits<double>::infinity();
  for (const auto& entry : manifest) {
    std::uint64_t scene = 0;
    int view = 0;
    parse_sample_id(entry.sample_id, scene, view);
    ++views[scene];
    const SampleRecord r = read_sample(dataset_dir, entry.sample_id);
    per_scene[scene] = {r.info.branch, static_cast<int>(r.info.light_kinds.size())};
    st.fov_deg.add(r.info.fov_y_deg);
    st.fov_min = std::min(st.fov_min, r.info.fov_y_deg);
    st.fov_max = std::max(st.fov_max, r.info.fov_y_deg);
    st.camera_distance.add(r.info.camera_distance);
    distance.push_back(r.info.camera_distance);
    std::size_t fg = 0;
    for (auto m : r.mask.values()) fg += m > 0 ? 1 : 0;
    coverage.push_back(static_cast<double>(fg) / static_cast<double>(r.mask.size()));
    if (fg == 0) ++st.empty_masks;
  }
  st.samples = manifest.size();
  st.scenes = views.size();
  for (const auto& [scene, n] : views) ++st.views_per_scene[n];
  for (const auto& [scene, info] : per_scene) {
    ++st.branches[info.first];
    ++st.light_counts[info.second];
  }
  st.distance_mean = compensated_mean(distance);
  if (!coverage.empty()) {
    st.coverage_mean = compensated_mean(coverage);
    st.coverage_min = *std::min_element(coverage.begin(), coverage.end());
    st.coverage_max = *std::max_element(coverage.begin(), coverage.end());
  } else {
    st.fov_min = st.fov_max = 0.0;
  }
  return st;
}

namespace {

json histogram_json(const Histogram& h) {
  return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}, {"underflow", h.underflow}, {"overflow", h.overflow}};
}

std::string histogram_text(const Histogram& h, const char* fmt) {
  std::string out;
  char line[128];
  const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double a = h.lo + width * static_cast<double>(i);
    char range[64];
    std::snprintf(range, sizeof(range), fmt, a, a + width);
    std::snprintf(line, sizeof(line), "    %-16s %8llu\n", range, static_cast<unsigned long long>(h.counts[i]));
    out += line;
  }
  if (h.underflow || h.overflow) {
    std::snprintf(line, sizeof(line), "    below %-10g %8llu\n    above %-10g %8llu\n", h.lo,
                  static_cast<unsigned long long>(h.underflow), h.hi, static_cast<unsigned long long>(h.overflow));
    out += line;
  }
  return out;
}

}  // namespace

std::string DatasetStats::to_json() const {
  json branch_mix = json::object();
  for (const auto& [k, v] : branches) branch_mix[k] = v;
  json lights = json::object();
  for (const auto& [k, v] : light_counts) lights[std::to_string(k)] = v;
  json vps = json::object();
  for (const auto& [k, v] : views_per_scene) vps[std::to_string(k)] = v;
  json doc = {{"scenes", scenes},
              {"samples", samples},
              {"views_per_scene", vps},
              {"branches", branch_mix},
              {"light_counts", lights},
              {"fov_deg", histogram_json(fov_deg)},
              {"fov_min_deg", fov_min},
              {"fov_max_deg", fov_max},
              {"camera_distance", histogram_json(camera_distance)},
              {"camera_distance_mean", distance_mean},
              {"mask_coverage", {{"mean", coverage_mean}, {"min", coverage_min}, {"max", coverage_max}}},
              {"empty_masks", empty_masks}};
  return doc.dump(2);
}

std::string DatasetStats::to_text() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "scenes   %llu\nsamples  %llu\n", static_cast<unsigned long long>(scenes),
                static_cast<unsigned long long>(samples));
  out += line;
  out += "views per scene\n";
  for (const auto& [k, v] : views_per_scene) {
    std::snprintf(line, sizeof(line), "    %-16d %8llu\n", k, static_cast<unsigned long long>(v));
    out += line;
  }
  out += "branch mix\n";
  for (const auto& [k, v] : branches) {
    std::snprintf(line, sizeof(line), "    %-16s %8llu\n", k.c_str(), static_cast<unsigned long long>(v));
    out += line;
  }
  out += "lights per scene\n";
  for (const auto& [k, v] : light_counts) {
    std::snprintf(line, sizeof(line), "    %-16d %8llu\n", k, static_cast<unsigned long long>(v));
    out += line;
  }
  std::snprintf(line, sizeof(line), "vertical fov (deg), min %.3f max %.3f\n", fov_min, fov_max);
  out += line;
  out += histogram_text(fov_deg, "[%.0f, %.0f)");
  std::snprintf(line, sizeof(line), "camera distance (m), mean %.4f\n", distance_mean);
  out += line;
  out += histogram_text(camera_distance, "[%.1f, %.1f)");
  std::snprintf(line, sizeof(line), "mask coverage  mean %.4f  min %.4f  max %.4f  empty %llu\n", coverage_mean,
                coverage_min, coverage_max, static_cast<unsigned long long>(empty_masks));
  out += line;
  return out;
}

}  // namespace handsynth

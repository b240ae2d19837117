#include "handsynth/dataset_io.hpp"

#include "handsynth/error.hpp"
#include "handsynth/hashing.hpp"
#include "handsynth/png_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace handsynth {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename Derived>
json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(static_cast<double>(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd json_to_matrix(const json& j, Eigen::Index cols, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, what + " must be an array of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::ParseError, what + " row " + std::to_string(r) + " must have " + std::to_string(cols) +
                                             " numbers");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw Error(ErrorCode::ParseError, what + " contains a non-number");
      m(static_cast<Eigen::Index>(r), c) = v.get<double>();
    }
  }
  return m;
}

Eigen::VectorXd json_to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, what + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::ParseError, what + " contains a non-number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Vec3 json_to_vec3(const json& j, const std::string& what) {
  const Eigen::VectorXd v = json_to_vector(j, what);
  if (v.size() != 3) throw Error(ErrorCode::ParseError, what + " must have 3 entries");
  return v;
}

json scene_info_to_json(const SceneInfo& s) {
  return json{{"seed", s.seed},
              {"branch", s.branch},
              {"fov_y_deg", s.fov_y_deg},
              {"camera_distance", s.camera_distance},
              {"light_kinds", s.light_kinds},
              {"shape_idx", s.shape_idx},
              {"texture_idx", s.texture_idx},
              {"hue_shift", s.hue_shift},
              {"sat_scale", s.sat_scale},
              {"arm_texture_idx", s.arm_texture_idx},
              {"background_idx", s.background_idx},
              {"background_crop", s.background_crop},
              {"grasp_idx", s.grasp_idx}};
}

SceneInfo scene_info_from_json(const json& j) {
  SceneInfo s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.branch = j.at("branch").get<std::string>();
  s.fov_y_deg = j.at("fov_y_deg").get<double>();
  s.camera_distance = j.at("camera_distance").get<double>();
  s.light_kinds = j.at("light_kinds").get<std::vector<std::string>>();
  s.shape_idx = j.at("shape_idx").get<int>();
  s.texture_idx = j.at("texture_idx").get<int>();
  s.hue_shift = j.at("hue_shift").get<double>();
  s.sat_scale = j.at("sat_scale").get<double>();
  s.arm_texture_idx = j.at("arm_texture_idx").get<int>();
  s.background_idx = j.at("background_idx").get<int>();
  s.background_crop = j.at("background_crop").get<std::array<int, 4>>();
  s.grasp_idx = j.at("grasp_idx").get<int>();
  return s;
}

json record_meta(const SampleRecord& r) {
  json meta;
  meta["format"] = "handsynth.sample";
  meta["version"] = 1;
  meta["sample_id"] = r.sample_id();
  meta["scene_id"] = r.scene_id;
  meta["view"] = r.view;
  meta["width"] = r.rgb.width();
  meta["height"] = r.rgb.height();
  meta["depth_unit"] = "mm";
  meta["intrinsics"] = {{"fx", r.intrinsics.fx}, {"fy", r.intrinsics.fy}, {"cx", r.intrinsics.cx}, {"cy", r.intrinsics.cy}};
  meta["world_from_camera"] = matrix_to_json(r.world_from_camera);
  meta["bbox"] = {r.bbox.col_min, r.bbox.row_min, r.bbox.col_max, r.bbox.row_max};
  meta["beta"] = vector_to_json(r.beta);
  meta["theta"] = {{"global_orient", vector_to_json(r.theta.global_orient)},
                   {"joint_rotations", matrix_to_json(r.theta.joint_rotations)},
                   {"translation", vector_to_json(r.theta.global_translation)}};
  meta["joints_3d"] = matrix_to_json(r.joints_3d);
  meta["joints_2d"] = matrix_to_json(r.joints_2d);
  if (r.vertices_3d) meta["vertices_3d"] = matrix_to_json(*r.vertices_3d);
  meta["scene"] = scene_info_to_json(r.info);
  return meta;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

json read_json(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace

std::string SampleRecord::sample_id() const { return make_sample_id(scene_id, view); }

std::string make_sample_id(std::uint64_t scene_id, int view) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "scene_%08llu_view_%d", static_cast<unsigned long long>(scene_id), view);
  return buf;
}

void parse_sample_id(const std::string& sample_id, std::uint64_t& scene_id, int& view) {
  unsigned long long s = 0;
  int v = 0;
  int consumed = 0;
  if (std::sscanf(sample_id.c_str(), "scene_%llu_view_%d%n", &s, &v, &consumed) != 2 ||
      consumed != static_cast<int>(sample_id.size()) || make_sample_id(s, v) != sample_id) {
    throw Error(ErrorCode::MissingSample, "malformed sample id '" + sample_id + "'");
  }
  scene_id = s;
  view = v;
}

fs::path scene_dir(const fs::path& root, std::uint64_t scene_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%08llu", static_cast<unsigned long long>(scene_id));
  return root / buf;
}

fs::path sample_dir(const fs::path& root, std::uint64_t scene_id, int view) {
  return scene_dir(root, scene_id) / ("view_" + std::to_string(view));
}

std::uint16_t quantize_depth_mm(double meters) {
  if (!std::isfinite(meters) || meters <= 0.0) return 0;
  const double mm = std::nearbyint(meters * 1000.0);
  if (mm > 65535.0) return 0;
  return static_cast<std::uint16_t>(mm);
}

Image<std::uint16_t> depth_to_mm(const DepthMap& depth) {
  Image<std::uint16_t> out(depth.width(), depth.height(), 1);
  for (std::size_t i = 0; i < depth.size(); ++i) out.values()[i] = quantize_depth_mm(depth.values()[i]);
  return out;
}

DepthMap depth_from_mm(const Image<std::uint16_t>& depth_mm) {
  DepthMap out(depth_mm.width(), depth_mm.height(), 1);
  for (std::size_t i = 0; i < depth_mm.size(); ++i) {
    out.values()[i] = static_cast<float>(depth_mm.values()[i] / 1000.0);
  }
  return out;
}

void check_record(const SampleRecord& r) {
  const auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::InvariantViolation, r.sample_id() + ": " + msg);
  };
  if (r.rgb.channels() != 3 || r.rgb.empty()) fail("rgb must be a non-empty 3-channel image");
  if (!r.depth.same_shape(r.rgb) || !r.mask.same_shape(r.rgb)) fail("rgb, depth and mask shapes differ");
  for (int row = 0; row < r.mask.height(); ++row) {
    for (int col = 0; col < r.mask.width(); ++col) {
      if (r.mask(row, col) > 0 && quantize_depth_mm(r.depth(row, col)) == 0) {
        fail("foreground pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") has no depth");
      }
    }
  }
  if (r.joints_3d.rows() != r.joints_2d.rows()) fail("joints_3d and joints_2d counts differ");
  for (Eigen::Index k = 0; k < r.joints_3d.rows(); ++k) {
    if (r.joints_3d(k, 2) <= kMinProjectDepth) fail("joint " + std::to_string(k) + " is behind the camera");
    const Projection p = project_camera_point(r.intrinsics, r.joints_3d.row(k).transpose());
    const double err = std::hypot(p.u - r.joints_2d(k, 0), p.v - r.joints_2d(k, 1));
    if (!(err <= kMaxReprojectionErrorPx)) {
      fail("joint " + std::to_string(k) + " reprojects " + std::to_string(err) + " px from its 2D annotation");
    }
  }
}

std::vector<fs::path> write_sample(const SampleRecord& record, const fs::path& root) {
  check_record(record);
  const fs::path dir = sample_dir(root, record.scene_id, record.view);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> paths = {dir / kSampleFiles[0], dir / kSampleFiles[1], dir / kSampleFiles[2],
                                 dir / kSampleFiles[3]};
  write_png_rgb8(paths[0], record.rgb);
  write_png_gray16(paths[1], depth_to_mm(record.depth));
  write_png_gray8(paths[2], record.mask);
  write_text(paths[3], record_meta(record).dump(1) + "\n");
  return paths;
}

SampleRecord read_sample(const fs::path& root, const std::string& sample_id) {
  SampleRecord r;
  parse_sample_id(sample_id, r.scene_id, r.view);
  const fs::path dir = sample_dir(root, r.scene_id, r.view);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingSample, "no sample directory " + dir.string());
  r.rgb = read_png_rgb8(dir / "rgb.png");
  r.depth = depth_from_mm(read_png_gray16(dir / "depth.png"));
  r.mask = read_png_gray8(dir / "mask.png");
  const json meta = read_json(dir / "meta.json");
  try {
    if (meta.at("sample_id").get<std::string>() != sample_id) {
      throw Error(ErrorCode::ParseError, dir.string() + ": meta.json sample_id mismatch");
    }
    const json& k = meta.at("intrinsics");
    r.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                    k.at("cy").get<double>()};
    r.world_from_camera = json_to_matrix(meta.at("world_from_camera"), 4, "world_from_camera");
    const auto box = meta.at("bbox").get<std::array<int, 4>>();
    r.bbox = {box[0], box[1], box[2], box[3]};
    r.beta = json_to_vector(meta.at("beta"), "beta");
    const json& theta = meta.at("theta");
    r.theta.global_orient = json_to_vec3(theta.at("global_orient"), "theta.global_orient");
    r.theta.joint_rotations = json_to_matrix(theta.at("joint_rotations"), 3, "theta.joint_rotations");
    r.theta.global_translation = json_to_vec3(theta.at("translation"), "theta.translation");
    r.joints_3d = json_to_matrix(meta.at("joints_3d"), 3, "joints_3d");
    r.joints_2d = json_to_matrix(meta.at("joints_2d"), 2, "joints_2d");
    if (meta.contains("vertices_3d")) r.vertices_3d = json_to_matrix(meta.at("vertices_3d"), 3, "vertices_3d");
    r.info = scene_info_from_json(meta.at("scene"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, dir.string() + "/meta.json: " + e.what());
  }
  return r;
}

std::vector<std::string> list_samples(const fs::path& root) {
  std::vector<std::string> ids;
  if (!fs::is_directory(root)) return ids;
  for (const auto& scene : fs::directory_iterator(root)) {
    if (!scene.is_directory() || scene.path().filename().string().rfind("scene_", 0) != 0) continue;
    for (const auto& view : fs::directory_iterator(scene.path())) {
      if (!view.is_directory() || view.path().filename().string().rfind("view_", 0) != 0) continue;
      const std::string id = scene.path().filename().string() + "_" + view.path().filename().string();
      std::uint64_t s = 0;
      int v = 0;
      try {
        parse_sample_id(id, s, v);
      } catch (const Error&) {
        continue;
      }
      ids.push_back(id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<ManifestEntry> write_manifest(const fs::path& root) {
  std::vector<ManifestEntry> entries;
  json samples = json::array();
  for (const auto& id : list_samples(root)) {
    std::uint64_t s = 0;
    int v = 0;
    parse_sample_id(id, s, v);
    const fs::path dir = sample_dir(root, s, v);
    ManifestEntry e{id, {}};
    for (const char* name : kSampleFiles) e.sha256[name] = sha256_file(dir / name);
    samples.push_back({{"sample_id", id}, {"sha256", e.sha256}});
    entries.push_back(std::move(e));
  }
  const json manifest = {{"format", "handsynth.manifest"}, {"version", 1}, {"samples", samples}};
  write_text(root / kManifestFile, manifest.dump(1) + "\n");
  return entries;
}

std::vector<ManifestEntry> read_manifest(const fs::path& root) {
  const fs::path path = root / kManifestFile;
  if (!fs::exists(path)) throw Error(ErrorCode::MissingManifest, "no " + path.string());
  const json manifest = read_json(path);
  std::vector<ManifestEntry> entries;
  try {
    for (const json& s : manifest.at("samples")) {
      entries.push_back({s.at("sample_id").get<std::string>(), s.at("sha256").get<std::map<std::string, std::string>>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return entries;
}

void verify_manifest(const fs::path& root) {
  const auto entries = read_manifest(root);
  std::vector<std::string> bad;
  std::set<std::string> listed;
  for (const auto& e : entries) {
    listed.insert(e.sample_id);
    std::uint64_t s = 0;
    int v = 0;
    parse_sample_id(e.sample_id, s, v);
    const fs::path dir = sample_dir(root, s, v);
    for (const auto& [name, digest] : e.sha256) {
      const fs::path file = dir / name;
      if (!fs::exists(file) || sha256_file(file) != digest) bad.push_back(file.string());
    }
  }
  for (const auto& id : list_samples(root)) {
    if (!listed.count(id)) bad.push_back(id + " (not in manifest)");
  }
  if (!bad.empty()) {
    std::string msg = std::to_string(bad.size()) + " file(s) do not match the manifest:";
    for (std::size_t i = 0; i < bad.size() && i < 5; ++i) msg += " " + bad[i];
    throw Error(ErrorCode::ManifestMismatch, msg);
  }
}

Predictions parse_predictions(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("predictions: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::ParseError, "predictions must be a JSON array");
  Predictions out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    const std::string where = "predictions[" + std::to_string(i) + "]";
    if (!item.is_object() || !item.contains("sample_id") || !item["sample_id"].is_string() ||
        !item.contains("joints")) {
      throw Error(ErrorCode::ParseError, where + " needs a string sample_id and joints");
    }
    const std::string id = item["sample_id"].get<std::string>();
    Prediction p;
    p.joints = json_to_matrix(item["joints"], 3, where + ".joints");
    if (item.contains("vertices") && !item["vertices"].is_null()) {
      p.vertices = json_to_matrix(item["vertices"], 3, where + ".vertices");
    }
    if (!out.emplace(id, std::move(p)).second) throw Error(ErrorCode::DuplicateId, "duplicate sample_id '" + id + "'");
  }
  return out;
}

Predictions load_predictions(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_predictions(std::string(bytes.begin(), bytes.end()));
}

void write_predictions(const fs::path& path, const Predictions& predictions) {
  json doc = json::array();
  for (const auto& [id, p] : predictions) {
    json item = {{"sample_id", id}, {"joints", matrix_to_json(p.joints)}};
    if (p.vertices) item["vertices"] = matrix_to_json(*p.vertices);
    doc.push_back(std::move(item));
  }
  write_text(path, doc.dump() + "\n");
}

Predictions ground_truth_predictions(const fs::path& root, bool include_vertices) {
  Predictions out;
  for (const auto& id : list_samples(root)) {
    SampleRecord r = read_sample(root, id);
    Prediction p{r.joints_3d, std::nullopt};
    if (include_vertices) p.vertices = r.vertices_3d;
    out.emplace(id, std::move(p));
  }
  return out;
}

}  // namespace handsynth

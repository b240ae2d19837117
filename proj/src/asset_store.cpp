#include "handsynth/asset_store.hpp"

#include "handsynth/error.hpp"
#include "handsynth/hashing.hpp"
#include "handsynth/obj_io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace handsynth {

static_assert(std::endian::native == std::endian::little,
              "blob I/O assumes a little-endian host");

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "handsynth.assetpack";
constexpr int kVersion = 1;
constexpr double kRowSumTolerance = 1e-5;

std::string indexed(const std::string& prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return prefix + "." + buf;
}

// ---------------------------------------------------------------------------
// Blob writing

class BlobWriter {
 public:
  explicit BlobWriter(const fs::path& root) : root_(root) { fs::create_directories(root / "blobs"); }

  template <typename T>
  void add(const std::string& name, const T* data, std::vector<std::int64_t> shape) {
    static_assert(sizeof(T) == 4);
    const std::size_t count = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                              [](std::size_t a, std::int64_t b) { return a * static_cast<std::size_t>(b); });
    std::vector<std::uint8_t> bytes(count * 4);
    if (count > 0) std::memcpy(bytes.data(), data, bytes.size());
    const std::string rel = "blobs/" + name + ".bin";
    write_file_bytes(root_ / rel, bytes);
    blobs_[name] = {{"file", rel},
                    {"dtype", std::is_same_v<T, float> ? "float32" : "int32"},
                    {"shape", shape},
                    {"sha256", sha256_hex(bytes)}};
  }

  json take() { return std::move(blobs_); }

 private:
  fs::path root_;
  json blobs_ = json::object();
};

void add_image(BlobWriter& w, const std::string& name, const Image<float>& img) {
  std::vector<std::int64_t> shape = {img.height(), img.width()};
  if (img.channels() != 1) shape.push_back(img.channels());
  w.add(name, img.data(), shape);
}

// ---------------------------------------------------------------------------
// Blob reading

class BlobReader {
 public:
  BlobReader(const fs::path& root, const json& blobs, bool verify)
      : root_(root), blobs_(blobs), verify_(verify) {}

  // Returns raw 32-bit words after size and checksum checks; shape is checked
  // against `expected` (-1 = any) by the caller-facing helpers below.
  template <typename T>
  std::vector<T> read(const std::string& name, const std::vector<std::int64_t>& expected,
                      std::vector<std::int64_t>* actual_shape = nullptr) const {
    if (!blobs_.contains(name)) throw Error(ErrorCode::MissingBlob, "meta.json lacks blob '" + name + "'");
    const json& entry = blobs_.at(name);
    const auto dtype = entry.at("dtype").get<std::string>();
    const char* want = std::is_same_v<T, float> ? "float32" : "int32";
    if (dtype != want) {
      throw Error(ErrorCode::ShapeMismatch, name + ": dtype " + dtype + ", expected " + want);
    }
    const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
    if (shape.size() != expected.size()) {
      throw Error(ErrorCode::ShapeMismatch, name + ": rank " + std::to_string(shape.size()) +
                                                ", expected " + std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (shape[i] < 0 || (expected[i] >= 0 && shape[i] != expected[i])) {
        throw Error(ErrorCode::ShapeMismatch, name + ": declared dim " + std::to_string(i) + " = " +
                                                  std::to_string(shape[i]) + ", expected " +
                                                  std::to_string(expected[i]));
      }
    }
    const fs::path path = root_ / entry.at("file").get<std::string>();
    if (!fs::exists(path)) throw Error(ErrorCode::MissingBlob, "missing blob file " + path.string());
    const auto bytes = read_file_bytes(path);
    std::size_t count = 1;
    for (auto d : shape) count *= static_cast<std::size_t>(d);
    if (bytes.size() != count * 4) {
      throw Error(ErrorCode::ShapeMismatch, name + ": blob holds " + std::to_string(bytes.size() / 4) +
                                                " elements, shape declares " + std::to_string(count));
    }
    if (verify_ && sha256_hex(bytes) != entry.at("sha256").get<std::string>()) {
      throw Error(ErrorCode::ChecksumMismatch, name);
    }
    std::vector<T> out(count);
    if (count > 0) std::memcpy(out.data(), bytes.data(), bytes.size());
    if (actual_shape) *actual_shape = shape;
    return out;
  }

  template <typename Matrix>
  Matrix matrix(const std::string& name, std::int64_t rows, std::int64_t cols) const {
    using T = typename Matrix::Scalar;
    std::vector<std::int64_t> shape;
    auto data = read<T>(name, {rows, cols}, &shape);
    Matrix m(shape[0], shape[1]);
    if (!data.empty()) std::memcpy(m.data(), data.data(), data.size() * sizeof(T));
    return m;
  }

  // Third dimension folded into the columns: (rows, mid, last) -> rows x (mid*last).
  MatrixXfR stacked(const std::string& name, std::int64_t rows, std::int64_t mid, std::int64_t last) const {
    std::vector<std::int64_t> shape;
    auto data = read<float>(name, {rows, mid, last}, &shape);
    MatrixXfR m(shape[0], shape[1] * shape[2]);
    if (!data.empty()) std::memcpy(m.data(), data.data(), data.size() * sizeof(float));
    return m;
  }

  Image<float> image(const std::string& name, int channels) const {
    std::vector<std::int64_t> shape;
    std::vector<std::int64_t> expected = {-1, -1};
    if (channels != 1) expected.push_back(channels);
    auto data = read<float>(name, expected, &shape);
    Image<float> img(static_cast<int>(shape[1]), static_cast<int>(shape[0]), channels);
    img.values() = std::move(data);
    return img;
  }

 private:
  fs::path root_;
  const json& blobs_;
  bool verify_;
};

template <typename M>
bool same_matrix(const M& a, const M& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

void check_rows_sum_to_one(const MatrixXfR& m, const char* what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double w = m(r, c);
      if (!std::isfinite(w)) {
        throw Error(ErrorCode::InvalidWeights, std::string(what) + " row " + std::to_string(r) + " not finite");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::InvalidWeights,
                  std::string(what) + " row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

BackgroundKind parse_kind(const std::string& s) {
  if (s == "indoor") return BackgroundKind::Indoor;
  if (s == "envmap") return BackgroundKind::EnvMap;
  throw Error(ErrorCode::InvalidAsset, "unknown background kind '" + s + "'");
}

}  // namespace

std::string_view to_string(BackgroundKind kind) {
  return kind == BackgroundKind::Indoor ? "indoor" : "envmap";
}

int ModelAsset::root_joint() const {
  for (std::size_t j = 0; j < parent.size(); ++j) {
    if (parent[j] == kRootParent) return static_cast<int>(j);
  }
  return -1;
}

void ModelAsset::validate() const {
  const auto V = num_vertices();
  const auto J = num_joints();
  if (V == 0 || J == 0) throw Error(ErrorCode::InvalidAsset, "model has no vertices or joints");
  auto require_shape = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
  };
  require_shape(skinning_weights.rows() == V && skinning_weights.cols() == J, "skinning_weights must be V x J");
  require_shape(joint_regressor.rows() == J && joint_regressor.cols() == V, "joint_regressor must be J x V");
  require_shape(shape_blendshapes.cols() == 3 * V, "shape_blendshapes must be B_s x V x 3");
  require_shape(pose_blendshapes.rows() == 0 || pose_blendshapes.cols() == 3 * V,
                "pose_blendshapes must be B_p x V x 3");
  require_shape(uv.rows() == V, "uv must be V x 2");

  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      if (faces(f, k) < 0 || faces(f, k) >= V) {
        throw Error(ErrorCode::InvalidAsset, "face " + std::to_string(f) + " references vertex out of range");
      }
    }
  }
  if (!template_vertices.allFinite()) throw Error(ErrorCode::InvalidAsset, "template vertices not finite");

  for (Eigen::Index v = 0; v < V; ++v) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const float w = skinning_weights(v, j);
      if (!(w >= 0.0f && w <= 1.0f)) {
        throw Error(ErrorCode::InvalidWeights, "skinning weight outside [0,1] at vertex " + std::to_string(v));
      }
    }
  }
  check_rows_sum_to_one(skinning_weights, "skinning_weights");
  check_rows_sum_to_one(joint_regressor, "joint_regressor");

  // Kinematic tree: one root, every chain reaches it within J steps.
  int roots = 0;
  for (Eigen::Index j = 0; j < J; ++j) {
    const auto p = parent[static_cast<std::size_t>(j)];
    if (p == kRootParent) {
      ++roots;
    } else if (p < 0 || p >= J || p == j) {
      throw Error(ErrorCode::InvalidAsset, "joint " + std::to_string(j) + " has invalid parent");
    }
  }
  if (roots != 1) throw Error(ErrorCode::InvalidAsset, "kinematic tree needs exactly one root");
  for (Eigen::Index j = 0; j < J; ++j) {
    auto cur = static_cast<std::int32_t>(j);
    for (Eigen::Index steps = 0; cur != kRootParent; ++steps) {
      if (steps > J) throw Error(ErrorCode::InvalidAsset, "kinematic tree has a cycle");
      cur = parent[static_cast<std::size_t>(cur)];
    }
  }

  auto check_ids = [V](const std::vector<std::int32_t>& ids, const char* what) {
    for (auto i : ids) {
      if (i < 0 || i >= V) throw Error(ErrorCode::InvalidAsset, std::string(what) + " index out of range");
    }
  };
  check_ids(wrist_ring, "wrist_ring");
  check_ids(tip_vertices, "tip_vertices");
  if (wrist_ring.size() < 3) throw Error(ErrorCode::InvalidAsset, "wrist_ring needs >= 3 vertices");
}

void AssetPack::validate() const {
  model.validate();
  const auto Bs = model.num_shape_blendshapes();
  const auto P = model.num_joints() * 3;
  if (shape_bank.rows() > 0 && shape_bank.cols() != Bs) {
    throw Error(ErrorCode::ShapeMismatch, "shape_bank width differs from model B_s");
  }
  if (pose_bank.rows() > 0 && pose_bank.cols() != P) {
    throw Error(ErrorCode::ShapeMismatch, "pose_bank width differs from model J*3");
  }
  if (!shape_bank.allFinite() || !pose_bank.allFinite()) {
    throw Error(ErrorCode::InvalidAsset, "non-finite bank entry");
  }
  for (std::size_t i = 0; i < backgrounds.size(); ++i) {
    const auto& bg = backgrounds[i];
    if (bg.image.channels() != 3 || bg.depth.channels() != 1 || !bg.image.same_shape(bg.depth)) {
      throw Error(ErrorCode::ShapeMismatch, "background " + std::to_string(i) + ": image/depth resolution differ");
    }
  }
  for (std::size_t i = 0; i < grasps.size(); ++i) {
    const auto& g = grasps[i];
    if (g.hand_shape.size() != Bs || g.hand_pose.size() != P) {
      throw Error(ErrorCode::ShapeMismatch, "grasp " + std::to_string(i) + " dimensions differ from model");
    }
    const Eigen::Matrix3d r = g.object_to_wrist.topLeftCorner<3, 3>().cast<double>();
    const double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (std::abs(r.determinant() - 1.0) > 1e-6 || orth > 1e-6 ||
        g.object_to_wrist.row(3) != Eigen::RowVector4f(0, 0, 0, 1)) {
      throw Error(ErrorCode::InvalidAsset, "grasp " + std::to_string(i) + " object_to_wrist is not rigid");
    }
    if (!objects.contains(g.object_id)) {
      throw Error(ErrorCode::MissingBlob, "grasp " + std::to_string(i) + " references unknown object '" +
                                              g.object_id + "'");
    }
  }
}

bool operator==(const ModelAsset& a, const ModelAsset& b) {
  return same_matrix(a.template_vertices, b.template_vertices) && same_matrix(a.faces, b.faces) &&
         same_matrix(a.skinning_weights, b.skinning_weights) &&
         same_matrix(a.shape_blendshapes, b.shape_blendshapes) &&
         same_matrix(a.pose_blendshapes, b.pose_blendshapes) &&
         same_matrix(a.joint_regressor, b.joint_regressor) && a.parent == b.parent &&
         same_matrix(a.uv, b.uv) && a.wrist_ring == b.wrist_ring && a.tip_vertices == b.tip_vertices;
}

bool operator==(const AssetPack& a, const AssetPack& b) {
  if (!(a.model == b.model) || !same_matrix(a.shape_bank, b.shape_bank) ||
      !same_matrix(a.pose_bank, b.pose_bank) || a.textures != b.textures ||
      a.arm_textures != b.arm_textures || a.backgrounds.size() != b.backgrounds.size() ||
      a.grasps.size() != b.grasps.size() || a.objects.size() != b.objects.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.backgrounds.size(); ++i) {
    const auto& x = a.backgrounds[i];
    const auto& y = b.backgrounds[i];
    if (!(x.image == y.image) || !(x.depth == y.depth) || x.kind != y.kind) return false;
  }
  for (std::size_t i = 0; i < a.grasps.size(); ++i) {
    const auto& x = a.grasps[i];
    const auto& y = b.grasps[i];
    if (x.hand_shape != y.hand_shape || x.hand_pose != y.hand_pose || x.object_id != y.object_id ||
        x.object_to_wrist != y.object_to_wrist) {
      return false;
    }
  }
  for (const auto& [id, mesh] : a.objects) {
    auto it = b.objects.find(id);
    if (it == b.objects.end() || !meshes_equal(mesh, it->second)) return false;
  }
  return true;
}

void write_asset_pack(const AssetPack& pack, const fs::path& root) {
  pack.validate();
  fs::create_directories(root);
  BlobWriter w(root);
  const auto& m = pack.model;
  const std::int64_t V = m.num_vertices(), F = m.num_faces(), J = m.num_joints();
  const std::int64_t Bs = m.num_shape_blendshapes(), Bp = m.num_pose_blendshapes();

  w.add("model.template_vertices", m.template_vertices.data(), {V, 3});
  w.add("model.faces", m.faces.data(), {F, 3});
  w.add("model.skinning_weights", m.skinning_weights.data(), {V, J});
  w.add("model.shape_blendshapes", m.shape_blendshapes.data(), {Bs, V, 3});
  w.add("model.pose_blendshapes", m.pose_blendshapes.data(), {Bp, V, 3});
  w.add("model.joint_regressor", m.joint_regressor.data(), {J, V});
  w.add("model.uv", m.uv.data(), {V, 2});
  w.add("shape_bank", pack.shape_bank.data(), {pack.shape_bank.rows(), Bs});
  w.add("pose_bank", pack.pose_bank.data(), {pack.pose_bank.rows(), J * 3});

  json meta;
  meta["format"] = kFormat;
  meta["version"] = kVersion;
  meta["model"] = {{"num_vertices", V},
                   {"num_faces", F},
                   {"num_joints", J},
                   {"num_shape_blendshapes", Bs},
                   {"num_pose_blendshapes", Bp},
                   {"parent", m.parent},
                   {"wrist_ring", m.wrist_ring},
                   {"tip_vertices", m.tip_vertices}};
  meta["shape_bank"] = "shape_bank";
  meta["pose_bank"] = "pose_bank";

  json textures = json::array();
  for (std::size_t i = 0; i < pack.textures.size(); ++i) {
    const auto name = indexed("textures", i);
    add_image(w, name, pack.textures[i]);
    textures.push_back(name);
  }
  meta["textures"] = textures;
  json arm_textures = json::array();
  for (std::size_t i = 0; i < pack.arm_textures.size(); ++i) {
    const auto name = indexed("arm_textures", i);
    add_image(w, name, pack.arm_textures[i]);
    arm_textures.push_back(name);
  }
  meta["arm_textures"] = arm_textures;

  json backgrounds = json::array();
  for (std::size_t i = 0; i < pack.backgrounds.size(); ++i) {
    const auto base = indexed("backgrounds", i);
    add_image(w, base + ".image", pack.backgrounds[i].image);
    add_image(w, base + ".depth", pack.backgrounds[i].depth);
    backgrounds.push_back({{"image", base + ".image"},
                           {"depth", base + ".depth"},
                           {"kind", to_string(pack.backgrounds[i].kind)}});
  }
  meta["backgrounds"] = backgrounds;

  const auto G = static_cast<std::int64_t>(pack.grasps.size());
  MatrixXfR g_shape(G, Bs), g_pose(G, J * 3), g_xf(G, 16);
  json object_ids = json::array();
  for (std::int64_t i = 0; i < G; ++i) {
    const auto& g = pack.grasps[static_cast<std::size_t>(i)];
    g_shape.row(i) = g.hand_shape.transpose();
    g_pose.row(i) = g.hand_pose.transpose();
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) g_xf(i, r * 4 + c) = g.object_to_wrist(r, c);
    }
    object_ids.push_back(g.object_id);
  }
  w.add("grasps.hand_shape", g_shape.data(), {G, Bs});
  w.add("grasps.hand_pose", g_pose.data(), {G, J * 3});
  w.add("grasps.object_to_wrist", g_xf.data(), {G, 4, 4});
  meta["grasps"] = {{"hand_shape", "grasps.hand_shape"},
                    {"hand_pose", "grasps.hand_pose"},
                    {"object_to_wrist", "grasps.object_to_wrist"},
                    {"object_ids", object_ids}};

  json objects = json::object();
  fs::create_directories(root / "objects");
  for (const auto& [id, mesh] : pack.objects) {
    const std::string rel = "objects/" + id + ".obj";
    const std::string text = write_obj(mesh);
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
    write_file_bytes(root / rel, bytes);
    objects[id] = {{"file", rel}, {"sha256", sha256_hex(bytes)}};
  }
  meta["objects"] = objects;
  meta["blobs"] = w.take();

  const std::string text = meta.dump(2) + "\n";
  write_file_bytes(root / "meta.json",
                   std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

AssetPack load_asset_pack(const fs::path& root, const LoadOptions& options) {
  const fs::path meta_path = root / "meta.json";
  if (!fs::exists(meta_path)) throw Error(ErrorCode::MissingBlob, "no meta.json in " + root.string());
  json meta;
  try {
    std::ifstream in(meta_path);
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidAsset, std::string("meta.json: ") + e.what());
  }

  try {
    if (meta.at("format").get<std::string>() != kFormat || meta.at("version").get<int>() != kVersion) {
      throw Error(ErrorCode::InvalidAsset, "unsupported pack format/version");
    }
    const BlobReader r(root, meta.at("blobs"), options.verify_checksums);
    const json& mm = meta.at("model");
    const auto V = mm.at("num_vertices").get<std::int64_t>();
    const auto F = mm.at("num_faces").get<std::int64_t>();
    const auto J = mm.at("num_joints").get<std::int64_t>();
    const auto Bs = mm.at("num_shape_blendshapes").get<std::int64_t>();
    const auto Bp = mm.at("num_pose_blendshapes").get<std::int64_t>();

    AssetPack pack;
    auto& m = pack.model;
    m.parent = mm.at("parent").get<std::vector<std::int32_t>>();
    if (static_cast<std::int64_t>(m.parent.size()) != J) {
      throw Error(ErrorCode::ShapeMismatch, "parent array length differs from num_joints");
    }
    m.wrist_ring = mm.at("wrist_ring").get<std::vector<std::int32_t>>();
    m.tip_vertices = mm.at("tip_vertices").get<std::vector<std::int32_t>>();
    m.template_vertices = r.matrix<Points3f>("model.template_vertices", V, 3);
    m.faces = r.matrix<Triangles>("model.faces", F, 3);
    m.skinning_weights = r.matrix<MatrixXfR>("model.skinning_weights", V, J);
    m.shape_blendshapes = r.stacked("model.shape_blendshapes", Bs, V, 3);
    m.pose_blendshapes = r.stacked("model.pose_blendshapes", Bp, V, 3);
    m.joint_regressor = r.matrix<MatrixXfR>("model.joint_regressor", J, V);
    m.uv = r.matrix<Points2f>("model.uv", V, 2);

    pack.shape_bank = r.matrix<MatrixXfR>(meta.at("shape_bank").get<std::string>(), -1, Bs);
    pack.pose_bank = r.matrix<MatrixXfR>(meta.at("pose_bank").get<std::string>(), -1, J * 3);
    for (const auto& name : meta.at("textures")) pack.textures.push_back(r.image(name.get<std::string>(), 3));
    for (const auto& name : meta.at("arm_textures")) {
      pack.arm_textures.push_back(r.image(name.get<std::string>(), 3));
    }
    for (const auto& bg : meta.at("backgrounds")) {
      Background b;
      b.image = r.image(bg.at("image").get<std::string>(), 3);
      b.depth = r.image(bg.at("depth").get<std::string>(), 1);
      b.kind = parse_kind(bg.at("kind").get<std::string>());
      pack.backgrounds.push_back(std::move(b));
    }

    const json& gm = meta.at("grasps");
    const auto ids = gm.at("object_ids").get<std::vector<std::string>>();
    const auto G = static_cast<std::int64_t>(ids.size());
    const auto g_shape = r.matrix<MatrixXfR>(gm.at("hand_shape").get<std::string>(), G, Bs);
    const auto g_pose = r.matrix<MatrixXfR>(gm.at("hand_pose").get<std::string>(), G, J * 3);
    const auto g_xf = r.stacked(gm.at("object_to_wrist").get<std::string>(), G, 4, 4);
    for (std::int64_t i = 0; i < G; ++i) {
      GraspRecord g;
      g.hand_shape = g_shape.row(i).transpose();
      g.hand_pose = g_pose.row(i).transpose();
      g.object_id = ids[static_cast<std::size_t>(i)];
      for (int rr = 0; rr < 4; ++rr) {
        for (int c = 0; c < 4; ++c) g.object_to_wrist(rr, c) = g_xf(i, rr * 4 + c);
      }
      pack.grasps.push_back(std::move(g));
    }

    for (const auto& [id, entry] : meta.at("objects").items()) {
      const fs::path path = root / entry.at("file").get<std::string>();
      if (!fs::exists(path)) throw Error(ErrorCode::MissingBlob, "missing object file " + path.string());
      if (options.verify_checksums && sha256_file(path) != entry.at("sha256").get<std::string>()) {
        throw Error(ErrorCode::ChecksumMismatch, "object " + id);
      }
      pack.objects.emplace(id, load_object_mesh(path));
    }

    pack.validate();
    return pack;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidAsset, std::string("meta.json schema: ") + e.what());
  }
}

}  // namespace handsynth

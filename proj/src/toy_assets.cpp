#include "handsynth/toy_assets.hpp"

#include "handsynth/random.hpp"
#include "handsynth/rotation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace handsynth {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kFingerRingSize = 8;
constexpr int kNumShapeBlendshapes = 4;
constexpr int kNumPoses = 16;
constexpr int kNumShapes = 32;

struct FingerSpec {
  Vec3 base;
  Vec3 direction;
  std::array<double, 3> lengths;
  double radius;
};

// Index, middle, ring, pinky, thumb. Joint ids of finger f are 1+3f .. 3+3f.
std::array<FingerSpec, 5> finger_specs() {
  return {{
      {{0.028, 0.085, 0.0}, {0.05, 1.0, 0.0}, {0.040, 0.025, 0.020}, 0.0090},
      {{0.009, 0.090, 0.0}, {0.0, 1.0, 0.0}, {0.045, 0.028, 0.022}, 0.0095},
      {{-0.010, 0.086, 0.0}, {-0.04, 1.0, 0.0}, {0.042, 0.026, 0.020}, 0.0090},
      {{-0.028, 0.078, 0.0}, {-0.10, 1.0, 0.0}, {0.032, 0.020, 0.018}, 0.0080},
      {{0.026, 0.022, -0.010}, {0.70, 0.70, -0.15}, {0.035, 0.030, 0.025}, 0.0110},
  }};
}

Vec3 flexion_axis(const Vec3& direction) {
  return direction.cross(Vec3(0, 0, -1)).normalized();
}

struct VertexTag {
  int finger = -1;  // -1: palm
  double axial = 0.0;
  Vec3 axis_point = Vec3::Zero();
};

struct HandBuilder {
  std::vector<Vec3> verts;
  std::vector<VertexTag> tags;
  std::vector<std::array<int, 3>> faces;
  std::vector<std::map<int, double>> weights;
  std::vector<std::vector<int>> regressor_sources = std::vector<std::vector<int>>(kToyJointCount);

  int add(const Vec3& p, std::map<int, double> w, VertexTag tag = {}) {
    verts.push_back(p);
    weights.push_back(std::move(w));
    tags.push_back(tag);
    return static_cast<int>(verts.size()) - 1;
  }

  void connect_rings(int a, int b, int n) {
    for (int k = 0; k < n; ++k) {
      const int k1 = (k + 1) % n;
      faces.push_back({a + k, a + k1, b + k1});
      faces.push_back({a + k, b + k1, b + k});
    }
  }

  void cap(int ring, int n, int center) {
    for (int k = 0; k < n; ++k) faces.push_back({ring + k, ring + (k + 1) % n, center});
  }
};

ModelAsset build_hand(RandomStream& rng) {
  HandBuilder hb;

  // Palm: wrist circle -> knuckle ellipse, closed at the top.
  const std::array<double, 3> ring_y = {0.0, 0.04, 0.08};
  const std::array<double, 3> half_x = {kToyWristRadius, 0.040, 0.043};
  const std::array<double, 3> half_z = {kToyWristRadius, 0.022, 0.015};
  std::array<int, 3> palm_ring{};
  for (int r = 0; r < 3; ++r) {
    palm_ring[r] = static_cast<int>(hb.verts.size());
    for (int k = 0; k < kToyWristRingSize; ++k) {
      const double th = 2.0 * kPi * k / kToyWristRingSize;
      hb.add({half_x[r] * std::cos(th), ring_y[r], half_z[r] * std::sin(th)}, {{0, 1.0}});
    }
    if (r > 0) hb.connect_rings(palm_ring[r - 1], palm_ring[r], kToyWristRingSize);
  }
  const int palm_top = hb.add({0.0, 0.085, 0.0}, {{0, 1.0}});
  hb.cap(palm_ring[2], kToyWristRingSize, palm_top);
  for (int k = 0; k < kToyWristRingSize; ++k) hb.regressor_sources[0].push_back(palm_ring[0] + k);

  std::vector<std::int32_t> tips;
  const auto fingers = finger_specs();
  for (int f = 0; f < 5; ++f) {
    const auto& spec = fingers[f];
    const Vec3 d = spec.direction.normalized();
    Vec3 u = d.cross(Vec3::UnitZ());
    if (u.norm() < 0.3) u = d.cross(Vec3::UnitX());
    u.normalize();
    const Vec3 w = d.cross(u);
    const int j0 = 1 + 3 * f;
    const double total = spec.lengths[0] + spec.lengths[1] + spec.lengths[2];
    const std::array<double, 4> axial = {0.0, spec.lengths[0], spec.lengths[0] + spec.lengths[1],
                                         total - 0.6 * spec.radius};
    const std::array<double, 4> radius = {spec.radius, 0.95 * spec.radius, 0.88 * spec.radius,
                                          0.80 * spec.radius};
    const std::array<std::map<int, double>, 4> ring_weights = {{
        {{0, 0.5}, {j0, 0.5}},
        {{j0, 0.5}, {j0 + 1, 0.5}},
        {{j0 + 1, 0.5}, {j0 + 2, 0.5}},
        {{j0 + 2, 1.0}},
    }};
    int prev = -1;
    for (int r = 0; r < 4; ++r) {
      const Vec3 c = spec.base + axial[r] * d;
      const int start = static_cast<int>(hb.verts.size());
      for (int k = 0; k < kFingerRingSize; ++k) {
        const double phi = 2.0 * kPi * k / kFingerRingSize;
        const Vec3 p = c + radius[r] * (std::cos(phi) * u + std::sin(phi) * w);
        hb.add(p, ring_weights[r], {f, axial[r], c});
      }
      if (r < 3) {
        for (int k = 0; k < kFingerRingSize; ++k) hb.regressor_sources[j0 + r].push_back(start + k);
      }
      if (prev >= 0) hb.connect_rings(prev, start, kFingerRingSize);
      prev = start;
    }
    const Vec3 tip = spec.base + total * d;
    const int tip_id = hb.add(tip, {{j0 + 2, 1.0}}, {f, total, tip});
    hb.cap(prev, kFingerRingSize, tip_id);
    tips.push_back(tip_id);
  }

  const auto V = static_cast<Eigen::Index>(hb.verts.size());
  ModelAsset m;
  m.template_vertices.resize(V, 3);
  for (Eigen::Index i = 0; i < V; ++i) {
    m.template_vertices.row(i) = hb.verts[static_cast<std::size_t>(i)].cast<float>().transpose();
  }
  m.faces.resize(static_cast<Eigen::Index>(hb.faces.size()), 3);
  for (std::size_t i = 0; i < hb.faces.size(); ++i) {
    for (int k = 0; k < 3; ++k) m.faces(static_cast<Eigen::Index>(i), k) = hb.faces[i][k];
  }
  m.skinning_weights = MatrixXfR::Zero(V, kToyJointCount);
  for (Eigen::Index i = 0; i < V; ++i) {
    for (const auto& [j, wt] : hb.weights[static_cast<std::size_t>(i)]) {
      m.skinning_weights(i, j) = static_cast<float>(wt);
    }
  }
  m.joint_regressor = MatrixXfR::Zero(kToyJointCount, V);
  for (int j = 0; j < kToyJointCount; ++j) {
    const auto& src = hb.regressor_sources[static_cast<std::size_t>(j)];
    for (int v : src) m.joint_regressor(j, v) = 1.0f / static_cast<float>(src.size());
  }
  m.parent.assign(kToyJointCount, 0);
  m.parent[0] = kRootParent;
  for (int f = 0; f < 5; ++f) {
    m.parent[1 + 3 * f] = 0;
    m.parent[2 + 3 * f] = 1 + 3 * f;
    m.parent[3 + 3 * f] = 2 + 3 * f;
  }
  m.wrist_ring.resize(kToyWristRingSize);
  for (int k = 0; k < kToyWristRingSize; ++k) m.wrist_ring[k] = palm_ring[0] + k;
  m.tip_vertices = tips;

  // Planar UVs from the template bounding box.
  const Eigen::RowVector3f lo = m.template_vertices.colwise().minCoeff();
  const Eigen::RowVector3f hi = m.template_vertices.colwise().maxCoeff();
  m.uv.resize(V, 2);
  for (Eigen::Index i = 0; i < V; ++i) {
    m.uv(i, 0) = (m.template_vertices(i, 0) - lo.x()) / (hi.x() - lo.x());
    m.uv(i, 1) = (m.template_vertices(i, 1) - lo.y()) / (hi.y() - lo.y());
  }

  // Shape space: overall scale, finger length, palm width (zero at the wrist so
  // the wrist ring stays circular), finger thickness.
  m.shape_blendshapes = MatrixXfR::Zero(kNumShapeBlendshapes, 3 * V);
  for (Eigen::Index i = 0; i < V; ++i) {
    const Vec3& p = hb.verts[static_cast<std::size_t>(i)];
    const VertexTag& tag = hb.tags[static_cast<std::size_t>(i)];
    std::array<Vec3, kNumShapeBlendshapes> disp;
    disp[0] = 0.08 * p;
    disp[1] = Vec3::Zero();
    disp[3] = Vec3::Zero();
    if (tag.finger >= 0) {
      const Vec3 d = fingers[static_cast<std::size_t>(tag.finger)].direction.normalized();
      disp[1] = 0.10 * tag.axial * d;
      disp[3] = 0.12 * (p - tag.axis_point);
    }
    disp[2] = Vec3(0.06 * p.x() * std::clamp(p.y() / 0.08, 0.0, 1.0), 0.0, 0.0);
    for (int b = 0; b < kNumShapeBlendshapes; ++b) {
      for (int c = 0; c < 3; ++c) m.shape_blendshapes(b, 3 * i + c) = static_cast<float>(disp[b][c]);
    }
  }

  // Small pose correctives on the vertices each joint influences.
  const int Bp = 9 * (kToyJointCount - 1);
  m.pose_blendshapes = MatrixXfR::Zero(Bp, 3 * V);
  for (int j = 1; j < kToyJointCount; ++j) {
    for (int e = 0; e < 9; ++e) {
      const int row = 9 * (j - 1) + e;
      for (Eigen::Index i = 0; i < V; ++i) {
        const float wt = m.skinning_weights(i, j);
        if (wt == 0.0f) continue;
        for (int c = 0; c < 3; ++c) {
          m.pose_blendshapes(row, 3 * i + c) = static_cast<float>(2e-4 * wt * rng.normal());
        }
      }
    }
  }
  return m;
}

Eigen::VectorXf make_pose(const std::array<std::array<double, 3>, 5>& curl,
                          const std::array<double, 5>& spread, const Vec3& global) {
  Eigen::VectorXf pose = Eigen::VectorXf::Zero(3 * kToyJointCount);
  pose.head<3>() = global.cast<float>();
  const auto fingers = finger_specs();
  for (int f = 0; f < 5; ++f) {
    const Vec3 d = fingers[f].direction.normalized();
    const Vec3 axis = flexion_axis(d);
    for (int k = 0; k < 3; ++k) {
      Vec3 aa = curl[f][k] * axis;
      if (k == 0) {
        // Compose abduction about the palm normal with base flexion.
        const Mat3 r = axis_angle_to_matrix(spread[f] * Vec3::UnitZ()) * axis_angle_to_matrix(aa);
        aa = matrix_to_axis_angle(r);
      }
      pose.segment<3>(3 * (1 + 3 * f + k)) = aa.cast<float>();
    }
  }
  return pose;
}

MatrixXfR build_pose_bank(RandomStream& rng) {
  using Curl = std::array<std::array<double, 3>, 5>;
  const Curl open{};
  const Curl fist = {{{1.2, 1.4, 1.0}, {1.2, 1.4, 1.0}, {1.2, 1.4, 1.0}, {1.2, 1.4, 1.0}, {0.5, 0.6, 0.5}}};
  Curl point = fist;
  point[0] = {0.0, 0.0, 0.0};
  const Curl pinch = {{{0.6, 0.8, 0.5}, {0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}, {0.6, 0.5, 0.4}}};
  const std::array<double, 5> no_spread{};
  const std::array<double, 5> spread = {0.12, 0.0, -0.12, -0.25, 0.2};

  MatrixXfR bank(kNumPoses, 3 * kToyJointCount);
  bank.row(0) = make_pose(open, no_spread, Vec3::Zero()).transpose();
  bank.row(1) = make_pose(fist, no_spread, Vec3::Zero()).transpose();
  bank.row(2) = make_pose(point, no_spread, Vec3::Zero()).transpose();
  bank.row(3) = make_pose(pinch, no_spread, Vec3::Zero()).transpose();
  bank.row(4) = make_pose(open, spread, Vec3::Zero()).transpose();
  for (int i = 5; i < kNumPoses; ++i) {
    Curl c{};
    std::array<double, 5> s{};
    for (int f = 0; f < 5; ++f) {
      for (int k = 0; k < 3; ++k) c[f][k] = rng.uniform(0.0, f == 4 ? 0.8 : 1.4);
      s[f] = rng.uniform(-0.2, 0.2);
    }
    const Vec3 global = rng.unit_vector() * rng.uniform(0.0, 0.6);
    bank.row(i) = make_pose(c, s, global).transpose();
  }
  return bank;
}

float clamp01(double x) { return static_cast<float>(std::clamp(x, 0.0, 1.0)); }

// Smooth pseudo-noise: a few random-phase sinusoids.
struct WaveNoise {
  std::array<double, 4> fx{}, fy{}, phase{};
  explicit WaveNoise(RandomStream& rng) {
    for (int i = 0; i < 4; ++i) {
      fx[i] = rng.uniform(1.0, 9.0);
      fy[i] = rng.uniform(1.0, 9.0);
      phase[i] = rng.uniform(0.0, 2.0 * kPi);
    }
  }
  double operator()(double x, double y) const {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::sin(2.0 * kPi * (fx[i] * x + fy[i] * y) + phase[i]);
    return s / 4.0;
  }
};

ImageRGBf skin_texture(RandomStream& rng, const Vec3& tone, int size, double crease_strength) {
  ImageRGBf img(size, size, 3);
  const WaveNoise noise(rng);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double x = (c + 0.5) / size;
      const double y = (r + 0.5) / size;
      const double n = 0.06 * noise(x, y);
      // Horizontal crease bands at finger-joint heights.
      const double crease = crease_strength * std::pow(std::abs(std::sin(11.0 * kPi * y)), 40.0);
      const double fine = 0.02 * std::sin(97.0 * x + 13.0 * y) * std::sin(71.0 * y - 5.0 * x);
      for (int ch = 0; ch < 3; ++ch) img(r, c, ch) = clamp01(tone[ch] * (1.0 + n + fine - crease));
    }
  }
  return img;
}

ImageRGBf sleeve_texture(RandomStream& rng, const Vec3& base, const Vec3& stripe, int size) {
  ImageRGBf img(size, size, 3);
  const WaveNoise noise(rng);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double y = (r + 0.5) / size;
      const double x = (c + 0.5) / size;
      const bool on_stripe = std::fmod(y * 6.0, 1.0) < 0.25;
      const Vec3 col = on_stripe ? stripe : base;
      const double n = 0.05 * noise(x, y);
      for (int ch = 0; ch < 3; ++ch) img(r, c, ch) = clamp01(col[ch] * (1.0 + n));
    }
  }
  return img;
}

Background make_background(RandomStream& rng, int width, int height, BackgroundKind kind, const Vec3& top,
                           const Vec3& bottom, double near_m, double far_m, bool ramp_vertical,
                           int invalid_patch) {
  Background bg;
  bg.kind = kind;
  bg.image = ImageRGBf(width, height, 3);
  bg.depth = DepthMap(width, height, 1);
  const WaveNoise noise(rng);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double y = (r + 0.5) / height;
      const double x = (c + 0.5) / width;
      const Vec3 col = (1.0 - y) * top + y * bottom;
      const bool check = ((c / 32) + (r / 32)) % 2 == 0 && kind == BackgroundKind::Indoor && y > 0.6;
      const double n = 0.08 * noise(x, y) + (check ? 0.1 : 0.0);
      for (int ch = 0; ch < 3; ++ch) bg.image(r, c, ch) = clamp01(col[ch] * (1.0 + n));
      const double t = ramp_vertical ? y : x;
      bg.depth(r, c) = static_cast<float>(near_m + (far_m - near_m) * t);
      if (r < invalid_patch && c < invalid_patch) bg.depth(r, c) = 0.0f;
    }
  }
  return bg;
}

}  // namespace

Mesh make_cube_mesh(double side) {
  const double h = side / 2.0;
  Mesh m;
  m.vertices.resize(8, 3);
  for (int i = 0; i < 8; ++i) {
    m.vertices.row(i) << ((i & 1) ? h : -h), ((i & 2) ? h : -h), ((i & 4) ? h : -h);
  }
  m.uvs.resize(4, 2);
  m.uvs << 0, 0, 1, 0, 1, 1, 0, 1;
  // Quads (counter-clockwise seen from outside), split (0,1,2) / (0,2,3).
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  m.faces.resize(12, 3);
  m.uv_faces.resize(12, 3);
  for (int q = 0; q < 6; ++q) {
    m.faces.row(2 * q) << quads[q][0], quads[q][1], quads[q][2];
    m.faces.row(2 * q + 1) << quads[q][0], quads[q][2], quads[q][3];
    m.uv_faces.row(2 * q) << 0, 1, 2;
    m.uv_faces.row(2 * q + 1) << 0, 2, 3;
  }
  return m;
}

AssetPack make_toy_assets(std::uint64_t seed) {
  const RandomStream root = RandomStream::for_scene(seed, 0, "toy_assets");
  AssetPack pack;
  {
    auto rng = root.substream("model");
    pack.model = build_hand(rng);
  }
  {
    auto rng = root.substream("shape_bank");
    pack.shape_bank.resize(kNumShapes, kNumShapeBlendshapes);
    for (int i = 0; i < kNumShapes; ++i) {
      for (int b = 0; b < kNumShapeBlendshapes; ++b) {
        pack.shape_bank(i, b) = static_cast<float>(std::clamp(rng.normal(0.0, 0.8), -2.5, 2.5));
      }
    }
  }
  {
    auto rng = root.substream("pose_bank");
    pack.pose_bank = build_pose_bank(rng);
  }
  {
    auto rng = root.substream("textures");
    const std::array<Vec3, 4> tones = {Vec3(0.96, 0.80, 0.69), Vec3(0.87, 0.66, 0.52),
                                       Vec3(0.68, 0.47, 0.34), Vec3(0.45, 0.30, 0.21)};
    for (const auto& tone : tones) pack.textures.push_back(skin_texture(rng, tone, 128, 0.25));
    pack.arm_textures.push_back(skin_texture(rng, Vec3(0.90, 0.72, 0.60), 64, 0.0));
    pack.arm_textures.push_back(sleeve_texture(rng, Vec3(0.15, 0.25, 0.55), Vec3(0.85, 0.85, 0.9), 64));
    pack.arm_textures.push_back(sleeve_texture(rng, Vec3(0.45, 0.45, 0.45), Vec3(0.7, 0.2, 0.2), 64));
  }
  {
    auto rng = root.substream("backgrounds");
    pack.backgrounds.push_back(make_background(rng, 384, 320, BackgroundKind::Indoor, Vec3(0.85, 0.75, 0.55),
                                               Vec3(0.45, 0.35, 0.25), 1.5, 3.5, true, 0));
    pack.backgrounds.push_back(make_background(rng, 512, 256, BackgroundKind::EnvMap, Vec3(0.55, 0.7, 0.95),
                                               Vec3(0.8, 0.85, 0.9), 3.0, 7.0, false, 0));
    pack.backgrounds.push_back(make_background(rng, 320, 320, BackgroundKind::Indoor, Vec3(0.4, 0.6, 0.4),
                                               Vec3(0.2, 0.3, 0.2), 1.0, 2.5, true, 16));
  }
  {
    pack.objects.emplace("cube", make_cube_mesh(0.05));
    using Curl = std::array<std::array<double, 3>, 5>;
    const Curl grip = {{{0.7, 0.8, 0.6}, {0.7, 0.8, 0.6}, {0.7, 0.8, 0.6}, {0.7, 0.8, 0.6}, {0.5, 0.4, 0.3}}};
    const std::array<double, 5> no_spread{};
    GraspRecord g0;
    g0.hand_shape = Eigen::VectorXf::Zero(kNumShapeBlendshapes);
    g0.hand_pose = make_pose(grip, no_spread, Vec3::Zero());
    g0.object_id = "cube";
    g0.object_to_wrist.block<3, 1>(0, 3) = Eigen::Vector3f(0.005f, 0.075f, -0.05f);
    pack.grasps.push_back(g0);

    GraspRecord g1 = g0;
    g1.hand_shape = pack.shape_bank.row(1).transpose();
    g1.object_to_wrist.topLeftCorner<3, 3>() =
        Eigen::AngleAxisf(0.5f, Eigen::Vector3f::UnitY()).toRotationMatrix();
    g1.object_to_wrist.block<3, 1>(0, 3) = Eigen::Vector3f(0.0f, 0.07f, -0.05f);
    pack.grasps.push_back(g1);
  }
  pack.validate();
  return pack;
}

}  // namespace handsynth

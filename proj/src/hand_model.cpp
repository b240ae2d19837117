#include "handsynth/hand_model.hpp"

#include "handsynth/error.hpp"
#include "handsynth/rotation.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace handsynth {
namespace {

// Parents before children.
std::vector<int> topological_order(const ModelAsset& model) {
  const auto J = static_cast<int>(model.num_joints());
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(J));
  std::vector<bool> placed(static_cast<std::size_t>(J), false);
  while (static_cast<int>(order.size()) < J) {
    bool progressed = false;
    for (int j = 0; j < J; ++j) {
      if (placed[j]) continue;
      const int p = model.parent[static_cast<std::size_t>(j)];
      if (p == kRootParent || placed[static_cast<std::size_t>(p)]) {
        order.push_back(j);
        placed[j] = true;
        progressed = true;
      }
    }
    if (!progressed) throw Error(ErrorCode::InvalidAsset, "kinematic tree has a cycle");
  }
  return order;
}

void require_finite(const HandPose& pose) {
  if (!pose.global_orient.allFinite() || !pose.global_translation.allFinite() ||
      !pose.joint_rotations.allFinite()) {
    throw Error(ErrorCode::NonFinitePose, "pose contains NaN or Inf");
  }
}

}  // namespace

HandPose HandPose::zero(Eigen::Index num_joints) {
  HandPose p;
  p.joint_rotations = Points3d::Zero(num_joints - 1, 3);
  return p;
}

HandPose HandPose::from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() < 3 || flat.size() % 3 != 0) {
    throw Error(ErrorCode::DimensionMismatch, "flat pose length must be a positive multiple of 3");
  }
  HandPose p;
  p.global_orient = flat.head<3>();
  const Eigen::Index n = flat.size() / 3 - 1;
  p.joint_rotations.resize(n, 3);
  for (Eigen::Index j = 0; j < n; ++j) p.joint_rotations.row(j) = flat.segment<3>(3 * (j + 1)).transpose();
  return p;
}

Eigen::VectorXd HandPose::flat() const {
  Eigen::VectorXd out(3 * (joint_rotations.rows() + 1));
  out.head<3>() = global_orient;
  for (Eigen::Index j = 0; j < joint_rotations.rows(); ++j) {
    out.segment<3>(3 * (j + 1)) = joint_rotations.row(j).transpose();
  }
  return out;
}

Points3d shaped_template(const ModelAsset& model, const HandShape& shape) {
  const auto Bs = model.num_shape_blendshapes();
  if (shape.beta.size() != Bs) {
    throw Error(ErrorCode::DimensionMismatch, "beta has " + std::to_string(shape.beta.size()) +
                                                  " entries, model expects " + std::to_string(Bs));
  }
  if (!shape.beta.allFinite()) throw Error(ErrorCode::NonFinitePose, "beta contains NaN or Inf");
  const auto V = model.num_vertices();
  Points3d out = model.template_vertices.cast<double>();
  for (Eigen::Index b = 0; b < Bs; ++b) {
    const double coeff = shape.beta[b];
    if (coeff == 0.0) continue;
    for (Eigen::Index v = 0; v < V; ++v) {
      for (int c = 0; c < 3; ++c) out(v, c) += coeff * static_cast<double>(model.shape_blendshapes(b, 3 * v + c));
    }
  }
  return out;
}

Points3d regress_joints(const ModelAsset& model, const Points3d& vertices) {
  if (vertices.rows() != model.num_vertices()) {
    throw Error(ErrorCode::DimensionMismatch, "vertex count differs from model");
  }
  return model.joint_regressor.cast<double>() * vertices;
}

Points3d linear_blend_skin(const ModelAsset& model, const Points3d& rest_vertices,
                           const std::vector<Rigid>& skin_transforms) {
  const auto V = model.num_vertices();
  const auto J = model.num_joints();
  if (rest_vertices.rows() != V || static_cast<Eigen::Index>(skin_transforms.size()) != J) {
    throw Error(ErrorCode::DimensionMismatch, "skinning inputs do not match the model");
  }
  std::vector<Mat3> linear_delta(static_cast<std::size_t>(J));
  for (Eigen::Index j = 0; j < J; ++j) {
    linear_delta[static_cast<std::size_t>(j)] = skin_transforms[static_cast<std::size_t>(j)].linear() - Mat3::Identity();
  }
  Points3d out(V, 3);
  for (Eigen::Index v = 0; v < V; ++v) {
    const Vec3 p = rest_vertices.row(v).transpose();
    Vec3 disp = Vec3::Zero();
    for (Eigen::Index j = 0; j < J; ++j) {
      const double w = model.skinning_weights(v, j);
      if (w == 0.0) continue;
      const auto js = static_cast<std::size_t>(j);
      disp += w * (linear_delta[js] * p + skin_transforms[js].translation());
    }
    out.row(v) = (p + disp).transpose();
  }
  return out;
}

PosedHand pose_mesh(const ModelAsset& model, const HandShape& shape, const HandPose& pose,
                    bool use_pose_correctives) {
  const auto J = model.num_joints();
  const auto V = model.num_vertices();
  if (pose.joint_rotations.rows() != J - 1) {
    throw Error(ErrorCode::DimensionMismatch, "pose has " + std::to_string(pose.joint_rotations.rows()) +
                                                  " joint rotations, model expects " + std::to_string(J - 1));
  }
  require_finite(pose);

  const Points3d shaped = shaped_template(model, shape);
  const Points3d rest_joints = regress_joints(model, shaped);
  const int root = model.root_joint();

  // Local rotations; the root articulates only through the global transform.
  std::vector<Mat3> local(static_cast<std::size_t>(J), Mat3::Identity());
  {
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (j == root) continue;
      local[static_cast<std::size_t>(j)] = axis_angle_to_matrix(pose.joint_rotations.row(k++).transpose());
    }
  }

  Points3d rest = shaped;
  if (use_pose_correctives && model.num_pose_blendshapes() > 0) {
    if (model.num_pose_blendshapes() != 9 * (J - 1)) {
      throw Error(ErrorCode::DimensionMismatch, "pose blendshapes must have 9*(J-1) rows");
    }
    Eigen::Index row = 0;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (j == root) continue;
      const Mat3 feat = local[static_cast<std::size_t>(j)] - Mat3::Identity();
      for (int e = 0; e < 9; ++e, ++row) {
        const double f = feat(e / 3, e % 3);
        if (f == 0.0) continue;
        for (Eigen::Index v = 0; v < V; ++v) {
          for (int c = 0; c < 3; ++c) rest(v, c) += f * static_cast<double>(model.pose_blendshapes(row, 3 * v + c));
        }
      }
    }
  }

  // Forward kinematics in the articulated (pre-global) frame. `offset` is the
  // posed joint position minus its rest position, accumulated as
  // offset_j = offset_parent + (R_parent - I)(J_j - J_parent), which is exactly
  // zero for the rest pose.
  std::vector<Mat3> world_rot(static_cast<std::size_t>(J));
  std::vector<Vec3> offset(static_cast<std::size_t>(J));
  for (int j : topological_order(model)) {
    const auto js = static_cast<std::size_t>(j);
    const int p = model.parent[js];
    if (p == kRootParent) {
      world_rot[js] = local[js];
      offset[js] = Vec3::Zero();
    } else {
      const auto ps = static_cast<std::size_t>(p);
      world_rot[js] = world_rot[ps] * local[js];
      const Vec3 bone = (rest_joints.row(j) - rest_joints.row(p)).transpose();
      offset[js] = offset[ps] + (world_rot[ps] - Mat3::Identity()) * bone;
    }
  }

  std::vector<Rigid> skin(static_cast<std::size_t>(J));
  Points3d articulated_joints(J, 3);
  for (Eigen::Index j = 0; j < J; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const Vec3 rest_j = rest_joints.row(j).transpose();
    Rigid a = Rigid::Identity();
    a.linear() = world_rot[js];
    // p_j - R_j * J_j, written so the rest pose gives exactly zero.
    a.translation() = offset[js] - (world_rot[js] - Mat3::Identity()) * rest_j;
    skin[js] = a;
    articulated_joints.row(j) = (rest_j + offset[js]).transpose();
  }
  const Points3d articulated = linear_blend_skin(model, rest, skin);

  Rigid global = Rigid::Identity();
  global.linear() = axis_angle_to_matrix(pose.global_orient);
  global.translation() = pose.global_translation;

  PosedHand out;
  out.vertices = transform_points(global, articulated);
  out.joints = transform_points(global, articulated_joints);
  Rigid root_local = Rigid::Identity();
  root_local.linear() = world_rot[static_cast<std::size_t>(root)];
  root_local.translation() = articulated_joints.row(root).transpose();
  out.wrist_frame = global * root_local;
  out.wrist_frame.translation() = out.joints.row(root).transpose();
  return out;
}

Points3d keypoints(const ModelAsset& model, const PosedHand& hand) {
  const auto J = hand.joints.rows();
  Points3d out(J + static_cast<Eigen::Index>(model.tip_vertices.size()), 3);
  out.topRows(J) = hand.joints;
  for (std::size_t i = 0; i < model.tip_vertices.size(); ++i) {
    out.row(J + static_cast<Eigen::Index>(i)) = hand.vertices.row(model.tip_vertices[i]);
  }
  return out;
}

Mesh hand_mesh(const ModelAsset& model, const PosedHand& hand) {
  Mesh m;
  m.vertices = hand.vertices;
  m.faces = model.faces;
  m.uvs = model.uv.cast<double>();
  return m;
}

ForearmMesh make_procedural_forearm(const ForearmParams& params, int ring_count) {
  if (ring_count < 3 || params.segments < 1 || !(params.length > 0.0)) {
    throw Error(ErrorCode::DimensionMismatch, "forearm needs >= 3 ring vertices, >= 1 segment, positive length");
  }
  const int per_ring = ring_count + 1;  // seam duplicate for UV continuity
  const int rings = params.segments + 1;
  ForearmMesh fm;
  Mesh& m = fm.mesh;
  m.vertices.resize(rings * per_ring + 1, 3);
  m.uvs.resize(rings * per_ring + 1, 2);
  for (int i = 0; i < rings; ++i) {
    const double t = static_cast<double>(i) / params.segments;
    const double r = (1.0 - t) * params.socket_radius + t * params.elbow_radius;
    const double y = -params.length * t;
    for (int k = 0; k < per_ring; ++k) {
      const double th = 2.0 * std::numbers::pi * (k % ring_count) / ring_count;
      const int idx = i * per_ring + k;
      m.vertices.row(idx) << r * std::cos(th), y, r * std::sin(th);
      m.uvs.row(idx) << static_cast<double>(k) / ring_count, 1.0 - t;
    }
  }
  const int cap = rings * per_ring;
  m.vertices.row(cap) << 0.0, -params.length, 0.0;
  m.uvs.row(cap) << 0.5, 0.0;

  std::vector<Eigen::Vector3i> faces;
  for (int i = 0; i + 1 < rings; ++i) {
    for (int k = 0; k < ring_count; ++k) {
      const int a = i * per_ring + k, b = a + 1, c = a + per_ring, d = c + 1;
      faces.emplace_back(a, b, d);
      faces.emplace_back(a, d, c);
    }
  }
  const int last = (rings - 1) * per_ring;
  for (int k = 0; k < ring_count; ++k) faces.emplace_back(last + k, last + k + 1, cap);
  m.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f) m.faces.row(static_cast<Eigen::Index>(f)) = faces[f].transpose();

  fm.socket_ring.resize(static_cast<std::size_t>(ring_count));
  for (int k = 0; k < ring_count; ++k) fm.socket_ring[static_cast<std::size_t>(k)] = k;
  return fm;
}

double wrist_ring_radius(const ModelAsset& model, const PosedHand& hand) {
  const Vec3 c = hand.wrist_frame.translation();
  double sum = 0.0;
  for (auto v : model.wrist_ring) sum += (hand.vertices.row(v).transpose() - c).norm();
  return sum / static_cast<double>(model.wrist_ring.size());
}

Mesh attach_forearm(const ModelAsset& model, const PosedHand& hand, const ForearmMesh& forearm) {
  if (forearm.socket_ring.size() != model.wrist_ring.size()) {
    throw Error(ErrorCode::RingCountMismatch, "forearm socket ring has " +
                                                  std::to_string(forearm.socket_ring.size()) +
                                                  " vertices, wrist ring has " +
                                                  std::to_string(model.wrist_ring.size()));
  }
  const Rigid place = hand.wrist_frame * forearm.socket_frame.inverse();
  return transform_mesh(place, forearm.mesh);
}

}  // namespace handsynth

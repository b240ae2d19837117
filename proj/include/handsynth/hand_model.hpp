#pragma once

#include "handsynth/asset_store.hpp"
#include "handsynth/geometry.hpp"

#include <vector>

namespace handsynth {

struct HandShape {
  Eigen::VectorXd beta;
};

struct HandPose {
  Vec3 global_orient = Vec3::Zero();  // axis-angle, radians
  Points3d joint_rotations;           // (J-1) x 3 axis-angle, non-root joints in index order
  Vec3 global_translation = Vec3::Zero();

  static HandPose zero(Eigen::Index num_joints);
  // Flat layout used by pose banks and grasp records: root (global orient)
  // first, then the non-root joints in index order; translation is zero.
  static HandPose from_flat(const Eigen::VectorXd& flat);
  Eigen::VectorXd flat() const;
};

struct PosedHand {
  Points3d vertices;  // V x 3, world frame
  Points3d joints;    // J x 3, world frame
  Rigid wrist_frame = Rigid::Identity();  // world-from-wrist
};

// template + sum_i beta_i * S_i.  Throws DimensionMismatch.
Points3d shaped_template(const ModelAsset& model, const HandShape& shape);

// joint_regressor * vertices.
Points3d regress_joints(const ModelAsset& model, const Points3d& vertices);

// Per-joint skinning transforms map rest-pose coordinates to posed ones.
// Blending is done on the displacement (A - I) so an all-identity rig leaves
// vertices bit-for-bit untouched.
Points3d linear_blend_skin(const ModelAsset& model, const Points3d& rest_vertices,
                           const std::vector<Rigid>& skin_transforms);

// Full forward pass: shape blendshapes, optional pose correctives, forward
// kinematics, skinning, then the global rigid transform (rotation about the
// world origin followed by translation). Throws DimensionMismatch or
// NonFinitePose.
PosedHand pose_mesh(const ModelAsset& model, const HandShape& shape, const HandPose& pose,
                    bool use_pose_correctives = false);

// Regressed joints followed by the asset's fingertip vertices.
Points3d keypoints(const ModelAsset& model, const PosedHand& hand);

Mesh hand_mesh(const ModelAsset& model, const PosedHand& hand);

// ---------------------------------------------------------------------------
// Forearm

struct ForearmParams {
  double length = 0.22;         // meters, wrist to elbow
  double socket_radius = 0.035; // at the wrist
  double elbow_radius = 0.03;
  int segments = 4;
};

// A forearm mesh expressed in its own socket frame. The socket ring lies in
// the socket frame's y = 0 plane; the arm extends along -y.
struct ForearmMesh {
  Mesh mesh;
  std::vector<std::int32_t> socket_ring;
  Rigid socket_frame = Rigid::Identity();
};

// Tapered cylinder with `ring_count` vertices per ring (plus one UV seam
// duplicate per ring). Socket ring vertex k sits at angle 2*pi*k/ring_count in
// the x-z plane.
ForearmMesh make_procedural_forearm(const ForearmParams& params, int ring_count);

// Mean distance of the posed wrist-ring vertices from the wrist frame origin.
double wrist_ring_radius(const ModelAsset& model, const PosedHand& hand);

// Rigidly places the forearm so its socket frame coincides with the hand's
// wrist frame. Throws RingCountMismatch.
Mesh attach_forearm(const ModelAsset& model, const PosedHand& hand, const ForearmMesh& forearm);

}  // namespace handsynth

#include "handsynth/interact.hpp"

#include "handsynth/error.hpp"
#include "handsynth/rotation.hpp"

namespace handsynth {

AssembledScene assemble_hand_scene(const ModelAsset& model, const HandShape& shape, const HandPose& pose,
                                   const Material& hand_material, const Material& arm_material,
                                   const AssemblyOptions& options) {
  AssembledScene scene;
  scene.hand = pose_mesh(model, shape, pose, options.pose_correctives);
  scene.items.push_back({hand_mesh(model, scene.hand), hand_material, kHand});
  if (options.forearm) {
    ForearmParams params = options.forearm_params;
    if (options.match_socket_radius) params.socket_radius = wrist_ring_radius(model, scene.hand);
    const ForearmMesh arm = make_procedural_forearm(params, static_cast<int>(model.wrist_ring.size()));
    scene.items.push_back({attach_forearm(model, scene.hand, arm), arm_material, kForearm});
  }
  return scene;
}

HandPose grasp_hand_pose(const GraspRecord& grasp, const Rigid& hand_global) {
  HandPose pose = HandPose::from_flat(grasp.hand_pose.cast<double>());
  if (!hand_global.matrix().isIdentity(0.0)) {
    pose.global_orient = matrix_to_axis_angle(hand_global.linear() * axis_angle_to_matrix(pose.global_orient));
    pose.global_translation = hand_global * pose.global_translation;
  }
  return pose;
}

Rigid grasp_object_to_wrist(const GraspRecord& grasp) {
  Rigid t = Rigid::Identity();
  t.matrix() = grasp.object_to_wrist.cast<double>();
  return t;
}

AssembledScene assemble_interaction_scene(const AssetPack& pack, const GraspRecord& grasp,
                                          const Material& hand_material, const Material& arm_material,
                                          const AssemblyOptions& options, const Rigid& hand_global) {
  const auto it = pack.objects.find(grasp.object_id);
  if (it == pack.objects.end()) {
    throw Error(ErrorCode::UnresolvedReference, "grasp references unknown object '" + grasp.object_id + "'");
  }
  HandShape shape{grasp.hand_shape.cast<double>()};
  AssembledScene scene = assemble_hand_scene(pack.model, shape, grasp_hand_pose(grasp, hand_global),
                                             hand_material, arm_material, options);
  const Rigid world_from_object = scene.hand.wrist_frame * grasp_object_to_wrist(grasp);
  scene.object_pose = world_from_object;
  scene.items.push_back({transform_mesh(world_from_object, it->second), options.object_material, kObject});
  return scene;
}

}  // namespace handsynth

#pragma once

#include "handsynth/asset_store.hpp"
#include "handsynth/hand_model.hpp"
#include "handsynth/renderer.hpp"

#include <optional>
#include <vector>

namespace handsynth {

struct AssemblyOptions {
  bool forearm = true;
  ForearmParams forearm_params;
  bool match_socket_radius = true;  // size the forearm socket to the posed wrist ring
  bool pose_correctives = false;
  Material object_material{nullptr, Vec3(0.55, 0.45, 0.32), 0.0, 1.0};
};

struct AssembledScene {
  PosedHand hand;
  std::vector<SceneItem> items;       // hand first, then forearm, then object
  std::optional<Rigid> object_pose;   // world-from-object, interaction scenes only
};

// Hand plus optional forearm.
AssembledScene assemble_hand_scene(const ModelAsset& model, const HandShape& shape, const HandPose& pose,
                                   const Material& hand_material, const Material& arm_material,
                                   const AssemblyOptions& options = {});

// Hand posed from the grasp's (beta, theta) with `hand_global` applied on top
// of the grasp's global orientation, optional forearm, and the grasped object
// placed at wrist_frame * object_to_wrist. Throws UnresolvedReference.
AssembledScene assemble_interaction_scene(const AssetPack& pack, const GraspRecord& grasp,
                                          const Material& hand_material, const Material& arm_material,
                                          const AssemblyOptions& options = {},
                                          const Rigid& hand_global = Rigid::Identity());

// Hand pose described by a grasp record, with `hand_global` composed onto its
// global orientation and translation.
HandPose grasp_hand_pose(const GraspRecord& grasp, const Rigid& hand_global = Rigid::Identity());

Rigid grasp_object_to_wrist(const GraspRecord& grasp);

}  // namespace handsynth

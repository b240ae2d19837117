#include "handsynth/interact.hpp"
#include "handsynth/pipeline.hpp"
#include "handsynth/random.hpp"
#include "handsynth/rotation.hpp"
#include "handsynth/toy_assets.hpp"

#include "test_support.hpp"

using namespace handsynth;
using testing::error_code;

namespace {

const AssetPack& toy() {
  static const AssetPack pack = make_toy_assets(0);
  return pack;
}

Rigid random_rigid(RandomStream& rng) {
  Rigid g = Rigid::Identity();
  g.linear() = axis_angle_to_matrix(rng.unit_vector() * rng.uniform(0.0, 3.0));
  g.translation() = Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.3;
  return g;
}

const SceneItem& item_with(const AssembledScene& s, std::uint8_t id) {
  for (const auto& it : s.items)
    if (it.instance_id == id) return it;
  FAIL("missing instance");
  return s.items.front();
}

}  // namespace

TEST_CASE("items carry the fixed instance ids") {
  const auto& pack = toy();
  const AssembledScene s = assemble_interaction_scene(pack, pack.grasps[0], {}, {});
  REQUIRE(s.items.size() == 3);
  CHECK(s.items[0].instance_id == kHand);
  CHECK(s.items[1].instance_id == kForearm);
  CHECK(s.items[2].instance_id == kObject);
  AssemblyOptions no_arm;
  no_arm.forearm = false;
  CHECK(assemble_interaction_scene(pack, pack.grasps[0], {}, {}, no_arm).items.size() == 2);
  const AssembledScene h = assemble_hand_scene(pack.model, {Eigen::VectorXd::Zero(pack.model.num_shape_blendshapes())},
                                               HandPose::zero(pack.model.num_joints()), {}, {});
  CHECK(h.items.size() == 2);
  CHECK(!h.object_pose.has_value());
}

TEST_CASE("identity object_to_wrist puts the object frame on the wrist frame") {
  const auto& pack = toy();
  GraspRecord g = pack.grasps[0];
  g.object_to_wrist.setIdentity();
  const AssembledScene s = assemble_interaction_scene(pack, g, {}, {});
  REQUIRE(s.object_pose.has_value());
  CHECK((s.object_pose->matrix() - s.hand.wrist_frame.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  const Mesh& cube = pack.objects.at(g.object_id);
  const Points3d expect = transform_points(s.hand.wrist_frame, cube.vertices);
  CHECK((item_with(s, kObject).mesh.vertices - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("object moves rigidly with the hand") {
  const auto& pack = toy();
  RandomStream rng(3);
  for (const auto& grasp : pack.grasps) {
    const AssembledScene base = assemble_interaction_scene(pack, grasp, {}, {});
    const Rigid rel0 = base.hand.wrist_frame.inverse() * *base.object_pose;
    for (int i = 0; i < 10; ++i) {
      const Rigid g = random_rigid(rng);
      const AssembledScene moved = assemble_interaction_scene(pack, grasp, {}, {}, {}, g);
      const Points3d expect = transform_points(g, item_with(base, kObject).mesh.vertices);
      CHECK((item_with(moved, kObject).mesh.vertices - expect).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((transform_points(g, base.hand.vertices) - moved.hand.vertices).cwiseAbs().maxCoeff() < 1e-9);
      const Rigid rel = moved.hand.wrist_frame.inverse() * *moved.object_pose;
      CHECK((rel.matrix() - rel0.matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("grasp hand pose composes the global transform") {
  const auto& pack = toy();
  RandomStream rng(4);
  const Rigid g = random_rigid(rng);
  const HandPose base = grasp_hand_pose(pack.grasps[1]);
  const HandPose p = grasp_hand_pose(pack.grasps[1], g);
  CHECK((axis_angle_to_matrix(p.global_orient) - g.linear() * axis_angle_to_matrix(base.global_orient)).norm() <
        1e-9);
  CHECK((p.global_translation - g * base.global_translation).norm() < 1e-12);
  CHECK(p.joint_rotations == base.joint_rotations);
}

TEST_CASE("unresolved object reference") {
  const auto& pack = toy();
  GraspRecord g = pack.grasps[0];
  g.object_id = "teapot";
  CHECK(error_code([&] { assemble_interaction_scene(pack, g, {}, {}); }) == ErrorCode::UnresolvedReference);
}

TEST_CASE("rendered grasp shows hand and object with real occlusion") {
  const auto& pack = toy();
  GenerateConfig cfg;
  cfg.branch = Branch::Interact;
  cfg.width = cfg.height = 96;
  std::uint64_t both = 0, occluded_views = 0;
  for (std::uint64_t id = 0; id < 8; ++id) {
    const RenderedScene scene = render_scene(pack, cfg, id);
    std::vector<SceneItem> hand_only;
    for (const auto& it : scene.assembled.items)
      if (it.instance_id != kObject) hand_only.push_back(it);
    for (int v = 0; v < 2; ++v) {
      const auto& view = scene.views[static_cast<std::size_t>(v)];
      bool has_hand = false, has_object = false;
      for (auto m : view.render.mask.values()) {
        has_hand |= m == kHand;
        has_object |= m == kObject;
      }
      both += has_hand && has_object;
      const RenderOutput single =
          rasterize(hand_only, scene.spec.cameras[static_cast<std::size_t>(v)], scene.spec.lights, cfg.render);
      std::uint64_t covered = 0;
      for (std::size_t p = 0; p < single.mask.size(); ++p) {
        covered += single.mask.values()[p] == kHand && view.render.mask.values()[p] == kObject;
        // The object never removes geometry: every hand pixel stays foreground.
        if (single.mask.values()[p] != 0) CHECK(view.render.mask.values()[p] != 0);
      }
      occluded_views += covered > 0;
    }
  }
  CHECK(both > 0);
  CHECK(occluded_views > 0);
}

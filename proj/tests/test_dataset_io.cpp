#include "handsynth/dataset_io.hpp"
#include "handsynth/hashing.hpp"
#include "handsynth/pipeline.hpp"
#include "handsynth/png_io.hpp"
#include "handsynth/toy_assets.hpp"

#include "test_support.hpp"

#include <fstream>

using namespace handsynth;
using testing::error_code;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

const AssetPack& toy() {
  static const AssetPack pack = make_toy_assets(0);
  return pack;
}

SampleRecord toy_record(std::uint64_t scene = 2, int view = 0) {
  GenerateConfig cfg;
  cfg.width = 48;
  cfg.height = 40;
  return render_scene(toy(), cfg, scene).views[static_cast<std::size_t>(view)].record;
}

void overwrite_byte(const fs::path& p, std::size_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c = 0;
  f.read(&c, 1);
  c = static_cast<char>(c ^ 0x5a);
  f.seekp(static_cast<std::streamoff>(offset));
  f.write(&c, 1);
}

}  // namespace

TEST_CASE("sample ids") {
  CHECK(make_sample_id(3, 1) == "scene_00000003_view_1");
  std::uint64_t s = 0;
  int v = -1;
  parse_sample_id("scene_00001234_view_0", s, v);
  CHECK(s == 1234);
  CHECK(v == 0);
  CHECK(error_code([&] { parse_sample_id("scene_12_view_x", s, v); }) == ErrorCode::MissingSample);
  CHECK(error_code([&] { parse_sample_id("", s, v); }) == ErrorCode::MissingSample);
  CHECK(sample_dir("root", 7, 1) == fs::path("root") / "scene_00000007" / "view_1");
}

TEST_CASE("depth quantization") {
  CHECK(quantize_depth_mm(1.2345) == 1234);
  CHECK(quantize_depth_mm(1.0625) == 1062);  // exactly 1062.5 mm, ties to even
  CHECK(quantize_depth_mm(1.0626) == 1063);
  CHECK(quantize_depth_mm(0.0) == 0);
  CHECK(quantize_depth_mm(-1.0) == 0);
  CHECK(quantize_depth_mm(65.535) == 65535);
  CHECK(quantize_depth_mm(65.6) == 0);
  CHECK(quantize_depth_mm(std::nan("")) == 0);
  CHECK(quantize_depth_mm(std::numeric_limits<double>::infinity()) == 0);
  DepthMap d(3, 1, 1);
  d(0, 0) = 0.5f;
  d(0, 1) = 70.0f;
  d(0, 2) = 2.0004f;
  const DepthMap back = depth_from_mm(depth_to_mm(d));
  CHECK(back(0, 0) == 0.5f);
  CHECK(back(0, 1) == 0.0f);
  CHECK(std::abs(back(0, 2) - d(0, 2)) <= 0.0005f);
}

TEST_CASE("sample round trip") {
  TempDir dir("dsio_rt");
  const SampleRecord r = toy_record();
  REQUIRE(r.vertices_3d.has_value());
  const auto paths = write_sample(r, dir.path());
  CHECK(paths.size() == 4);
  for (const auto& p : paths) CHECK(fs::exists(p));
  const SampleRecord b = read_sample(dir.path(), r.sample_id());
  CHECK(b.scene_id == r.scene_id);
  CHECK(b.view == r.view);
  CHECK(b.rgb == r.rgb);
  CHECK(b.mask == r.mask);
  CHECK(b.bbox == r.bbox);
  CHECK(b.intrinsics.fx == r.intrinsics.fx);
  CHECK(b.intrinsics.cy == r.intrinsics.cy);
  CHECK(b.world_from_camera == r.world_from_camera);
  CHECK(b.beta == r.beta);
  CHECK(b.theta.flat() == r.theta.flat());
  CHECK(b.theta.global_translation == r.theta.global_translation);
  CHECK(b.joints_3d == r.joints_3d);
  CHECK(b.joints_2d == r.joints_2d);
  REQUIRE(b.vertices_3d.has_value());
  CHECK(*b.vertices_3d == *r.vertices_3d);
  CHECK(b.info == r.info);
  for (std::size_t i = 0; i < r.depth.size(); ++i) {
    CHECK(std::abs(b.depth.values()[i] - r.depth.values()[i]) <= 0.0005f + 1e-6f);
    CHECK((b.depth.values()[i] > 0) == (quantize_depth_mm(r.depth.values()[i]) > 0));
  }
  check_record(b);
  CHECK(list_samples(dir.path()) == std::vector<std::string>{r.sample_id()});
}

TEST_CASE("depth png stores 16-bit millimeters") {
  TempDir dir("dsio_png");
  const SampleRecord r = toy_record();
  write_sample(r, dir.path());
  const Image<std::uint16_t> mm = read_png_gray16(sample_dir(dir.path(), r.scene_id, r.view) / "depth.png");
  for (int row = 0; row < mm.height(); ++row)
    for (int c = 0; c < mm.width(); ++c) CHECK(mm(row, c) == quantize_depth_mm(r.depth(row, c)));
}

TEST_CASE("inconsistent records are refused") {
  TempDir dir("dsio_bad");
  SampleRecord r = toy_record();
  r.joints_2d(0, 0) += 0.75;
  CHECK(error_code([&] { write_sample(r, dir.path()); }) == ErrorCode::InvariantViolation);
  SampleRecord m = toy_record();
  for (int row = 0; row < m.mask.height(); ++row)
    for (int c = 0; c < m.mask.width(); ++c)
      if (m.mask(row, c) > 0) m.depth(row, c) = 0.0f;
  CHECK(error_code([&] { check_record(m); }) == ErrorCode::InvariantViolation);
  SampleRecord s = toy_record();
  s.mask = LabelMap(3, 3, 1);
  CHECK(error_code([&] { check_record(s); }) == ErrorCode::InvariantViolation);
  CHECK(!fs::exists(sample_dir(dir.path(), r.scene_id, r.view) / "meta.json"));
}

TEST_CASE("manifest lists every sample and detects tampering") {
  TempDir dir("dsio_manifest");
  for (std::uint64_t s = 0; s < 3; ++s)
    for (int v = 0; v < 2; ++v) write_sample(toy_record(s, v), dir.path());
  const auto entries = write_manifest(dir.path());
  CHECK(entries.size() == 6);
  CHECK(read_manifest(dir.path()) == entries);
  for (const auto& e : entries) CHECK(e.sha256.size() == 4);
  verify_manifest(dir.path());
  const fs::path rgb = sample_dir(dir.path(), 1, 1) / "rgb.png";
  CHECK(entries[3].sha256.at("rgb.png") == sha256_file(rgb));
  overwrite_byte(rgb, 60);
  CHECK(error_code([&] { verify_manifest(dir.path()); }) == ErrorCode::ManifestMismatch);
  fs::remove(rgb);
  CHECK(error_code([&] { verify_manifest(dir.path()); }) == ErrorCode::ManifestMismatch);
  TempDir empty("dsio_nomanifest");
  CHECK(error_code([&] { read_manifest(empty.path()); }) == ErrorCode::MissingManifest);
  CHECK(error_code([&] { read_sample(empty.path(), "scene_00000000_view_0"); }) == ErrorCode::MissingSample);
}

TEST_CASE("prediction files") {
  const std::string ok = R"([{"sample_id":"scene_00000000_view_0","joints":[[0,0,1],[0.1,0,1]]},
                             {"sample_id":"scene_00000000_view_1","joints":[[0,0,1]],"vertices":[[1,2,3]]}])";
  const Predictions p = parse_predictions(ok);
  REQUIRE(p.size() == 2);
  CHECK(p.at("scene_00000000_view_0").joints.rows() == 2);
  CHECK(p.at("scene_00000000_view_0").joints(1, 0) == 0.1);
  CHECK(!p.at("scene_00000000_view_0").vertices.has_value());
  CHECK(p.at("scene_00000000_view_1").vertices->row(0) == Eigen::RowVector3d(1, 2, 3));
  CHECK(error_code([] { parse_predictions(R"([{"sample_id":"a","joints":[[0,0,1]]},{"sample_id":"a","joints":[[0,0,1]]}])"); }) ==
        ErrorCode::DuplicateId);
  CHECK(error_code([] { parse_predictions("[{"); }) == ErrorCode::ParseError);
  CHECK(error_code([] { parse_predictions(R"({"sample_id":"a"})"); }) == ErrorCode::ParseError);
  CHECK(error_code([] { parse_predictions(R"([{"sample_id":"a","joints":[[0,0]]}])"); }) == ErrorCode::ParseError);
  CHECK(error_code([] { parse_predictions(R"([{"sample_id":"a","joints":[[0,"x",1]]}])"); }) == ErrorCode::ParseError);
  CHECK(error_code([] { parse_predictions(R"([{"joints":[[0,0,1]]}])"); }) == ErrorCode::ParseError);

  TempDir dir("dsio_pred");
  write_predictions(dir.path() / "p.json", p);
  const Predictions q = load_predictions(dir.path() / "p.json");
  CHECK(q.size() == 2);
  CHECK(q.at("scene_00000000_view_0").joints == p.at("scene_00000000_view_0").joints);
  CHECK(error_code([&] { load_predictions(dir.path() / "missing.json"); }) == ErrorCode::IoError);
}

TEST_CASE("ground truth predictions mirror the dataset") {
  TempDir dir("dsio_gt");
  const SampleRecord r = toy_record();
  write_sample(r, dir.path());
  const Predictions gt = ground_truth_predictions(dir.path(), true);
  REQUIRE(gt.size() == 1);
  CHECK(gt.at(r.sample_id()).joints == r.joints_3d);
  CHECK(gt.at(r.sample_id()).vertices.has_value());
  CHECK(!ground_truth_predictions(dir.path(), false).at(r.sample_id()).vertices.has_value());
}

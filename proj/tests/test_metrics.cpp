#include "handsynth/metrics.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

using namespace handsynth;
using testing::error_code;

namespace {

Points3d pts(std::initializer_list<std::array<double, 3>> rows) {
  Points3d p(static_cast<Eigen::Index>(rows.size()), 3);
  Eigen::Index i = 0;
  for (const auto& r : rows) p.row(i++) << r[0], r[1], r[2];
  return p;
}

double rms_m(const Points3d& a, const Points3d& b) {
  return std::sqrt((a - b).rowwise().squaredNorm().mean());
}

}  // namespace

TEST_CASE("mpjpe examples") {
  RandomStream rng(1);
  const Points3d gt = fixtures::random_joints(rng);
  CHECK(mpjpe(gt, gt) == 0.0);
  Points3d shifted = gt;
  shifted.rowwise() += Eigen::RowVector3d(0.003, 0.004, 0.0);
  CHECK(mpjpe(shifted, gt) == doctest::Approx(5.0).epsilon(1e-12));
  for (int i = 0; i < 100; ++i) {
    const Points3d a = fixtures::random_joints(rng);
    const Points3d b = fixtures::random_joints(rng);
    CHECK(std::abs(mpjpe(a, b) - oracle::mean_distance_mm(a, b)) < 1e-12);
  }
  CHECK(error_code([&] { mpjpe(gt, gt.topRows(20)); }) == ErrorCode::DimensionMismatch);
  const auto e = point_errors_mm(shifted, gt);
  CHECK(e.size() == 21);
  CHECK(e[7] == doctest::Approx(5.0));
}

TEST_CASE("sta alignment examples") {
  const AlignmentResult a = sta_align(pts({{0, 0, 0}, {1, 0, 0}}), pts({{0, 0, 0}, {2, 0, 0}}));
  CHECK(a.scale == doctest::Approx(2.0));
  CHECK(a.translation.norm() < 1e-12);
  CHECK(a.residual_rms < 1e-12);
  CHECK(a.rotation == Mat3::Identity());

  RandomStream rng(2);
  const Points3d gt = fixtures::random_joints(rng);
  Points3d pred = 0.5 * gt;
  pred.rowwise() += Eigen::RowVector3d(1, 2, 3);
  const AlignmentResult b = sta_align(pred, gt);
  CHECK(b.scale == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((b.translation - (-2.0 * Vec3(1, 2, 3))).norm() < 1e-12);
  CHECK(b.residual_rms < 1e-12);
  const AlignmentResult c = sta_align(gt, gt);
  CHECK(c.scale == doctest::Approx(1.0));
  CHECK(c.residual_rms < 1e-15);
  CHECK(error_code([] { sta_align(pts({{1, 1, 1}, {1, 1, 1}}), pts({{0, 0, 0}, {1, 0, 0}})); }) ==
        ErrorCode::DegenerateInput);
  const AlignmentResult anti = sta_align(pts({{0, 0, 0}, {1, 0, 0}}), pts({{1, 0, 0}, {0, 0, 0}}));
  CHECK(anti.scale == 1e-9);
}

TEST_CASE("alignment residual matches a recomputed RMS") {
  RandomStream rng(3);
  for (int i = 0; i < 200; ++i) {
    const Points3d gt = fixtures::random_joints(rng);
    const Points3d pred = fixtures::random_prediction(rng, gt);
    const AlignmentResult pa = procrustes_align(pred, gt);
    const AlignmentResult sta = sta_align(pred, gt);
    CHECK(std::abs(pa.residual_rms - rms_m(pa.apply(pred), gt)) < 1e-12);
    CHECK(std::abs(sta.residual_rms - rms_m(sta.apply(pred), gt)) < 1e-12);
    CHECK(std::abs(pa.rotation.determinant() - 1.0) < 1e-9);
    CHECK((pa.rotation.transpose() * pa.rotation - Mat3::Identity()).norm() < 1e-9);
    // Least-squares optimality nests: similarity <= scale+translation <= identity.
    CHECK(pa.residual_rms <= sta.residual_rms + 1e-15);
    CHECK(sta.residual_rms <= rms_m(pred, gt) + 1e-15);
  }
}

TEST_CASE("procrustes recovers exact similarity transforms") {
  RandomStream rng(4);
  for (int i = 0; i < 200; ++i) {
    const Points3d gt = fixtures::random_joints(rng);
    const fixtures::Similarity s = fixtures::random_similarity(rng);
    const Points3d pred = s.apply(gt);
    const AlignmentResult a = procrustes_align(pred, gt);
    CHECK(a.residual_rms < 1e-9);
    CHECK(a.scale == doctest::Approx(1.0 / s.scale).epsilon(1e-9));
    CHECK((a.rotation - s.rotation.transpose()).norm() < 1e-9);
    CHECK(pa_mpjpe(pred, gt) < 1e-6);
  }
}

TEST_CASE("procrustes matches a numeric search on four points") {
  RandomStream rng(5);
  for (int i = 0; i < 5; ++i) {
    const Points3d gt = fixtures::random_joints(rng, 4);
    Points3d pred = fixtures::random_similarity(rng).apply(gt);
    pred.row(static_cast<Eigen::Index>(rng.uniform_index(4))) += 0.02 * rng.unit_vector().transpose();
    const double closed = procrustes_align(pred, gt).residual_rms;
    const double searched = oracle::similarity_rms_search(pred, gt, 16);
    CHECK(closed > 0.0);
    CHECK(std::abs(closed - searched) <= 0.02 * searched);
  }
}

TEST_CASE("reflection trap yields a proper rotation") {
  RandomStream rng(6);
  const Points3d gt = fixtures::random_joints(rng);
  Points3d mirror = gt;
  mirror.col(0) *= -1.0;
  const AlignmentResult a = procrustes_align(mirror, gt);
  CHECK(a.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(a.residual_rms > 1e-4);
}

TEST_CASE("procrustes rejects degenerate configurations") {
  CHECK(error_code([] { procrustes_align(pts({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}), pts({{0, 0, 0}, {0, 1, 0}, {1, 0, 0}})); }) ==
        ErrorCode::DegenerateInput);
  CHECK(error_code([] { procrustes_align(pts({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), pts({{0, 0, 0}, {0, 1, 0}, {1, 0, 0}})); }) ==
        ErrorCode::DegenerateInput);
}

TEST_CASE("alignment invariances") {
  RandomStream rng(7);
  for (int i = 0; i < 100; ++i) {
    const Points3d gt = fixtures::random_joints(rng);
    const Points3d pred = fixtures::random_prediction(rng, gt);
    const double pa = pa_mpjpe(pred, gt);
    CHECK(std::abs(pa_mpjpe(fixtures::random_similarity(rng).apply(pred), gt) - pa) < 1e-9);
    fixtures::Similarity st;
    st.scale = rng.uniform(0.5, 2.0);
    st.translation = 0.2 * rng.unit_vector();
    const double sta = sta_mpjpe(pred, gt);
    CHECK(std::abs(sta_mpjpe(st.apply(pred), gt) - sta) < 1e-9);
  }
  const Points3d gt = fixtures::random_joints(rng);
  const Points3d pred = fixtures::random_prediction(rng, gt);
  fixtures::Similarity r;
  r.rotation = axis_angle_to_matrix(Vec3(0.3, -0.5, 0.2));
  CHECK(std::abs(sta_mpjpe(r.apply(pred), gt) - sta_mpjpe(pred, gt)) > 1e-3);
}

TEST_CASE("pck auc examples") {
  CHECK(pck_auc(std::vector<double>(21, 0.0)) == doctest::Approx(1.0));
  CHECK(std::abs(pck_auc(std::vector<double>(21, 10.0)) - 0.8) <= 0.01);
  CHECK(pck_auc(std::vector<double>(5, 80.0)) == 0.0);
  // Two thresholds on a coarse grid: PCK = 0, 0.5, 1 at t = 0, 25, 50.
  CHECK(pck_auc({10.0, 30.0}, 50.0, 2) == doctest::Approx(0.5));
  CHECK(pck_auc({10.0, 30.0}, 50.0, 100) == doctest::Approx(1.0 - 20.0 / 50.0).epsilon(0.01));
  CHECK(error_code([] { pck_auc({}); }) == ErrorCode::EmptyInput);
  CHECK(error_code([] { pck_auc({-1.0}); }) == ErrorCode::DegenerateInput);
  RandomStream rng(8);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> e(63);
    for (auto& x : e) x = rng.uniform(0.0, 50.0);
    const double mean = compensated_mean(e);
    CHECK(std::abs(pck_auc(e) - (1.0 - mean / 50.0)) <= 1.0 / 100.0);
  }
}

TEST_CASE("fscore examples") {
  RandomStream rng(9);
  const Points3d gt = fixtures::random_joints(rng, 200);
  CHECK(fscore(gt, gt, 5.0) == 1.0);
  CHECK(fscore(gt, gt, 0.0) == 1.0);
  Points3d shifted = gt;
  shifted.rowwise() += Eigen::RowVector3d(0.006, 0.0, 0.0);
  const Points3d sparse = pts({{0, 0, 0}, {1, 0, 0}});
  const Points3d sparse_shift = pts({{0, 0, 0.006}, {1, 0, 0.006}});
  CHECK(fscore(sparse_shift, sparse, 5.0) == 0.0);
  CHECK(fscore(sparse_shift, sparse, 15.0) == 1.0);
  CHECK(fscore(shifted, gt, 15.0) == 1.0);
  CHECK(fscore(shifted, gt, 5.0, FscoreAlign::Procrustes) == 1.0);
  const Points3d p2 = pts({{0, 0, 0}, {0.5, 0, 0}});
  const Points3d g2 = pts({{0, 0, 0.001}, {-0.5, 0, 0}});
  CHECK(fscore(p2, g2, 5.0) == doctest::Approx(0.5));
  CHECK(error_code([&] { fscore(Points3d(0, 3), gt, 5.0); }) == ErrorCode::EmptyInput);
}

TEST_CASE("fscore is symmetric and monotone in the threshold") {
  RandomStream rng(10);
  for (int i = 0; i < 50; ++i) {
    const Points3d a = fixtures::random_joints(rng, 60);
    const Points3d b = fixtures::add_noise(rng, fixtures::random_joints(rng, 45), 0.001);
    double prev = 0.0;
    for (double tau = 0.0; tau <= 100.0; tau += 2.5) {
      const double f = fscore(a, b, tau);
      CHECK(f == fscore(b, a, tau));
      CHECK(f >= prev);
      CHECK(f <= 1.0);
      prev = f;
    }
  }
}

TEST_CASE("compensated mean") {
  CHECK(compensated_mean({}) == 0.0);
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_mean(v) == 0.5);
}

TEST_CASE("evaluate: identical predictions") {
  RandomStream rng(11);
  Predictions gt;
  for (int i = 0; i < 4; ++i) {
    gt[make_sample_id(static_cast<std::uint64_t>(i), 0)] = {fixtures::random_joints(rng),
                                                           fixtures::random_joints(rng, 100)};
  }
  const MetricsReport r = evaluate(gt, gt);
  CHECK(r.count == 4);
  CHECK(r.mpjpe == 0.0);
  CHECK(r.pa_mpjpe < 1e-9);
  CHECK(r.auc_j == 1.0);
  REQUIRE(r.auc_v.has_value());
  CHECK(*r.auc_v == 1.0);
  CHECK(*r.f5 == 1.0);
  CHECK(*r.f_al15 == 1.0);
  CHECK(*r.pa_mpvpe < 1e-9);
}

TEST_CASE("evaluate: rigid motion is removed only by procrustes") {
  RandomStream rng(12);
  Predictions gt, pred;
  fixtures::Similarity g;
  g.rotation = axis_angle_to_matrix(Vec3(0.2, 0.4, -0.1));
  g.translation = Vec3(0.01, -0.02, 0.03);
  for (int i = 0; i < 3; ++i) {
    const std::string id = make_sample_id(static_cast<std::uint64_t>(i), 1);
    gt[id] = {fixtures::random_joints(rng), std::nullopt};
    pred[id] = {g.apply(gt[id].joints), std::nullopt};
  }
  const MetricsReport r = evaluate(gt, pred);
  CHECK(r.mpjpe > 0.0);
  CHECK(r.sta_mpjpe > 0.0);
  CHECK(r.pa_mpjpe < 1e-9);
  CHECK(!r.pa_mpvpe.has_value());
  CHECK(!r.f5.has_value());
  CHECK(r.samples.size() == 3);
  EvalOptions need_mesh;
  need_mesh.require_mesh = true;
  CHECK(error_code([&] { evaluate(gt, pred, need_mesh); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("evaluate: missing and mismatched samples") {
  RandomStream rng(13);
  Predictions gt{{"scene_00000000_view_0", {fixtures::random_joints(rng), std::nullopt}},
                 {"scene_00000000_view_1", {fixtures::random_joints(rng), std::nullopt}}};
  Predictions pred = gt;
  pred.erase("scene_00000000_view_1");
  CHECK(error_code([&] { evaluate(gt, pred); }) == ErrorCode::MissingSample);
  pred = gt;
  pred["scene_00000000_view_1"].joints = fixtures::random_joints(rng, 20);
  CHECK(error_code([&] { evaluate(gt, pred); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("pooled and per-sample auc") {
  Predictions gt, pred;
  const Points3d base = pts({{0, 0, 0.5}, {0.05, 0, 0.5}, {0, 0.05, 0.5}, {0, 0, 0.55}});
  Points3d bent = base;
  bent(0, 0) += 0.02;
  gt["a"] = {base, std::nullopt};
  gt["b"] = {base, std::nullopt};
  gt["c"] = {base, std::nullopt};
  pred["a"] = {base, std::nullopt};
  pred["b"] = {bent, std::nullopt};
  pred["c"] = {bent, std::nullopt};
  EvalOptions opts;
  const MetricsReport pooled = evaluate(gt, pred, opts);
  opts.pooled_auc = false;
  const MetricsReport per = evaluate(gt, pred, opts);
  const std::vector<double> eb = point_errors_mm(procrustes_align(bent, base).apply(bent), base);
  std::vector<double> all(4, 0.0);
  all.insert(all.end(), eb.begin(), eb.end());
  all.insert(all.end(), eb.begin(), eb.end());
  CHECK(pooled.auc_j == doctest::Approx(pck_auc(all)));
  CHECK(per.auc_j == doctest::Approx((1.0 + 2.0 * pck_auc(eb)) / 3.0));
  CHECK(per.mpjpe == pooled.mpjpe);
  CHECK(pooled.mpjpe == doctest::Approx(2.0 * 5.0 / 3.0));
}

TEST_CASE("report rendering and units") {
  Predictions gt{{"a", {pts({{0, 0, 0.5}, {0.05, 0, 0.5}, {0, 0.05, 0.5}}), std::nullopt}}};
  Predictions pred = gt;
  pred["a"].joints.rowwise() += Eigen::RowVector3d(0.0073, 0, 0);
  const MetricsReport r = evaluate(gt, pred);
  const auto mm = nlohmann::json::parse(r.to_json("mm"));
  const auto cm = nlohmann::json::parse(r.to_json("cm", false));
  CHECK(mm["mpjpe"].get<double>() == doctest::Approx(7.3));
  CHECK(cm["mpjpe"].get<double>() == doctest::Approx(0.73));
  CHECK(cm["auc_j"].get<double>() == mm["auc_j"].get<double>());
  CHECK(cm["pa_mpvpe"].is_null());
  CHECK(!cm.contains("samples"));
  CHECK(mm["samples"].size() == 1);
  CHECK(r.to_text("cm").find("0.7300 cm") != std::string::npos);
  CHECK(error_code([&] { r.to_json("in"); }) == ErrorCode::ConfigError);
}

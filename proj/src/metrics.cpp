#include "handsynth/metrics.hpp"

#include "handsynth/error.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace handsynth {
namespace {

constexpr double kMinStaScale = 1e-9;

void check_pair(const Points3d& pred, const Points3d& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != 3 || gt.cols() != 3) {
    throw Error(ErrorCode::DimensionMismatch, "prediction has " + std::to_string(pred.rows()) +
                                                  " points, ground truth " + std::to_string(gt.rows()));
  }
  if (pred.rows() == 0) throw Error(ErrorCode::EmptyInput, "no points to compare");
}

double rms_residual(const AlignmentResult& a, const Points3d& pred, const Points3d& gt) {
  const Points3d aligned = a.apply(pred);
  return std::sqrt((aligned - gt).rowwise().squaredNorm().mean());
}

double unit_scale(const std::string& units) {
  if (units == "mm") return 1.0;
  if (units == "cm") return 0.1;
  throw Error(ErrorCode::ConfigError, "unknown units '" + units + "' (expected mm or cm)");
}

std::optional<double> mean_if(const std::vector<SampleMetrics>& s, std::optional<double> SampleMetrics::*field) {
  std::vector<double> v;
  for (const auto& m : s) {
    if (!(m.*field)) return std::nullopt;
    v.push_back(*(m.*field));
  }
  if (v.empty()) return std::nullopt;
  return compensated_mean(v);
}

}  // namespace

Points3d AlignmentResult::apply(const Points3d& points) const {
  Points3d out(points.rows(), 3);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = (scale * (rotation * Vec3(points.row(i).transpose())) + translation).transpose();
  }
  return out;
}

std::vector<double> point_errors_mm(const Points3d& pred, const Points3d& gt) {
  check_pair(pred, gt);
  std::vector<double> e(static_cast<std::size_t>(pred.rows()));
  for (Eigen::Index i = 0; i < pred.rows(); ++i) e[static_cast<std::size_t>(i)] = (pred.row(i) - gt.row(i)).norm() * 1000.0;
  return e;
}

double mpjpe(const Points3d& pred, const Points3d& gt) { return compensated_mean(point_errors_mm(pred, gt)); }

AlignmentResult sta_align(const Points3d& pred, const Points3d& gt) {
  check_pair(pred, gt);
  const Eigen::RowVector3d mp = pred.colwise().mean();
  const Eigen::RowVector3d mg = gt.colwise().mean();
  const Points3d pc = pred.rowwise() - mp;
  const Points3d gc = gt.rowwise() - mg;
  const double var = pc.squaredNorm();
  if (!(var > 0.0)) throw Error(ErrorCode::DegenerateInput, "all predicted points coincide");
  AlignmentResult a;
  a.scale = std::max((pc.array() * gc.array()).sum() / var, kMinStaScale);
  a.translation = (mg - a.scale * mp).transpose();
  a.residual_rms = rms_residual(a, pred, gt);
  AlignmentResult identity;
  identity.residual_rms = rms_residual(identity, pred, gt);
  return identity.residual_rms <= a.residual_rms ? identity : a;
}

AlignmentResult procrustes_align(const Points3d& pred, const Points3d& gt) {
  check_pair(pred, gt);
  const Eigen::RowVector3d mp = pred.colwise().mean();
  const Eigen::RowVector3d mg = gt.colwise().mean();
  const Points3d pc = pred.rowwise() - mp;
  const Points3d gc = gt.rowwise() - mg;
  const double var = pc.squaredNorm();
  if (pred.rows() < 3 || !(var > 0.0)) throw Error(ErrorCode::DegenerateInput, "too few distinct predicted points");
  Eigen::JacobiSVD<Eigen::MatrixXd> spread(pc);
  const auto sv = spread.singularValues();
  if (sv[1] <= 1e-12 * sv[0]) throw Error(ErrorCode::DegenerateInput, "predicted points are collinear");

  const Mat3 cov = gc.transpose() * pc;  // sum of g_i p_i^T
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 d = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) d[2] = -1.0;
  AlignmentResult a;
  a.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  a.scale = svd.singularValues().dot(d) / var;
  a.translation = mg.transpose() - a.scale * a.rotation * mp.transpose();
  a.residual_rms = rms_residual(a, pred, gt);
  // The nested families are candidates too, so roundoff never makes the
  // similarity fit worse than scale+translation or the identity.
  const AlignmentResult nested = sta_align(pred, gt);
  return nested.residual_rms <= a.residual_rms ? nested : a;
}

double sta_mpjpe(const Points3d& pred, const Points3d& gt) { return mpjpe(sta_align(pred, gt).apply(pred), gt); }

double pa_mpjpe(const Points3d& pred, const Points3d& gt) {
  return mpjpe(procrustes_align(pred, gt).apply(pred), gt);
}

double pck_auc(const std::vector<double>& errors_mm, double t_max_mm, int steps) {
  if (errors_mm.empty()) throw Error(ErrorCode::EmptyInput, "pck_auc needs at least one error");
  if (!(t_max_mm > 0.0) || steps < 1) throw Error(ErrorCode::DegenerateInput, "pck_auc needs t_max > 0 and steps >= 1");
  std::vector<double> sorted = errors_mm;
  for (double e : sorted) {
    if (!(e >= 0.0)) throw Error(ErrorCode::DegenerateInput, "errors must be non-negative");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto pck = [&](double t) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin()) / n;
  };
  double area = 0.0;
  double prev = pck(0.0);
  for (int i = 1; i <= steps; ++i) {
    const double cur = pck(t_max_mm * i / steps);
    area += 0.5 * (prev + cur);
    prev = cur;
  }
  return area / steps;
}

double fscore(const Points3d& pred_in, const Points3d& gt, double tau_mm, FscoreAlign align) {
  if (pred_in.rows() == 0 || gt.rows() == 0) throw Error(ErrorCode::EmptyInput, "fscore needs non-empty point sets");
  const Points3d pred = align == FscoreAlign::Procrustes ? procrustes_align(pred_in, gt).apply(pred_in) : pred_in;
  const double tau = tau_mm / 1000.0;
  const double tau2 = tau * tau;
  auto fraction_matched = [tau2](const Points3d& from, const Points3d& to) {
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < from.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.rows() && best > tau2; ++j) best = std::min(best, (from.row(i) - to.row(j)).squaredNorm());
      if (best <= tau2) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(from.rows());
  };
  const double precision = fraction_matched(pred, gt);
  const double recall = fraction_matched(gt, pred);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double compensated_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return (sum + c) / static_cast<double>(values.size());
}

MetricsReport evaluate(const Predictions& ground_truth, const Predictions& predictions, const EvalOptions& options) {
  if (ground_truth.empty()) throw Error(ErrorCode::EmptyInput, "no ground-truth samples");
  bool mesh = true;
  for (const auto& [id, gt] : ground_truth) {
    const auto it = predictions.find(id);
    if (it == predictions.end()) throw Error(ErrorCode::MissingSample, "no prediction for " + id);
    if (it->second.joints.rows() != gt.joints.rows()) {
      throw Error(ErrorCode::DimensionMismatch, id + ": prediction has " + std::to_string(it->second.joints.rows()) +
                                                    " joints, ground truth " + std::to_string(gt.joints.rows()));
    }
    const bool have = gt.vertices && it->second.vertices;
    if (have && it->second.vertices->rows() != gt.vertices->rows()) {
      throw Error(ErrorCode::DimensionMismatch, id + ": vertex counts differ");
    }
    if (!have && options.require_mesh) throw Error(ErrorCode::DimensionMismatch, id + ": vertices missing");
    mesh = mesh && have;
  }

  MetricsReport report;
  std::vector<double> pooled_j, pooled_v, auc_j_per, auc_v_per;
  for (const auto& [id, gt] : ground_truth) {
    const Prediction& pred = predictions.at(id);
    SampleMetrics m;
    m.sample_id = id;
    m.mpjpe = mpjpe(pred.joints, gt.joints);
    m.sta_mpjpe = sta_mpjpe(pred.joints, gt.joints);
    const auto pa_errors = point_errors_mm(procrustes_align(pred.joints, gt.joints).apply(pred.joints), gt.joints);
    m.pa_mpjpe = compensated_mean(pa_errors);
    pooled_j.insert(pooled_j.end(), pa_errors.begin(), pa_errors.end());
    auc_j_per.push_back(pck_auc(pa_errors, options.auc_max_mm, options.auc_steps));
    if (mesh) {
      const Points3d& pv = *pred.vertices;
      const Points3d& gv = *gt.vertices;
      const auto v_errors = point_errors_mm(procrustes_align(pv, gv).apply(pv), gv);
      m.pa_mpvpe = compensated_mean(v_errors);
      pooled_v.insert(pooled_v.end(), v_errors.begin(), v_errors.end());
      auc_v_per.push_back(pck_auc(v_errors, options.auc_max_mm, options.auc_steps));
      m.f5 = fscore(pv, gv, 5.0);
      m.f15 = fscore(pv, gv, 15.0);
      m.f_al5 = fscore(pv, gv, 5.0, FscoreAlign::Procrustes);
      m.f_al15 = fscore(pv, gv, 15.0, FscoreAlign::Procrustes);
    }
    report.samples.push_back(std::move(m));
  }

  auto mean_of = [&](double SampleMetrics::*field) {
    std::vector<double> v;
    for (const auto& m : report.samples) v.push_back(m.*field);
    return compensated_mean(v);
  };
  report.count = report.samples.size();
  report.mpjpe = mean_of(&SampleMetrics::mpjpe);
  report.sta_mpjpe = mean_of(&SampleMetrics::sta_mpjpe);
  report.pa_mpjpe = mean_of(&SampleMetrics::pa_mpjpe);
  report.auc_j = options.pooled_auc ? pck_auc(pooled_j, options.auc_max_mm, options.auc_steps)
                                    : compensated_mean(auc_j_per);
  if (mesh) {
    report.pa_mpvpe = mean_if(report.samples, &SampleMetrics::pa_mpvpe);
    report.auc_v = options.pooled_auc ? pck_auc(pooled_v, options.auc_max_mm, options.auc_steps)
                                      : compensated_mean(auc_v_per);
    report.f5 = mean_if(report.samples, &SampleMetrics::f5);
    report.f15 = mean_if(report.samples, &SampleMetrics::f15);
    report.f_al5 = mean_if(report.samples, &SampleMetrics::f_al5);
    report.f_al15 = mean_if(report.samples, &SampleMetrics::f_al15);
  }
  return report;
}

MetricsReport evaluate_dataset(const std::filesystem::path& dataset_dir, const Predictions& predictions,
                               const EvalOptions& options) {
  const Predictions gt = ground_truth_predictions(dataset_dir, true);
  if (gt.empty()) throw Error(ErrorCode::MissingSample, "no samples found in " + dataset_dir.string());
  return evaluate(gt, predictions, options);
}

std::string MetricsReport::to_json(const std::string& units, bool include_samples) const {
  const double k = unit_scale(units);
  auto opt = [](std::optional<double> v, double scale) {
    return v ? nlohmann::json(*v * scale) : nlohmann::json(nullptr);
  };
  nlohmann::json j = {{"units", units},
                      {"count", count},
                      {"mpjpe", mpjpe * k},
                      {"sta_mpjpe", sta_mpjpe * k},
                      {"pa_mpjpe", pa_mpjpe * k},
                      {"pa_mpvpe", opt(pa_mpvpe, k)},
                      {"auc_j", auc_j},
                      {"auc_v", opt(auc_v, 1.0)},
                      {"f5", opt(f5, 1.0)},
                      {"f15", opt(f15, 1.0)},
                      {"f_al5", opt(f_al5, 1.0)},
                      {"f_al15", opt(f_al15, 1.0)}};
  if (include_samples) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : samples) {
      arr.push_back({{"sample_id", s.sample_id},
                     {"mpjpe", s.mpjpe * k},
                     {"sta_mpjpe", s.sta_mpjpe * k},
                     {"pa_mpjpe", s.pa_mpjpe * k},
                     {"pa_mpvpe", opt(s.pa_mpvpe, k)},
                     {"f5", opt(s.f5, 1.0)},
                     {"f15", opt(s.f15, 1.0)},
                     {"f_al5", opt(s.f_al5, 1.0)},
                     {"f_al15", opt(s.f_al15, 1.0)}});
    }
    j["samples"] = std::move(arr);
  }
  return j.dump(2);
}

std::string MetricsReport::to_text(const std::string& units) const {
  const double k = unit_scale(units);
  std::string out;
  char line[128];
  auto row = [&](const char* name, std::optional<double> v, const char* unit) {
    if (v) {
      std::snprintf(line, sizeof(line), "%-12s %12.4f %s\n", name, *v, unit);
    } else {
      std::snprintf(line, sizeof(line), "%-12s %12s\n", name, "n/a");
    }
    out += line;
  };
  std::snprintf(line, sizeof(line), "%-12s %12zu\n", "samples", count);
  out += line;
  const char* u = units.c_str();
  row("MPJPE", mpjpe * k, u);
  row("STA-MPJPE", sta_mpjpe * k, u);
  row("PA-MPJPE", pa_mpjpe * k, u);
  row("PA-MPVPE", pa_mpvpe ? std::optional<double>(*pa_mpvpe * k) : std::nullopt, u);
  row("AUC_J", auc_j, "");
  row("AUC_V", auc_v, "");
  row("F@5", f5, "");
  row("F@15", f15, "");
  row("F-al@5", f_al5, "");
  row("F-al@15", f_al15, "");
  return out;
}

}  // namespace handsynth

#include "handsynth/asset_store.hpp"
#include "handsynth/dataset_io.hpp"
#include "handsynth/error.hpp"
#include "handsynth/metrics.hpp"
#include "handsynth/pipeline.hpp"
#include "handsynth/toy_assets.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace handsynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::MissingSample:
    case ErrorCode::DuplicateId:
    case ErrorCode::MissingManifest:
    case ErrorCode::ManifestMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::MissingBlob:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::InvalidWeights:
    case ErrorCode::InvalidAsset:
    case ErrorCode::IoError:
    case ErrorCode::UnresolvedReference:
    case ErrorCode::EmptyBank:
    case ErrorCode::EmptyPool:
    case ErrorCode::SourceTooSmall:
    case ErrorCode::EmptyInput:
      return kExitUser;
    default:
      return kExitInternal;
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
}

struct GenerateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::uint64_t> n_scenes;
  std::optional<std::string> branch;
  std::optional<std::string> assets;
  bool overwrite = false;
  bool print_config = false;
  bool quiet = false;
};

int run_generate(const GenerateArgs& a) {
  GenerateConfig cfg = a.config.empty() ? GenerateConfig{} : load_generate_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.workers) cfg.workers = *a.workers;
  if (a.out) cfg.out = *a.out;
  if (a.n_scenes) cfg.n_scenes = *a.n_scenes;
  if (a.assets) cfg.assets = *a.assets;
  if (a.branch) {
    if (*a.branch == "single") {
      cfg.branch = Branch::Single;
    } else if (*a.branch == "interact") {
      cfg.branch = Branch::Interact;
    } else {
      throw Error(ErrorCode::ConfigError, "--branch must be single or interact");
    }
  }
  if (a.overwrite) cfg.overwrite = true;
  if (cfg.workers < 1) throw Error(ErrorCode::ConfigError, "--workers must be >= 1");
  if (a.print_config) {
    std::cout << generate_config_to_json(cfg) << "\n";
    return kExitOk;
  }
  const AssetPack pack = load_assets(cfg);
  const auto start = std::chrono::steady_clock::now();
  ProgressFn progress;
  if (!a.quiet) {
    progress = [](std::uint64_t done, std::uint64_t total) {
      if (done == total || done % 25 == 0) std::fprintf(stderr, "\r%llu/%llu scenes", static_cast<unsigned long long>(done),
                                                        static_cast<unsigned long long>(total));
      if (done == total) std::fprintf(stderr, "\n");
    };
  }
  const GenerateResult r = generate_dataset(cfg, pack, progress);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("wrote %llu scenes, %llu samples to %s in %.1f s (seed %llu, %d workers)\n",
              static_cast<unsigned long long>(r.scenes), static_cast<unsigned long long>(r.samples),
              cfg.out.string().c_str(), secs, static_cast<unsigned long long>(cfg.seed), cfg.workers);
  return kExitOk;
}

struct EvalArgs {
  std::string dataset;
  std::string predictions;
  std::string units = "mm";
  bool aligned_fscore = true;
  double auc_tmax = kDefaultAucMaxMm;
  int auc_steps = kDefaultAucSteps;
  bool per_sample_auc = false;
  std::string json_out;
};

int run_eval(const EvalArgs& a) {
  if (a.units != "mm" && a.units != "cm") throw Error(ErrorCode::ConfigError, "--units must be mm or cm");
  const Predictions preds = load_predictions(a.predictions);
  EvalOptions opts;
  opts.auc_max_mm = a.auc_tmax;
  opts.auc_steps = a.auc_steps;
  opts.pooled_auc = !a.per_sample_auc;
  MetricsReport report = evaluate_dataset(a.dataset, preds, opts);
  if (!a.aligned_fscore) {
    report.f_al5.reset();
    report.f_al15.reset();
    for (auto& s : report.samples) {
      s.f_al5.reset();
      s.f_al15.reset();
    }
  }
  std::cout << report.to_text(a.units);
  if (!a.json_out.empty()) write_text_file(a.json_out, report.to_json(a.units) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic RGB-D hand dataset generator and evaluator"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Render a dataset from a JSON config");
  g->add_option("config", gen.config, "Generation config (JSON); defaults apply when omitted");
  g->add_option("--seed", gen.seed, "Master seed (overrides the config)");
  g->add_option("--workers", gen.workers, "Worker threads (overrides the config)");
  g->add_option("--out", gen.out, "Output directory (overrides the config)");
  g->add_option("--n-scenes", gen.n_scenes, "Scene count (overrides the config)");
  g->add_option("--branch", gen.branch, "single or interact (overrides the config)");
  g->add_option("--assets", gen.assets, "Asset-pack directory or 'toy' (overrides the config)");
  g->add_flag("--overwrite", gen.overwrite, "Replace an existing dataset in the output directory");
  g->add_flag("--print-config", gen.print_config, "Print the effective config and exit");
  g->add_flag("-q,--quiet", gen.quiet, "No progress output");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predictions against a dataset");
  e->add_option("dataset", ev.dataset, "Dataset directory")->required();
  e->add_option("predictions", ev.predictions, "Predictions JSON")->required();
  e->add_option("--units", ev.units, "mm or cm")->capture_default_str();
  e->add_option("--auc-tmax", ev.auc_tmax, "Upper PCK threshold in mm")->capture_default_str();
  e->add_option("--auc-steps", ev.auc_steps, "Trapezoid steps for the AUC")->capture_default_str();
  e->add_flag("--per-sample-auc", ev.per_sample_auc, "Average per-sample AUCs instead of pooling joint errors");
  e->add_flag("!--no-aligned-fscore", ev.aligned_fscore, "Omit the post-alignment F-scores");
  e->add_option("--json", ev.json_out, "Also write the full report as JSON");

  std::string stats_dir;
  bool stats_json = false;
  auto* s = app.add_subcommand("stats", "Summarize a generated dataset");
  s->add_option("dataset", stats_dir, "Dataset directory")->required();
  s->add_flag("--json", stats_json, "Print JSON instead of a table");

  std::string toy_out;
  std::uint64_t toy_seed = 0;
  auto* t = app.add_subcommand("make-toy-assets", "Write the built-in toy asset pack");
  t->add_option("--out", toy_out, "Output directory")->required();
  t->add_option("--seed", toy_seed, "Toy asset seed")->capture_default_str();

  std::string gt_dataset, gt_out;
  bool gt_vertices = true;
  auto* d = app.add_subcommand("dump-gt", "Write a dataset's ground truth as a predictions file");
  d->add_option("dataset", gt_dataset, "Dataset directory")->required();
  d->add_option("--out", gt_out, "Output predictions JSON")->required();
  d->add_flag("!--no-vertices", gt_vertices, "Joints only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*g) return run_generate(gen);
    if (*e) return run_eval(ev);
    if (*s) {
      const DatasetStats st = compute_stats(stats_dir);
      std::cout << (stats_json ? st.to_json() + "\n" : st.to_text());
      return kExitOk;
    }
    if (*t) {
      write_asset_pack(make_toy_assets(toy_seed), toy_out);
      std::printf("wrote toy asset pack to %s\n", toy_out.c_str());
      return kExitOk;
    }
    if (*d) {
      write_predictions(gt_out, ground_truth_predictions(gt_dataset, gt_vertices));
      return kExitOk;
    }
  } catch (const Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return exit_code_for(err.code());
  } catch (const std::exception& err) {
    std::fprintf(stderr, "internal error: %s\n", err.what());
    return kExitInternal;
  }
  return kExitInternal;
}

#include "handsynth/dataset_io.hpp"

#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const TempDir& dir, const std::string& args) {
  const char* cli = std::getenv("HANDSYNTH_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "HANDSYNTH_CLI is not set");
  const fs::path out = dir.path() / "stdout.txt";
  const fs::path err = dir.path() / "stderr.txt";
  const std::string cmd = std::string("'") + cli + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

// Generates a 3-scene 48x48 toy dataset under dir/data.
fs::path small_dataset(const TempDir& dir) {
  write(dir.path() / "cfg.json", R"({"n_scenes": 3, "resolution": [48, 48], "seed": 5})");
  const fs::path data = dir.path() / "data";
  const Run r = run(dir, "generate '" + (dir.path() / "cfg.json").string() + "' --out '" + data.string() + "' -q");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return data;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  TempDir dir("cli_usage");
  CHECK(run(dir, "").code == 1);
  CHECK(run(dir, "frobnicate").code == 1);
  CHECK(run(dir, "eval").code == 1);
  CHECK(run(dir, "--help").code == 0);
  CHECK(run(dir, "generate --branch both --print-config").code == 1);
}

TEST_CASE("print-config reflects overrides") {
  TempDir dir("cli_print");
  const Run r = run(dir, "generate --seed 42 --workers 3 --print-config");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["seed"] == 42);
  CHECK(j["workers"] == 3);
  CHECK(j["branch"] == "single");
  write(dir.path() / "bad.json", R"({"n_scene": 3})");
  const Run bad = run(dir, "generate '" + (dir.path() / "bad.json").string() + "'");
  CHECK(bad.code == 1);
  CHECK(bad.err.find("n_scene") != std::string::npos);
}

TEST_CASE("generate, stats, dump-gt and eval") {
  TempDir dir("cli_flow");
  const fs::path data = small_dataset(dir);
  CHECK(handsynth::list_samples(data).size() == 6);

  const Run again = run(dir, "generate --n-scenes 1 --out '" + data.string() + "' -q");
  CHECK(again.code == 1);

  const Run stats = run(dir, "stats '" + data.string() + "' --json");
  REQUIRE(stats.code == 0);
  const auto st = nlohmann::json::parse(stats.out);
  CHECK(st["scenes"] == 3);
  CHECK(st["samples"] == 6);
  CHECK(run(dir, "stats '" + data.string() + "'").out.find("scenes") != std::string::npos);
  CHECK(run(dir, "stats '" + (dir.path() / "nowhere").string() + "'").code == 1);

  const fs::path gt = dir.path() / "gt.json";
  REQUIRE(run(dir, "dump-gt '" + data.string() + "' --out '" + gt.string() + "'").code == 0);
  const Run perfect = run(dir, "eval '" + data.string() + "' '" + gt.string() + "' --json '" +
                                   (dir.path() / "report.json").string() + "'");
  REQUIRE(perfect.code == 0);
  const auto rep = nlohmann::json::parse(slurp(dir.path() / "report.json"));
  CHECK(rep["count"] == 6);
  CHECK(rep["mpjpe"].get<double>() == 0.0);
  CHECK(rep["pa_mpjpe"].get<double>() < 1e-9);
  CHECK(rep["auc_j"].get<double>() == 1.0);
  CHECK(rep["f5"].get<double>() == 1.0);
  CHECK(rep["f_al15"].get<double>() == 1.0);

  auto preds = nlohmann::json::parse(slurp(gt));
  for (auto& p : preds) {
    for (auto& row : p["joints"]) row[0] = row[0].get<double>() + 0.0073;
    p.erase("vertices");
  }
  const fs::path shifted = dir.path() / "shifted.json";
  write(shifted, preds.dump());
  const Run cm = run(dir, "eval '" + data.string() + "' '" + shifted.string() + "' --units cm");
  REQUIRE(cm.code == 0);
  std::istringstream lines(cm.out);
  std::string line, mpjpe_line;
  while (std::getline(lines, line))
    if (line.rfind("MPJPE ", 0) == 0) mpjpe_line = line;
  std::istringstream fields(mpjpe_line);
  std::string name, unit;
  double value = 0.0;
  fields >> name >> value >> unit;
  CHECK(value == doctest::Approx(0.73).epsilon(1e-9));
  CHECK(unit == "cm");
  const Run bad_units = run(dir, "eval '" + data.string() + "' '" + shifted.string() + "' --units in");
  CHECK(bad_units.code == 1);

  write(dir.path() / "broken.json", "[{\"sample_id\": ");
  const Run broken = run(dir, "eval '" + data.string() + "' '" + (dir.path() / "broken.json").string() + "'");
  CHECK(broken.code == 1);
  CHECK(broken.err.find("ParseError") != std::string::npos);

  preds.erase(preds.begin());
  write(dir.path() / "partial.json", preds.dump());
  const Run partial = run(dir, "eval '" + data.string() + "' '" + (dir.path() / "partial.json").string() + "'");
  CHECK(partial.code == 1);
  CHECK(partial.err.find("MissingSample") != std::string::npos);
}

TEST_CASE("toy asset pack written by the cli drives generation") {
  TempDir dir("cli_toy");
  const fs::path pack = dir.path() / "pack";
  REQUIRE(run(dir, "make-toy-assets --out '" + pack.string() + "'").code == 0);
  CHECK(fs::exists(pack / "meta.json"));
  const fs::path data = dir.path() / "data";
  const Run r = run(dir, "generate --assets '" + pack.string() + "' --n-scenes 1 --out '" + data.string() + "' -q");
  CHECK(r.code == 0);
  const Run missing = run(dir, "generate --assets '" + (dir.path() / "nopack").string() + "' --n-scenes 1 --out '" +
                                   (dir.path() / "d2").string() + "' -q");
  CHECK(missing.code == 1);
}

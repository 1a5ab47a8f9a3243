#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vrturn/cli.hpp"

namespace fs = std::filesystem;

namespace {

int vrturn_main(std::vector<std::string> args) {
  args.insert(args.begin(), "vrturn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  return vrturn::cli::run(static_cast<int>(args.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kTinyConfig = R"({
  "seed": 3,
  "model": {"family": "gbm", "gbm": {"n_trees": 20}},
  "evaluation": {"cv": "session", "folds": 4},
  "interpret": {"reps": 1, "grid_size": 3},
  "synth": {"groups": 4, "sessions_per_group": 2, "duration": 90}
})";

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(vrturn_main({"train", "--no-such-flag"}) == 1);
  CHECK(vrturn_main({}) == 1);
  CHECK(vrturn_main({"evaluate", "--cv", "bogus"}) == 1);
}

TEST_CASE("pipeline on a tiny corpus, then a tampered schema") {
  const fs::path dir = fs::temp_directory_path() / "vrturn_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "cfg.json");
    f << kTinyConfig;
  }
  const std::string data = (dir / "data").string(), out = (dir / "out").string();
  REQUIRE(vrturn_main({"pipeline", "--config", (dir / "cfg.json").string(), "--data", data, "--out", out, "--jobs",
                       "4"}) == 0);

  const auto report = nlohmann::json::parse(slurp(dir / "out/reports/eval_next_gbm_session.json"));
  CHECK(report["folds"].size() == 4);
  for (const auto& f : report["folds"]) CHECK(f["auc"].get<double>() > 0.0);
  const auto cfg = nlohmann::json::parse(slurp(dir / "out/config.json"));
  CHECK(report["config_hash"].get<std::string>().size() == 16);
  CHECK(fs::exists(dir / "out/reports/importance_next_gbm_session.csv"));
  CHECK(fs::exists(dir / "out/models/next_gbm.json"));
  CHECK(cfg["seed"] == 3);
  CHECK(slurp(dir / "out/datasets/next.csv").rfind("# {", 0) == 0);

  const fs::path sidecar = dir / "out/datasets/next.csv.schema.json";
  std::string schema = slurp(sidecar);
  const auto pos = schema.find("speech.main.has_spoken");
  REQUIRE(pos != std::string::npos);
  schema.replace(pos, 22, "speech.main.has_talked");
  {
    std::ofstream f(sidecar);
    f << schema;
  }
  CHECK(vrturn_main({"evaluate", "--config", (dir / "cfg.json").string(), "--out", out}) == 2);
  CHECK(vrturn_main({"build-dataset", "--data", (dir / "missing").string(), "--out", out}) == 2);
  fs::remove_all(dir);
}

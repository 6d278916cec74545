#include "hopgraph/config.hpp"
#include "hopgraph/experiment.hpp"
#include "hopgraph/io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace hopgraph;
using hopgraph::testing::tiny_synth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hopgraph_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HOPGRAPH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

fs::path tiny_dataset_dir() {
  const fs::path dir = scratch("data");
  const SynthConfig c = tiny_synth();
  const SynthData d = generate(c);
  save_dataset(dir, {d.log, d.attributes, d.split}, to_json(c).dump());
  return dir;
}

const char* kTinyBase = R"({
  "model": {"embedding_dim": 6, "encoder_hidden": 5, "tower_hidden": 8},
  "train": {"batch_size": 32, "users_per_step": 40, "learning_rate": 0.01,
            "epochs": 2, "window": 4, "eval_k": 5}
})";

}  // namespace

TEST_CASE("malformed configs and bad usage exit with code 2") {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "broken.json") << "{ \"model\": ";
  std::ofstream(dir / "unknown.json") << R"({"model": {"backend": "gat"}})";
  CHECK(run_cli("train --config " + (dir / "broken.json").string() + " --dataset x --out " +
                (dir / "o").string()) == 2);
  CHECK(run_cli("train --config " + (dir / "unknown.json").string() + " --dataset x --out " +
                (dir / "o").string()) == 2);
  CHECK(run_cli("generate --config " + (dir / "unknown.json").string() + " --out " +
                (dir / "o").string()) == 2);
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("sweep --config " + (dir / "broken.json").string() + " --out o --seeds 1,x") == 2);
}

TEST_CASE("generate, train and evaluate from the command line") {
  const fs::path dir = scratch("flow");
  std::ofstream(dir / "synth.json") << to_json(tiny_synth()).dump();
  REQUIRE(run_cli("generate --config " + (dir / "synth.json").string() + " --out " + (dir / "data").string()) == 0);
  CHECK(fs::exists(dir / "data" / "events.csv"));

  auto run_cfg = nlohmann::json::parse(kTinyBase);
  run_cfg["model"]["backend"] = "appnp";
  run_cfg["model"]["K"] = 2;
  run_cfg["dataset"] = "data";
  std::ofstream(dir / "run.json") << run_cfg.dump();
  REQUIRE(run_cli("train --config " + (dir / "run.json").string() + " --out " + (dir / "run").string()) == 0);
  for (const char* f : {"curves.csv", "checkpoint.json", "metrics.csv", "resolved_config.json"})
    CHECK(fs::exists(dir / "run" / f));

  // One header plus six metrics for each test day with at least one ranked user.
  const Dataset ds = load_dataset(dir / "data");
  int test_days = 0;
  for (int d = ds.split.test.begin; d < ds.split.test.end; ++d) test_days += !ds.log.days(d, d + 1).empty();
  CHECK(count_lines(dir / "run" / "metrics.csv") == 1 + 6 * test_days);
  // Epochs 0..2: six valid metrics each, plus two training losses.
  CHECK(count_lines(dir / "run" / "curves.csv") == 1 + 3 * 6 + 2);

  CHECK(run_cli("evaluate --config " + (dir / "run.json").string() + " --checkpoint " +
                (dir / "run" / "checkpoint.json").string() + " --out " + (dir / "eval").string()) == 0);
  int eval_days = test_days;
  for (int d = ds.split.valid.begin; d < ds.split.valid.end; ++d) eval_days += !ds.log.days(d, d + 1).empty();
  CHECK(count_lines(dir / "eval" / "metrics.csv") == 1 + 6 * eval_days);
}

TEST_CASE("sweeps reuse completed runs from the manifest") {
  const fs::path data = tiny_dataset_dir();
  ExperimentSpec spec;
  spec.dataset = data;
  spec.base = run_config_from_json(nlohmann::json::parse(kTinyBase));
  spec.models = {"dnn", "appnp", "appnp_hs"};
  spec.ks = {1, 2};
  spec.seeds = {1, 2};
  const fs::path out = scratch("sweep");
  const SweepResult first = run_sweep(spec, out);
  CHECK(first.ok());
  CHECK(first.trained == 2 + 2 * 2 * 2);
  CHECK(first.runs.size() == 3 * 2 * 2);
  const std::string metrics = read_file(out / "metrics.csv");

  const SweepResult second = run_sweep(spec, out);
  CHECK(second.trained == 0);
  CHECK(second.reused == first.trained);
  CHECK(read_file(out / "metrics.csv") == metrics);
  CHECK(second.value("appnp", 2, 1, &DayMetrics::ndcg) == first.value("appnp", 2, 1, &DayMetrics::ndcg));
  // dnn is trained once per seed and reported under every K label.
  CHECK(second.value("dnn", 1, 2, &DayMetrics::ndcg) == second.value("dnn", 2, 2, &DayMetrics::ndcg));

  const auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
  CHECK(!summary.empty());

  spec.base.train.learning_rate = 0.02;
  const SweepResult changed = run_sweep(spec, out);
  CHECK(changed.reused == 0);
}

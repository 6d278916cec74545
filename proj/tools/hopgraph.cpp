// hopgraph: generate synthetic data, train, sweep and attack experiments.
//
//   hopgraph generate --config synth.json --out data/bench
//   hopgraph train    --config run.json --dataset data/bench --out runs/appnp
//   hopgraph evaluate --config run.json --dataset data/bench --checkpoint runs/appnp/checkpoint.json --out eval/
//   hopgraph sweep    --config experiment.json --out results/sweep --parallel 2
//   hopgraph attack   --config experiment.json --out results/attack
//
// HOPGRAPH_SEED overrides the seed of `generate` and `train`.
// Exit codes: 0 success, 1 run failure, 2 malformed configuration or usage.

#include "hopgraph/config.hpp"
#include "hopgraph/datagen.hpp"
#include "hopgraph/experiment.hpp"
#include "hopgraph/io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace hopgraph;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      seeds.push_back(std::stoull(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("--seeds: expected a comma-separated list of integers, got '" + text + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("--seeds: empty list");
  return seeds;
}

fs::path dataset_path(const std::string& flag, const nlohmann::json& cfg, const fs::path& config_path) {
  if (!flag.empty()) return flag;
  if (auto it = cfg.find("dataset"); it != cfg.end() && it->is_string()) {
    fs::path p = it->get<std::string>();
    return p.is_absolute() ? p : config_path.parent_path() / p;
  }
  throw ConfigError("dataset: pass --dataset or set \"dataset\" in the config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph recommender training with hop sampling"};
  app.require_subcommand(1);

  std::string config, out, dataset, checkpoint, seeds;
  int parallel = 1;

  auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
  gen->add_option("--config", config, "Synthetic data config (JSON); defaults if omitted");
  gen->add_option("--out", out, "Output dataset directory")->required();

  auto* tr = app.add_subcommand("train", "Train one model");
  tr->add_option("--config", config, "Run config (JSON)")->required();
  tr->add_option("--dataset", dataset, "Dataset directory (overrides config)");
  tr->add_option("--out", out, "Output directory")->required();

  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on valid and test days");
  ev->add_option("--config", config, "Run config (JSON)")->required();
  ev->add_option("--dataset", dataset, "Dataset directory (overrides config)");
  ev->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  ev->add_option("--out", out, "Output directory")->required();

  auto* sw = app.add_subcommand("sweep", "Train and evaluate the model x K x seed grid");
  auto* at = app.add_subcommand("attack", "Train with edgeless test graphs and record test curves");
  for (auto* sub : {sw, at}) {
    sub->add_option("--config", config, "Experiment config (JSON)")->required();
    sub->add_option("--out", out, "Output directory")->required();
    sub->add_option("--seeds", seeds, "Comma-separated seeds (overrides config)");
    sub->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      SynthConfig cfg = config.empty() ? SynthConfig{} : synth_config_from_json(load_json(config));
      if (auto s = seed_override()) cfg.seed = *s;
      const SynthData data = generate(cfg);
      save_dataset(out, {data.log, data.attributes, data.split}, to_json(cfg).dump(2) + "\n");
      std::cout << "wrote " << data.log.events.size() << " events to " << out << "\n";
      return 0;
    }
    if (tr->parsed() || ev->parsed()) {
      const auto j = load_json(config);
      RunConfig cfg = run_config_from_json(j);
      if (auto s = seed_override()) cfg.train.seed = *s;
      const fs::path ds = dataset_path(dataset, j, config);
      if (tr->parsed()) {
        const TrainResult r = run_single(cfg, ds, out);
        std::cout << "best valid ndcg@" << cfg.train.eval_k << " = " << r.state.best_valid_ndcg
                  << " at epoch " << r.state.best_epoch << "\n";
        if (auto v = mean_over_days(r.test_metrics, &DayMetrics::ndcg)) std::cout << "test ndcg = " << *v << "\n";
      } else {
        const auto rows = run_evaluate(cfg, ds, checkpoint, out);
        std::cout << "evaluated " << rows.size() << " days\n";
      }
      return 0;
    }
    ExperimentSpec spec = experiment_from_json(load_json(config), fs::path(config).parent_path());
    if (!seeds.empty()) spec.seeds = parse_seeds(seeds);
    if (sw->parsed()) {
      const SweepResult r = run_sweep(spec, out, parallel, &std::cerr);
      std::cout << r.trained << " trained, " << r.reused << " reused, " << r.failed << " failed\n";
      return r.ok() ? 0 : 1;
    }
    const AttackResult r = run_attack(spec, out, parallel, &std::cerr);
    for (const auto& m : spec.attack.models) {
      std::cout << m << " median decay " << r.median_decay(m) << "\n";
    }
    return r.ok() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

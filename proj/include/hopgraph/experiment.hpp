#pragma once

#include "hopgraph/config.hpp"
#include "hopgraph/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hopgraph {

struct AttackSpec {
  std::vector<std::string> models{"appnp", "appnp_hs"};
  int hops = 4;
  int epochs = 50;
};

/// Model × K × seed grid over one dataset.
struct ExperimentSpec {
  std::filesystem::path dataset;
  RunConfig base;
  std::vector<std::string> models{"dnn", "gcn", "jk_gcn", "appnp", "gcn_hs", "appnp_hs"};
  std::vector<int> ks{1, 2, 4, 8, 16};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  AttackSpec attack;

  void validate() const;
};

/// Relative dataset paths resolve against `base_dir`.
ExperimentSpec experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const ExperimentSpec& spec);

struct RunRecord {
  std::string model;
  int hops = 0;  // K label in the sweep grid
  std::uint64_t seed = 0;
  bool ok = false;
  bool reused = false;
  std::string error;
  std::vector<DayMetrics> test;
};

struct SweepResult {
  std::vector<RunRecord> runs;  // grid order: model, K, seed
  int trained = 0;
  int reused = 0;
  int failed = 0;

  bool ok() const { return failed == 0; }
  /// Mean over test days of `field` for one run, if it completed.
  std::optional<double> value(const std::string& model, int hops, std::uint64_t seed,
                              double DayMetrics::*field) const;
};

/// Trains every (model, K, seed) combination and writes metrics.csv,
/// summary.json, manifest.json and resolved_config.json under `out`.
/// Completed runs recorded in the manifest (with a matching config) are
/// reloaded instead of retrained; failed runs are recorded and skipped.
SweepResult run_sweep(const ExperimentSpec& spec, const std::filesystem::path& out,
                      int parallel = 1, std::ostream* log = nullptr);

struct AttackRun {
  std::string model;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<double> test_ndcg;  // epochs 1..E
  double decay = 0.0;             // peak − final
};

struct AttackResult {
  std::vector<AttackRun> runs;
  bool ok() const;
  double median_decay(const std::string& model) const;
};

/// Trains the attack models with every test-day graph emptied and writes the
/// per-epoch test NDCG curves (attack_curves.csv) plus attack_summary.json.
AttackResult run_attack(const ExperimentSpec& spec, const std::filesystem::path& out,
                        int parallel = 1, std::ostream* log = nullptr);

/// Single training run: curves.csv, checkpoint.json, metrics.csv and
/// resolved_config.json under `out`.
TrainResult run_single(const RunConfig& cfg, const std::filesystem::path& dataset,
                       const std::filesystem::path& out);

/// Evaluates a checkpoint on the valid and test splits; writes metrics.csv.
std::vector<DayMetrics> run_evaluate(const RunConfig& cfg, const std::filesystem::path& dataset,
                                     const std::filesystem::path& checkpoint,
                                     const std::filesystem::path& out);

/// `model,K,seed,day,metric,value` rows for a list of day metrics.
std::string metric_rows(const std::string& model, int hops, std::uint64_t seed,
                        const std::vector<DayMetrics>& rows);

}  // namespace hopgraph

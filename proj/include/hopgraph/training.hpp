#pragma once

#include "hopgraph/adam.hpp"
#include "hopgraph/evaluation.hpp"
#include "hopgraph/graph.hpp"
#include "hopgraph/hop_sampling.hpp"
#include "hopgraph/model.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace hopgraph {

enum class LossKind { bpr, sampled_softmax };

LossKind parse_loss(std::string_view name);
std::string_view to_string(LossKind l);

struct TrainConfig {
  int batch_size = 1024;       // positive interactions per loss mini-batch
  int users_per_step = 10240;  // users in the propagation subgraph (clamped to the pool)
  double learning_rate = 3e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 50;
  int negatives = 1;
  LossKind loss = LossKind::bpr;
  int window = 28;
  int eval_k = 10;
  int max_user_resamples = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Everything that defines one training run apart from the dataset.
struct RunConfig {
  std::string model_name = "appnp";
  PropagationConfig propagation;
  HopSamplingConfig hop_sampling;
  ModelDims dims;
  TrainConfig train;

  void validate() const;
  /// Hops used at evaluation time.
  int eval_hops() const;
};

/// Maps a roster name (dnn, gcn, jk_gcn, appnp, gcn_hs, appnp_hs) onto the
/// backend and hop-sampling switch of `base`, with K = `hops` (0 for dnn).
RunConfig configure_model(RunConfig base, const std::string& model_name, int hops);

struct Dataset {
  EventLog log;
  AttributeTable attributes;
  SplitSpec split;
};

/// Split logs plus every snapshot the run needs, built once with all valid and
/// test events masked out.
struct PreparedData {
  const Dataset* dataset = nullptr;
  SplitLogs parts;
  EventLog heldout;
  int window = 28;
  std::map<int, SnapshotGraph> snapshots;
};

PreparedData prepare(const Dataset& dataset, int window);

struct PairLoss {
  double loss = 0.0;
  Eigen::VectorXd grad_pos;
  Eigen::VectorXd grad_neg;  // one entry per negative (row-major: positive, negative)
};

/// Mean over pairs of −log σ(s_pos − s_neg). With m negatives per positive,
/// neg_scores has m·n entries and positive p pairs with entries [p·m, p·m+m).
PairLoss bpr_loss(std::span<const double> pos_scores, std::span<const double> neg_scores);

/// Mean over positives of −log softmax(s_pos | s_pos, s_neg…).
PairLoss sampled_softmax_loss(std::span<const double> pos_scores,
                              std::span<const double> neg_scores);

struct TrainState {
  ModelParams params;
  AdamState adam;
  Rng user_rng{0};
  Rng hop_rng{0};
  Rng batch_rng{0};
  int epoch = 0;
  std::uint64_t steps = 0;
  double best_valid_ndcg = -1.0;
  int best_epoch = -1;
  ModelParams best_params;
};

TrainState init_state(const RunConfig& cfg, const Dataset& dataset);

struct StepResult {
  double loss = 0.0;
  int hops = 0;
  int sampled_users = 0;
  int positives = 0;
};

/// Observer for the subgraph each step trains on.
using SubgraphObserver = std::function<void(int day, const Subgraph&)>;

/// One optimization step on day t: sample users, induce and renormalize the
/// subgraph, encode, draw hops, propagate, score a batch of day-t positives
/// against uniform negatives, backpropagate, Adam update.
StepResult train_step(TrainState& state, const PreparedData& data, int day, const RunConfig& cfg,
                      const SubgraphObserver& observer = {});

struct CurveRecord {
  int epoch = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
};

struct TrainOptions {
  bool track_test = false;        // evaluate the test split after every epoch
  bool empty_test_graphs = false; // evaluate test days on edgeless graphs
  SubgraphObserver observer;
};

struct TrainResult {
  TrainState state;
  std::vector<CurveRecord> curves;
  std::vector<DayMetrics> valid_metrics;  // of the selected checkpoint
  std::vector<DayMetrics> test_metrics;   // of the selected checkpoint
};

/// Runs `epochs` passes of one step per training day, evaluates the valid
/// split after every epoch and keeps the parameters with the highest valid
/// NDCG@k. Epoch 0 is the initial state.
TrainResult train(const RunConfig& cfg, const Dataset& dataset, const TrainOptions& options = {});
TrainResult train(const RunConfig& cfg, const PreparedData& data, const TrainOptions& options = {});

/// Parameter slots pairing each tensor of `params` with its gradient.
std::vector<ParamSlot> param_slots(ModelParams& params, const ModelParams& grads);

}  // namespace hopgraph

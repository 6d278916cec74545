#pragma once

#include "hopgraph/features.hpp"
#include "hopgraph/graph.hpp"
#include "hopgraph/rng.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace hopgraph {

struct DriftEvent {
  int day = 0;
  double strength = 0.0;  // 0 keeps the affinity, 1 replaces it
};

/// Synthetic interaction stream. Days [0, warmup_days) are history that only
/// feeds snapshot windows; the train/valid/test split covers the following
/// n_days days.
struct SynthConfig {
  int n_users = 2000;
  int n_items = 200;
  int n_days = 20;
  int warmup_days = 28;
  int train_days = 14;
  int valid_days = 3;
  int test_days = 3;
  int n_clusters = 8;
  double rate = 0.3;                  // λ, events per user per day
  std::vector<DriftEvent> drift{{35, 0.3}, {42, 0.6}};  // absolute day indices
  double popularity_skew = 0.5;       // Zipf exponent over a random item ranking
  double affinity_spread = 2.5;       // log-normal scale of cluster affinities
  double user_attribute_noise = 1.5;  // std of the interest-vector noise
  double item_attribute_noise = 0.7;
  int signature_dim = 16;
  std::uint64_t seed = 7;

  void validate() const;
  int total_days() const { return warmup_days + n_days; }
  SplitSpec split() const;
};

/// Cluster structure behind the generator. `affinity[d]` is the state in
/// effect on day d.
struct LatentModel {
  std::vector<int> user_cluster;
  std::vector<int> item_cluster;
  Eigen::VectorXd popularity;
  std::vector<DenseMatrix> affinity;  // per day, n_clusters x n_clusters, non-negative
};

struct SynthData {
  EventLog log;
  AttributeTable attributes;
  SplitSpec split;
  LatentModel latent;
};

SynthData generate(const SynthConfig& cfg);

/// Replaces every snapshot whose day lies in `test_days` with an edgeless one.
std::map<int, SnapshotGraph> drop_test_edges(std::map<int, SnapshotGraph> snapshots,
                                             const DayRange& test_days);

/// Empirical item distribution of the events in [begin, end).
Eigen::VectorXd item_distribution(const EventLog& log, int begin, int end);

}  // namespace hopgraph

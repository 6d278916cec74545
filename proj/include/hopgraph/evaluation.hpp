#pragma once

#include "hopgraph/graph.hpp"
#include "hopgraph/metrics.hpp"
#include "hopgraph/model.hpp"

#include <map>
#include <optional>
#include <vector>

namespace hopgraph {

struct DayMetrics {
  int day = 0;
  double ndcg = 0.0;
  double map = 0.0;
  double hit = 0.0;
  double ild = 0.0;
  double coverage = 0.0;
  double entropy = 0.0;
  int ranked_users = 0;     // users with at least one relevant item that day
  int zero_norm_items = 0;  // flagged by ILD
};

/// Top-k items per user by dot-product score, ties broken by lower item id.
std::vector<RecommendationList> recommend(const DenseMatrix& z, int n_users, int k);

/// Metrics for one day from final embeddings Z (users then items) and that
/// day's events as relevance. Ranking metrics average over users with
/// relevant items; diversity metrics cover every user's list. Returns nullopt
/// when no user has a relevant item.
std::optional<DayMetrics> evaluate_day(const DenseMatrix& z, int n_users, int n_items,
                                       std::span<const InteractionEvent> day_events, int day, int k);

/// Full-graph evaluation at `hops` propagation steps on each day in `days`.
/// Tower outputs are shared across days; only the propagation differs.
std::vector<DayMetrics> evaluate_split(const ModelParams& params, const PropagationConfig& cfg,
                                       int hops, const AttributeTable& attrs,
                                       const std::map<int, SnapshotGraph>& snapshots,
                                       const EventLog& log, const DayRange& days, int k = 10);

/// Mean of a metric over days; nullopt for an empty list.
std::optional<double> mean_over_days(const std::vector<DayMetrics>& rows,
                                     double DayMetrics::*field);

}  // namespace hopgraph

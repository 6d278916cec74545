#include "hopgraph/evaluation.hpp"

#include <algorithm>
#include <numeric>

namespace hopgraph {

std::vector<RecommendationList> recommend(const DenseMatrix& z, int n_users, int k) {
  const int n_items = static_cast<int>(z.rows()) - n_users;
  require(k >= 1 && k <= n_items, "recommend: k must lie in [1, catalog size]");
  const auto users = all_nodes(n_users);
  const auto items = all_nodes(n_items);
  const DenseMatrix scores = score(z, n_users, users, items);
  std::vector<RecommendationList> lists(static_cast<std::size_t>(n_users));
  std::vector<int> order(static_cast<std::size_t>(n_items));
  for (int u = 0; u < n_users; ++u) {
    std::iota(order.begin(), order.end(), 0);
    const auto row = scores.row(u);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      return row[a] > row[b] || (row[a] == row[b] && a < b);
    });
    lists[static_cast<std::size_t>(u)].user = u;
    lists[static_cast<std::size_t>(u)].items.assign(order.begin(), order.begin() + k);
  }
  return lists;
}

std::optional<DayMetrics> evaluate_day(const DenseMatrix& z, int n_users, int n_items,
                                       std::span<const InteractionEvent> day_events, int day, int k) {
  require(z.rows() == n_users + n_items, "evaluate_day: embedding rows do not match the graph");
  auto lists = recommend(z, n_users, k);
  int ranked = 0;
  for (const auto& e : day_events) {
    auto& rel = lists[static_cast<std::size_t>(e.user)].relevant;
    if (rel.empty()) ++ranked;
    if (std::find(rel.begin(), rel.end(), e.item) == rel.end()) rel.push_back(e.item);
  }
  if (ranked == 0) return std::nullopt;
  DayMetrics m;
  m.day = day;
  m.ranked_users = ranked;
  m.ndcg = *ndcg_at_k(lists, k);
  m.map = *map_at_k(lists, k);
  m.hit = *hit_at_k(lists, k);
  const DenseMatrix item_z = z.bottomRows(n_items);
  if (k >= 2) {
    const auto ild = ild_at_k(lists, item_z, k);
    m.ild = ild.value;
    m.zero_norm_items = ild.zero_norm_items;
  }
  m.coverage = item_coverage(lists, n_items);
  m.entropy = shannon_entropy(lists);
  return m;
}

std::vector<DayMetrics> evaluate_split(const ModelParams& params, const PropagationConfig& cfg,
                                       int hops, const AttributeTable& attrs,
                                       const std::map<int, SnapshotGraph>& snapshots,
                                       const EventLog& log, const DayRange& days, int k) {
  std::vector<DayMetrics> rows;
  if (days.size() <= 0) return rows;
  const int n_users = attrs.users.n_nodes;
  const int n_items = attrs.items.n_nodes;
  const auto users = all_nodes(n_users);
  // H does not depend on the graph: compute it once, propagate per day.
  const DenseMatrix xu = encode(params.user_encoder, attrs.users, users);
  const DenseMatrix xi = encode(params.item_encoder, attrs.items, all_nodes(n_items));
  const DenseMatrix h = towers_forward(params.towers, xu, xi).first;
  for (int d = days.begin; d < days.end; ++d) {
    auto it = snapshots.find(d);
    require(it != snapshots.end(), "evaluate_split: missing snapshot for day " + std::to_string(d));
    const SparseMatrix& adj = it->second.normalized;
    DenseMatrix z;
    switch (cfg.backend) {
      case Backend::dnn: z = h; break;
      case Backend::appnp: z = appnp_propagate(h, adj, cfg.alpha, hops); break;
      case Backend::gcn:
        z = gcn_forward<double>(h, adj, params.gcn_weights, hops).outputs.back();
        break;
      case Backend::jk_gcn:
        z = jk_forward<double>(h, adj, params.gcn_weights, hops, params.jk_projection);
        break;
    }
    if (auto m = evaluate_day(z, n_users, n_items, log.days(d, d + 1), d, k)) rows.push_back(*m);
  }
  return rows;
}

std::optional<double> mean_over_days(const std::vector<DayMetrics>& rows,
                                     double DayMetrics::*field) {
  if (rows.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.*field;
  return sum / static_cast<double>(rows.size());
}

}  // namespace hopgraph

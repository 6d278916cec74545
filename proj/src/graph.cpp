#include "hopgraph/graph.hpp"

#include "hopgraph/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace hopgraph {

void EventLog::normalize() {
  require(n_users >= 0 && n_items >= 0, "EventLog: negative pool or catalog size");
  for (const auto& e : events) {
    require(e.day >= 0, "EventLog: negative day " + std::to_string(e.day));
    require(e.user >= 0 && e.user < n_users,
            "EventLog: user id " + std::to_string(e.user) + " outside pool of " +
                std::to_string(n_users));
    require(e.item >= 0 && e.item < n_items,
            "EventLog: item id " + std::to_string(e.item) + " outside catalog of " +
                std::to_string(n_items));
  }
  std::sort(events.begin(), events.end());
}

std::span<const InteractionEvent> EventLog::days(int begin, int end) const {
  auto lo = std::lower_bound(events.begin(), events.end(), begin,
                             [](const InteractionEvent& e, int d) { return e.day < d; });
  auto hi = std::lower_bound(lo, events.end(), end,
                             [](const InteractionEvent& e, int d) { return e.day < d; });
  return {lo, hi};
}

bool EventLog::contains(const InteractionEvent& e) const {
  return std::binary_search(events.begin(), events.end(), e);
}

SplitSpec SplitSpec::contiguous(int first_train_day, int train_days, int valid_days,
                                int test_days) {
  SplitSpec s;
  s.train = {first_train_day, first_train_day + train_days};
  s.valid = {s.train.end, s.train.end + valid_days};
  s.test = {s.valid.end, s.valid.end + test_days};
  return s;
}

void SplitSpec::validate() const {
  require(train.begin >= 0, "SplitSpec: train range starts before day 0");
  require(train.size() > 0 && valid.size() >= 0 && test.size() >= 0,
          "SplitSpec: empty or inverted range");
  require(train.end <= valid.begin && valid.end <= test.begin,
          "SplitSpec: ranges overlap or are out of order");
}

SplitLogs split_by_day(const EventLog& log, const SplitSpec& spec) {
  spec.validate();
  require(log.last_day() < spec.test.end,
          "split_by_day: event at day " + std::to_string(log.last_day()) +
              " is past the test range ending at " + std::to_string(spec.test.end));
  SplitLogs out;
  for (EventLog* part : {&out.history, &out.train, &out.valid, &out.test}) {
    part->n_users = log.n_users;
    part->n_items = log.n_items;
  }
  for (const auto& e : log.events) {
    if (e.day < spec.train.begin) {
      out.history.events.push_back(e);
    } else if (spec.train.contains(e.day)) {
      out.train.events.push_back(e);
    } else if (spec.valid.contains(e.day)) {
      out.valid.events.push_back(e);
    } else if (spec.test.contains(e.day)) {
      out.test.events.push_back(e);
    } else {
      throw ContractError("split_by_day: event at day " + std::to_string(e.day) +
                          " falls between split ranges");
    }
  }
  return out;
}

bool SnapshotGraph::has_edge(int user, int item) const {
  const int col = n_users + item;
  return adjacency.coeff(user, col) != 0.0;
}

SparseMatrix normalize_sym(const SparseMatrix& a) {
  require(a.rows() == a.cols(), "normalize_sym: matrix is not square");
  SparseMatrix at = a.transpose();
  require((a - at).norm() == 0.0, "normalize_sym: adjacency is not symmetric");
  const auto n = a.rows();
  SparseMatrix with_loops = a + sparse_identity<double>(n);
  with_loops.makeCompressed();
  Eigen::VectorXd inv_sqrt_deg(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double deg = 0.0;
    for (SparseMatrix::InnerIterator it(with_loops, r); it; ++it) {
      require(it.value() >= 0.0, "normalize_sym: negative weight");
      deg += it.value();
    }
    inv_sqrt_deg[r] = 1.0 / std::sqrt(deg);
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    for (SparseMatrix::InnerIterator it(with_loops, r); it; ++it) {
      it.valueRef() = it.value() * inv_sqrt_deg[r] * inv_sqrt_deg[it.col()];
    }
  }
  return with_loops;
}

SparseMatrix bipartite_adjacency(int n_users, int n_items,
                                 std::vector<std::pair<int, int>> user_item_edges) {
  std::sort(user_item_edges.begin(), user_item_edges.end());
  user_item_edges.erase(std::unique(user_item_edges.begin(), user_item_edges.end()),
                        user_item_edges.end());
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(user_item_edges.size() * 2);
  for (auto [u, i] : user_item_edges) {
    require(u >= 0 && u < n_users && i >= 0 && i < n_items, "bipartite_adjacency: id out of range");
    triplets.emplace_back(u, n_users + i, 1.0);
    triplets.emplace_back(n_users + i, u, 1.0);
  }
  const int n = n_users + n_items;
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

namespace {

SnapshotGraph make_snapshot(int day, int n_users, int n_items, SparseMatrix adjacency) {
  SnapshotGraph g;
  g.day = day;
  g.n_users = n_users;
  g.n_items = n_items;
  g.normalized = normalize_sym(adjacency);
  g.adjacency = std::move(adjacency);
  return g;
}

}  // namespace

SnapshotGraph build_snapshot(const EventLog& log, int t, int window, const EventLog& mask) {
  require(t >= 0, "build_snapshot: negative day");
  require(window >= 0, "build_snapshot: negative window");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : log.days(t - window, t)) {
    if (!mask.empty() && mask.contains(e)) continue;
    edges.emplace_back(e.user, e.item);
  }
  return make_snapshot(t, log.n_users, log.n_items,
                       bipartite_adjacency(log.n_users, log.n_items, std::move(edges)));
}

SnapshotGraph empty_snapshot(int day, int n_users, int n_items) {
  return make_snapshot(day, n_users, n_items, bipartite_adjacency(n_users, n_items, {}));
}

std::vector<int> sample_users(Rng& rng, int n_pool, int n_sample) {
  require(n_sample <= n_pool, "sample_users: cannot draw " + std::to_string(n_sample) +
                                  " users from a pool of " + std::to_string(n_pool));
  return sample_without_replacement(rng, n_pool, n_sample);
}

Subgraph induced_subgraph(const SnapshotGraph& g, std::vector<int> users) {
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  Subgraph sub;
  sub.user_index.assign(static_cast<std::size_t>(g.n_users), -1);
  for (std::size_t k = 0; k < users.size(); ++k) {
    const int u = users[k];
    require(u >= 0 && u < g.n_users, "induced_subgraph: unknown user id " + std::to_string(u));
    sub.user_index[static_cast<std::size_t>(u)] = static_cast<int>(k);
  }
  const int n_kept = static_cast<int>(users.size());
  std::vector<std::pair<int, int>> edges;
  for (std::size_t k = 0; k < users.size(); ++k) {
    for (SparseMatrix::InnerIterator it(g.adjacency, users[k]); it; ++it) {
      edges.emplace_back(static_cast<int>(k), static_cast<int>(it.col()) - g.n_users);
    }
  }
  sub.graph = make_snapshot(g.day, n_kept, g.n_items,
                            bipartite_adjacency(n_kept, g.n_items, std::move(edges)));
  sub.users = std::move(users);
  return sub;
}

int leaked_heldout_edges(const SnapshotGraph& g, const EventLog& log, const EventLog& heldout,
                         int window) {
  std::vector<std::pair<int, int>> supported;
  for (const auto& e : log.days(g.day - window, g.day)) {
    if (!heldout.contains(e)) supported.emplace_back(e.user, e.item);
  }
  std::sort(supported.begin(), supported.end());
  int leaks = 0;
  for (const auto& h : heldout.events) {
    if (h.user >= g.n_users || h.item >= g.n_items) continue;
    if (!g.has_edge(h.user, h.item)) continue;
    if (!std::binary_search(supported.begin(), supported.end(), std::pair{h.user, h.item})) ++leaks;
  }
  return leaks;
}

}  // namespace hopgraph

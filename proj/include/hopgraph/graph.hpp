#pragma once

#include "hopgraph/core.hpp"
#include "hopgraph/rng.hpp"

#include <compare>
#include <span>
#include <utility>
#include <vector>

namespace hopgraph {

struct InteractionEvent {
  int day = 0;
  int user = 0;
  int item = 0;

  friend auto operator<=>(const InteractionEvent&, const InteractionEvent&) = default;
};

/// Events sorted by (day, user, item). Ids are 0-based and bounded by the
/// declared pool and catalog sizes.
struct EventLog {
  std::vector<InteractionEvent> events;
  int n_users = 0;
  int n_items = 0;

  /// Sorts and checks id ranges; throws ContractError on bad ids.
  void normalize();
  bool empty() const { return events.empty(); }
  int last_day() const { return events.empty() ? -1 : events.back().day; }
  /// Events with begin <= day < end (log must be sorted).
  std::span<const InteractionEvent> days(int begin, int end) const;
  bool contains(const InteractionEvent& e) const;
};

/// Half-open range of days.
struct DayRange {
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  bool contains(int day) const { return day >= begin && day < end; }
  friend bool operator==(const DayRange&, const DayRange&) = default;
};

/// Consecutive train/valid/test day ranges. Days before train.begin are
/// history: they feed snapshot windows but are never trained on.
struct SplitSpec {
  DayRange train{0, 14};
  DayRange valid{14, 17};
  DayRange test{17, 20};

  static SplitSpec contiguous(int first_train_day, int train_days = 14, int valid_days = 3,
                              int test_days = 3);
  void validate() const;
  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct SplitLogs {
  EventLog history;
  EventLog train;
  EventLog valid;
  EventLog test;
};

SplitLogs split_by_day(const EventLog& log, const SplitSpec& spec);

/// Bipartite user-item graph for one day. Nodes are users [0, n_users)
/// followed by items [n_users, n_users + n_items).
struct SnapshotGraph {
  int day = 0;
  int n_users = 0;
  int n_items = 0;
  SparseMatrix adjacency;   // symmetric 0/1, user<->item only
  SparseMatrix normalized;  // D^-1/2 (A + I) D^-1/2

  int num_nodes() const { return n_users + n_items; }
  /// Undirected edge count.
  Eigen::Index num_edges() const { return adjacency.nonZeros() / 2; }
  bool has_edge(int user, int item) const;
};

/// D̃^(-1/2)(A+I)D̃^(-1/2) with D̃ the row sums of A+I.
SparseMatrix normalize_sym(const SparseMatrix& a);

SparseMatrix bipartite_adjacency(int n_users, int n_items,
                                 std::vector<std::pair<int, int>> user_item_edges);

/// Snapshot for day t from events in [t - window, t - 1], skipping events
/// listed in `mask`. Repeated interactions collapse into one edge.
SnapshotGraph build_snapshot(const EventLog& log, int t, int window, const EventLog& mask);

/// Snapshot with every edge removed (Â = I).
SnapshotGraph empty_snapshot(int day, int n_users, int n_items);

/// Uniform sample of users without replacement, ascending ids.
std::vector<int> sample_users(Rng& rng, int n_pool, int n_sample);

struct Subgraph {
  SnapshotGraph graph;
  std::vector<int> users;       // new user index -> original user id
  std::vector<int> user_index;  // original user id -> new index, -1 if dropped
};

/// Keeps the listed users and every item, renormalizes on the subgraph.
Subgraph induced_subgraph(const SnapshotGraph& g, std::vector<int> users);

/// Number of held-out events whose edge appears in `g` without support from a
/// non-held-out event inside the snapshot's window. Zero means no leakage.
int leaked_heldout_edges(const SnapshotGraph& g, const EventLog& log, const EventLog& heldout,
                         int window);

}  // namespace hopgraph

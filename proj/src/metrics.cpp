#include "hopgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace hopgraph {
namespace {

void check_k(int k) { require(k >= 1, "ranking metric: k must be >= 1"); }

bool is_relevant(const RecommendationList& list, int item) {
  return std::find(list.relevant.begin(), list.relevant.end(), item) != list.relevant.end();
}

std::size_t cutoff(const RecommendationList& list, int k) {
  return std::min(list.items.size(), static_cast<std::size_t>(k));
}

template <typename PerList>
std::optional<double> mean_over_users(std::span<const RecommendationList> lists, int k,
                                      PerList per_list) {
  check_k(k);
  double sum = 0.0;
  int n = 0;
  for (const auto& list : lists) {
    if (auto v = per_list(list, k)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

std::optional<double> ndcg_at_k(const RecommendationList& list, int k) {
  check_k(k);
  if (list.relevant.empty()) return std::nullopt;
  double dcg = 0.0;
  for (std::size_t r = 0; r < cutoff(list, k); ++r) {
    if (is_relevant(list, list.items[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  const auto ideal_hits = std::min(static_cast<std::size_t>(k), list.relevant.size());
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal_hits; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

std::optional<double> average_precision_at_k(const RecommendationList& list, int k) {
  check_k(k);
  if (list.relevant.empty()) return std::nullopt;
  double sum = 0.0;
  int hits = 0;
  for (std::size_t r = 0; r < cutoff(list, k); ++r) {
    if (is_relevant(list, list.items[r])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  const auto denom = std::min(static_cast<std::size_t>(k), list.relevant.size());
  return sum / static_cast<double>(denom);
}

std::optional<double> hit_at_k(const RecommendationList& list, int k) {
  check_k(k);
  if (list.relevant.empty()) return std::nullopt;
  for (std::size_t r = 0; r < cutoff(list, k); ++r) {
    if (is_relevant(list, list.items[r])) return 1.0;
  }
  return 0.0;
}

std::optional<double> ndcg_at_k(std::span<const RecommendationList> lists, int k) {
  return mean_over_users(lists, k, [](const auto& l, int kk) { return ndcg_at_k(l, kk); });
}

std::optional<double> map_at_k(std::span<const RecommendationList> lists, int k) {
  return mean_over_users(lists, k,
                         [](const auto& l, int kk) { return average_precision_at_k(l, kk); });
}

std::optional<double> hit_at_k(std::span<const RecommendationList> lists, int k) {
  return mean_over_users(lists, k, [](const auto& l, int kk) { return hit_at_k(l, kk); });
}

IldResult ild_at_k(std::span<const RecommendationList> lists, const DenseMatrix& item_embeddings,
                   int k) {
  require(k >= 2, "ild_at_k: k must be >= 2");
  require(!lists.empty(), "ild_at_k: no lists");
  const Eigen::VectorXd norms = item_embeddings.rowwise().norm();
  IldResult result;
  std::vector<bool> flagged(static_cast<std::size_t>(item_embeddings.rows()), false);
  double total = 0.0;
  for (const auto& list : lists) {
    const std::size_t n = std::min(list.items.size(), static_cast<std::size_t>(k));
    require(n >= 2, "ild_at_k: list shorter than two items");
    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const int ia = list.items[a];
      require(ia >= 0 && ia < item_embeddings.rows(), "ild_at_k: item without embedding");
      if (norms[ia] == 0.0 && !flagged[ia]) {
        flagged[ia] = true;
        ++result.zero_norm_items;
      }
      for (std::size_t b = a + 1; b < n; ++b) {
        const int ib = list.items[b];
        require(ib >= 0 && ib < item_embeddings.rows(), "ild_at_k: item without embedding");
        double cos = 0.0;
        if (norms[ia] > 0.0 && norms[ib] > 0.0) {
          cos = item_embeddings.row(ia).dot(item_embeddings.row(ib)) / (norms[ia] * norms[ib]);
        }
        sum += 1.0 - cos;
      }
    }
    const double pairs = static_cast<double>(n * (n - 1)) / 2.0;
    total += sum / pairs;
  }
  result.value = total / static_cast<double>(lists.size());
  return result;
}

double item_coverage(std::span<const RecommendationList> lists, int catalog_size) {
  require(catalog_size >= 1, "item_coverage: empty catalog");
  require(!lists.empty(), "item_coverage: no lists");
  std::vector<int> seen;
  for (const auto& l : lists) seen.insert(seen.end(), l.items.begin(), l.items.end());
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  return static_cast<double>(seen.size()) / static_cast<double>(catalog_size);
}

double shannon_entropy(std::span<const RecommendationList> lists) {
  std::map<int, long> counts;
  long total = 0;
  for (const auto& l : lists) {
    for (int item : l.items) {
      ++counts[item];
      ++total;
    }
  }
  require(total > 0, "shannon_entropy: no recommendations");
  double h = 0.0;
  for (const auto& [item, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

ConfidenceInterval aggregate_ci(std::span<const double> values) {
  require(values.size() >= 2, "aggregate_ci: need at least two seeds");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

double median(std::vector<double> values) {
  require(!values.empty(), "median: no values");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace hopgraph

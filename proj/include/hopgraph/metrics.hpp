#pragma once

#include "hopgraph/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace hopgraph {

/// Ranked items for one user plus that user's relevant items (binary
/// relevance). `relevant` may be empty; ranking metrics skip such users.
struct RecommendationList {
  int user = 0;
  std::vector<int> items;
  std::vector<int> relevant;
};

// Per-list values; nullopt when the user has no relevant items.
std::optional<double> ndcg_at_k(const RecommendationList& list, int k);
std::optional<double> average_precision_at_k(const RecommendationList& list, int k);
std::optional<double> hit_at_k(const RecommendationList& list, int k);

// Means over users that have at least one relevant item.
std::optional<double> ndcg_at_k(std::span<const RecommendationList> lists, int k);
std::optional<double> map_at_k(std::span<const RecommendationList> lists, int k);
std::optional<double> hit_at_k(std::span<const RecommendationList> lists, int k);

struct IldResult {
  double value = 0.0;
  int zero_norm_items = 0;  // recommended items whose embedding has zero norm
};

/// Mean over lists of (2/(k(k−1))) Σ_{i<j} (1 − cos(z_i, z_j)). Rows of
/// `item_embeddings` are indexed by item id. Cosine against a zero vector
/// counts as 0 similarity.
IldResult ild_at_k(std::span<const RecommendationList> lists, const DenseMatrix& item_embeddings,
                   int k);

double item_coverage(std::span<const RecommendationList> lists, int catalog_size);

/// Base-2 entropy of the item recommendation frequencies across all lists.
double shannon_entropy(std::span<const RecommendationList> lists);

struct ConfidenceInterval {
  double mean = 0.0;
  double halfwidth = 0.0;
};

/// mean ± 1.96·s/√n with s the sample standard deviation.
ConfidenceInterval aggregate_ci(std::span<const double> values);

double median(std::vector<double> values);

}  // namespace hopgraph

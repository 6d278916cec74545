#pragma once

#include "hopgraph/core.hpp"
#include "hopgraph/mlp.hpp"

#include <span>
#include <string>
#include <vector>

namespace hopgraph {

/// One attribute for every node of a kind. Categoricals are one-hot rows; a
/// missing categorical is an all-zero row.
struct Attribute {
  std::string name;
  DenseMatrix values;  // n_nodes x dim
};

struct NodeAttributes {
  int n_nodes = 0;
  std::vector<Attribute> attributes;

  const Attribute& find(const std::string& name) const;
  void validate() const;
};

struct AttributeTable {
  NodeAttributes users;
  NodeAttributes items;
};

/// One shallow MLP per attribute, all with the same output width; outputs are
/// summed into the node feature matrix X.
struct FeatureEncoder {
  std::vector<std::string> attribute_names;
  std::vector<Mlp> branches;

  Eigen::Index width() const { return branches.empty() ? 0 : branches.front().out_dim(); }
};

struct EncodeCache {
  std::vector<MlpCache<double>> branches;
};

/// Encoder with one hidden relu layer of width `hidden` per attribute.
FeatureEncoder make_encoder(const NodeAttributes& attrs, Eigen::Index width, Eigen::Index hidden,
                            Rng& rng);

/// X[r] = Σ_a MLP_a(attr_a(nodes[r])), branches summed in attribute order.
std::pair<DenseMatrix, EncodeCache> encode_forward(const FeatureEncoder& enc,
                                                   const NodeAttributes& attrs,
                                                   std::span<const int> nodes);
DenseMatrix encode(const FeatureEncoder& enc, const NodeAttributes& attrs,
                   std::span<const int> nodes);

/// Sum rule: grad_X flows unchanged into every branch.
std::vector<Mlp> encode_backward(const FeatureEncoder& enc, const EncodeCache& cache,
                                 const DenseMatrix& grad_x);
std::vector<Mlp> encode_backward(const FeatureEncoder& enc, const NodeAttributes& attrs,
                                 std::span<const int> nodes, const DenseMatrix& grad_x);

std::vector<int> all_nodes(int n);

}  // namespace hopgraph

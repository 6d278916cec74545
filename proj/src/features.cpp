#include "hopgraph/features.hpp"

#include <array>
#include <numeric>

namespace hopgraph {

const Attribute& NodeAttributes::find(const std::string& name) const {
  for (const auto& a : attributes) {
    if (a.name == name) return a;
  }
  throw ContractError("unknown attribute '" + name + "'");
}

void NodeAttributes::validate() const {
  for (const auto& a : attributes) {
    require(a.values.rows() == n_nodes, "attribute '" + a.name + "' has " +
                                            std::to_string(a.values.rows()) + " rows, expected " +
                                            std::to_string(n_nodes));
    require(a.values.allFinite(), "attribute '" + a.name + "' has non-finite values");
  }
}

FeatureEncoder make_encoder(const NodeAttributes& attrs, Eigen::Index width, Eigen::Index hidden,
                            Rng& rng) {
  FeatureEncoder enc;
  for (const auto& a : attrs.attributes) {
    Rng branch_rng = rng.split(a.name);
    const std::array<Eigen::Index, 3> dims{a.values.cols(), hidden, width};
    enc.attribute_names.push_back(a.name);
    enc.branches.push_back(make_mlp(dims, Activation::relu, branch_rng));
  }
  return enc;
}

namespace {

DenseMatrix gather_rows(const DenseMatrix& m, std::span<const int> rows) {
  DenseMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] >= 0 && rows[r] < m.rows(),
            "encode: node " + std::to_string(rows[r]) + " has no attributes");
    out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  }
  return out;
}

}  // namespace

std::pair<DenseMatrix, EncodeCache> encode_forward(const FeatureEncoder& enc,
                                                   const NodeAttributes& attrs,
                                                   std::span<const int> nodes) {
  require(!enc.branches.empty(), "encode: encoder has no branches");
  require(enc.attribute_names.size() == enc.branches.size(), "encode: malformed encoder");
  DenseMatrix x = DenseMatrix::Zero(static_cast<Eigen::Index>(nodes.size()), enc.width());
  EncodeCache cache;
  for (std::size_t b = 0; b < enc.branches.size(); ++b) {
    const auto& attr = attrs.find(enc.attribute_names[b]);
    require(attr.values.cols() == enc.branches[b].in_dim(),
            "encode: attribute '" + attr.name + "' width " + std::to_string(attr.values.cols()) +
                " != encoder input " + std::to_string(enc.branches[b].in_dim()));
    require(enc.branches[b].out_dim() == enc.width(), "encode: branch widths differ");
    auto [out, branch_cache] = mlp_forward(enc.branches[b], gather_rows(attr.values, nodes));
    x += out;
    cache.branches.push_back(std::move(branch_cache));
  }
  return {std::move(x), std::move(cache)};
}

DenseMatrix encode(const FeatureEncoder& enc, const NodeAttributes& attrs,
                   std::span<const int> nodes) {
  return encode_forward(enc, attrs, nodes).first;
}

std::vector<Mlp> encode_backward(const FeatureEncoder& enc, const EncodeCache& cache,
                                 const DenseMatrix& grad_x) {
  require(cache.branches.size() == enc.branches.size(), "encode_backward: cache mismatch");
  std::vector<Mlp> grads;
  grads.reserve(enc.branches.size());
  for (std::size_t b = 0; b < enc.branches.size(); ++b) {
    grads.push_back(mlp_backward(enc.branches[b], cache.branches[b], grad_x).params);
  }
  return grads;
}

std::vector<Mlp> encode_backward(const FeatureEncoder& enc, const NodeAttributes& attrs,
                                 std::span<const int> nodes, const DenseMatrix& grad_x) {
  return encode_backward(enc, encode_forward(enc, attrs, nodes).second, grad_x);
}

std::vector<int> all_nodes(int n) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace hopgraph

#include "hopgraph/features.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace hopgraph;
using hopgraph::testing::max_fd_error;
using hopgraph::testing::random_matrix;
using hopgraph::testing::tiny_attributes;

TEST_CASE("encoder output is the sum of per-attribute branches") {
  Rng rng(3);
  const AttributeTable t = tiny_attributes(rng, 9, 6);
  const FeatureEncoder enc = make_encoder(t.users, 5, 4, rng);
  const auto nodes = all_nodes(9);
  const DenseMatrix x = encode(enc, t.users, nodes);
  CHECK(x.rows() == 9);
  CHECK(x.cols() == 5);
  DenseMatrix sum = DenseMatrix::Zero(9, 5);
  for (std::size_t b = 0; b < enc.branches.size(); ++b) {
    sum += mlp_apply(enc.branches[b], t.users.find(enc.attribute_names[b]).values);
  }
  // Two branches summed in the same order: exact.
  CHECK(x == sum);
}

TEST_CASE("a missing categorical row contributes its bias path only") {
  Rng rng(5);
  NodeAttributes attrs;
  attrs.n_nodes = 2;
  attrs.attributes.push_back({"os", DenseMatrix::Zero(2, 3)});
  attrs.attributes.back().values(0, 1) = 1.0;
  const FeatureEncoder enc = make_encoder(attrs, 4, 3, rng);
  const DenseMatrix x = encode(enc, attrs, all_nodes(2));
  // With zero biases an all-zero input maps to zero.
  CHECK(x.row(1).isZero(0.0));
  CHECK(!x.row(0).isZero(0.0));
}

TEST_CASE("encoder rejects bad inputs") {
  Rng rng(6);
  const AttributeTable t = tiny_attributes(rng, 4, 4);
  const FeatureEncoder enc = make_encoder(t.users, 5, 4, rng);
  const std::vector<int> bad{0, 4};
  CHECK_THROWS_AS(encode(enc, t.users, bad), ContractError);
  CHECK_THROWS_AS(encode(enc, t.items, all_nodes(4)), ContractError);
  NodeAttributes wrong = t.users;
  wrong.attributes[0].values = DenseMatrix::Zero(3, 2);
  CHECK_THROWS_AS(wrong.validate(), ContractError);
}

TEST_CASE("encoder construction is deterministic per attribute name") {
  Rng a(9), b(9);
  Rng data(1);
  const AttributeTable t = tiny_attributes(data, 4, 4);
  const FeatureEncoder ea = make_encoder(t.users, 5, 4, a);
  const FeatureEncoder eb = make_encoder(t.users, 5, 4, b);
  for (std::size_t i = 0; i < ea.branches.size(); ++i) {
    CHECK(ea.branches[i].layers[0].weight == eb.branches[i].layers[0].weight);
  }
  CHECK(ea.branches[0].layers[0].weight.topLeftCorner(1, 1) !=
        ea.branches[1].layers[0].weight.topLeftCorner(1, 1));
}

TEST_CASE("encoder backward matches finite differences") {
  Rng rng(12);
  AttributeTable t = tiny_attributes(rng, 7, 5);
  FeatureEncoder enc = make_encoder(t.users, 4, 6, rng);
  for (auto& branch : enc.branches)
    for (auto& l : branch.layers) l.bias = random_matrix(1, l.weight.cols(), rng, 0.1);
  const std::vector<int> nodes{6, 0, 3, 3, 1};
  const DenseMatrix w = random_matrix(5, 4, rng);
  auto loss = [&] { return (encode(enc, t.users, nodes).array() * w.array()).sum(); };
  auto [x, cache] = encode_forward(enc, t.users, nodes);
  const auto grads = encode_backward(enc, cache, w);
  const auto recomputed = encode_backward(enc, t.users, nodes, w);
  double worst = 0.0;
  for (std::size_t b = 0; b < enc.branches.size(); ++b) {
    CHECK(grads[b].layers[0].weight == recomputed[b].layers[0].weight);
    visit_tensors(enc.branches[b], grads[b], enc.attribute_names[b],
                  [&](const std::string&, double* v, const double* g, Eigen::Index n) {
                    worst = std::max(worst, max_fd_error(v, g, n, loss));
                  });
  }
  CHECK(worst <= 1e-4);
}

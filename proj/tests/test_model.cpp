#include "hopgraph/graph.hpp"
#include "hopgraph/linalg.hpp"
#include "hopgraph/model.hpp"
#include "hopgraph/propagation.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace hopgraph;
using hopgraph::testing::max_fd_error;
using hopgraph::testing::random_matrix;
using hopgraph::testing::tiny_attributes;

namespace {

SparseMatrix random_normalized(Rng& rng, int n_users, int n_items, int n_edges) {
  std::vector<std::pair<int, int>> edges;
  for (int e = 0; e < n_edges; ++e)
    edges.emplace_back(static_cast<int>(rng.uniform_int(n_users)),
                       static_cast<int>(rng.uniform_int(n_items)));
  return normalize_sym(bipartite_adjacency(n_users, n_items, edges));
}

double weighted_sum(const DenseMatrix& z, const DenseMatrix& w) {
  return (z.array() * w.array()).sum();
}

}  // namespace

TEST_CASE("APPNP one-hop worked example") {
  const SparseMatrix adj = normalize_sym(bipartite_adjacency(1, 1, {{0, 0}}));
  const DenseMatrix z = appnp_propagate<double>(DenseMatrix::Identity(2, 2), adj, 0.3, 1);
  DenseMatrix expected(2, 2);
  expected << 0.65, 0.35, 0.35, 0.65;
  CHECK((z - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("APPNP trivial cases") {
  Rng rng(1);
  const SparseMatrix adj = random_normalized(rng, 5, 4, 8);
  const DenseMatrix h = random_matrix(9, 3, rng);
  CHECK(appnp_propagate<double>(h, adj, 0.3, 0) == h);
  CHECK(appnp_propagate<double>(DenseMatrix::Zero(9, 3), adj, 0.3, 6).isZero(0.0));
  // Â = I leaves H fixed for any K.
  const SparseMatrix eye = sparse_identity<double>(9);
  CHECK((appnp_propagate<double>(h, eye, 0.3, 7) - h).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(appnp_propagate<double>(random_matrix(8, 3, rng), adj, 0.3, 2), ContractError);
  CHECK_THROWS_AS(appnp_propagate<double>(h, adj, 0.0, 2), ContractError);
}

TEST_CASE("APPNP unrolled coefficients and explicit power series") {
  for (int k : {0, 1, 4, 16}) {
    const auto c = appnp_coefficients(0.3, k);
    double s = 0.0;
    for (double v : c) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  Rng rng(2);
  const SparseMatrix adj = random_normalized(rng, 6, 5, 12);
  const DenseMatrix a = to_dense(adj);
  const DenseMatrix h = random_matrix(11, 2, rng);
  const int k = 5;
  const auto c = appnp_coefficients(0.3, k);
  DenseMatrix series = DenseMatrix::Zero(11, 2);
  DenseMatrix power = h;
  for (int j = 0; j <= k; ++j) {
    series += c[j] * power;
    power = a * power;
  }
  CHECK((appnp_propagate<double>(h, adj, 0.3, k) - series).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("APPNP is linear in H") {
  Rng rng(3);
  const SparseMatrix adj = random_normalized(rng, 6, 6, 15);
  const DenseMatrix h1 = random_matrix(12, 3, rng), h2 = random_matrix(12, 3, rng);
  const DenseMatrix lhs = appnp_propagate<double>(DenseMatrix(h1 + 2.5 * h2), adj, 0.3, 8);
  const DenseMatrix rhs = appnp_propagate<double>(h1, adj, 0.3, 8) +
                          2.5 * appnp_propagate<double>(h2, adj, 0.3, 8);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("APPNP converges to the personalized pagerank fixed point") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int nu = 2 + static_cast<int>(rng.uniform_int(24));
    const int ni = 2 + static_cast<int>(rng.uniform_int(24));
    const SparseMatrix adj = random_normalized(rng, nu, ni, 2 * (nu + ni));
    const DenseMatrix h = random_matrix(nu + ni, 3, rng);
    const DenseMatrix m = DenseMatrix::Identity(nu + ni, nu + ni) - 0.7 * to_dense(adj);
    const DenseMatrix fixed = 0.3 * m.partialPivLu().solve(h);
    const DenseMatrix z = appnp_propagate<double>(h, adj, 0.3, 200);
    CHECK((z - fixed).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("APPNP backward matches finite differences and the transpose rule") {
  Rng rng(5);
  const SparseMatrix adj = random_normalized(rng, 5, 4, 10);
  DenseMatrix h = random_matrix(9, 3, rng);
  const DenseMatrix w = random_matrix(9, 3, rng);
  for (int k : {0, 1, 3, 8}) {
    const DenseMatrix g = appnp_backward<double>(w, adj, 0.3, k);
    auto loss = [&] { return weighted_sum(appnp_propagate<double>(h, adj, 0.3, k), w); };
    CHECK(max_fd_error(h.data(), g.data(), h.size(), loss) <= 1e-4);
  }
}

TEST_CASE("GCN forward matches a dense reference and backward matches finite differences") {
  Rng rng(6);
  const SparseMatrix adj = random_normalized(rng, 4, 5, 10);
  const DenseMatrix a = to_dense(adj);
  DenseMatrix h = random_matrix(9, 3, rng);
  std::vector<DenseMatrix> weights{random_matrix(3, 3, rng), random_matrix(3, 3, rng),
                                   random_matrix(3, 3, rng)};
  const auto cache = gcn_forward<double>(h, adj, weights, 3);
  DenseMatrix ref = h;
  for (int l = 0; l < 3; ++l) {
    ref = a * ref * weights[l];
    if (l < 2) ref = ref.cwiseMax(0.0);
  }
  CHECK((cache.outputs.back() - ref).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(gcn_forward<double>(h, adj, weights, 0).outputs.back() == h);
  CHECK_THROWS_AS(gcn_forward<double>(h, adj, weights, 4), ContractError);

  const DenseMatrix w = random_matrix(9, 3, rng);
  std::vector<DenseMatrix> upstream(4, DenseMatrix::Zero(9, 3));
  upstream.back() = w;
  const auto g = gcn_backward<double>(cache, adj, weights, upstream);
  auto loss = [&] { return weighted_sum(gcn_forward<double>(h, adj, weights, 3).outputs.back(), w); };
  double worst = max_fd_error(h.data(), g.input.data(), h.size(), loss);
  for (int l = 0; l < 3; ++l)
    worst = std::max(worst, max_fd_error(weights[l].data(), g.weights[l].data(), weights[l].size(), loss));
  CHECK(worst <= 1e-4);
}

TEST_CASE("JK-GCN forward and backward") {
  Rng rng(7);
  const SparseMatrix adj = random_normalized(rng, 4, 4, 9);
  DenseMatrix h = random_matrix(8, 2, rng);
  std::vector<DenseMatrix> weights{random_matrix(2, 2, rng), random_matrix(2, 2, rng)};
  DenseMatrix projection = random_matrix(6, 2, rng);
  const auto cache = gcn_forward<double>(h, adj, weights, 2);
  DenseMatrix concat(8, 6);
  concat << cache.outputs[0], cache.outputs[1], cache.outputs[2];
  CHECK((jk_combine(cache, projection) - concat * projection).cwiseAbs().maxCoeff() <= 1e-12);

  const DenseMatrix w = random_matrix(8, 2, rng);
  const auto g = jk_backward<double>(cache, adj, weights, projection, w);
  auto loss = [&] { return weighted_sum(jk_forward<double>(h, adj, weights, 2, projection), w); };
  double worst = max_fd_error(h.data(), g.gcn.input.data(), h.size(), loss);
  worst = std::max(worst, max_fd_error(projection.data(), g.projection.data(), projection.size(), loss));
  for (int l = 0; l < 2; ++l)
    worst = std::max(worst, max_fd_error(weights[l].data(), g.gcn.weights[l].data(), weights[l].size(), loss));
  CHECK(worst <= 1e-4);
}

TEST_CASE("towers backward matches finite differences") {
  Rng rng(8);
  const std::array<Eigen::Index, 3> dims{3, 5, 4};
  TowerNet towers{make_mlp(dims, Activation::relu, rng), make_mlp(dims, Activation::relu, rng)};
  DenseMatrix xu = random_matrix(4, 3, rng), xi = random_matrix(5, 3, rng);
  const DenseMatrix w = random_matrix(9, 4, rng);
  auto [h, cache] = towers_forward(towers, xu, xi);
  CHECK(h.topRows(4) == mlp_apply(towers.user, xu));
  CHECK(h.bottomRows(5) == mlp_apply(towers.item, xi));
  const auto g = towers_backward(towers, cache, w);
  auto loss = [&] { return weighted_sum(towers_forward(towers, xu, xi).first, w); };
  double worst = std::max(max_fd_error(xu.data(), g.x_users.data(), xu.size(), loss),
                          max_fd_error(xi.data(), g.x_items.data(), xi.size(), loss));
  visit_tensors(towers.user, g.params.user, "u", [&](const std::string&, double* v, const double* gr, Eigen::Index n) {
    worst = std::max(worst, max_fd_error(v, gr, n, loss));
  });
  visit_tensors(towers.item, g.params.item, "i", [&](const std::string&, double* v, const double* gr, Eigen::Index n) {
    worst = std::max(worst, max_fd_error(v, gr, n, loss));
  });
  CHECK(worst <= 1e-4);
}

TEST_CASE("end-to-end model gradient matches finite differences for every backend") {
  for (Backend backend : {Backend::dnn, Backend::gcn, Backend::jk_gcn, Backend::appnp}) {
    CAPTURE(to_string(backend));
    Rng rng(40 + static_cast<int>(backend));
    const AttributeTable attrs = tiny_attributes(rng, 6, 5);
    PropagationConfig cfg{backend, backend == Backend::dnn ? 0 : 3, 0.3};
    const ModelDims dims{4, 5, 6};
    ModelParams params = make_model(attrs, cfg, dims, rng);
    // Zero biases put missing-category rows exactly on the ReLU kink; move off it.
    visit_params(params, zeros_like(params), [&](const std::string&, double* v, const double*, Eigen::Index n) {
      for (Eigen::Index i = 0; i < n; ++i) v[i] += 0.05 * rng.normal();
    });
    const std::vector<int> users{0, 2, 3, 5};
    const SparseMatrix adj = random_normalized(rng, 4, 5, 10);
    const int hops = backend == Backend::dnn ? 0 : 2;
    const DenseMatrix w = random_matrix(9, 4, rng);
    const ForwardPass pass = model_forward(params, cfg, attrs, users, adj, hops);
    ModelParams grads = model_backward(params, cfg, adj, pass, w);
    auto loss = [&] { return weighted_sum(model_forward(params, cfg, attrs, users, adj, hops).z, w); };
    double worst = 0.0;
    visit_params(params, grads, [&](const std::string&, double* v, const double* g, Eigen::Index n) {
      worst = std::max(worst, max_fd_error(v, g, n, loss));
    });
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("model_forward contract checks") {
  Rng rng(9);
  const AttributeTable attrs = tiny_attributes(rng, 4, 3);
  PropagationConfig cfg{Backend::gcn, 2, 0.3};
  const ModelParams params = make_model(attrs, cfg, ModelDims{4, 4, 4}, rng);
  const std::vector<int> users{0, 1, 2, 3};
  const SparseMatrix adj = random_normalized(rng, 4, 3, 5);
  CHECK_NOTHROW(model_forward(params, cfg, attrs, users, adj, 2));
  CHECK_THROWS_AS(model_forward(params, cfg, attrs, users, adj, 3), ContractError);
  const std::vector<int> fewer{0, 1};
  CHECK_THROWS_AS(model_forward(params, cfg, attrs, fewer, adj, 1), ContractError);
  PropagationConfig bad{Backend::dnn, 2, 0.3};
  CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("score is the dot product of user and item rows") {
  DenseMatrix z(4, 2);
  z << 1, 0, 0, 2, 3, 1, -1, 1;
  const std::vector<int> users{1, 0}, items{0, 1};
  const DenseMatrix s = score(z, 2, users, items);
  CHECK(s(0, 0) == 2.0);
  CHECK(s(0, 1) == 2.0);
  CHECK(s(1, 0) == 3.0);
  CHECK(s(1, 1) == -1.0);
}

TEST_CASE("checkpoint round trip is exact") {
  Rng rng(10);
  const AttributeTable attrs = tiny_attributes(rng, 3, 3);
  for (Backend backend : {Backend::gcn, Backend::jk_gcn, Backend::appnp}) {
    PropagationConfig cfg{backend, 2, 0.3};
    ModelParams p = make_model(attrs, cfg, ModelDims{4, 3, 5}, rng);
    ModelParams q = checkpoint_from_json(checkpoint_json(p, "{}"));
    ModelParams zero = zeros_like(p);
    std::vector<DenseMatrix> a, b;
    visit_params(p, zero, [&](const std::string&, double* v, const double*, Eigen::Index n) {
      a.push_back(Eigen::Map<DenseMatrix>(v, 1, n));
    });
    visit_params(q, zeros_like(q), [&](const std::string&, double* v, const double*, Eigen::Index n) {
      b.push_back(Eigen::Map<DenseMatrix>(v, 1, n));
    });
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
  CHECK_THROWS(checkpoint_from_json("{\"format\": \"something else\"}"));
}

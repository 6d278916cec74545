#include "hopgraph/model.hpp"

#include <array>
#include <cmath>

namespace hopgraph {

Backend parse_backend(std::string_view name) {
  if (name == "dnn") return Backend::dnn;
  if (name == "gcn") return Backend::gcn;
  if (name == "jk_gcn") return Backend::jk_gcn;
  if (name == "appnp") return Backend::appnp;
  throw ContractError("unknown backend '" + std::string(name) + "'");
}

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::dnn: return "dnn";
    case Backend::gcn: return "gcn";
    case Backend::jk_gcn: return "jk_gcn";
    case Backend::appnp: return "appnp";
  }
  return "?";
}

void PropagationConfig::validate() const {
  require(hops >= 0, "propagation: K must be >= 0");
  require(backend != Backend::dnn || hops == 0, "propagation: dnn backend requires K = 0");
  require(alpha > 0.0 && alpha <= 1.0, "propagation: alpha must lie in (0, 1]");
}

namespace {

DenseMatrix glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  DenseMatrix w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

}  // namespace

ModelParams make_model(const AttributeTable& attrs, const PropagationConfig& cfg,
                       const ModelDims& dims, Rng& rng) {
  cfg.validate();
  const auto d = dims.embedding_dim;
  ModelParams p;
  Rng enc_rng = rng.split("encoders");
  Rng user_enc_rng = enc_rng.split("user");
  Rng item_enc_rng = enc_rng.split("item");
  p.user_encoder = make_encoder(attrs.users, d, dims.encoder_hidden, user_enc_rng);
  p.item_encoder = make_encoder(attrs.items, d, dims.encoder_hidden, item_enc_rng);
  const std::array<Eigen::Index, 3> tower_dims{d, dims.tower_hidden, d};
  Rng user_tower_rng = rng.split("user_tower");
  Rng item_tower_rng = rng.split("item_tower");
  p.towers.user = make_mlp(tower_dims, Activation::relu, user_tower_rng);
  p.towers.item = make_mlp(tower_dims, Activation::relu, item_tower_rng);
  if (cfg.backend == Backend::gcn || cfg.backend == Backend::jk_gcn) {
    Rng gcn_rng = rng.split("gcn");
    for (int l = 0; l < cfg.hops; ++l) p.gcn_weights.push_back(glorot(d, d, gcn_rng));
  }
  if (cfg.backend == Backend::jk_gcn) {
    Rng jk_rng = rng.split("jk");
    p.jk_projection = glorot((cfg.hops + 1) * d, d, jk_rng);
  }
  return p;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  for (auto* enc : {&z.user_encoder, &z.item_encoder}) {
    for (auto& b : enc->branches) b = zeros_like(b);
  }
  z.towers.user = zeros_like(z.towers.user);
  z.towers.item = zeros_like(z.towers.item);
  for (auto& w : z.gcn_weights) w.setZero();
  z.jk_projection.setZero();
  return z;
}

std::pair<DenseMatrix, TowerCache> towers_forward(const TowerNet& towers, const DenseMatrix& x_users,
                                                  const DenseMatrix& x_items) {
  auto [hu, cu] = mlp_forward(towers.user, x_users);
  auto [hi, ci] = mlp_forward(towers.item, x_items);
  require(hu.cols() == hi.cols(), "towers_forward: user and item towers disagree on D");
  DenseMatrix h(hu.rows() + hi.rows(), hu.cols());
  h.topRows(hu.rows()) = hu;
  h.bottomRows(hi.rows()) = hi;
  TowerCache cache{std::move(cu), std::move(ci), hu.rows()};
  return {std::move(h), std::move(cache)};
}

TowerGrads towers_backward(const TowerNet& towers, const TowerCache& cache,
                           const DenseMatrix& grad_h) {
  const auto n_items = grad_h.rows() - cache.n_users;
  require(n_items >= 0, "towers_backward: gradient has fewer rows than users");
  auto gu = mlp_backward(towers.user, cache.user, DenseMatrix(grad_h.topRows(cache.n_users)));
  auto gi = mlp_backward(towers.item, cache.item, DenseMatrix(grad_h.bottomRows(n_items)));
  return {{std::move(gu.params), std::move(gi.params)}, std::move(gu.input), std::move(gi.input)};
}

ForwardPass model_forward(const ModelParams& params, const PropagationConfig& cfg,
                          const AttributeTable& attrs, std::span<const int> users,
                          const SparseMatrix& adj, int hops) {
  cfg.validate();
  const int n_items = attrs.items.n_nodes;
  require(adj.rows() == static_cast<Eigen::Index>(users.size()) + n_items,
          "model_forward: graph has " + std::to_string(adj.rows()) + " nodes, expected " +
              std::to_string(users.size() + static_cast<std::size_t>(n_items)));
  ForwardPass pass;
  pass.hops = cfg.backend == Backend::dnn ? 0 : hops;
  require(pass.hops >= 0, "model_forward: negative hop count");
  if (cfg.backend == Backend::gcn || cfg.backend == Backend::jk_gcn) {
    require(static_cast<std::size_t>(pass.hops) <= params.gcn_weights.size(),
            "model_forward: hop count " + std::to_string(hops) + " exceeds the " +
                std::to_string(params.gcn_weights.size()) + " GCN layers");
  }

  auto [xu, user_cache] = encode_forward(params.user_encoder, attrs.users, users);
  const auto items = all_nodes(n_items);
  auto [xi, item_cache] = encode_forward(params.item_encoder, attrs.items, items);
  pass.user_features = std::move(user_cache);
  pass.item_features = std::move(item_cache);
  auto [h, tower_cache] = towers_forward(params.towers, xu, xi);
  pass.towers = std::move(tower_cache);
  pass.h = std::move(h);

  switch (cfg.backend) {
    case Backend::dnn:
      pass.z = pass.h;
      break;
    case Backend::appnp:
      pass.z = appnp_propagate(pass.h, adj, cfg.alpha, pass.hops);
      break;
    case Backend::gcn:
      pass.gcn = gcn_forward<double>(pass.h, adj, params.gcn_weights, pass.hops);
      pass.z = pass.gcn.outputs.back();
      break;
    case Backend::jk_gcn:
      pass.gcn = gcn_forward<double>(pass.h, adj, params.gcn_weights, pass.hops);
      pass.z = jk_combine(pass.gcn, params.jk_projection);
      break;
  }
  return pass;
}

ModelParams model_backward(const ModelParams& params, const PropagationConfig& cfg,
                           const SparseMatrix& adj, const ForwardPass& pass,
                           const DenseMatrix& grad_z) {
  require(grad_z.rows() == pass.z.rows() && grad_z.cols() == pass.z.cols(),
          "model_backward: gradient shape does not match Z");
  ModelParams g = zeros_like(params);
  DenseMatrix grad_h;
  switch (cfg.backend) {
    case Backend::dnn:
      grad_h = grad_z;
      break;
    case Backend::appnp:
      grad_h = appnp_backward(grad_z, adj, cfg.alpha, pass.hops);
      break;
    case Backend::gcn: {
      std::vector<DenseMatrix> grad_outputs(pass.gcn.outputs.size());
      for (std::size_t l = 0; l + 1 < grad_outputs.size(); ++l) {
        grad_outputs[l] = DenseMatrix::Zero(grad_z.rows(), pass.gcn.outputs[l].cols());
      }
      grad_outputs.back() = grad_z;
      auto gg = gcn_backward<double>(pass.gcn, adj, params.gcn_weights, grad_outputs);
      for (std::size_t l = 0; l < gg.weights.size(); ++l) g.gcn_weights[l] = std::move(gg.weights[l]);
      grad_h = std::move(gg.input);
      break;
    }
    case Backend::jk_gcn: {
      auto gj = jk_backward<double>(pass.gcn, adj, params.gcn_weights, params.jk_projection, grad_z);
      for (std::size_t l = 0; l < gj.gcn.weights.size(); ++l) {
        g.gcn_weights[l] = std::move(gj.gcn.weights[l]);
      }
      g.jk_projection = std::move(gj.projection);
      grad_h = std::move(gj.gcn.input);
      break;
    }
  }

  auto gt = towers_backward(params.towers, pass.towers, grad_h);
  g.towers = std::move(gt.params);
  g.user_encoder.branches = encode_backward(params.user_encoder, pass.user_features, gt.x_users);
  g.item_encoder.branches = encode_backward(params.item_encoder, pass.item_features, gt.x_items);
  return g;
}

DenseMatrix score(const DenseMatrix& z, int n_users, std::span<const int> users,
                  std::span<const int> items) {
  const auto n_items = z.rows() - n_users;
  DenseMatrix zu(static_cast<Eigen::Index>(users.size()), z.cols());
  DenseMatrix zi(static_cast<Eigen::Index>(items.size()), z.cols());
  for (std::size_t r = 0; r < users.size(); ++r) {
    require(users[r] >= 0 && users[r] < n_users, "score: user id " + std::to_string(users[r]) +
                                                     " out of range");
    zu.row(static_cast<Eigen::Index>(r)) = z.row(users[r]);
  }
  for (std::size_t r = 0; r < items.size(); ++r) {
    require(items[r] >= 0 && items[r] < n_items, "score: item id " + std::to_string(items[r]) +
                                                     " out of range");
    zi.row(static_cast<Eigen::Index>(r)) = z.row(n_users + items[r]);
  }
  return matmul(zu, zi.transpose());
}

}  // namespace hopgraph

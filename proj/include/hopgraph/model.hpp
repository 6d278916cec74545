#pragma once

#include "hopgraph/core.hpp"
#include "hopgraph/features.hpp"
#include "hopgraph/mlp.hpp"
#include "hopgraph/propagation.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hopgraph {

enum class Backend { dnn, gcn, jk_gcn, appnp };

Backend parse_backend(std::string_view name);
std::string_view to_string(Backend b);

struct PropagationConfig {
  Backend backend = Backend::appnp;
  int hops = 4;  // K; must be 0 for dnn
  double alpha = 0.3;

  void validate() const;
};

struct ModelDims {
  Eigen::Index embedding_dim = 128;  // D, also the attribute feature width n
  Eigen::Index encoder_hidden = 64;
  Eigen::Index tower_hidden = 128;
};

/// f_u and f_i.
struct TowerNet {
  Mlp user;
  Mlp item;
};

struct ModelParams {
  FeatureEncoder user_encoder;
  FeatureEncoder item_encoder;
  TowerNet towers;
  std::vector<DenseMatrix> gcn_weights;  // W⁰..W^(K−1) for gcn / jk_gcn
  DenseMatrix jk_projection;             // (K+1)·D × D for jk_gcn, else empty
};

ModelParams make_model(const AttributeTable& attrs, const PropagationConfig& cfg,
                       const ModelDims& dims, Rng& rng);
ModelParams zeros_like(const ModelParams& p);

/// Calls f(name, value_ptr, grad_ptr, size) over every parameter tensor in a
/// fixed order.
template <typename F>
void visit_params(ModelParams& params, const ModelParams& grads, F&& f) {
  auto encoder = [&](FeatureEncoder& pe, const FeatureEncoder& ge, const std::string& prefix) {
    require(pe.branches.size() == ge.branches.size(), prefix + ": branch count mismatch");
    for (std::size_t b = 0; b < pe.branches.size(); ++b) {
      visit_tensors(pe.branches[b], ge.branches[b], prefix + "." + pe.attribute_names[b], f);
    }
  };
  encoder(params.user_encoder, grads.user_encoder, "user_encoder");
  encoder(params.item_encoder, grads.item_encoder, "item_encoder");
  visit_tensors(params.towers.user, grads.towers.user, "user_tower", f);
  visit_tensors(params.towers.item, grads.towers.item, "item_tower", f);
  require(params.gcn_weights.size() == grads.gcn_weights.size(), "gcn weight count mismatch");
  for (std::size_t l = 0; l < params.gcn_weights.size(); ++l) {
    require(params.gcn_weights[l].size() == grads.gcn_weights[l].size(), "gcn weight shape mismatch");
    f("gcn.weight." + std::to_string(l), params.gcn_weights[l].data(), grads.gcn_weights[l].data(),
      params.gcn_weights[l].size());
  }
  require(params.jk_projection.size() == grads.jk_projection.size(), "jk projection shape mismatch");
  if (params.jk_projection.size() > 0) {
    f(std::string("jk.projection"), params.jk_projection.data(), grads.jk_projection.data(),
      params.jk_projection.size());
  }
}

struct TowerCache {
  MlpCache<double> user;
  MlpCache<double> item;
  Eigen::Index n_users = 0;
};

/// H = [f_u(X_users); f_i(X_items)], users first.
std::pair<DenseMatrix, TowerCache> towers_forward(const TowerNet& towers, const DenseMatrix& x_users,
                                                  const DenseMatrix& x_items);
struct TowerGrads {
  TowerNet params;
  DenseMatrix x_users;
  DenseMatrix x_items;
};
TowerGrads towers_backward(const TowerNet& towers, const TowerCache& cache,
                           const DenseMatrix& grad_h);

/// Everything the backward pass needs from one forward evaluation.
struct ForwardPass {
  EncodeCache user_features;
  EncodeCache item_features;
  TowerCache towers;
  DenseMatrix h;
  GcnCache<double> gcn;
  DenseMatrix z;
  int hops = 0;
};

/// Encoders → towers → `hops` propagation steps of the configured backend.
/// `users` are the original ids of the graph's user nodes (in node order);
/// all items are always present.
ForwardPass model_forward(const ModelParams& params, const PropagationConfig& cfg,
                          const AttributeTable& attrs, std::span<const int> users,
                          const SparseMatrix& adj, int hops);

ModelParams model_backward(const ModelParams& params, const PropagationConfig& cfg,
                           const SparseMatrix& adj, const ForwardPass& pass,
                           const DenseMatrix& grad_z);

/// s(u, i) = ⟨z_u, z_i⟩ for user rows `users` and item ids `items`;
/// item i lives at row n_users + i.
DenseMatrix score(const DenseMatrix& z, int n_users, std::span<const int> users,
                  std::span<const int> items);

/// Versioned JSON checkpoint. Doubles are written with 17 significant digits,
/// so a save/load round trip is exact.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const std::string& resolved_config_json);
ModelParams load_checkpoint(const std::filesystem::path& path);

std::string checkpoint_json(const ModelParams& params, const std::string& resolved_config_json);
ModelParams checkpoint_from_json(const std::string& text);

}  // namespace hopgraph

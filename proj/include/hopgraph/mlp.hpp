#pragma once

#include "hopgraph/core.hpp"
#include "hopgraph/linalg.hpp"
#include "hopgraph/rng.hpp"

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hopgraph {

enum class Activation { relu, identity };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

/// y = act(x·W + b), rows of x are samples. W is in×out.
template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> weight;
  RowVector<Scalar> bias;
  Activation activation = Activation::identity;
};

template <typename Scalar>
struct MlpParams {
  std::vector<DenseLayer<Scalar>> layers;

  Eigen::Index in_dim() const { return layers.empty() ? 0 : layers.front().weight.rows(); }
  Eigen::Index out_dim() const { return layers.empty() ? 0 : layers.back().weight.cols(); }
};

template <typename Scalar>
struct MlpCache {
  std::vector<Matrix<Scalar>> inputs;  // input of layer l
  std::vector<Matrix<Scalar>> pre;     // x·W + b of layer l
};

template <typename Scalar>
struct MlpGrads {
  MlpParams<Scalar> params;
  Matrix<Scalar> input;
};

using Mlp = MlpParams<double>;

template <typename Scalar>
void check_mlp(const MlpParams<Scalar>& p) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    require(layer.bias.size() == layer.weight.cols(),
            "mlp: layer " + std::to_string(l) + " bias width does not match weight");
    if (l > 0) {
      require(p.layers[l - 1].weight.cols() == layer.weight.rows(),
              "mlp: layer " + std::to_string(l) + " input " + std::to_string(layer.weight.rows()) +
                  " does not chain with previous output " +
                  std::to_string(p.layers[l - 1].weight.cols()));
    }
  }
}

template <typename Scalar>
Matrix<Scalar> activate(const Matrix<Scalar>& pre, Activation a) {
  if (a == Activation::relu) return pre.cwiseMax(Scalar(0));
  return pre;
}

/// Forward pass that keeps what backward needs.
template <typename Scalar, typename Derived>
std::pair<Matrix<Scalar>, MlpCache<Scalar>> mlp_forward(const MlpParams<Scalar>& p,
                                                        const Eigen::MatrixBase<Derived>& x) {
  check_mlp(p);
  require(!p.layers.empty(), "mlp_forward: no layers");
  require(x.cols() == p.in_dim(), "mlp_forward: input width " + std::to_string(x.cols()) +
                                      " != " + std::to_string(p.in_dim()));
  MlpCache<Scalar> cache;
  Matrix<Scalar> h = x;
  for (const auto& layer : p.layers) {
    Matrix<Scalar> pre = matmul(h, layer.weight);
    pre.rowwise() += layer.bias;
    cache.inputs.push_back(std::move(h));
    h = activate(pre, layer.activation);
    cache.pre.push_back(std::move(pre));
  }
  return {std::move(h), std::move(cache)};
}

template <typename Scalar, typename Derived>
Matrix<Scalar> mlp_apply(const MlpParams<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  return mlp_forward(p, x).first;
}

template <typename Scalar>
MlpParams<Scalar> zeros_like(const MlpParams<Scalar>& p) {
  MlpParams<Scalar> z = p;
  for (auto& layer : z.layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  return z;
}

/// Reverse-mode pass through the cached forward composition.
template <typename Scalar>
MlpGrads<Scalar> mlp_backward(const MlpParams<Scalar>& p, const MlpCache<Scalar>& cache,
                              const Matrix<Scalar>& grad_out) {
  require(cache.pre.size() == p.layers.size(), "mlp_backward: cache does not match parameters");
  const auto& last = cache.pre.back();
  require(grad_out.rows() == last.rows() && grad_out.cols() == last.cols(),
          "mlp_backward: grad shape " + shape_str(grad_out.rows(), grad_out.cols()) +
              " != output shape " + shape_str(last.rows(), last.cols()));
  MlpGrads<Scalar> g{zeros_like(p), {}};
  Matrix<Scalar> upstream = grad_out;
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const auto& layer = p.layers[l];
    if (layer.activation == Activation::relu) {
      upstream = (cache.pre[l].array() > Scalar(0)).select(upstream.array(), Scalar(0)).matrix();
    }
    g.params.layers[l].weight.noalias() = cache.inputs[l].transpose() * upstream;
    g.params.layers[l].bias = upstream.colwise().sum();
    upstream = matmul(upstream, layer.weight.transpose());
  }
  g.input = std::move(upstream);
  return g;
}

/// Glorot-uniform weights, zero biases. `dims` lists every width from input to
/// output; hidden layers get `hidden`, the last layer is identity.
MlpParams<double> make_mlp(std::span<const Eigen::Index> dims, Activation hidden, Rng& rng);

/// Calls f(name, value_ptr, grad_ptr, size) for every tensor, after checking
/// that `grads` has the same layout as `params`.
template <typename Scalar, typename F>
void visit_tensors(MlpParams<Scalar>& params, const MlpParams<Scalar>& grads,
                   const std::string& prefix, F&& f) {
  require(params.layers.size() == grads.layers.size(), prefix + ": layer count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& pl = params.layers[l];
    const auto& gl = grads.layers[l];
    const std::string base = prefix + ".layers." + std::to_string(l);
    require(pl.weight.rows() == gl.weight.rows() && pl.weight.cols() == gl.weight.cols() &&
                pl.bias.size() == gl.bias.size(),
            base + ": gradient shape mismatch");
    f(base + ".weight", pl.weight.data(), gl.weight.data(), pl.weight.size());
    f(base + ".bias", pl.bias.data(), gl.bias.data(), pl.bias.size());
  }
}

template <typename Scalar>
void add_inplace(MlpParams<Scalar>& acc, const MlpParams<Scalar>& g) {
  require(acc.layers.size() == g.layers.size(), "add_inplace: layer count mismatch");
  for (std::size_t l = 0; l < acc.layers.size(); ++l) {
    acc.layers[l].weight += g.layers[l].weight;
    acc.layers[l].bias += g.layers[l].bias;
  }
}

}  // namespace hopgraph

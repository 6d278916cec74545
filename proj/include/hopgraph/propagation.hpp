#pragma once

#include "hopgraph/core.hpp"
#include "hopgraph/linalg.hpp"
#include "hopgraph/mlp.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace hopgraph {

/// Z⁰ = H, Z^(k+1) = (1−α)ÂZ^k + αH, applied exactly `hops` times.
template <typename Scalar>
Matrix<Scalar> appnp_propagate(const Matrix<Scalar>& h, const Sparse<Scalar>& adj, Scalar alpha,
                               int hops) {
  require(adj.rows() == adj.cols(), "appnp_propagate: adjacency is not square");
  require(adj.cols() == h.rows(), "appnp_propagate: adjacency " + shape_str(adj.rows(), adj.cols()) +
                                      " does not match H " + shape_str(h.rows(), h.cols()));
  require(alpha > Scalar(0) && alpha <= Scalar(1), "appnp_propagate: alpha must lie in (0, 1]");
  require(hops >= 0, "appnp_propagate: negative hop count");
  Matrix<Scalar> z = h;
  const Scalar keep = Scalar(1) - alpha;
  for (int k = 0; k < hops; ++k) {
    Matrix<Scalar> next = spmm(adj, z);
    next *= keep;
    next += alpha * h;
    z = std::move(next);
  }
  return z;
}

/// Coefficients of the unrolled recurrence Z = Σ_j c_j Â^j H:
/// c_j = α(1−α)^j for j < K and c_K = (1−α)^K.
template <typename Scalar>
std::vector<Scalar> appnp_coefficients(Scalar alpha, int hops) {
  std::vector<Scalar> c(static_cast<std::size_t>(hops) + 1);
  for (int j = 0; j < hops; ++j) c[j] = alpha * std::pow(Scalar(1) - alpha, Scalar(j));
  c[hops] = std::pow(Scalar(1) - alpha, Scalar(hops));
  return c;
}

/// Gradient of appnp_propagate with respect to H. The recurrence is linear
/// and Â is symmetric, so this runs the transposed recurrence on grad_Z.
template <typename Scalar>
Matrix<Scalar> appnp_backward(const Matrix<Scalar>& grad_z, const Sparse<Scalar>& adj,
                              Scalar alpha, int hops) {
  require(adj.rows() == adj.cols() && adj.cols() == grad_z.rows(),
          "appnp_backward: adjacency does not match gradient rows");
  require(alpha > Scalar(0) && alpha <= Scalar(1), "appnp_backward: alpha must lie in (0, 1]");
  require(hops >= 0, "appnp_backward: negative hop count");
  Matrix<Scalar> grad_h = Matrix<Scalar>::Zero(grad_z.rows(), grad_z.cols());
  Matrix<Scalar> upstream = grad_z;
  const Scalar keep = Scalar(1) - alpha;
  for (int k = hops; k > 0; --k) {
    grad_h += alpha * upstream;
    upstream = spmm(adj, upstream);
    upstream *= keep;
  }
  grad_h += upstream;
  return grad_h;
}

template <typename Scalar>
struct GcnCache {
  std::vector<Matrix<Scalar>> outputs;     // Z⁰ = H, Z¹, …, Z^L
  std::vector<Matrix<Scalar>> aggregated;  // ÂZ^l
  std::vector<Matrix<Scalar>> pre;         // ÂZ^l W^l
  Activation hidden = Activation::relu;
};

/// Z^(l+1) = act(Â Z^l W^l) for l < layers, with the last layer linear.
/// Only the first `layers` weight matrices are used.
template <typename Scalar>
GcnCache<Scalar> gcn_forward(const Matrix<Scalar>& h, const Sparse<Scalar>& adj,
                             std::span<const Matrix<Scalar>> weights, int layers,
                             Activation hidden = Activation::relu) {
  require(adj.rows() == adj.cols() && adj.cols() == h.rows(),
          "gcn_forward: adjacency does not match H rows");
  require(layers >= 0 && static_cast<std::size_t>(layers) <= weights.size(),
          "gcn_forward: requested " + std::to_string(layers) + " layers but only " +
              std::to_string(weights.size()) + " weight matrices");
  GcnCache<Scalar> cache;
  cache.hidden = hidden;
  cache.outputs.push_back(h);
  for (int l = 0; l < layers; ++l) {
    const auto& w = weights[static_cast<std::size_t>(l)];
    require(w.rows() == cache.outputs.back().cols(),
            "gcn_forward: weight " + std::to_string(l) + " has " + std::to_string(w.rows()) +
                " rows, expected " + std::to_string(cache.outputs.back().cols()));
    cache.aggregated.push_back(spmm(adj, cache.outputs.back()));
    cache.pre.push_back(matmul(cache.aggregated.back(), w));
    const Activation act = (l + 1 == layers) ? Activation::identity : hidden;
    cache.outputs.push_back(activate(cache.pre.back(), act));
  }
  return cache;
}

template <typename Scalar>
struct GcnGrads {
  std::vector<Matrix<Scalar>> weights;  // one per used layer
  Matrix<Scalar> input;
};

/// Backward through gcn_forward. `grad_outputs[l]` is the gradient arriving at
/// Z^l from outside the layer stack (plain GCN: only the last entry is
/// nonzero; JK: every entry).
template <typename Scalar>
GcnGrads<Scalar> gcn_backward(const GcnCache<Scalar>& cache, const Sparse<Scalar>& adj,
                              std::span<const Matrix<Scalar>> weights,
                              std::span<const Matrix<Scalar>> grad_outputs) {
  const std::size_t layers = cache.pre.size();
  require(grad_outputs.size() == layers + 1, "gcn_backward: need one gradient per layer output");
  GcnGrads<Scalar> g;
  g.weights.resize(layers);
  Matrix<Scalar> upstream = grad_outputs[layers];
  for (std::size_t l = layers; l-- > 0;) {
    const Activation act = (l + 1 == layers) ? Activation::identity : cache.hidden;
    if (act == Activation::relu) {
      upstream = (cache.pre[l].array() > Scalar(0)).select(upstream.array(), Scalar(0)).matrix();
    }
    g.weights[l].noalias() = cache.aggregated[l].transpose() * upstream;
    Matrix<Scalar> back = matmul(upstream, weights[l].transpose());
    upstream = spmm(adj, back);
    upstream += grad_outputs[l];
  }
  g.input = std::move(upstream);
  return g;
}

/// Z = [Z⁰ ‖ … ‖ Z^L] · P, evaluated blockwise as Σ_l Z^l P_l.
template <typename Scalar>
Matrix<Scalar> jk_combine(const GcnCache<Scalar>& cache, const Matrix<Scalar>& projection) {
  const auto d = cache.outputs.front().cols();
  const auto blocks = static_cast<Eigen::Index>(cache.outputs.size());
  require(projection.rows() >= blocks * d,
          "jk_combine: projection has " + std::to_string(projection.rows()) +
              " rows, need at least " + std::to_string(blocks * d));
  Matrix<Scalar> z = Matrix<Scalar>::Zero(cache.outputs.front().rows(), projection.cols());
  for (Eigen::Index l = 0; l < blocks; ++l) {
    z.noalias() += cache.outputs[l] * projection.middleRows(l * d, d);
  }
  return z;
}

template <typename Scalar>
Matrix<Scalar> jk_forward(const Matrix<Scalar>& h, const Sparse<Scalar>& adj,
                          std::span<const Matrix<Scalar>> weights, int layers,
                          const Matrix<Scalar>& projection) {
  return jk_combine(gcn_forward(h, adj, weights, layers), projection);
}

template <typename Scalar>
struct JkGrads {
  GcnGrads<Scalar> gcn;
  Matrix<Scalar> projection;  // same shape as the full projection; unused blocks zero
};

template <typename Scalar>
JkGrads<Scalar> jk_backward(const GcnCache<Scalar>& cache, const Sparse<Scalar>& adj,
                            std::span<const Matrix<Scalar>> weights,
                            const Matrix<Scalar>& projection, const Matrix<Scalar>& grad_z) {
  const auto d = cache.outputs.front().cols();
  JkGrads<Scalar> g;
  g.projection = Matrix<Scalar>::Zero(projection.rows(), projection.cols());
  std::vector<Matrix<Scalar>> grad_outputs;
  for (std::size_t l = 0; l < cache.outputs.size(); ++l) {
    const auto block = static_cast<Eigen::Index>(l) * d;
    g.projection.middleRows(block, d).noalias() = cache.outputs[l].transpose() * grad_z;
    grad_outputs.push_back(matmul(grad_z, projection.middleRows(block, d).transpose()));
  }
  g.gcn = gcn_backward<Scalar>(cache, adj, weights, grad_outputs);
  return g;
}

}  // namespace hopgraph

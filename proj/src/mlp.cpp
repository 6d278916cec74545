#include "hopgraph/mlp.hpp"

#include <cmath>

namespace hopgraph {

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw ContractError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

MlpParams<double> make_mlp(std::span<const Eigen::Index> dims, Activation hidden, Rng& rng) {
  require(dims.size() >= 2, "make_mlp: need at least input and output widths");
  MlpParams<double> p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const Eigen::Index in = dims[l];
    const Eigen::Index out = dims[l + 1];
    require(in > 0 && out > 0, "make_mlp: widths must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer<double> layer;
    layer.weight.resize(in, out);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
    }
    layer.bias = DenseRow::Zero(out);
    layer.activation = (l + 2 == dims.size()) ? Activation::identity : hidden;
    p.layers.push_back(std::move(layer));
  }
  return p;
}

}  // namespace hopgraph

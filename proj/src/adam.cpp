#include "hopgraph/adam.hpp"

#include <cmath>

namespace hopgraph {

void adam_step(AdamState& state, std::span<const ParamSlot> slots) {
  if (state.first_moment.empty() && state.t == 0) {
    for (const auto& s : slots) {
      state.first_moment.push_back(Eigen::VectorXd::Zero(s.size));
      state.second_moment.push_back(Eigen::VectorXd::Zero(s.size));
    }
  }
  require(state.first_moment.size() == slots.size(),
          "adam_step: expected " + std::to_string(state.first_moment.size()) + " tensors, got " +
              std::to_string(slots.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    require(state.first_moment[i].size() == slots[i].size,
            "adam_step: shape mismatch for '" + slots[i].name + "'");
    Eigen::Map<const Eigen::VectorXd> g(slots[i].grad, slots[i].size);
    if (!g.allFinite()) throw NumericError("adam_step: non-finite gradient in '" + slots[i].name + "'");
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    Eigen::Map<Eigen::VectorXd> w(slots[i].value, slots[i].size);
    Eigen::Map<const Eigen::VectorXd> g(slots[i].grad, slots[i].size);
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseAbs2();
    w.array() -= state.learning_rate * (m.array() / correction1) /
                 ((v.array() / correction2).sqrt() + state.epsilon);
  }
}

}  // namespace hopgraph

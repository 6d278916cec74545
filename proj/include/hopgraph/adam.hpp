#pragma once

#include "hopgraph/core.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hopgraph {

/// A flat view of one parameter tensor and its gradient.
struct ParamSlot {
  std::string name;
  double* value;
  const double* grad;
  Eigen::Index size;
};

struct AdamState {
  double learning_rate = 3e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t t = 0;
  std::vector<Eigen::VectorXd> first_moment;
  std::vector<Eigen::VectorXd> second_moment;
};

/// Bias-corrected Adam. Moments are created on the first call; later calls
/// must pass the same slot layout. All gradients are checked for finiteness
/// before any parameter is touched.
void adam_step(AdamState& state, std::span<const ParamSlot> slots);

}  // namespace hopgraph

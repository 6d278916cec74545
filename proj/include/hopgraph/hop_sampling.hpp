#pragma once

#include "hopgraph/rng.hpp"

#include <string_view>

namespace hopgraph {

enum class HopDistribution {
  uniform_1_to_k,  // {1, …, K_max}
  uniform_0_to_k,  // {0, …, K_max}
  fixed,           // always K_max
};

HopDistribution parse_hop_distribution(std::string_view name);
std::string_view to_string(HopDistribution d);

/// Hop sampling draws the propagation depth afresh for every optimization
/// step. Evaluation always runs at K_max.
struct HopSamplingConfig {
  bool enabled = false;
  int max_hops = 1;
  HopDistribution distribution = HopDistribution::uniform_1_to_k;

  void validate() const;
};

int sample_hops(const HopSamplingConfig& cfg, Rng& rng);
int effective_hops_for_eval(const HopSamplingConfig& cfg);

/// Smallest and largest value sample_hops can return.
int min_support(const HopSamplingConfig& cfg);

}  // namespace hopgraph

#include "hopgraph/hop_sampling.hpp"

#include "hopgraph/core.hpp"

#include <string>

namespace hopgraph {

HopDistribution parse_hop_distribution(std::string_view name) {
  if (name == "uniform_1_to_K" || name == "uniform_1_to_k") return HopDistribution::uniform_1_to_k;
  if (name == "uniform_0_to_K" || name == "uniform_0_to_k") return HopDistribution::uniform_0_to_k;
  if (name == "fixed") return HopDistribution::fixed;
  throw ContractError("unknown hop distribution '" + std::string(name) + "'");
}

std::string_view to_string(HopDistribution d) {
  switch (d) {
    case HopDistribution::uniform_1_to_k: return "uniform_1_to_K";
    case HopDistribution::uniform_0_to_k: return "uniform_0_to_K";
    case HopDistribution::fixed: return "fixed";
  }
  return "?";
}

void HopSamplingConfig::validate() const {
  require(max_hops >= 1, "hop_sampling: K_max must be >= 1");
}

int min_support(const HopSamplingConfig& cfg) {
  if (!cfg.enabled || cfg.distribution == HopDistribution::fixed) return cfg.max_hops;
  return cfg.distribution == HopDistribution::uniform_0_to_k ? 0 : 1;
}

int sample_hops(const HopSamplingConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!cfg.enabled || cfg.distribution == HopDistribution::fixed) return cfg.max_hops;
  const int lo = min_support(cfg);
  const auto span = static_cast<std::uint64_t>(cfg.max_hops - lo + 1);
  return lo + static_cast<int>(rng.uniform_int(span));
}

int effective_hops_for_eval(const HopSamplingConfig& cfg) {
  cfg.validate();
  return cfg.max_hops;
}

}  // namespace hopgraph

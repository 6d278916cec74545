#pragma once

#include "hopgraph/datagen.hpp"
#include "hopgraph/training.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace hopgraph {

/// Malformed configuration. The message names the offending field (as a
/// dotted path) or the line/column of a JSON syntax error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json load_json(const std::filesystem::path& path);

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& cfg);

/// Run config layout:
///   model:        {backend, K, alpha, embedding_dim, encoder_hidden, tower_hidden}
///   hop_sampling: {enabled, distribution}
///   train:        {batch_size, users_per_step, learning_rate, beta1, beta2, epsilon,
///                  epochs, negatives, loss, window, eval_k, max_user_resamples, seed}
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

/// Applies HOPGRAPH_SEED when set; returns the override if any.
std::optional<std::uint64_t> seed_override();

}  // namespace hopgraph

#include "hopgraph/config.hpp"

#include "hopgraph/io.hpp"

#include <cstdlib>
#include <set>

namespace hopgraph {
namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json load_json(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace {

// Reads object members with type checking and field-path diagnostics.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": expected " + type_name<T>() + ", got " + it->dump());
    }
  }

  template <typename T, typename Parse>
  void get_enum(const char* key, T& out, Parse parse) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const std::exception& e) {
      throw ConfigError(field(key) + ": " + e.what());
    }
  }

  std::optional<Reader> child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Reader(*it, field(key));
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(field(k) + ": unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

 private:
  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Validate>
void validated(Validate&& v) {
  try {
    v();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig cfg;
  Reader r(j, "");
  r.get("n_users", cfg.n_users);
  r.get("n_items", cfg.n_items);
  r.get("n_days", cfg.n_days);
  r.get("warmup_days", cfg.warmup_days);
  r.get("train_days", cfg.train_days);
  r.get("valid_days", cfg.valid_days);
  r.get("test_days", cfg.test_days);
  r.get("n_clusters", cfg.n_clusters);
  r.get("rate", cfg.rate);
  r.get("popularity_skew", cfg.popularity_skew);
  r.get("affinity_spread", cfg.affinity_spread);
  r.get("user_attribute_noise", cfg.user_attribute_noise);
  r.get("item_attribute_noise", cfg.item_attribute_noise);
  r.get("signature_dim", cfg.signature_dim);
  r.get("seed", cfg.seed);
  if (const json* drift = r.raw("drift")) {
    if (!drift->is_array()) throw ConfigError("drift: expected an array of {day, strength}");
    cfg.drift.clear();
    for (std::size_t i = 0; i < drift->size(); ++i) {
      const std::string where = "drift[" + std::to_string(i) + "]";
      Reader d((*drift)[i], where);
      for (const char* key : {"day", "strength"}) {
        if (!(*drift)[i].contains(key)) throw ConfigError(where + "." + key + ": missing");
      }
      DriftEvent ev;
      d.get("day", ev.day);
      d.get("strength", ev.strength);
      d.finish();
      cfg.drift.push_back(ev);
    }
  }
  r.finish();
  validated([&] { cfg.validate(); });
  return cfg;
}

json to_json(const SynthConfig& cfg) {
  json drift = json::array();
  for (const auto& d : cfg.drift) drift.push_back({{"day", d.day}, {"strength", d.strength}});
  return {{"n_users", cfg.n_users},
          {"n_items", cfg.n_items},
          {"n_days", cfg.n_days},
          {"warmup_days", cfg.warmup_days},
          {"train_days", cfg.train_days},
          {"valid_days", cfg.valid_days},
          {"test_days", cfg.test_days},
          {"n_clusters", cfg.n_clusters},
          {"rate", cfg.rate},
          {"drift", drift},
          {"popularity_skew", cfg.popularity_skew},
          {"affinity_spread", cfg.affinity_spread},
          {"user_attribute_noise", cfg.user_attribute_noise},
          {"item_attribute_noise", cfg.item_attribute_noise},
          {"signature_dim", cfg.signature_dim},
          {"seed", cfg.seed}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  Reader r(j, "");
  if (auto m = r.child("model")) {
    m->get_enum("backend", cfg.propagation.backend, parse_backend);
    m->get("K", cfg.propagation.hops);
    m->get("alpha", cfg.propagation.alpha);
    m->get("embedding_dim", cfg.dims.embedding_dim);
    m->get("encoder_hidden", cfg.dims.encoder_hidden);
    m->get("tower_hidden", cfg.dims.tower_hidden);
    m->finish();
  }
  if (cfg.propagation.backend == Backend::dnn) {
    const json* model = j.contains("model") ? &j.at("model") : nullptr;
    if (model && model->contains("K") && cfg.propagation.hops != 0) {
      throw ConfigError("model.K: the dnn backend does not propagate; K must be 0");
    }
    cfg.propagation.hops = 0;
  }
  cfg.hop_sampling.max_hops = std::max(1, cfg.propagation.hops);
  if (auto h = r.child("hop_sampling")) {
    h->get("enabled", cfg.hop_sampling.enabled);
    h->get_enum("distribution", cfg.hop_sampling.distribution, parse_hop_distribution);
    h->finish();
  }
  if (auto t = r.child("train")) {
    auto& tc = cfg.train;
    t->get("batch_size", tc.batch_size);
    t->get("users_per_step", tc.users_per_step);
    t->get("learning_rate", tc.learning_rate);
    t->get("beta1", tc.beta1);
    t->get("beta2", tc.beta2);
    t->get("epsilon", tc.epsilon);
    t->get("epochs", tc.epochs);
    t->get("negatives", tc.negatives);
    t->get_enum("loss", tc.loss, parse_loss);
    t->get("window", tc.window);
    t->get("eval_k", tc.eval_k);
    t->get("max_user_resamples", tc.max_user_resamples);
    t->get("seed", tc.seed);
    t->finish();
  }
  r.raw("dataset");  // consumed by the caller
  r.finish();
  cfg.model_name = std::string(to_string(cfg.propagation.backend)) + (cfg.hop_sampling.enabled ? "_hs" : "");
  validated([&] { cfg.validate(); });
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const auto& t = cfg.train;
  return {{"model",
           {{"backend", std::string(to_string(cfg.propagation.backend))},
            {"K", cfg.propagation.hops},
            {"alpha", cfg.propagation.alpha},
            {"embedding_dim", cfg.dims.embedding_dim},
            {"encoder_hidden", cfg.dims.encoder_hidden},
            {"tower_hidden", cfg.dims.tower_hidden}}},
          {"hop_sampling",
           {{"enabled", cfg.hop_sampling.enabled},
            {"distribution", std::string(to_string(cfg.hop_sampling.distribution))}}},
          {"train",
           {{"batch_size", t.batch_size},
            {"users_per_step", t.users_per_step},
            {"learning_rate", t.learning_rate},
            {"beta1", t.beta1},
            {"beta2", t.beta2},
            {"epsilon", t.epsilon},
            {"epochs", t.epochs},
            {"negatives", t.negatives},
            {"loss", std::string(to_string(t.loss))},
            {"window", t.window},
            {"eval_k", t.eval_k},
            {"max_user_resamples", t.max_user_resamples},
            {"seed", t.seed}}}};
}

std::optional<std::uint64_t> seed_override() {
  const char* env = std::getenv("HOPGRAPH_SEED");
  if (!env || !*env) return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(env, &pos);
    if (pos != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("HOPGRAPH_SEED: not an unsigned integer: '") + env + "'");
  }
}

}  // namespace hopgraph

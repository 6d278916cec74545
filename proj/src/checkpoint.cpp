#include "hopgraph/model.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace hopgraph {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "hopgraph.checkpoint";
constexpr int kVersion = 1;

template <typename M>
json tensor_to_json(const M& m) {
  return {{"shape", {m.rows(), m.cols()}},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

template <typename M>
void tensor_from_json(const json& j, M& m) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  require(shape.size() == 2, "checkpoint: tensor shape must have two entries");
  const auto data = j.at("data").get<std::vector<double>>();
  require(static_cast<Eigen::Index>(data.size()) == shape[0] * shape[1],
          "checkpoint: tensor data length does not match its shape");
  m.resize(shape[0], shape[1]);
  std::copy(data.begin(), data.end(), m.data());
}

json mlp_to_json(const Mlp& p) {
  json layers = json::array();
  for (const auto& l : p.layers) {
    layers.push_back({{"activation", std::string(to_string(l.activation))},
                      {"weight", tensor_to_json(l.weight)},
                      {"bias", tensor_to_json(l.bias)}});
  }
  return {{"layers", layers}};
}

Mlp mlp_from_json(const json& j) {
  Mlp p;
  for (const auto& lj : j.at("layers")) {
    DenseLayer<double> l;
    l.activation = parse_activation(lj.at("activation").get<std::string>());
    tensor_from_json(lj.at("weight"), l.weight);
    tensor_from_json(lj.at("bias"), l.bias);
    p.layers.push_back(std::move(l));
  }
  check_mlp(p);
  return p;
}

json encoder_to_json(const FeatureEncoder& e) {
  json branches = json::array();
  for (std::size_t b = 0; b < e.branches.size(); ++b) {
    branches.push_back({{"attribute", e.attribute_names[b]}, {"mlp", mlp_to_json(e.branches[b])}});
  }
  return branches;
}

FeatureEncoder encoder_from_json(const json& j) {
  FeatureEncoder e;
  for (const auto& bj : j) {
    e.attribute_names.push_back(bj.at("attribute").get<std::string>());
    e.branches.push_back(mlp_from_json(bj.at("mlp")));
  }
  return e;
}

}  // namespace

std::string checkpoint_json(const ModelParams& params, const std::string& resolved_config_json) {
  json gcn = json::array();
  for (const auto& w : params.gcn_weights) gcn.push_back(tensor_to_json(w));
  json j = {{"format", kFormat},
            {"version", kVersion},
            {"user_encoder", encoder_to_json(params.user_encoder)},
            {"item_encoder", encoder_to_json(params.item_encoder)},
            {"user_tower", mlp_to_json(params.towers.user)},
            {"item_tower", mlp_to_json(params.towers.item)},
            {"gcn_weights", gcn},
            {"jk_projection", tensor_to_json(params.jk_projection)}};
  if (!resolved_config_json.empty()) j["config"] = json::parse(resolved_config_json);
  return j.dump();
}

ModelParams checkpoint_from_json(const std::string& text) {
  const json j = json::parse(text);
  require(j.value("format", "") == kFormat, "checkpoint: not a hopgraph checkpoint");
  require(j.value("version", 0) == kVersion,
          "checkpoint: unsupported version " + std::to_string(j.value("version", 0)));
  ModelParams p;
  p.user_encoder = encoder_from_json(j.at("user_encoder"));
  p.item_encoder = encoder_from_json(j.at("item_encoder"));
  p.towers.user = mlp_from_json(j.at("user_tower"));
  p.towers.item = mlp_from_json(j.at("item_tower"));
  for (const auto& wj : j.at("gcn_weights")) {
    DenseMatrix w;
    tensor_from_json(wj, w);
    p.gcn_weights.push_back(std::move(w));
  }
  tensor_from_json(j.at("jk_projection"), p.jk_projection);
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const std::string& resolved_config_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_json(params, resolved_config_json);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace hopgraph

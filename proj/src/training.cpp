#include "hopgraph/training.hpp"

#include "hopgraph/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hopgraph {

LossKind parse_loss(std::string_view name) {
  if (name == "bpr") return LossKind::bpr;
  if (name == "sampled_softmax") return LossKind::sampled_softmax;
  throw ContractError("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind l) {
  return l == LossKind::bpr ? "bpr" : "sampled_softmax";
}

void TrainConfig::validate() const {
  require(batch_size > 0, "train.batch_size must be positive");
  require(users_per_step > 0, "train.users_per_step must be positive");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0,
          "train.learning_rate must be finite and >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
          "train.beta1/beta2 must lie in [0, 1)");
  require(epsilon > 0.0, "train.epsilon must be positive");
  require(epochs >= 0, "train.epochs must be >= 0");
  require(negatives > 0, "train.negatives must be positive");
  require(window > 0, "train.window must be positive");
  require(eval_k >= 1, "train.eval_k must be >= 1");
  require(max_user_resamples >= 0, "train.max_user_resamples must be >= 0");
}

void RunConfig::validate() const {
  propagation.validate();
  hop_sampling.validate();
  train.validate();
  require(dims.embedding_dim > 0 && dims.encoder_hidden > 0 && dims.tower_hidden > 0,
          "model dimensions must be positive");
  if (hop_sampling.enabled) {
    require(propagation.backend != Backend::dnn, "hop sampling needs a propagating backend");
    require(hop_sampling.max_hops == propagation.hops,
            "hop_sampling K_max must equal the model's K");
  }
}

int RunConfig::eval_hops() const {
  if (propagation.backend == Backend::dnn) return 0;
  return hop_sampling.enabled ? effective_hops_for_eval(hop_sampling) : propagation.hops;
}

RunConfig configure_model(RunConfig base, const std::string& model_name, int hops) {
  std::string backend = model_name;
  bool hs = false;
  if (model_name.size() > 3 && model_name.ends_with("_hs")) {
    backend = model_name.substr(0, model_name.size() - 3);
    hs = true;
  }
  base.model_name = model_name;
  base.propagation.backend = parse_backend(backend);
  base.propagation.hops = base.propagation.backend == Backend::dnn ? 0 : hops;
  base.hop_sampling.enabled = hs;
  base.hop_sampling.max_hops = std::max(1, base.propagation.hops);
  base.validate();
  return base;
}

PreparedData prepare(const Dataset& dataset, int window) {
  PreparedData data;
  data.dataset = &dataset;
  data.window = window;
  data.parts = split_by_day(dataset.log, dataset.split);
  data.heldout = data.parts.valid;
  data.heldout.events.insert(data.heldout.events.end(), data.parts.test.events.begin(),
                             data.parts.test.events.end());
  data.heldout.normalize();
  for (int d = dataset.split.train.begin; d < dataset.split.test.end; ++d) {
    data.snapshots.emplace(d, build_snapshot(dataset.log, d, window, data.heldout));
  }
  return data;
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t negatives_per_positive(std::span<const double> pos, std::span<const double> neg) {
  require(!pos.empty(), "loss: no positive scores");
  require(neg.size() % pos.size() == 0 && !neg.empty(),
          "loss: " + std::to_string(neg.size()) + " negative scores do not pair with " +
              std::to_string(pos.size()) + " positives");
  return neg.size() / pos.size();
}

}  // namespace

PairLoss bpr_loss(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  const auto m = negatives_per_positive(pos_scores, neg_scores);
  PairLoss out;
  out.grad_pos = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pos_scores.size()));
  out.grad_neg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(neg_scores.size()));
  const double pairs = static_cast<double>(neg_scores.size());
  for (std::size_t p = 0; p < pos_scores.size(); ++p) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t n = p * m + j;
      const double diff = pos_scores[p] - neg_scores[n];
      out.loss += softplus(-diff);
      const double g = sigmoid(-diff) / pairs;
      out.grad_pos[static_cast<Eigen::Index>(p)] -= g;
      out.grad_neg[static_cast<Eigen::Index>(n)] += g;
    }
  }
  out.loss /= pairs;
  return out;
}

PairLoss sampled_softmax_loss(std::span<const double> pos_scores,
                              std::span<const double> neg_scores) {
  const auto m = negatives_per_positive(pos_scores, neg_scores);
  PairLoss out;
  out.grad_pos = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pos_scores.size()));
  out.grad_neg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(neg_scores.size()));
  const double n = static_cast<double>(pos_scores.size());
  for (std::size_t p = 0; p < pos_scores.size(); ++p) {
    double top = pos_scores[p];
    for (std::size_t j = 0; j < m; ++j) top = std::max(top, neg_scores[p * m + j]);
    double sum = std::exp(pos_scores[p] - top);
    for (std::size_t j = 0; j < m; ++j) sum += std::exp(neg_scores[p * m + j] - top);
    const double lse = top + std::log(sum);
    out.loss += lse - pos_scores[p];
    out.grad_pos[static_cast<Eigen::Index>(p)] = (std::exp(pos_scores[p] - lse) - 1.0) / n;
    for (std::size_t j = 0; j < m; ++j) {
      out.grad_neg[static_cast<Eigen::Index>(p * m + j)] = std::exp(neg_scores[p * m + j] - lse) / n;
    }
  }
  out.loss /= n;
  return out;
}

TrainState init_state(const RunConfig& cfg, const Dataset& dataset) {
  cfg.validate();
  const Rng root(cfg.train.seed);
  TrainState s;
  Rng init_rng = root.split("init");
  s.params = make_model(dataset.attributes, cfg.propagation, cfg.dims, init_rng);
  s.adam.learning_rate = cfg.train.learning_rate;
  s.adam.beta1 = cfg.train.beta1;
  s.adam.beta2 = cfg.train.beta2;
  s.adam.epsilon = cfg.train.epsilon;
  s.user_rng = root.split("users");
  s.hop_rng = root.split("hops");
  s.batch_rng = root.split("batch");
  s.best_params = s.params;
  return s;
}

std::vector<ParamSlot> param_slots(ModelParams& params, const ModelParams& grads) {
  std::vector<ParamSlot> slots;
  visit_params(params, grads, [&](const std::string& name, double* v, const double* g, Eigen::Index n) {
    slots.push_back({name, v, g, n});
  });
  return slots;
}

StepResult train_step(TrainState& state, const PreparedData& data, int day, const RunConfig& cfg,
                      const SubgraphObserver& observer) {
  const Dataset& ds = *data.dataset;
  auto snap = data.snapshots.find(day);
  require(snap != data.snapshots.end(), "train_step: no snapshot for day " + std::to_string(day));
  const auto day_events = ds.log.days(day, day + 1);
  require(!day_events.empty(), "train_step: no interactions on day " + std::to_string(day));

  const int n_users = ds.log.n_users;
  const int n_items = ds.log.n_items;
  const int n_sample = std::min(cfg.train.users_per_step, n_users);

  std::vector<int> users;
  Subgraph sub;
  std::vector<std::pair<int, int>> positives;  // (subgraph user index, item)
  for (int attempt = 0;; ++attempt) {
    users = sample_users(state.user_rng, n_users, n_sample);
    sub = induced_subgraph(snap->second, users);
    positives.clear();
    for (const auto& e : day_events) {
      const int local = sub.user_index[static_cast<std::size_t>(e.user)];
      if (local >= 0) positives.emplace_back(local, e.item);
    }
    if (!positives.empty()) break;
    if (attempt >= cfg.train.max_user_resamples) {
      throw std::runtime_error("train_step: no positives among sampled users on day " +
                               std::to_string(day) + " after " + std::to_string(attempt + 1) +
                               " draws");
    }
  }
  if (observer) observer(day, sub);

  const int hops = cfg.propagation.backend == Backend::dnn
                       ? 0
                       : (cfg.hop_sampling.enabled ? sample_hops(cfg.hop_sampling, state.hop_rng)
                                                   : cfg.propagation.hops);
  const SparseMatrix& adj = sub.graph.normalized;
  ForwardPass pass = model_forward(state.params, cfg.propagation, ds.attributes, sub.users, adj, hops);
  const DenseMatrix& z = pass.z;
  const int item_offset = static_cast<int>(sub.users.size());

  const auto batch = static_cast<std::size_t>(cfg.train.batch_size);
  const auto m = static_cast<std::size_t>(cfg.train.negatives);
  std::vector<std::pair<int, int>> picked(batch);
  std::vector<int> negatives(batch * m);
  std::vector<double> pos_scores(batch);
  std::vector<double> neg_scores(batch * m);
  for (std::size_t b = 0; b < batch; ++b) {
    picked[b] = positives[state.batch_rng.uniform_int(positives.size())];
    for (std::size_t j = 0; j < m; ++j) {
      negatives[b * m + j] =
          static_cast<int>(state.batch_rng.uniform_int(static_cast<std::uint64_t>(n_items)));
    }
  }
  for (std::size_t b = 0; b < batch; ++b) {
    const auto [u, i] = picked[b];
    pos_scores[b] = z.row(u).dot(z.row(item_offset + i));
    for (std::size_t j = 0; j < m; ++j) {
      neg_scores[b * m + j] = z.row(u).dot(z.row(item_offset + negatives[b * m + j]));
    }
  }
  const PairLoss loss = cfg.train.loss == LossKind::bpr ? bpr_loss(pos_scores, neg_scores)
                                                        : sampled_softmax_loss(pos_scores, neg_scores);
  if (!std::isfinite(loss.loss)) {
    std::ostringstream msg;
    msg << "non-finite loss at epoch " << state.epoch << ", day " << day << ", hops " << hops
        << ", step " << state.steps;
    throw NumericError(msg.str());
  }

  DenseMatrix grad_z = DenseMatrix::Zero(z.rows(), z.cols());
  for (std::size_t b = 0; b < batch; ++b) {
    const auto [u, i] = picked[b];
    const double gp = loss.grad_pos[static_cast<Eigen::Index>(b)];
    grad_z.row(u) += gp * z.row(item_offset + i);
    grad_z.row(item_offset + i) += gp * z.row(u);
    for (std::size_t j = 0; j < m; ++j) {
      const int n = item_offset + negatives[b * m + j];
      const double gn = loss.grad_neg[static_cast<Eigen::Index>(b * m + j)];
      grad_z.row(u) += gn * z.row(n);
      grad_z.row(n) += gn * z.row(u);
    }
  }

  ModelParams grads = model_backward(state.params, cfg.propagation, adj, pass, grad_z);
  const auto slots = param_slots(state.params, grads);
  adam_step(state.adam, slots);
  ++state.steps;
  return {loss.loss, hops, n_sample, static_cast<int>(positives.size())};
}

namespace {

void push_metrics(std::vector<CurveRecord>& curves, int epoch, const std::string& split,
                  const std::vector<DayMetrics>& rows) {
  const std::pair<const char*, double DayMetrics::*> fields[] = {
      {"ndcg", &DayMetrics::ndcg}, {"map", &DayMetrics::map},
      {"hit", &DayMetrics::hit},   {"ild", &DayMetrics::ild},
      {"coverage", &DayMetrics::coverage}, {"entropy", &DayMetrics::entropy}};
  for (const auto& [name, field] : fields) {
    if (auto v = mean_over_days(rows, field)) curves.push_back({epoch, split, name, *v});
  }
}

}  // namespace

TrainResult train(const RunConfig& cfg, const Dataset& dataset, const TrainOptions& options) {
  cfg.validate();
  const PreparedData data = prepare(dataset, cfg.train.window);
  return train(cfg, data, options);
}

TrainResult train(const RunConfig& cfg, const PreparedData& data, const TrainOptions& options) {
  cfg.validate();
  require(data.window == cfg.train.window, "train: prepared data uses a different window");
  const Dataset& ds = *data.dataset;
  const auto& split = ds.split;
  const int k = cfg.train.eval_k;
  const int eval_hops = cfg.eval_hops();

  std::map<int, SnapshotGraph> test_graphs_storage;
  const std::map<int, SnapshotGraph>* test_graphs = &data.snapshots;
  if (options.empty_test_graphs) {
    test_graphs_storage = drop_test_edges(data.snapshots, split.test);
    test_graphs = &test_graphs_storage;
  }

  TrainResult result;
  TrainState& state = result.state;
  state = init_state(cfg, ds);

  auto evaluate = [&](const ModelParams& params, const DayRange& days,
                      const std::map<int, SnapshotGraph>& graphs) {
    return evaluate_split(params, cfg.propagation, eval_hops, ds.attributes, graphs, ds.log, days, k);
  };
  auto end_of_epoch = [&](int epoch) {
    const auto valid = evaluate(state.params, split.valid, data.snapshots);
    push_metrics(result.curves, epoch, "valid", valid);
    const double ndcg = mean_over_days(valid, &DayMetrics::ndcg).value_or(0.0);
    if (ndcg > state.best_valid_ndcg) {
      state.best_valid_ndcg = ndcg;
      state.best_epoch = epoch;
      state.best_params = state.params;
    }
    if (options.track_test) {
      push_metrics(result.curves, epoch, "test", evaluate(state.params, split.test, *test_graphs));
    }
  };

  end_of_epoch(0);
  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    state.epoch = epoch;
    double loss_sum = 0.0;
    int steps = 0;
    for (int d = split.train.begin; d < split.train.end; ++d) {
      if (ds.log.days(d, d + 1).empty()) continue;
      loss_sum += train_step(state, data, d, cfg, options.observer).loss;
      ++steps;
    }
    if (steps > 0) result.curves.push_back({epoch, "train", "loss", loss_sum / steps});
    end_of_epoch(epoch);
  }

  result.valid_metrics = evaluate(state.best_params, split.valid, data.snapshots);
  result.test_metrics = evaluate(state.best_params, split.test, *test_graphs);
  return result;
}

}  // namespace hopgraph

#include "hopgraph/datagen.hpp"
#include "hopgraph/training.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace hopgraph;
using hopgraph::testing::max_fd_error;
using hopgraph::testing::tiny_synth;

namespace {

Dataset tiny_dataset(std::uint64_t seed = 3) {
  SynthData s = generate(tiny_synth(seed));
  return {std::move(s.log), std::move(s.attributes), s.split};
}

RunConfig tiny_run(const std::string& model, int hops) {
  RunConfig base;
  base.dims = {6, 5, 8};
  base.train.batch_size = 32;
  base.train.users_per_step = 40;
  base.train.learning_rate = 1e-2;
  base.train.epochs = 3;
  base.train.window = 4;
  base.train.eval_k = 5;
  return configure_model(base, model, hops);
}

std::vector<double> flatten(ModelParams p) {
  std::vector<double> out;
  visit_params(p, zeros_like(p), [&](const std::string&, double* v, const double*, Eigen::Index n) {
    out.insert(out.end(), v, v + n);
  });
  return out;
}

bool same_curves(const TrainResult& a, const TrainResult& b) {
  if (a.curves.size() != b.curves.size()) return false;
  for (std::size_t i = 0; i < a.curves.size(); ++i) {
    const auto& x = a.curves[i];
    const auto& y = b.curves[i];
    if (x.epoch != y.epoch || x.split != y.split || x.metric != y.metric || x.value != y.value)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("BPR loss worked values and gradient") {
  const std::vector<double> pos{0.7}, neg{0.7};
  CHECK(bpr_loss(pos, neg).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::vector<double> big_pos{800.0}, big_neg{-800.0};
  const auto stable = bpr_loss(big_pos, big_neg);
  CHECK(std::isfinite(stable.loss));
  CHECK(stable.loss >= 0.0);
  CHECK(bpr_loss(big_neg, big_pos).loss == doctest::Approx(1600.0));

  std::vector<double> p{0.3, -1.2, 2.0}, n{0.1, 0.5, -0.4, 1.5, 2.2, -3.0};
  const auto l = bpr_loss(p, n);
  CHECK(max_fd_error(p.data(), l.grad_pos.data(), 3, [&] { return bpr_loss(p, n).loss; }) <= 1e-4);
  CHECK(max_fd_error(n.data(), l.grad_neg.data(), 6, [&] { return bpr_loss(p, n).loss; }) <= 1e-4);
  const auto s = sampled_softmax_loss(p, n);
  CHECK(max_fd_error(p.data(), s.grad_pos.data(), 3, [&] { return sampled_softmax_loss(p, n).loss; }) <= 1e-4);
  CHECK(max_fd_error(n.data(), s.grad_neg.data(), 6, [&] { return sampled_softmax_loss(p, n).loss; }) <= 1e-4);

  const std::vector<double> odd{1.0, 2.0};
  CHECK_THROWS_AS(bpr_loss(odd, std::vector<double>{1.0, 2.0, 3.0}), ContractError);
}

TEST_CASE("roster names map onto backends and hop sampling") {
  const RunConfig hs = tiny_run("appnp_hs", 4);
  CHECK(hs.propagation.backend == Backend::appnp);
  CHECK(hs.hop_sampling.enabled);
  CHECK(hs.hop_sampling.max_hops == 4);
  CHECK(hs.eval_hops() == 4);
  const RunConfig dnn = tiny_run("dnn", 8);
  CHECK(dnn.propagation.hops == 0);
  CHECK(dnn.eval_hops() == 0);
  CHECK_THROWS_AS(tiny_run("dnn_hs", 2), ContractError);
  CHECK_THROWS_AS(tiny_run("mystery", 2), ContractError);
  RunConfig mismatch = tiny_run("gcn_hs", 4);
  mismatch.hop_sampling.max_hops = 3;
  CHECK_THROWS_AS(mismatch.validate(), ContractError);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const Dataset ds = tiny_dataset();
  const RunConfig cfg = tiny_run("appnp_hs", 3);
  const TrainResult a = train(cfg, ds);
  const TrainResult b = train(cfg, ds);
  CHECK(same_curves(a, b));
  CHECK(flatten(a.state.params) == flatten(b.state.params));
  RunConfig other = cfg;
  other.train.seed = 2;
  CHECK(flatten(train(other, ds).state.params) != flatten(a.state.params));
}

TEST_CASE("zero learning rate leaves the model untouched") {
  const Dataset ds = tiny_dataset();
  RunConfig cfg = tiny_run("gcn", 2);
  cfg.train.learning_rate = 0.0;
  const TrainResult r = train(cfg, ds);
  CHECK(flatten(r.state.params) == flatten(init_state(cfg, ds).params));
  CHECK(r.state.steps > 0);
}

TEST_CASE("zero epochs evaluates only the initial state") {
  const Dataset ds = tiny_dataset();
  RunConfig cfg = tiny_run("appnp", 2);
  cfg.train.epochs = 0;
  const TrainResult r = train(cfg, ds);
  CHECK(r.state.steps == 0);
  CHECK(r.state.best_epoch == 0);
  for (const auto& c : r.curves) CHECK(c.epoch == 0);
  CHECK(!r.valid_metrics.empty());
}

TEST_CASE("training lowers the loss on the toy benchmark") {
  const Dataset ds = tiny_dataset();
  for (const char* model : {"dnn", "gcn", "jk_gcn", "appnp", "appnp_hs"}) {
    CAPTURE(model);
    RunConfig cfg = tiny_run(model, 2);
    cfg.train.epochs = 25;
    const TrainResult r = train(cfg, ds);
    std::vector<double> loss;
    for (const auto& c : r.curves)
      if (c.split == "train") loss.push_back(c.value);
    REQUIRE(loss.size() == 25);
    const double early = (loss[0] + loss[1] + loss[2]) / 3.0;
    const double late = (loss[22] + loss[23] + loss[24]) / 3.0;
    CHECK(late < early);
  }
}

TEST_CASE("fixed hop distribution reproduces the plain run bitwise") {
  const Dataset ds = tiny_dataset();
  for (const char* model : {"gcn", "appnp"}) {
    CAPTURE(model);
    const RunConfig plain = tiny_run(model, 3);
    RunConfig fixed = plain;
    fixed.hop_sampling = {true, 3, HopDistribution::fixed};
    const TrainResult a = train(plain, ds);
    const TrainResult b = train(fixed, ds);
    CHECK(same_curves(a, b));
    CHECK(flatten(a.state.params) == flatten(b.state.params));
  }
}

TEST_CASE("hop sampling draws depths within its support during training") {
  const Dataset ds = tiny_dataset();
  const RunConfig cfg = tiny_run("appnp_hs", 4);
  const PreparedData data = prepare(ds, cfg.train.window);
  TrainState state = init_state(cfg, ds);
  std::vector<int> seen(5, 0);
  for (int rep = 0; rep < 40; ++rep) {
    const StepResult s = train_step(state, data, ds.split.train.begin, cfg);
    REQUIRE(s.hops >= 1);
    REQUIRE(s.hops <= 4);
    ++seen[static_cast<std::size_t>(s.hops)];
    CHECK(s.sampled_users == 40);
  }
  for (int k = 1; k <= 4; ++k) CHECK(seen[static_cast<std::size_t>(k)] > 0);
}

TEST_CASE("a non-finite loss aborts with a numeric error") {
  const Dataset ds = tiny_dataset();
  const RunConfig cfg = tiny_run("appnp", 2);
  const PreparedData data = prepare(ds, cfg.train.window);
  TrainState state = init_state(cfg, ds);
  state.params.towers.user.layers[0].weight(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(train_step(state, data, ds.split.train.begin, cfg), NumericError);
}

TEST_CASE("training snapshots never contain held-out edges") {
  const Dataset ds = tiny_dataset();
  RunConfig cfg = tiny_run("gcn", 2);
  const PreparedData data = prepare(ds, cfg.train.window);
  for (const auto& [day, g] : data.snapshots) {
    CHECK(leaked_heldout_edges(g, ds.log, data.heldout, cfg.train.window) == 0);
  }
  CHECK(data.heldout.events.size() ==
        data.parts.valid.events.size() + data.parts.test.events.size());
}

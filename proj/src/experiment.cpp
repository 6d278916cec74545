#include "hopgraph/experiment.hpp"

#include "hopgraph/datagen.hpp"
#include "hopgraph/io.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace hopgraph {
namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentSpec::validate() const {
  require(!models.empty(), "experiment: models list is empty");
  require(!ks.empty(), "experiment: K list is empty");
  require(!seeds.empty(), "experiment: seeds list is empty");
  for (const auto& m : models) configure_model(base, m, 1);
  for (int k : ks) require(k >= 1, "experiment: K values must be >= 1");
  for (const auto& m : attack.models) configure_model(base, m, attack.hops);
  require(attack.epochs >= 1, "experiment: attack.epochs must be >= 1");
}

ExperimentSpec experiment_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("<root>: expected an object");
  ExperimentSpec spec;
  static const std::set<std::string> known{"dataset", "base", "models", "K", "seeds", "attack"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError(k + ": unknown key");
  }
  auto field = [&](const char* key, auto& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
      out = it->get<std::remove_reference_t<decltype(out)>>();
    } catch (const json::exception&) {
      throw ConfigError(std::string(key) + ": unexpected value " + it->dump());
    }
  };
  std::string dataset;
  field("dataset", dataset);
  if (dataset.empty()) throw ConfigError("dataset: required");
  spec.dataset = fs::path(dataset).is_absolute() ? fs::path(dataset) : base_dir / dataset;
  if (auto it = j.find("base"); it != j.end()) {
    try {
      spec.base = run_config_from_json(*it);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("base.") + e.what());
    }
  }
  field("models", spec.models);
  field("K", spec.ks);
  field("seeds", spec.seeds);
  if (auto it = j.find("attack"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("attack: expected an object");
    for (const auto& [k, v] : it->items()) {
      try {
        if (k == "models") spec.attack.models = v.get<std::vector<std::string>>();
        else if (k == "K") spec.attack.hops = v.get<int>();
        else if (k == "epochs") spec.attack.epochs = v.get<int>();
        else throw ConfigError("attack." + k + ": unknown key");
      } catch (const json::exception&) {
        throw ConfigError("attack." + k + ": unexpected value " + v.dump());
      }
    }
  }
  try {
    spec.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

json to_json(const ExperimentSpec& spec) {
  return {{"dataset", spec.dataset.string()},
          {"base", to_json(spec.base)},
          {"models", spec.models},
          {"K", spec.ks},
          {"seeds", spec.seeds},
          {"attack", {{"models", spec.attack.models}, {"K", spec.attack.hops}, {"epochs", spec.attack.epochs}}}};
}

namespace {

constexpr std::pair<const char*, double DayMetrics::*> kMetrics[] = {
    {"ndcg", &DayMetrics::ndcg}, {"map", &DayMetrics::map},         {"hit", &DayMetrics::hit},
    {"ild", &DayMetrics::ild},   {"coverage", &DayMetrics::coverage}, {"entropy", &DayMetrics::entropy}};

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream o;
  o << std::hex << h;
  return o.str();
}

/// manifest.json: run key -> {status, config_hash, file | error}.
class Manifest {
 public:
  explicit Manifest(fs::path path) : path_(std::move(path)) {
    if (fs::exists(path_)) {
      data_ = json::parse(read_file(path_));
    } else {
      data_ = {{"format", "hopgraph.manifest"}, {"version", 1}, {"runs", json::object()}};
    }
  }

  std::optional<std::string> completed(const std::string& key, const std::string& hash) {
    std::lock_guard lock(mu_);
    const auto& runs = data_.at("runs");
    auto it = runs.find(key);
    if (it == runs.end() || it->value("status", "") != "done" || it->value("config_hash", "") != hash) {
      return std::nullopt;
    }
    return it->at("file").get<std::string>();
  }

  void done(const std::string& key, const std::string& hash, const std::string& file) {
    update(key, {{"status", "done"}, {"config_hash", hash}, {"file", file}});
  }
  void failed(const std::string& key, const std::string& hash, const std::string& error) {
    update(key, {{"status", "failed"}, {"config_hash", hash}, {"error", error}});
  }

 private:
  void update(const std::string& key, json entry) {
    std::lock_guard lock(mu_);
    data_["runs"][key] = std::move(entry);
    write_file_atomic(path_, data_.dump(2) + "\n");
  }

  fs::path path_;
  json data_;
  std::mutex mu_;
};

std::string day_metric_file(const std::vector<DayMetrics>& rows) {
  std::string out = "day,metric,value\n";
  for (const auto& r : rows) {
    for (const auto& [name, field] : kMetrics) {
      out += std::to_string(r.day) + "," + name + "," + format_double(r.*field) + "\n";
    }
    out += std::to_string(r.day) + ",ranked_users," + std::to_string(r.ranked_users) + "\n";
    out += std::to_string(r.day) + ",zero_norm_items," + std::to_string(r.zero_norm_items) + "\n";
  }
  return out;
}

std::vector<DayMetrics> read_day_metric_file(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  std::map<int, DayMetrics> by_day;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const int day = std::stoi(line.substr(0, c1));
    const std::string metric = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string value = line.substr(c2 + 1);
    DayMetrics& m = by_day[day];
    m.day = day;
    if (metric == "ranked_users") m.ranked_users = std::stoi(value);
    else if (metric == "zero_norm_items") m.zero_norm_items = std::stoi(value);
    else {
      for (const auto& [name, field] : kMetrics) {
        if (metric == name) m.*field = std::strtod(value.c_str(), nullptr);
      }
    }
  }
  std::vector<DayMetrics> rows;
  for (auto& [d, m] : by_day) rows.push_back(m);
  return rows;
}

// Runs `n` jobs on up to `parallel` threads; job i is independent of the others.
template <typename Job>
void run_jobs(std::size_t n, int parallel, Job job) {
  const auto workers = static_cast<std::size_t>(std::max(1, parallel));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& t : threads) t.join();
}

std::string run_key(const std::string& model, int hops, std::uint64_t seed) {
  return model + "_K" + std::to_string(hops) + "_seed" + std::to_string(seed);
}

}  // namespace

std::string metric_rows(const std::string& model, int hops, std::uint64_t seed,
                        const std::vector<DayMetrics>& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (const auto& [name, field] : kMetrics) {
      out += model + "," + std::to_string(hops) + "," + std::to_string(seed) + "," +
             std::to_string(r.day) + "," + name + "," + format_double(r.*field) + "\n";
    }
  }
  return out;
}

std::optional<double> SweepResult::value(const std::string& model, int hops, std::uint64_t seed,
                                         double DayMetrics::*field) const {
  for (const auto& r : runs) {
    if (r.model == model && r.hops == hops && r.seed == seed && r.ok) {
      return mean_over_days(r.test, field);
    }
  }
  return std::nullopt;
}

SweepResult run_sweep(const ExperimentSpec& spec, const fs::path& out, int parallel,
                      std::ostream* log) {
  spec.validate();
  fs::create_directories(out / "runs");
  write_file_atomic(out / "resolved_config.json", to_json(spec).dump(2) + "\n");
  const Dataset dataset = load_dataset(spec.dataset);
  const PreparedData data = prepare(dataset, spec.base.train.window);
  Manifest manifest(out / "manifest.json");

  // Unique trainings; dnn ignores K so it trains once per seed.
  struct Job {
    std::string model;
    int hops;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::map<std::string, std::size_t> job_index;
  for (const auto& m : spec.models) {
    for (int k : spec.ks) {
      for (auto s : spec.seeds) {
        const int eff = configure_model(spec.base, m, k).propagation.hops;
        const auto key = run_key(m, eff, s);
        if (job_index.emplace(key, jobs.size()).second) jobs.push_back({m, eff, s});
      }
    }
  }

  std::vector<RunRecord> results(jobs.size());
  std::mutex log_mu;
  run_jobs(jobs.size(), parallel, [&](std::size_t i) {
    const Job& job = jobs[i];
    RunConfig cfg = configure_model(spec.base, job.model, std::max(job.hops, 1));
    cfg.train.seed = job.seed;
    const std::string key = run_key(job.model, job.hops, job.seed);
    const std::string hash = fnv_hex(to_json(cfg).dump() + "|" + spec.dataset.string());
    RunRecord& rec = results[i];
    rec.model = job.model;
    rec.hops = job.hops;
    rec.seed = job.seed;
    try {
      if (auto file = manifest.completed(key, hash); file && fs::exists(out / *file)) {
        rec.test = read_day_metric_file(out / *file);
        rec.reused = true;
      } else {
        TrainResult tr = train(cfg, data);
        rec.test = tr.test_metrics;
        const std::string rel = "runs/" + key + ".csv";
        write_file_atomic(out / rel, day_metric_file(rec.test));
        manifest.done(key, hash, rel);
      }
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.error = e.what();
      manifest.failed(key, hash, rec.error);
    }
    if (log) {
      std::lock_guard lock(log_mu);
      *log << (rec.ok ? (rec.reused ? "reused " : "trained ") : "FAILED ") << key;
      if (rec.ok) {
        if (auto v = mean_over_days(rec.test, &DayMetrics::ndcg)) *log << " test ndcg@k=" << *v;
      } else {
        *log << ": " << rec.error;
      }
      *log << std::endl;
    }
  });

  SweepResult result;
  std::string csv = "model,K,seed,day,metric,value\n";
  json summary = {{"format", "hopgraph.summary"}, {"models", json::object()}};
  for (const auto& m : spec.models) {
    for (int k : spec.ks) {
      std::map<std::string, std::vector<double>> per_metric;
      for (auto s : spec.seeds) {
        const int eff = configure_model(spec.base, m, k).propagation.hops;
        RunRecord rec = results[job_index.at(run_key(m, eff, s))];
        rec.hops = k;
        csv += metric_rows(m, k, s, rec.test);
        for (const auto& [name, field] : kMetrics) {
          if (auto v = mean_over_days(rec.test, field); rec.ok && v) per_metric[name].push_back(*v);
        }
        result.runs.push_back(std::move(rec));
      }
      json entry = json::object();
      for (const auto& [name, field] : kMetrics) {
        const auto& vals = per_metric[name];
        json stats = {{"n_seeds", vals.size()}};
        if (!vals.empty()) {
          stats["mean"] = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
          stats["median"] = median(vals);
        }
        if (vals.size() >= 2) stats["ci95"] = aggregate_ci(vals).halfwidth;
        else stats["ci95"] = nullptr;
        entry[name] = stats;
      }
      summary["models"][m][std::to_string(k)] = entry;
    }
  }
  for (const auto& r : results) {
    if (!r.ok) ++result.failed;
    else if (r.reused) ++result.reused;
    else ++result.trained;
  }
  write_file_atomic(out / "metrics.csv", csv);
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  return result;
}

bool AttackResult::ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const AttackRun& r) { return r.ok; });
}

double AttackResult::median_decay(const std::string& model) const {
  std::vector<double> d;
  for (const auto& r : runs) {
    if (r.model == model && r.ok) d.push_back(r.decay);
  }
  return median(d);
}

AttackResult run_attack(const ExperimentSpec& spec, const fs::path& out, int parallel,
                        std::ostream* log) {
  spec.validate();
  fs::create_directories(out / "runs");
  write_file_atomic(out / "resolved_config.json", to_json(spec).dump(2) + "\n");
  const Dataset dataset = load_dataset(spec.dataset);
  const PreparedData data = prepare(dataset, spec.base.train.window);
  Manifest manifest(out / "manifest.json");

  struct Job {
    std::string model;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& m : spec.attack.models) {
    for (auto s : spec.seeds) jobs.push_back({m, s});
  }
  AttackResult result;
  result.runs.resize(jobs.size());
  std::mutex log_mu;
  run_jobs(jobs.size(), parallel, [&](std::size_t i) {
    RunConfig cfg = configure_model(spec.base, jobs[i].model, spec.attack.hops);
    cfg.train.seed = jobs[i].seed;
    cfg.train.epochs = spec.attack.epochs;
    const std::string key = "attack_" + run_key(jobs[i].model, cfg.propagation.hops, jobs[i].seed);
    const std::string hash = fnv_hex(to_json(cfg).dump() + "|" + spec.dataset.string());
    AttackRun& run = result.runs[i];
    run.model = jobs[i].model;
    run.seed = jobs[i].seed;
    try {
      if (auto file = manifest.completed(key, hash); file && fs::exists(out / *file)) {
        std::istringstream in(read_file(out / *file));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
          if (!line.empty()) run.test_ndcg.push_back(std::strtod(line.substr(line.find(',') + 1).c_str(), nullptr));
        }
      } else {
        TrainOptions opts;
        opts.track_test = true;
        opts.empty_test_graphs = true;
        TrainResult tr = train(cfg, data, opts);
        std::map<int, double> by_epoch;
        for (const auto& c : tr.curves) {
          if (c.split == "test" && c.metric == "ndcg" && c.epoch >= 1) by_epoch[c.epoch] = c.value;
        }
        std::string curve = "epoch,test_ndcg\n";
        for (const auto& [e, v] : by_epoch) {
          run.test_ndcg.push_back(v);
          curve += std::to_string(e) + "," + format_double(v) + "\n";
        }
        const std::string rel = "runs/" + key + ".csv";
        write_file_atomic(out / rel, curve);
        manifest.done(key, hash, rel);
      }
      require(!run.test_ndcg.empty(), "attack: no test NDCG recorded");
      run.decay = *std::max_element(run.test_ndcg.begin(), run.test_ndcg.end()) - run.test_ndcg.back();
      run.ok = true;
    } catch (const std::exception& e) {
      run.error = e.what();
      manifest.failed(key, hash, run.error);
    }
    if (log) {
      std::lock_guard lock(log_mu);
      *log << (run.ok ? "done " : "FAILED ") << key;
      if (run.ok) *log << " decay=" << run.decay;
      else *log << ": " << run.error;
      *log << std::endl;
    }
  });

  std::string csv = "model,K,seed,epoch,metric,value\n";
  json summary = {{"format", "hopgraph.attack_summary"}, {"K", spec.attack.hops}, {"models", json::object()}};
  for (const auto& run : result.runs) {
    for (std::size_t e = 0; e < run.test_ndcg.size(); ++e) {
      csv += run.model + "," + std::to_string(spec.attack.hops) + "," + std::to_string(run.seed) + "," +
             std::to_string(e + 1) + ",test_ndcg," + format_double(run.test_ndcg[e]) + "\n";
    }
    summary["models"][run.model]["decay"][std::to_string(run.seed)] = run.ok ? json(run.decay) : json(nullptr);
  }
  for (const auto& m : spec.attack.models) {
    bool any = std::any_of(result.runs.begin(), result.runs.end(),
                           [&](const AttackRun& r) { return r.model == m && r.ok; });
    summary["models"][m]["median_decay"] = any ? json(result.median_decay(m)) : json(nullptr);
  }
  write_file_atomic(out / "attack_curves.csv", csv);
  write_file_atomic(out / "attack_summary.json", summary.dump(2) + "\n");
  return result;
}

TrainResult run_single(const RunConfig& cfg, const fs::path& dataset_dir, const fs::path& out) {
  const Dataset dataset = load_dataset(dataset_dir);
  TrainResult tr = train(cfg, dataset);
  fs::create_directories(out);
  const std::string resolved = to_json(cfg).dump(2) + "\n";
  write_file_atomic(out / "resolved_config.json", resolved);
  std::string curves = "epoch,split,metric,value\n";
  for (const auto& c : tr.curves) {
    curves += std::to_string(c.epoch) + "," + c.split + "," + c.metric + "," + format_double(c.value) + "\n";
  }
  write_file_atomic(out / "curves.csv", curves);
  save_checkpoint(out / "checkpoint.json", tr.state.best_params, resolved);
  write_file_atomic(out / "metrics.csv", "model,K,seed,day,metric,value\n" +
                                             metric_rows(cfg.model_name, cfg.propagation.hops,
                                                         cfg.train.seed, tr.test_metrics));
  return tr;
}

std::vector<DayMetrics> run_evaluate(const RunConfig& cfg, const fs::path& dataset_dir,
                                     const fs::path& checkpoint, const fs::path& out) {
  const Dataset dataset = load_dataset(dataset_dir);
  const PreparedData data = prepare(dataset, cfg.train.window);
  const ModelParams params = load_checkpoint(checkpoint);
  std::vector<DayMetrics> rows;
  for (const DayRange& days : {dataset.split.valid, dataset.split.test}) {
    auto part = evaluate_split(params, cfg.propagation, cfg.eval_hops(), dataset.attributes,
                               data.snapshots, dataset.log, days, cfg.train.eval_k);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  fs::create_directories(out);
  write_file_atomic(out / "resolved_config.json", to_json(cfg).dump(2) + "\n");
  write_file_atomic(out / "metrics.csv", "model,K,seed,day,metric,value\n" +
                                             metric_rows(cfg.model_name, cfg.propagation.hops,
                                                         cfg.train.seed, rows));
  return rows;
}

}  // namespace hopgraph

#include "hopgraph/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hopgraph {

void SynthConfig::validate() const {
  require(n_users > 0 && n_items > 0, "synth: n_users and n_items must be positive");
  require(n_clusters > 0, "synth: n_clusters must be positive");
  require(warmup_days >= 0, "synth: warmup_days must be >= 0");
  require(train_days > 0 && valid_days >= 0 && test_days >= 0, "synth: bad split sizes");
  require(n_days >= train_days + valid_days + test_days,
          "synth: n_days " + std::to_string(n_days) + " shorter than the split total " +
              std::to_string(train_days + valid_days + test_days));
  require(std::isfinite(rate) && rate >= 0.0, "synth: rate must be finite and >= 0");
  require(std::isfinite(popularity_skew) && popularity_skew >= 0.0, "synth: bad popularity_skew");
  require(std::isfinite(affinity_spread) && affinity_spread >= 0.0, "synth: bad affinity_spread");
  require(user_attribute_noise >= 0.0 && item_attribute_noise >= 0.0, "synth: negative noise");
  require(signature_dim > 0, "synth: signature_dim must be positive");
  for (const auto& d : drift) {
    require(d.day >= 0 && d.day < total_days(), "synth: drift day out of range");
    require(d.strength >= 0.0 && d.strength <= 1.0, "synth: drift strength must lie in [0, 1]");
  }
}

SplitSpec SynthConfig::split() const {
  return SplitSpec::contiguous(warmup_days, train_days, valid_days, test_days);
}

namespace {

DenseMatrix sample_affinity(int c, double spread, Rng& rng) {
  DenseMatrix a(c, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = std::exp(spread * rng.normal());
  return a;
}

DenseMatrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

DenseMatrix one_hot(const std::vector<int>& category, int n_categories) {
  DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(category.size()), n_categories);
  for (std::size_t r = 0; r < category.size(); ++r) {
    if (category[r] >= 0) m(static_cast<Eigen::Index>(r), category[r]) = 1.0;
  }
  return m;
}

// Categorical correlated with the cluster: with probability `agree` the value
// is a deterministic function of the cluster, otherwise uniform. `missing` of
// the rows are left as -1 (all-zero one-hot).
std::vector<int> categorical(const std::vector<int>& cluster, int n_categories, double agree,
                             double missing, Rng& rng) {
  std::vector<int> out(cluster.size());
  for (std::size_t r = 0; r < cluster.size(); ++r) {
    const double u = rng.uniform();
    if (u < missing) {
      out[r] = -1;
    } else if (rng.uniform() < agree) {
      out[r] = cluster[r] % n_categories;
    } else {
      out[r] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_categories)));
    }
  }
  return out;
}

DenseMatrix signatures(const std::vector<int>& cluster, const DenseMatrix& centroids,
                       const DenseMatrix& projection, double noise, Rng& rng) {
  DenseMatrix out(static_cast<Eigen::Index>(cluster.size()), projection.cols());
  for (std::size_t r = 0; r < cluster.size(); ++r) {
    DenseRow row = centroids.row(cluster[r]) * projection;
    for (Eigen::Index j = 0; j < row.size(); ++j) row[j] += noise * rng.normal();
    out.row(static_cast<Eigen::Index>(r)) = row;
  }
  return out;
}

// Cumulative distribution over items for a user cluster on a given day.
std::vector<double> item_cdf(const DenseMatrix& affinity, int user_cluster,
                             const std::vector<int>& item_cluster,
                             const Eigen::VectorXd& popularity) {
  std::vector<double> cdf(item_cluster.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < item_cluster.size(); ++i) {
    acc += affinity(user_cluster, item_cluster[i]) * popularity[static_cast<Eigen::Index>(i)];
    cdf[i] = acc;
  }
  for (auto& v : cdf) v /= acc;
  return cdf;
}

}  // namespace

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  const Rng root(cfg.seed);
  Rng latent_rng = root.split("latent");
  Rng drift_rng = root.split("drift");
  Rng attr_rng = root.split("attributes");
  Rng event_rng = root.split("events");

  SynthData data;
  data.split = cfg.split();
  auto& lm = data.latent;
  lm.user_cluster.resize(static_cast<std::size_t>(cfg.n_users));
  lm.item_cluster.resize(static_cast<std::size_t>(cfg.n_items));
  const auto n_clusters = static_cast<std::uint64_t>(cfg.n_clusters);
  for (auto& c : lm.user_cluster) c = static_cast<int>(latent_rng.uniform_int(n_clusters));
  for (auto& c : lm.item_cluster) c = static_cast<int>(latent_rng.uniform_int(n_clusters));

  // Zipf popularity over a random permutation of the catalog.
  std::vector<int> rank(static_cast<std::size_t>(cfg.n_items));
  std::iota(rank.begin(), rank.end(), 0);
  for (int i = cfg.n_items - 1; i > 0; --i) {
    std::swap(rank[static_cast<std::size_t>(i)],
              rank[latent_rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
  }
  lm.popularity.resize(cfg.n_items);
  for (int i = 0; i < cfg.n_items; ++i) {
    lm.popularity[i] = std::pow(static_cast<double>(rank[static_cast<std::size_t>(i)]) + 1.0,
                                -cfg.popularity_skew);
  }

  DenseMatrix affinity = sample_affinity(cfg.n_clusters, cfg.affinity_spread, latent_rng);
  for (int d = 0; d < cfg.total_days(); ++d) {
    for (const auto& ev : cfg.drift) {
      if (ev.day != d) continue;
      Rng fresh_rng = drift_rng.split(static_cast<std::uint64_t>(d));
      const DenseMatrix fresh = sample_affinity(cfg.n_clusters, cfg.affinity_spread, fresh_rng);
      affinity = (1.0 - ev.strength) * affinity + ev.strength * fresh;
    }
    lm.affinity.push_back(affinity);
  }

  // Events: Poisson(λ) per user per day, items ∝ affinity × popularity.
  auto& log = data.log;
  log.n_users = cfg.n_users;
  log.n_items = cfg.n_items;
  for (int d = 0; d < cfg.total_days(); ++d) {
    std::vector<std::vector<double>> cdfs;
    for (int c = 0; c < cfg.n_clusters; ++c) {
      cdfs.push_back(item_cdf(lm.affinity[static_cast<std::size_t>(d)], c, lm.item_cluster,
                              lm.popularity));
    }
    Rng day_rng = event_rng.split(static_cast<std::uint64_t>(d));
    for (int u = 0; u < cfg.n_users; ++u) {
      const auto n = day_rng.poisson(cfg.rate);
      const auto& cdf = cdfs[static_cast<std::size_t>(lm.user_cluster[static_cast<std::size_t>(u)])];
      for (std::uint64_t e = 0; e < n; ++e) {
        const double x = day_rng.uniform();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        const int item = std::min(static_cast<int>(it - cdf.begin()), cfg.n_items - 1);
        log.events.push_back({d, u, item});
      }
    }
  }
  log.normalize();

  // Attributes: cluster-correlated categoricals plus noisy projected signatures.
  const DenseMatrix user_centroids = gaussian(cfg.n_clusters, cfg.signature_dim, attr_rng);
  const DenseMatrix item_centroids = gaussian(cfg.n_clusters, cfg.signature_dim, attr_rng);
  const DenseMatrix identity = DenseMatrix::Identity(cfg.signature_dim, cfg.signature_dim);
  DenseMatrix image_projection = gaussian(cfg.signature_dim, cfg.signature_dim, attr_rng);
  image_projection /= std::sqrt(static_cast<double>(cfg.signature_dim));

  auto& users = data.attributes.users;
  users.n_nodes = cfg.n_users;
  std::vector<int> no_cluster(lm.user_cluster.size(), 0);
  users.attributes.push_back(
      {"gender", one_hot(categorical(no_cluster, 2, 0.0, 0.05, attr_rng), 2)});
  users.attributes.push_back(
      {"age", one_hot(categorical(lm.user_cluster, 6, 0.5, 0.05, attr_rng), 6)});
  users.attributes.push_back({"os", one_hot(categorical(no_cluster, 3, 0.0, 0.0, attr_rng), 3)});
  users.attributes.push_back({"interest", signatures(lm.user_cluster, user_centroids, identity,
                                                     cfg.user_attribute_noise, attr_rng)});

  auto& items = data.attributes.items;
  items.n_nodes = cfg.n_items;
  const int n_brands = 2 * cfg.n_clusters;
  std::vector<int> brand_key(lm.item_cluster.size());
  for (std::size_t i = 0; i < brand_key.size(); ++i) {
    brand_key[i] = 2 * lm.item_cluster[i] + static_cast<int>(attr_rng.uniform_int(2));
  }
  std::vector<int> no_item_cluster(lm.item_cluster.size(), 0);
  items.attributes.push_back(
      {"brand", one_hot(categorical(brand_key, n_brands, 0.7, 0.0, attr_rng), n_brands)});
  items.attributes.push_back(
      {"discount", one_hot(categorical(no_item_cluster, 5, 0.0, 0.0, attr_rng), 5)});
  items.attributes.push_back({"text", signatures(lm.item_cluster, item_centroids, identity,
                                                 cfg.item_attribute_noise, attr_rng)});
  items.attributes.push_back({"image", signatures(lm.item_cluster, item_centroids,
                                                  image_projection, cfg.item_attribute_noise,
                                                  attr_rng)});
  users.validate();
  items.validate();
  return data;
}

std::map<int, SnapshotGraph> drop_test_edges(std::map<int, SnapshotGraph> snapshots,
                                             const DayRange& test_days) {
  for (auto& [day, g] : snapshots) {
    if (test_days.contains(day)) g = empty_snapshot(day, g.n_users, g.n_items);
  }
  return snapshots;
}

Eigen::VectorXd item_distribution(const EventLog& log, int begin, int end) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(log.n_items);
  const auto events = log.days(begin, end);
  for (const auto& e : events) p[e.item] += 1.0;
  if (!events.empty()) p /= static_cast<double>(events.size());
  return p;
}

}  // namespace hopgraph

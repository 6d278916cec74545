#pragma once

#include "hopgraph/core.hpp"
#include "hopgraph/datagen.hpp"
#include "hopgraph/features.hpp"
#include "hopgraph/rng.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace hopgraph::testing {

inline DenseMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  DenseMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

/// Relative error with a floor so entries that are both ~0 do not blow up.
inline double rel_err(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Largest relative error between `analytic` and central differences of
/// `loss` with respect to each entry of the buffer [value, value + size).
inline double max_fd_error(double* value, const double* analytic, Eigen::Index size,
                           const std::function<double()>& loss, double h = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < size; ++i) {
    const double saved = value[i];
    value[i] = saved + h;
    const double up = loss();
    value[i] = saved - h;
    const double down = loss();
    value[i] = saved;
    worst = std::max(worst, rel_err(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

/// Upper-tail p-value of Pearson's chi-square statistic for observed counts
/// against equal expected frequencies.
inline double chi_square_uniform_p(const std::vector<long>& counts) {
  double total = 0.0;
  for (long c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (long c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Dense power iteration estimate of the spectral radius of a symmetric matrix.
inline double spectral_radius(const DenseMatrix& a, int iters = 2000) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += 1e-3 * static_cast<double>(i % 7);
  double lambda = 0.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd w = a * v;
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return lambda;
}

/// Small attribute table: one categorical and one dense attribute per side,
/// with a few missing categorical rows.
inline AttributeTable tiny_attributes(Rng& rng, int n_users, int n_items) {
  auto categorical = [&](const std::string& name, int n, int levels) {
    Attribute a{name, DenseMatrix::Zero(n, levels)};
    for (int r = 0; r < n; ++r) {
      if (r % 5 != 4) a.values(r, static_cast<Eigen::Index>(rng.uniform_int(levels))) = 1.0;
    }
    return a;
  };
  AttributeTable t;
  t.users.n_nodes = n_users;
  t.users.attributes.push_back(categorical("gender", n_users, 2));
  t.users.attributes.push_back({"interest", random_matrix(n_users, 3, rng)});
  t.items.n_nodes = n_items;
  t.items.attributes.push_back(categorical("brand", n_items, 4));
  t.items.attributes.push_back({"text", random_matrix(n_items, 3, rng)});
  return t;
}

/// A benchmark small enough to train in well under a second.
inline SynthConfig tiny_synth(std::uint64_t seed = 3) {
  SynthConfig c;
  c.n_users = 60;
  c.n_items = 24;
  c.n_clusters = 3;
  c.warmup_days = 4;
  c.n_days = 8;
  c.train_days = 4;
  c.valid_days = 2;
  c.test_days = 2;
  c.rate = 0.5;
  c.drift = {{7, 0.5}};
  c.signature_dim = 4;
  c.seed = seed;
  return c;
}

}  // namespace hopgraph::testing

#include "dgbench/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dgbench {

void ClusterMixture::validate() const {
  require(dim >= 1 && num_classes >= 1 && !clusters.empty(), ErrorKind::logic,
          "ClusterMixture: empty or dimensionless");
  double wsum = 0.0;
  for (const auto& c : clusters) {
    require(c.weight >= 0.0, ErrorKind::logic, "ClusterMixture: negative weight");
    require(c.spread > 0.0, ErrorKind::logic, "ClusterMixture: spread must be positive");
    require(c.center.size() == dim, ErrorKind::logic,
            "ClusterMixture: center dimension mismatch");
    require(c.label_pmf.size() == num_classes, ErrorKind::logic,
            "ClusterMixture: label_pmf size mismatch");
    double psum = 0.0;
    for (double p : c.label_pmf) {
      require(p >= 0.0, ErrorKind::logic, "ClusterMixture: negative label probability");
      psum += p;
    }
    require(std::abs(psum - 1.0) <= 1e-12, ErrorKind::logic,
            "ClusterMixture: label_pmf does not sum to 1");
    wsum += c.weight;
  }
  require(std::abs(wsum - 1.0) <= 1e-12, ErrorKind::logic,
          "ClusterMixture: weights do not sum to 1");
}

void FiniteDomainDistribution::validate() const {
  const std::size_t a = num_atoms;
  require(a >= 1 && num_classes >= 1, ErrorKind::logic,
          "FiniteDomainDistribution: empty domain");
  require(prob.size() == a && label_pmf.size() == a && dist.size() == a,
          ErrorKind::logic, "FiniteDomainDistribution: field size mismatch");
  double psum = 0.0;
  for (double p : prob) {
    require(p >= 0.0, ErrorKind::logic, "FiniteDomainDistribution: negative probability");
    psum += p;
  }
  require(std::abs(psum - 1.0) <= 1e-12, ErrorKind::logic,
          "FiniteDomainDistribution: atom probabilities do not sum to 1");
  for (const auto& pmf : label_pmf) {
    require(pmf.size() == num_classes, ErrorKind::logic,
            "FiniteDomainDistribution: label_pmf size mismatch");
    double s = 0.0;
    for (double p : pmf) {
      require(p >= 0.0, ErrorKind::logic, "FiniteDomainDistribution: negative label probability");
      s += p;
    }
    require(std::abs(s - 1.0) <= 1e-12, ErrorKind::logic,
            "FiniteDomainDistribution: label_pmf does not sum to 1");
  }
  std::set<double> offdiag;
  for (std::size_t i = 0; i < a; ++i) {
    require(dist[i].size() == a, ErrorKind::logic,
            "FiniteDomainDistribution: distance matrix not square");
    require(dist[i][i] == 0.0, ErrorKind::logic,
            "FiniteDomainDistribution: distance diagonal must be zero");
    for (std::size_t j = 0; j < a; ++j) {
      require(dist[i][j] >= 0.0, ErrorKind::logic,
              "FiniteDomainDistribution: negative distance");
      require(dist[i][j] == dist[j][i], ErrorKind::logic,
              "FiniteDomainDistribution: distance matrix not symmetric");
      if (i < j) {
        require(dist[i][j] > 0.0, ErrorKind::logic,
                "FiniteDomainDistribution: distinct atoms at distance zero");
        offdiag.insert(dist[i][j]);
      }
    }
  }
  require(offdiag.size() == a * (a - 1) / 2, ErrorKind::logic,
          "FiniteDomainDistribution: off-diagonal distances must be pairwise distinct");
  if (!features.empty()) {
    require(features.size() == a, ErrorKind::logic,
            "FiniteDomainDistribution: features size mismatch");
    for (const auto& f : features) {
      require(f.size() == features[0].size(), ErrorKind::logic,
              "FiniteDomainDistribution: feature dimension mismatch");
    }
  }
}

FiniteDomainDistribution finite_from_points(
    const std::vector<std::vector<double>>& points,
    const std::vector<double>& prob,
    const std::vector<std::vector<double>>& label_pmf) {
  const std::size_t a = points.size();
  require(a >= 1 && prob.size() == a && label_pmf.size() == a, ErrorKind::logic,
          "finite_from_points: size mismatch");
  FiniteDomainDistribution d;
  d.num_atoms = a;
  d.num_classes = label_pmf[0].size();
  d.prob = prob;
  d.label_pmf = label_pmf;
  d.features = points;
  d.dist.assign(a, std::vector<double>(a, 0.0));
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = i + 1; j < a; ++j) {
      require(points[i].size() == points[j].size(), ErrorKind::logic,
              "finite_from_points: point dimension mismatch");
      double s = 0.0;
      for (std::size_t t = 0; t < points[i].size(); ++t) {
        const double diff = points[i][t] - points[j][t];
        s += diff * diff;
      }
      d.dist[i][j] = d.dist[j][i] = std::sqrt(s);
    }
  }
  d.validate();
  return d;
}

ClusterMixture toy_four_cluster(double separation, double noise_p) {
  require(separation > 0.0, ErrorKind::logic, "toy_four_cluster: separation must be positive");
  require(noise_p >= 0.0 && noise_p <= 1.0, ErrorKind::logic,
          "toy_four_cluster: noise_p must lie in [0, 1]");
  ClusterMixture m;
  m.dim = 2;
  m.num_classes = 2;  // 0 = Object, 1 = Animal
  const double s = separation;
  m.clusters = {
      {0.25, {0.0, 0.0}, 1.0, {1.0, 0.0}, 0},              // Truck
      {0.25, {s, 0.0}, 1.0, {1.0, 0.0}, 1},                // Ship
      {0.25, {0.0, s}, 1.0, {noise_p, 1.0 - noise_p}, 2},  // Cat
      {0.25, {s, s}, 1.0, {0.0, 1.0}, 3},                  // Dog
  };
  m.validate();
  return m;
}

LabeledDataset sample_dataset(const ClusterMixture& source, std::size_t n, Rng& rng) {
  source.validate();
  require(n >= 1, ErrorKind::logic, "sample_dataset: n must be >= 1");
  std::vector<double> weights;
  weights.reserve(source.clusters.size());
  for (const auto& c : source.clusters) weights.push_back(c.weight);

  LabeledDataset data;
  data.dim = source.dim;
  data.num_classes = source.num_classes;
  data.x.resize(n * source.dim);
  data.y.resize(n);
  data.partition_cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng.categorical(weights);
    const Cluster& cl = source.clusters[c];
    for (std::size_t t = 0; t < source.dim; ++t) {
      data.x[i * source.dim + t] = cl.center[t] + cl.spread * rng.normal();
    }
    data.y[i] = static_cast<int>(rng.categorical(cl.label_pmf));
    data.partition_cells[i] = cl.cluster_id;
  }
  data.validate();
  return data;
}

LabeledDataset sample_dataset(const FiniteDomainDistribution& source,
                              std::size_t n, Rng& rng) {
  source.validate();
  require(n >= 1, ErrorKind::logic, "sample_dataset: n must be >= 1");
  require(!source.features.empty(), ErrorKind::logic,
          "sample_dataset: finite domain has no feature coordinates");
  const std::size_t d = source.features[0].size();
  LabeledDataset data;
  data.dim = d;
  data.num_classes = source.num_classes;
  data.x.resize(n * d);
  data.y.resize(n);
  data.partition_cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = rng.categorical(source.prob);
    std::copy(source.features[a].begin(), source.features[a].end(),
              data.x.begin() + i * d);
    data.y[i] = static_cast<int>(rng.categorical(source.label_pmf[a]));
    data.partition_cells[i] = static_cast<int>(a);
  }
  data.validate();
  return data;
}

DiscreteJoint enumerate_joint(const FiniteDomainDistribution& source,
                              const Partition& L) {
  source.validate();
  DiscreteJoint j(L.M, source.num_classes);
  for (std::size_t a = 0; a < source.num_atoms; ++a) {
    const int c = L.cell_of_atom(a);
    for (std::size_t l = 0; l < source.num_classes; ++l) {
      j.at(c, l) += source.prob[a] * source.label_pmf[a][l];
    }
  }
  j.validate();
  return j;
}

LabeledDataset rebalance(const LabeledDataset& data,
                         const std::vector<double>& target_marginal, Rng& rng) {
  data.validate();
  const std::size_t K = data.num_classes;
  require(target_marginal.size() == K, ErrorKind::logic,
          "rebalance: target_marginal size mismatch");
  double qsum = 0.0;
  for (double q : target_marginal) {
    require(q >= 0.0, ErrorKind::logic, "rebalance: negative target mass");
    qsum += q;
  }
  require(std::abs(qsum - 1.0) <= 1e-12, ErrorKind::logic,
          "rebalance: target_marginal does not sum to 1");

  std::vector<std::vector<std::size_t>> by_class(K);
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[data.y[i]].push_back(i);
  }

  // Largest total T such that floor(T*q_l) <= available_l for all l with
  // q_l > 0: T* = min_l over positive-mass classes of the largest T with
  // floor(T*q_l) <= avail_l, i.e. T < (avail_l + 1) / q_l.
  std::size_t total = data.size();
  bool bounded = false;
  for (std::size_t l = 0; l < K; ++l) {
    if (target_marginal[l] <= 0.0) continue;
    require(!by_class[l].empty(), ErrorKind::logic,
            "rebalance: target puts mass on class " + std::to_string(l) +
                " which has no samples");
    const double avail = static_cast<double>(by_class[l].size());
    double cap = std::ceil((avail + 1.0) / target_marginal[l]) - 1.0;
    while (std::floor(cap * target_marginal[l]) > avail) cap -= 1.0;
    const auto cap_z = static_cast<std::size_t>(cap);
    total = bounded ? std::min(total, cap_z) : cap_z;
    bounded = true;
  }
  require(bounded, ErrorKind::logic, "rebalance: target_marginal is all zero");

  std::vector<std::size_t> counts(K, 0);
  std::size_t n_out = 0;
  for (std::size_t l = 0; l < K; ++l) {
    counts[l] = static_cast<std::size_t>(
        std::floor(static_cast<double>(total) * target_marginal[l]));
    n_out += counts[l];
  }
  require(n_out >= 1, ErrorKind::logic, "rebalance: no samples remain after rounding");

  std::vector<std::size_t> picked;
  picked.reserve(n_out);
  for (std::size_t l = 0; l < K; ++l) {
    auto& pool = by_class[l];
    rng.shuffle(pool);
    picked.insert(picked.end(), pool.begin(), pool.begin() + counts[l]);
  }
  rng.shuffle(picked);

  LabeledDataset out;
  out.dim = data.dim;
  out.num_classes = K;
  out.x.resize(n_out * data.dim);
  out.y.resize(n_out);
  if (!data.partition_cells.empty()) out.partition_cells.resize(n_out);
  if (!data.clean_labels.empty()) out.clean_labels.resize(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const std::size_t src = picked[i];
    std::copy(data.point(src), data.point(src) + data.dim, out.point(i));
    out.y[i] = data.y[src];
    if (!data.partition_cells.empty()) out.partition_cells[i] = data.partition_cells[src];
    if (!data.clean_labels.empty()) out.clean_labels[i] = data.clean_labels[src];
  }
  out.validate();
  return out;
}

}  // namespace dgbench

#pragma once

#include <cstddef>
#include <vector>

#include "dgbench/dataset.hpp"
#include "dgbench/joint.hpp"
#include "dgbench/partition.hpp"
#include "dgbench/rng.hpp"

namespace dgbench {

// Isotropic Gaussian mixture with per-cluster label distributions.
struct Cluster {
  double weight = 0.0;
  std::vector<double> center;
  double spread = 1.0;
  std::vector<double> label_pmf;
  int cluster_id = 0;
};

struct ClusterMixture {
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<Cluster> clusters;

  std::size_t num_clusters() const { return clusters.size(); }
  void validate() const;
};

// Exact discrete distribution over (atom, label) for the enumeration
// oracles. Atoms carry an explicit pairwise distance matrix so nearest
// neighbors are defined without reference to coordinates; off-diagonal
// distances must be pairwise distinct (tie-free 1-NN).
struct FiniteDomainDistribution {
  std::size_t num_atoms = 0;
  std::size_t num_classes = 0;
  std::vector<double> prob;                  // size num_atoms
  std::vector<std::vector<double>> label_pmf;  // num_atoms x num_classes
  std::vector<std::vector<double>> dist;       // num_atoms x num_atoms
  std::vector<std::vector<double>> features;   // optional, num_atoms x d (empty if abstract)

  void validate() const;
};

// Builds a FiniteDomainDistribution from explicit atom coordinates; the
// distance matrix is Euclidean. Rejects coordinate sets whose pairwise
// distances collide.
FiniteDomainDistribution finite_from_points(
    const std::vector<std::vector<double>>& points,
    const std::vector<double>& prob,
    const std::vector<std::vector<double>>& label_pmf);

// The four-cluster toy source: Truck, Ship, Cat, Dog at the corners of a
// square of side `separation`, spread 1, binary labels Object/Animal.
// Truck and Ship are Object, Dog is Animal, and Cat is Animal flipped to
// Object with probability noise_p.
ClusterMixture toy_four_cluster(double separation, double noise_p);

// n i.i.d. draws: cluster by weight, feature = center + spread * N(0, I),
// label by the cluster's label_pmf; partition_cells carries cluster ids.
LabeledDataset sample_dataset(const ClusterMixture& source, std::size_t n, Rng& rng);

// Draws (atom, label) pairs from a finite domain; features must be present.
LabeledDataset sample_dataset(const FiniteDomainDistribution& source,
                              std::size_t n, Rng& rng);

// Exact law of (L(x), y): mass(c, l) = sum over atoms a with L(a)=c of
// p(a) * label_pmf_a(l).
DiscreteJoint enumerate_joint(const FiniteDomainDistribution& source,
                              const Partition& L);

// Subsamples without replacement so class counts are proportional to
// target_marginal: total T* is the largest feasible total under floor
// rounding (count_l = floor(T* * q_l) <= available_l), order shuffled.
LabeledDataset rebalance(const LabeledDataset& data,
                         const std::vector<double>& target_marginal, Rng& rng);

}  // namespace dgbench

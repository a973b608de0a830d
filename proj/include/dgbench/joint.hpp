#pragma once

#include <cstddef>
#include <vector>

#include "dgbench/errors.hpp"

namespace dgbench {

// Joint pmf over (partition cell, label). Row-major M x K.
struct DiscreteJoint {
  std::size_t M = 0;
  std::size_t K = 0;
  std::vector<double> mass;

  DiscreteJoint() = default;
  DiscreteJoint(std::size_t m, std::size_t k)
      : M(m), K(k), mass(m * k, 0.0) {}

  double& at(std::size_t c, std::size_t l) { return mass[c * K + l]; }
  double at(std::size_t c, std::size_t l) const { return mass[c * K + l]; }

  double total() const;
  // Checks entries >= 0 and total within 1e-9 of 1.
  void validate() const;
  void normalize();
};

// Total variation distance, 1/2 * entrywise L1.
double tv_distance(const DiscreteJoint& p, const DiscreteJoint& q);

// Same for bare pmf vectors of equal length.
double tv_pmf(const std::vector<double>& p, const std::vector<double>& q);

// Normalized count matrix from paired (cell, label) observations.
DiscreteJoint empirical_joint(const std::vector<int>& cells,
                              const std::vector<int>& labels);
DiscreteJoint empirical_joint(const std::vector<int>& cells,
                              const std::vector<int>& labels, std::size_t M,
                              std::size_t K);

struct BinomialCI {
  double point = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double confidence = 0.95;
  double half_width() const { return (upper - lower) / 2.0; }
};

// Exact Clopper-Pearson interval from Beta quantiles. lower = 0 when
// successes = 0 and upper = 1 when successes = n.
BinomialCI clopper_pearson(std::size_t successes, std::size_t n, double alpha);

}  // namespace dgbench

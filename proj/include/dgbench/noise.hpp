#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dgbench/dataset.hpp"
#include "dgbench/rng.hpp"

namespace dgbench {

// Column-stochastic label-noise channel: cond[i][j] = P(noisy = i | clean = j).
struct ConfusionChannel {
  std::size_t K = 0;
  std::vector<std::vector<double>> cond;  // K x K, columns sum to 1

  void validate() const;
  std::vector<double> column(std::size_t clean) const;

  std::string to_json() const;
  static ConfusionChannel from_json(const std::string& text);
};

ConfusionChannel identity_channel(std::size_t K);

// Identity except column `from`: mass 1-p stays at `from`, p moves to `to`.
ConfusionChannel targeted_flip(std::size_t K, int from, int to, double p);

// Each column keeps 0.5 on the diagonal and sends 0.2 and 0.3 to two
// distinct other classes chosen uniformly at random.
ConfusionChannel random_sparse_channel(std::size_t K, Rng& rng);

// Resamples every label independently from its channel column. Features and
// partition_cells are unchanged; the pre-noise labels are kept in
// clean_labels (existing clean_labels metadata is preserved, i.e. the first
// channel application fixes what "clean" means).
LabeledDataset apply_channel(const LabeledDataset& data,
                             const ConfusionChannel& channel, Rng& rng);

}  // namespace dgbench

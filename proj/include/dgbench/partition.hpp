#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dgbench/dataset.hpp"

namespace dgbench {

enum class PartitionKind {
  by_cluster_id,        // cell = dataset partition_cells[i]
  by_clean_label,       // cell = clean label (pre-noise when tracked)
  by_label_coarsening,  // cell = map[clean label]
  constant,             // cell = 0
  by_atom_map           // cell = map[atom or cluster id]
};

// A feature map L into [M], evaluated on dataset rows (via their metadata)
// or directly on finite-domain atom indices.
struct Partition {
  PartitionKind kind = PartitionKind::constant;
  std::size_t M = 1;
  std::vector<int> map;  // label->cell or atom->cell, by kind

  static Partition by_cluster_id(std::size_t M);
  static Partition by_clean_label(std::size_t K);
  static Partition by_label_coarsening(std::vector<int> label_to_cell);
  static Partition constant_cell();
  static Partition by_atom_map(std::vector<int> atom_to_cell);

  std::string name() const;

  int cell_of(const LabeledDataset& data, std::size_t i) const;
  int cell_of_atom(std::size_t atom) const;
};

}  // namespace dgbench

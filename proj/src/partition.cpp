#include "dgbench/partition.hpp"

#include <algorithm>

namespace dgbench {

Partition Partition::by_cluster_id(std::size_t M) {
  require(M >= 1, ErrorKind::logic, "Partition: M must be >= 1");
  Partition p;
  p.kind = PartitionKind::by_cluster_id;
  p.M = M;
  return p;
}

Partition Partition::by_clean_label(std::size_t K) {
  require(K >= 1, ErrorKind::logic, "Partition: K must be >= 1");
  Partition p;
  p.kind = PartitionKind::by_clean_label;
  p.M = K;
  return p;
}

namespace {
std::size_t checked_cell_count(const std::vector<int>& map) {
  require(!map.empty(), ErrorKind::logic, "Partition: empty map");
  int mx = 0;
  for (int c : map) {
    require(c >= 0, ErrorKind::logic, "Partition: negative cell in map");
    mx = std::max(mx, c);
  }
  return static_cast<std::size_t>(mx) + 1;
}
}  // namespace

Partition Partition::by_label_coarsening(std::vector<int> label_to_cell) {
  Partition p;
  p.kind = PartitionKind::by_label_coarsening;
  p.M = checked_cell_count(label_to_cell);
  p.map = std::move(label_to_cell);
  return p;
}

Partition Partition::constant_cell() { return {}; }

Partition Partition::by_atom_map(std::vector<int> atom_to_cell) {
  Partition p;
  p.kind = PartitionKind::by_atom_map;
  p.M = checked_cell_count(atom_to_cell);
  p.map = std::move(atom_to_cell);
  return p;
}

std::string Partition::name() const {
  switch (kind) {
    case PartitionKind::by_cluster_id:
      return "by_cluster_id";
    case PartitionKind::by_clean_label:
      return "by_clean_label";
    case PartitionKind::by_label_coarsening:
      return "by_label_coarsening";
    case PartitionKind::constant:
      return "constant";
    case PartitionKind::by_atom_map:
      return "by_atom_map";
  }
  return "unknown";
}

int Partition::cell_of(const LabeledDataset& data, std::size_t i) const {
  require(i < data.size(), ErrorKind::logic, "Partition: sample index out of range");
  switch (kind) {
    case PartitionKind::constant:
      return 0;
    case PartitionKind::by_cluster_id: {
      require(!data.partition_cells.empty(), ErrorKind::logic,
              "Partition: dataset has no partition_cells metadata");
      const int c = data.partition_cells[i];
      require(c >= 0 && static_cast<std::size_t>(c) < M, ErrorKind::logic,
              "Partition: cell id out of range");
      return c;
    }
    case PartitionKind::by_clean_label: {
      const int l = data.clean_labels.empty() ? data.y[i] : data.clean_labels[i];
      require(l >= 0 && static_cast<std::size_t>(l) < M, ErrorKind::logic,
              "Partition: clean label out of range");
      return l;
    }
    case PartitionKind::by_label_coarsening: {
      const int l = data.clean_labels.empty() ? data.y[i] : data.clean_labels[i];
      require(l >= 0 && static_cast<std::size_t>(l) < map.size(), ErrorKind::logic,
              "Partition: label outside coarsening map");
      return map[l];
    }
    case PartitionKind::by_atom_map: {
      require(!data.partition_cells.empty(), ErrorKind::logic,
              "Partition: dataset has no partition_cells metadata");
      return cell_of_atom(static_cast<std::size_t>(data.partition_cells[i]));
    }
  }
  throw DgError(ErrorKind::logic, "Partition: unknown kind");
}

int Partition::cell_of_atom(std::size_t atom) const {
  switch (kind) {
    case PartitionKind::constant:
      return 0;
    case PartitionKind::by_atom_map:
      require(atom < map.size(), ErrorKind::logic,
              "Partition: atom outside map");
      return map[atom];
    case PartitionKind::by_cluster_id:
      require(atom < M, ErrorKind::logic, "Partition: atom id out of range");
      return static_cast<int>(atom);
    default:
      throw DgError(ErrorKind::logic,
                    "Partition: kind is undefined on atom indices");
  }
}

}  // namespace dgbench

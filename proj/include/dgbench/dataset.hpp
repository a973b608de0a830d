#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dgbench/errors.hpp"

namespace dgbench {

// A labeled sample set. Features are row-major: point i occupies
// x[i*dim .. i*dim+dim). Labels are class indices in [0, num_classes).
// Optional metadata carries the true partition cell (e.g. generating
// cluster id) and pre-noise labels when the producing step knows them;
// empty vectors mean "not tracked".
struct LabeledDataset {
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> x;
  std::vector<int> y;
  std::vector<int> partition_cells;  // empty or size()==n
  std::vector<int> clean_labels;     // empty or size()==n

  std::size_t size() const { return y.size(); }
  const double* point(std::size_t i) const { return x.data() + i * dim; }
  double* point(std::size_t i) { return x.data() + i * dim; }

  void validate() const;
};

// Reads a CSV with a header row. Every column named other than "label" is a
// numeric feature; the "label" column holds class names, mapped to indices
// by lexicographic order of the distinct names. Errors distinguish a missing
// file, a missing label column, a malformed numeric field, and ragged rows.
// The string->index mapping is returned through label_names when non-null.
LabeledDataset load_csv(const std::string& path,
                        std::vector<std::string>* label_names = nullptr);

// Writes header "f0,...,f{d-1},label" and one row per point. Labels are
// written as the given names, or "c<k>" when names are empty.
void save_csv(const std::string& path, const LabeledDataset& data,
              const std::vector<std::string>& label_names = {});

}  // namespace dgbench

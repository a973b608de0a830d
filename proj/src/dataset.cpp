#include "dgbench/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dgbench {

void LabeledDataset::validate() const {
  const std::size_t n = y.size();
  require(dim >= 1, ErrorKind::logic, "dataset: dim must be >= 1");
  require(num_classes >= 1, ErrorKind::logic, "dataset: num_classes must be >= 1");
  require(x.size() == n * dim, ErrorKind::logic, "dataset: feature buffer size mismatch");
  for (double v : x) {
    require(std::isfinite(v), ErrorKind::logic, "dataset: non-finite feature value");
  }
  for (int v : y) {
    require(v >= 0 && static_cast<std::size_t>(v) < num_classes, ErrorKind::logic,
            "dataset: label out of range");
  }
  require(partition_cells.empty() || partition_cells.size() == n, ErrorKind::logic,
          "dataset: partition_cells size mismatch");
  require(clean_labels.empty() || clean_labels.size() == n, ErrorKind::logic,
          "dataset: clean_labels size mismatch");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& field, std::size_t row, const std::string& col) {
  const std::string t = trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  require(ec == std::errc() && ptr == t.data() + t.size(), ErrorKind::io,
          "load_csv: non-numeric value '" + field + "' in column '" + col +
              "' at data row " + std::to_string(row));
  return v;
}

}  // namespace

LabeledDataset load_csv(const std::string& path,
                        std::vector<std::string>* label_names) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::io, "load_csv: cannot open file '" + path + "'");

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::io,
          "load_csv: file '" + path + "' is empty");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::size_t label_col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "label") {
      require(label_col == header.size(), ErrorKind::io,
              "load_csv: duplicate 'label' column");
      label_col = j;
    }
  }
  require(label_col < header.size(), ErrorKind::io,
          "load_csv: no 'label' column in header");
  require(header.size() >= 2, ErrorKind::io,
          "load_csv: need at least one feature column besides 'label'");

  const std::size_t dim = header.size() - 1;
  std::vector<double> xs;
  std::vector<std::string> raw_labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    std::vector<std::string> fields = split_csv_line(line);
    require(fields.size() == header.size(), ErrorKind::io,
            "load_csv: data row " + std::to_string(row) + " has " +
                std::to_string(fields.size()) + " fields, header has " +
                std::to_string(header.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == label_col) {
        raw_labels.push_back(trim(fields[j]));
      } else {
        xs.push_back(parse_number(fields[j], row, header[j]));
      }
    }
  }
  require(row >= 1, ErrorKind::io, "load_csv: no data rows in '" + path + "'");

  std::map<std::string, int> name_to_idx;
  for (const auto& s : raw_labels) name_to_idx[s] = 0;
  int next = 0;
  std::vector<std::string> names;
  for (auto& [name, idx] : name_to_idx) {
    idx = next++;
    names.push_back(name);
  }

  LabeledDataset data;
  data.dim = dim;
  data.num_classes = name_to_idx.size();
  data.x = std::move(xs);
  data.y.reserve(raw_labels.size());
  for (const auto& s : raw_labels) data.y.push_back(name_to_idx[s]);
  data.validate();
  if (label_names) *label_names = std::move(names);
  return data;
}

void save_csv(const std::string& path, const LabeledDataset& data,
              const std::vector<std::string>& label_names) {
  data.validate();
  require(label_names.empty() || label_names.size() == data.num_classes,
          ErrorKind::logic, "save_csv: label_names size mismatch");
  std::ofstream out(path);
  require(out.good(), ErrorKind::io, "save_csv: cannot open file '" + path + "'");
  out.precision(17);
  for (std::size_t j = 0; j < data.dim; ++j) out << "f" << j << ",";
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim; ++j) out << data.x[i * data.dim + j] << ",";
    if (label_names.empty()) {
      out << "c" << data.y[i] << "\n";
    } else {
      out << label_names[data.y[i]] << "\n";
    }
  }
  require(out.good(), ErrorKind::io, "save_csv: write failed for '" + path + "'");
}

}  // namespace dgbench

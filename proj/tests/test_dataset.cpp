#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dgbench/dataset.hpp"
#include "dgbench/distributions.hpp"
#include "dgbench/rng.hpp"

using namespace dgbench;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content = "")
      : path("/tmp/dgbench_test_" + name) {
    if (!content.empty()) {
      std::ofstream out(path);
      out << content;
    }
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_csv maps labels lexicographically") {
  TempFile f("lex.csv", "f0,label\n1.0,a\n2.0,b\n3.0,a\n");
  std::vector<std::string> names;
  const LabeledDataset d = load_csv(f.path, &names);
  CHECK(d.size() == 3);
  CHECK(d.dim == 1);
  CHECK(d.num_classes == 2);
  CHECK(d.y == std::vector<int>{0, 1, 0});
  CHECK(names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_csv error cases are distinguished") {
  CHECK_THROWS_WITH_AS(load_csv("/tmp/definitely_not_here.csv"),
                       doctest::Contains("cannot open"), DgError);

  TempFile nolabel("nolabel.csv", "f0,f1\n1.0,2.0\n");
  CHECK_THROWS_WITH_AS(load_csv(nolabel.path),
                       doctest::Contains("no 'label' column"), DgError);

  TempFile bad("bad.csv", "f0,label\noops,a\n");
  CHECK_THROWS_AS(load_csv(bad.path), DgError);

  TempFile ragged("ragged.csv", "f0,f1,label\n1.0,2.0,a\n1.0,b\n");
  CHECK_THROWS_AS(load_csv(ragged.path), DgError);

  TempFile empty("empty.csv", "\n");
  CHECK_THROWS_AS(load_csv(empty.path), DgError);

  TempFile norows("norows.csv", "f0,label\n");
  CHECK_THROWS_AS(load_csv(norows.path), DgError);

  TempFile twolabels("twolabels.csv", "label,f0,label\na,1.0,b\n");
  CHECK_THROWS_AS(load_csv(twolabels.path), DgError);
}

TEST_CASE("save then load round-trips a sampled dataset") {
  const ClusterMixture toy = toy_four_cluster(10.0, 0.3);
  Rng rng = make_stream(9, "csv_roundtrip", 0);
  const LabeledDataset d = sample_dataset(toy, 200, rng);

  TempFile f("roundtrip.csv");
  save_csv(f.path, d, {"Object", "Animal"});
  std::vector<std::string> names;
  const LabeledDataset back = load_csv(f.path, &names);

  CHECK(back.dim == d.dim);
  CHECK(back.num_classes == d.num_classes);
  CHECK(back.x == d.x);  // %.17g writing is lossless for doubles
  // load_csv indexes classes by sorted name, so "Animal" < "Object" flips
  // the original 0/1 coding
  CHECK(names == std::vector<std::string>{"Animal", "Object"});
  std::vector<int> expect(d.y.size());
  for (std::size_t i = 0; i < d.y.size(); ++i) expect[i] = 1 - d.y[i];
  CHECK(back.y == expect);
}

TEST_CASE("round-trip with default class names") {
  LabeledDataset d;
  d.dim = 2;
  d.num_classes = 3;
  d.x = {0.25, -1.5, 3.125, 0.0};
  d.y = {2, 0};
  TempFile f("defaults.csv");
  save_csv(f.path, d);
  const LabeledDataset back = load_csv(f.path);
  CHECK(back.x == d.x);
  // "c0" < "c2" lexicographically, so indices compact to {1, 0}
  CHECK(back.y == std::vector<int>{1, 0});
}

TEST_CASE("validate rejects malformed datasets") {
  LabeledDataset d;
  d.dim = 1;
  d.num_classes = 2;
  d.x = {0.0};
  d.y = {1};
  d.validate();

  LabeledDataset badlabel = d;
  badlabel.y = {2};
  CHECK_THROWS_AS(badlabel.validate(), DgError);

  LabeledDataset nan = d;
  nan.x = {std::nan("")};
  CHECK_THROWS_AS(nan.validate(), DgError);

  LabeledDataset shape = d;
  shape.x = {0.0, 1.0};
  CHECK_THROWS_AS(shape.validate(), DgError);

  LabeledDataset meta = d;
  meta.partition_cells = {0, 1};
  CHECK_THROWS_AS(meta.validate(), DgError);
}

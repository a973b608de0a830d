#include <doctest.h>

#include <cmath>
#include <vector>

#include "dgbench/classifiers.hpp"
#include "dgbench/distributions.hpp"
#include "dgbench/errors.hpp"
#include "dgbench/rng.hpp"

using namespace dgbench;

namespace {

LabeledDataset tiny(std::vector<double> xs, std::vector<int> ys,
                    std::size_t K = 2) {
  LabeledDataset d;
  d.dim = 1;
  d.num_classes = K;
  d.x = std::move(xs);
  d.y = std::move(ys);
  return d;
}

ClusterMixture two_blobs(double separation, std::size_t K = 2) {
  ClusterMixture m;
  m.dim = 2;
  m.num_classes = K;
  for (int l = 0; l < 2; ++l) {
    Cluster c;
    c.weight = 0.5;
    c.center = {l * separation, 0.0};
    c.spread = 1.0;
    c.label_pmf.assign(K, 0.0);
    c.label_pmf[l] = 1.0;
    c.cluster_id = l;
    m.clusters.push_back(c);
  }
  return m;
}

}  // namespace

TEST_CASE("kernel_eval definition arithmetic") {
  const double x = 0.7, y = 0.7;
  CHECK(kernel_eval(KernelKind::rbf, 2.0, 1, &x, &y) == 1.0);
  CHECK(kernel_eval(KernelKind::laplace, 2.0, 1, &x, &y) == 1.0);

  // laplace at distance sigma*sqrt(d) is exp(-1)
  const std::vector<double> a = {0.0, 0.0};
  const std::vector<double> b = {2.0 * std::sqrt(2.0), 0.0};
  CHECK(kernel_eval(KernelKind::laplace, 2.0, 2, a.data(), b.data()) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  const double o = 0.0, u = 1.0;
  CHECK(kernel_eval(KernelKind::rbf, 1.0, 1, &o, &u) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("one_nn basics and tie rule") {
  Rng rng = make_stream(1, "nn", 0);
  const LabeledDataset d = tiny({0.0, 10.0}, {0, 1});
  const TrainedClassifier m = train(ClassifierFamilySpec::one_nn(), d, rng);
  const std::vector<double> q = {1.0};
  CHECK(m.predict(q, rng) == 0);
  CHECK(train_error(m, d, rng) == 0.0);

  // Equidistant neighbors at train indices 3 and 7: index 3 wins.
  LabeledDataset ties = tiny({-9.0, -8.0, -7.0, 0.0, 7.0, 8.0, 9.0, 2.0},
                             {1, 1, 1, 1, 0, 0, 0, 0});
  const TrainedClassifier mt = train(ClassifierFamilySpec::one_nn(), ties, rng);
  const std::vector<double> mid = {1.0};  // distance 1 to x=0 (idx 3) and x=2 (idx 7)
  CHECK(mt.predict(mid, rng) == 1);
}

TEST_CASE("one_nn interpolates random data") {
  Rng rng = make_stream(1, "nn", 1);
  const LabeledDataset d = sample_dataset(two_blobs(3.0), 300, rng);
  const TrainedClassifier m = train(ClassifierFamilySpec::one_nn(), d, rng);
  CHECK(train_error(m, d, rng) == 0.0);
}

TEST_CASE("k_nn plurality and label-index tie") {
  Rng rng = make_stream(1, "knn", 0);
  // 4 nearest of x=0: labels {2,2,1,1} -> tie -> smaller label 1.
  const LabeledDataset d =
      tiny({0.1, -0.2, 0.3, -0.4, 50.0, 51.0}, {2, 2, 1, 1, 0, 0}, 3);
  const TrainedClassifier m4 =
      train(ClassifierFamilySpec::k_nn(4), d, rng);
  const std::vector<double> q = {0.0};
  CHECK(m4.predict(q, rng) == 1);

  // 3 nearest: labels {2,2,1} -> plurality 2.
  const TrainedClassifier m3 = train(ClassifierFamilySpec::k_nn(3), d, rng);
  CHECK(m3.predict(q, rng) == 2);

  // k = n on balanced data: constant plurality prediction, error 1/2.
  const LabeledDataset bal = tiny({0.0, 1.0, 2.0, 3.0}, {0, 1, 1, 0});
  const TrainedClassifier mall = train(ClassifierFamilySpec::k_nn(4), bal, rng);
  CHECK(train_error(mall, bal, rng) == 0.5);
}

TEST_CASE("randomized_k_nn with k=1 behaves exactly like one_nn") {
  Rng rng = make_stream(1, "rknn", 0);
  const LabeledDataset d = sample_dataset(two_blobs(2.0), 100, rng);
  const LabeledDataset probe = sample_dataset(two_blobs(2.0), 50, rng);
  const TrainedClassifier a = train(ClassifierFamilySpec::one_nn(), d, rng);
  const TrainedClassifier b =
      train(ClassifierFamilySpec::randomized_k_nn(1), d, rng);
  Rng ra = make_stream(2, "rknn_probe", 0);
  Rng rb = make_stream(2, "rknn_probe", 0);
  CHECK(predict_all(a, probe, ra) == predict_all(b, probe, rb));
  CHECK(ra.next_u64() == rb.next_u64());  // identical stream consumption

  // k=3 picks uniformly among the 3 nearest.
  const LabeledDataset three = tiny({0.0, 0.5, 1.0, 90.0}, {0, 1, 0, 1});
  const TrainedClassifier m3 =
      train(ClassifierFamilySpec::randomized_k_nn(3), three, rng);
  const std::vector<double> q = {0.2};
  int ones = 0;
  Rng rp = make_stream(2, "rknn_draws", 0);
  for (int i = 0; i < 3000; ++i) ones += m3.predict(q, rp);
  CHECK(ones / 3000.0 == doctest::Approx(1.0 / 3.0).epsilon(0.1));
}

TEST_CASE("decision tree splits (A,A,B,B) at depth 1") {
  Rng rng = make_stream(1, "tree", 0);
  const LabeledDataset d = tiny({0.0, 1.0, 2.0, 3.0}, {0, 0, 1, 1});
  const TrainedClassifier m =
      train(ClassifierFamilySpec::decision_tree(), d, rng);
  REQUIRE(m.nodes.size() == 3);
  CHECK(m.nodes[0].feature == 0);
  CHECK(m.nodes[0].threshold == doctest::Approx(1.5));
  CHECK(m.interpolating);
  CHECK(train_error(m, d, rng) == 0.0);
}

TEST_CASE("decision tree reaches purity on sampled data") {
  Rng rng = make_stream(1, "tree", 1);
  ClusterMixture blobs = two_blobs(2.0);
  // d=4 so each node samples floor(sqrt(4)) = 2 of 4 features
  ClusterMixture wide;
  wide.dim = 4;
  wide.num_classes = 2;
  for (const Cluster& c : blobs.clusters) {
    Cluster w = c;
    w.center = {c.center[0], c.center[1], 0.0, 0.0};
    wide.clusters.push_back(w);
  }
  const LabeledDataset d = sample_dataset(wide, 400, rng);
  const TrainedClassifier m =
      train(ClassifierFamilySpec::decision_tree(), d, rng);
  CHECK(m.interpolating);
  CHECK(train_error(m, d, rng) == 0.0);
}

TEST_CASE("decision tree on conflicting duplicates falls back to plurality") {
  Rng rng = make_stream(1, "tree", 2);
  const LabeledDataset d = tiny({5.0, 5.0, 5.0}, {1, 0, 1});
  const TrainedClassifier m =
      train(ClassifierFamilySpec::decision_tree(), d, rng);
  CHECK_FALSE(m.interpolating);
  const std::vector<double> q = {5.0};
  CHECK(m.predict(q, rng) == 1);
}

TEST_CASE("kernel single train point interpolates with lambda 0") {
  Rng rng = make_stream(1, "kernel", 0);
  LabeledDataset d = tiny({0.5}, {1});
  const TrainedClassifier m = train(
      ClassifierFamilySpec::kernel(KernelKind::rbf, 1.0, 0.0), d, rng);
  REQUIRE(m.alpha.size() == 2);
  CHECK(m.alpha[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.alpha[1] == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> q = {0.5};
  CHECK(m.predict(q, rng) == 1);
}

TEST_CASE("kernel interpolates small distinct datasets") {
  Rng rng = make_stream(1, "kernel", 1);
  const LabeledDataset d = sample_dataset(two_blobs(4.0), 120, rng);
  for (KernelKind kk : {KernelKind::rbf, KernelKind::laplace}) {
    const TrainedClassifier m =
        train(ClassifierFamilySpec::kernel(kk, 0.5, 0.0), d, rng);
    CHECK(train_error(m, d, rng) == 0.0);
    CHECK(m.solve_residual <= 1e-8 * 120);
  }
}

TEST_CASE("kernel with duplicate points and lambda 0 is rejected") {
  Rng rng = make_stream(1, "kernel", 2);
  const LabeledDataset d = tiny({1.0, 1.0}, {0, 1});
  CHECK_THROWS_WITH_AS(
      train(ClassifierFamilySpec::kernel(KernelKind::rbf, 1.0, 0.0), d, rng),
      doctest::Contains("duplicate points"), DgError);
  // with ridge the same data is fine
  const TrainedClassifier m = train(
      ClassifierFamilySpec::kernel(KernelKind::rbf, 1.0, 0.5), d, rng);
  CHECK(m.interpolating);
}

TEST_CASE("huge lambda flattens scores and the tie rule picks class 0") {
  Rng rng = make_stream(1, "kernel", 3);
  const LabeledDataset d = sample_dataset(two_blobs(4.0, 3), 50, rng);
  const TrainedClassifier m = train(
      ClassifierFamilySpec::kernel(KernelKind::rbf, 1.0, 1e16), d, rng);
  const LabeledDataset probe = sample_dataset(two_blobs(4.0, 3), 100, rng);
  for (int pred : predict_all(m, probe, rng)) CHECK(pred == 0);
}

TEST_CASE("constant-predictor stub has train error one half on balanced data") {
  TrainedClassifier stub;
  stub.spec = ClassifierFamilySpec::kernel(KernelKind::rbf, 1.0, 1.0);
  stub.dim = 1;
  stub.num_classes = 2;
  stub.train_set = tiny({0.0}, {0});
  stub.alpha = {0.0, 0.0};
  stub.sigma_tilde = 1.0;
  LabeledDataset bal;
  bal.dim = 1;
  bal.num_classes = 2;
  for (int i = 0; i < 10000; ++i) {
    bal.x.push_back(static_cast<double>(i));
    bal.y.push_back(i % 2);
  }
  Rng rng = make_stream(1, "stub", 0);
  CHECK(train_error(stub, bal, rng) == 0.5);
}

TEST_CASE("predict validates the query dimension") {
  Rng rng = make_stream(1, "dim", 0);
  const LabeledDataset d = sample_dataset(two_blobs(3.0), 20, rng);
  const TrainedClassifier m = train(ClassifierFamilySpec::one_nn(), d, rng);
  const std::vector<double> bad = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(m.predict(bad, rng), DgError);
}

TEST_CASE("spec validation rejects bad hyperparameters") {
  Rng rng = make_stream(1, "spec", 0);
  CHECK_THROWS_AS(train(ClassifierFamilySpec::k_nn(0), tiny({0.0}, {0}), rng),
                  DgError);
  CHECK_THROWS_AS(ClassifierFamilySpec::kernel(KernelKind::rbf, 0.0, 0.0)
                      .validate(),
                  DgError);
  CHECK_THROWS_AS(ClassifierFamilySpec::kernel(KernelKind::rbf, 1.0, -1.0)
                      .validate(),
                  DgError);
}

TEST_CASE("ensemble pmf and plurality rules") {
  Rng rng = make_stream(1, "ens", 0);
  const LabeledDataset a = tiny({0.0, 10.0}, {0, 1});
  const LabeledDataset b = tiny({0.0, 10.0}, {1, 0});
  const TrainedClassifier ma = train(ClassifierFamilySpec::one_nn(), a, rng);
  const TrainedClassifier mb = train(ClassifierFamilySpec::one_nn(), b, rng);
  const std::vector<double> q = {1.0};

  const std::vector<double> same =
      ensemble_predict_pmf({ma, ma, ma}, q.data(), rng);
  CHECK(same == std::vector<double>{1.0, 0.0});

  const std::vector<double> split = ensemble_predict_pmf({ma, mb}, q.data(), rng);
  CHECK(split == std::vector<double>{0.5, 0.5});

  CHECK(plurality_ensemble({ma, ma, mb}, q.data(), rng) == 0);
  CHECK(plurality_ensemble({mb, mb, ma}, q.data(), rng) == 1);
  CHECK(plurality_ensemble({ma, mb}, q.data(), rng) == 0);  // 1-1 tie -> class 0

  CHECK_THROWS_AS(ensemble_predict_pmf({}, q.data(), rng), DgError);
}

TEST_CASE("fresh-train-set ensembles replicate then remove Cat noise") {
  const ClusterMixture toy = toy_four_cluster(10.0, 0.3);
  std::vector<TrainedClassifier> members;
  for (int m = 0; m < 100; ++m) {
    Rng rs = make_stream(31, "cat_ens", m);
    members.push_back(
        train(ClassifierFamilySpec::one_nn(), sample_dataset(toy, 200, rs), rs));
  }
  Rng rng = make_stream(31, "cat_eval", 0);
  const std::vector<double> cat_center = {0.0, 10.0};
  const std::vector<double> pmf =
      ensemble_predict_pmf(members, cat_center.data(), rng);
  CHECK(std::abs(pmf[0] - 0.3) <= 0.1);
  CHECK(std::abs(pmf[1] - 0.7) <= 0.1);

  // 25-member plurality votes Animal: the Bayes decision, not a sample.
  std::vector<TrainedClassifier> few(members.begin(), members.begin() + 25);
  CHECK(plurality_ensemble(few, cat_center.data(), rng) == 1);
}

TEST_CASE("teacher pseudo-labels equal clean labels on a separated source") {
  const ClusterMixture src = two_blobs(30.0);
  Rng rng = make_stream(1, "teacher", 0);
  const LabeledDataset real = sample_dataset(src, 100, rng);
  const TrainedClassifier teacher =
      train(ClassifierFamilySpec::one_nn(), real, rng);
  const LabeledDataset pool = sample_dataset(src, 200, rng);
  const std::vector<int> pseudo = predict_all(teacher, pool, rng);
  CHECK(pseudo == pool.y);
}

TEST_CASE("to_json names the family and is stable") {
  Rng rng = make_stream(1, "json", 0);
  const LabeledDataset d = sample_dataset(two_blobs(3.0), 30, rng);
  const TrainedClassifier m = train(ClassifierFamilySpec::one_nn(), d, rng);
  const std::string j1 = m.to_json();
  CHECK(j1.find("one_nn") != std::string::npos);
  CHECK(j1 == m.to_json());

  Rng rng2 = make_stream(1, "json", 1);
  const TrainedClassifier t =
      train(ClassifierFamilySpec::decision_tree(), d, rng2);
  CHECK(t.to_json().find("decision_tree") != std::string::npos);
}

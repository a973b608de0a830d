#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dgbench/classifiers.hpp"
#include "dgbench/distributions.hpp"
#include "dgbench/joint.hpp"
#include "dgbench/partition.hpp"

namespace dgbench {

// A sampled point reduced to what test functions look at: its partition
// cell, true label, the evaluated model's prediction, and a reference
// model's prediction (for agreement tests).
struct ScoredSample {
  int cell = 0;
  int y = 0;
  int yhat = 0;
  int ref = 0;
};

struct TestFunction {
  std::string id;
  std::function<double(const ScoredSample&)> eval;

  static TestFunction error_test();
  static TestFunction agreement_test();
  static TestFunction cell_label_indicator(int cell, int label);
  // Indicator of a subset of (cell, label) pairs.
  static TestFunction subset_indicator(std::vector<std::pair<int, int>> pairs);
};

// All 2^(M*K) subset indicators; the sup advantage over this family equals
// the TV distance between the two empirical joints. Intended for small M*K.
std::vector<TestFunction> all_subset_indicator_tests(std::size_t M, std::size_t K);

// Max over tests of |mean_P T - mean_Q T| and the maximizing test's id.
std::pair<double, std::string> test_family_advantage(
    const std::vector<TestFunction>& tests,
    const std::vector<ScoredSample>& samples_p,
    const std::vector<ScoredSample>& samples_q);

double generalization_gap(const TrainedClassifier& model,
                          const LabeledDataset& train,
                          const LabeledDataset& test, Rng& rng);

// Either a continuous mixture or a finite domain; exactly one is set.
struct SourceRef {
  const ClusterMixture* mixture = nullptr;
  const FiniteDomainDistribution* finite = nullptr;

  SourceRef(const ClusterMixture& m) : mixture(&m) {}          // NOLINT
  SourceRef(const FiniteDomainDistribution& f) : finite(&f) {}  // NOLINT

  std::size_t num_classes() const {
    return mixture ? mixture->num_classes : finite->num_classes;
  }
  LabeledDataset sample(std::size_t n, Rng& rng) const {
    return mixture ? sample_dataset(*mixture, n, rng)
                   : sample_dataset(*finite, n, rng);
  }
};

// Distinguishability estimate: per trial, train on n points relabeled by L and
// score fresh test points for 1{f(x) != L(x)}. Returns the failure rate
// with its Clopper-Pearson interval. Trials are keyed by (seed, trial) so
// results do not depend on the worker count.
BinomialCI distinguishability_eps(const ClassifierFamilySpec& family,
                                  const SourceRef& source, const Partition& L,
                                  std::size_t n, std::size_t trials,
                                  std::size_t test_points_per_trial,
                                  std::uint64_t seed, int workers = 1);

struct CalibrationResult {
  double tv = 0.0;             // pooled TV((L(x),y), (L(x),f(x)))
  double ci_lower = 0.0;       // bootstrap-over-trials percentile CI on tv
  double ci_upper = 0.0;
  DiscreteJoint joint_true;
  DiscreteJoint joint_model;
  std::vector<double> per_trial_tv;
};

CalibrationResult feature_calibration_gap(const ClassifierFamilySpec& family,
                                          const SourceRef& source,
                                          const Partition& L, std::size_t n,
                                          std::size_t trials,
                                          std::size_t test_points_per_trial,
                                          std::uint64_t seed, int workers = 1);

struct TrialCounts {
  std::size_t accurate = 0;
  std::size_t agreeing = 0;
  std::size_t tested = 0;
};

struct AgreementResult {
  BinomialCI accuracy;
  BinomialCI agreement;
  double gap = 0.0;
  std::vector<TrialCounts> per_trial;
};

// Agreement-versus-accuracy measurement: per trial, two independent train sets and
// models; fresh test points scored for 1{f1(x)=y} and 1{f1(x)=f2(x)}.
AgreementResult agreement_rate(const ClassifierFamilySpec& family,
                               const SourceRef& source, std::size_t n,
                               std::size_t trials,
                               std::size_t test_points_per_trial,
                               std::uint64_t seed, int workers = 1);

// Same measurement for a fixed dataset: per trial the rows are randomly
// partitioned 40/40/20 into S1/S2/test.
AgreementResult agreement_rate_split(const ClassifierFamilySpec& family,
                                     const LabeledDataset& data,
                                     std::size_t trials, std::uint64_t seed,
                                     int workers = 1);

struct PointwiseAgreement {
  std::vector<double> m_values;  // M(x, y) per test point
  double mean_m = 0.0;
  double mean_abs_m = 0.0;
};

PointwiseAgreement pointwise_agreement_M(
    const std::vector<std::pair<TrainedClassifier, TrainedClassifier>>& pairs,
    const LabeledDataset& test, Rng& rng);

struct PointwiseDensity {
  std::vector<double> h_values;  // H(x) per eval point
  double mean_h = 0.0;
};

PointwiseDensity pointwise_density_H(
    const std::vector<TrainedClassifier>& ensemble,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        eval_points,
    Rng& rng);

}  // namespace dgbench

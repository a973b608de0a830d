#include "dgbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "dgbench/parallel.hpp"

namespace dgbench {

TestFunction TestFunction::error_test() {
  return {"error", [](const ScoredSample& s) {
            return s.yhat != s.y ? 1.0 : 0.0;
          }};
}

TestFunction TestFunction::agreement_test() {
  return {"agree", [](const ScoredSample& s) {
            return s.yhat == s.ref ? 1.0 : 0.0;
          }};
}

TestFunction TestFunction::cell_label_indicator(int cell, int label) {
  return {"cell_label(" + std::to_string(cell) + "," + std::to_string(label) + ")",
          [cell, label](const ScoredSample& s) {
            return (s.cell == cell && s.yhat == label) ? 1.0 : 0.0;
          }};
}

TestFunction TestFunction::subset_indicator(
    std::vector<std::pair<int, int>> pairs) {
  std::string id = "subset{";
  for (const auto& [c, l] : pairs) {
    id += "(" + std::to_string(c) + "," + std::to_string(l) + ")";
  }
  id += "}";
  return {std::move(id), [pairs = std::move(pairs)](const ScoredSample& s) {
            for (const auto& [c, l] : pairs) {
              if (s.cell == c && s.yhat == l) return 1.0;
            }
            return 0.0;
          }};
}

std::vector<TestFunction> all_subset_indicator_tests(std::size_t M,
                                                     std::size_t K) {
  require(M * K <= 20, ErrorKind::logic,
          "all_subset_indicator_tests: 2^(M*K) too large");
  const std::size_t bits = M * K;
  std::vector<TestFunction> tests;
  tests.reserve(std::size_t{1} << bits);
  for (std::size_t mask = 0; mask < (std::size_t{1} << bits); ++mask) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t b = 0; b < bits; ++b) {
      if (mask & (std::size_t{1} << b)) {
        pairs.emplace_back(static_cast<int>(b / K), static_cast<int>(b % K));
      }
    }
    tests.push_back(TestFunction::subset_indicator(std::move(pairs)));
  }
  return tests;
}

std::pair<double, std::string> test_family_advantage(
    const std::vector<TestFunction>& tests,
    const std::vector<ScoredSample>& samples_p,
    const std::vector<ScoredSample>& samples_q) {
  require(!tests.empty(), ErrorKind::logic, "test_family_advantage: no tests");
  require(!samples_p.empty() && !samples_q.empty(), ErrorKind::logic,
          "test_family_advantage: empty samples");
  double best = -1.0;
  const std::string* best_id = nullptr;
  for (const auto& t : tests) {
    double mp = 0.0;
    for (const auto& s : samples_p) mp += t.eval(s);
    mp /= static_cast<double>(samples_p.size());
    double mq = 0.0;
    for (const auto& s : samples_q) mq += t.eval(s);
    mq /= static_cast<double>(samples_q.size());
    const double adv = std::abs(mp - mq);
    if (adv > best) {
      best = adv;
      best_id = &t.id;
    }
  }
  return {best, *best_id};
}

double generalization_gap(const TrainedClassifier& model,
                          const LabeledDataset& train,
                          const LabeledDataset& test, Rng& rng) {
  require(train.dim == test.dim && train.num_classes == test.num_classes,
          ErrorKind::logic, "generalization_gap: train/test shape mismatch");
  return std::abs(train_error(model, train, rng) - train_error(model, test, rng));
}

namespace {

// Relabels a dataset by its partition cells: the cell becomes the label.
LabeledDataset relabel_by_partition(const LabeledDataset& data,
                                    const Partition& L) {
  LabeledDataset out = data;
  out.num_classes = L.M;
  out.clean_labels.clear();
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.y[i] = L.cell_of(data, i);
  }
  out.validate();
  return out;
}

std::pair<double, double> bootstrap_pooled_tv(
    const std::vector<std::vector<double>>& counts_true,
    const std::vector<std::vector<double>>& counts_model, std::size_t M,
    std::size_t K, std::uint64_t seed) {
  const std::size_t trials = counts_true.size();
  const std::size_t B = 200;
  std::vector<double> boots(B);
  for (std::size_t b = 0; b < B; ++b) {
    Rng rs = make_stream(seed, "bootstrap", b);
    DiscreteJoint jt(M, K), jm(M, K);
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t pick = rs.uniform_index(trials);
      for (std::size_t i = 0; i < M * K; ++i) {
        jt.mass[i] += counts_true[pick][i];
        jm.mass[i] += counts_model[pick][i];
      }
    }
    jt.normalize();
    jm.normalize();
    boots[b] = tv_distance(jt, jm);
  }
  std::sort(boots.begin(), boots.end());
  return {boots[static_cast<std::size_t>(0.025 * B)],
          boots[static_cast<std::size_t>(0.975 * B) - 1]};
}

}  // namespace

BinomialCI distinguishability_eps(const ClassifierFamilySpec& family,
                                  const SourceRef& source, const Partition& L,
                                  std::size_t n, std::size_t trials,
                                  std::size_t test_points_per_trial,
                                  std::uint64_t seed, int workers) {
  require(trials >= 1 && test_points_per_trial >= 1, ErrorKind::logic,
          "distinguishability_eps: trials and test points must be >= 1");
  std::vector<std::size_t> failures(trials, 0);
  parallel_trials(trials, workers, [&](std::size_t t) {
    Rng rs = make_stream(seed, "dist_eps", t);
    LabeledDataset train_set =
        relabel_by_partition(source.sample(n, rs), L);
    TrainedClassifier model = train(family, train_set, rs);
    std::size_t fails = 0;
    for (std::size_t j = 0; j < test_points_per_trial; ++j) {
      LabeledDataset pt = source.sample(1, rs);
      const int cell = L.cell_of(pt, 0);
      if (model.predict(pt.point(0), rs) != cell) ++fails;
    }
    failures[t] = fails;
  });
  std::size_t total_fails = 0;
  for (std::size_t f : failures) total_fails += f;
  return clopper_pearson(total_fails, trials * test_points_per_trial, 0.05);
}

CalibrationResult feature_calibration_gap(const ClassifierFamilySpec& family,
                                          const SourceRef& source,
                                          const Partition& L, std::size_t n,
                                          std::size_t trials,
                                          std::size_t test_points_per_trial,
                                          std::uint64_t seed, int workers) {
  require(trials >= 1 && test_points_per_trial >= 1, ErrorKind::logic,
          "feature_calibration_gap: trials and test points must be >= 1");
  const std::size_t M = L.M;
  const std::size_t K = source.num_classes();
  std::vector<std::vector<double>> counts_true(trials),
      counts_model(trials);
  parallel_trials(trials, workers, [&](std::size_t t) {
    Rng rs = make_stream(seed, "fc_gap", t);
    LabeledDataset train_set = source.sample(n, rs);
    TrainedClassifier model = train(family, train_set, rs);
    LabeledDataset test_set = source.sample(test_points_per_trial, rs);
    std::vector<double> ct(M * K, 0.0), cm(M * K, 0.0);
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const auto cell = static_cast<std::size_t>(L.cell_of(test_set, i));
      const int pred = model.predict(test_set.point(i), rs);
      ct[cell * K + test_set.y[i]] += 1.0;
      cm[cell * K + pred] += 1.0;
    }
    counts_true[t] = std::move(ct);
    counts_model[t] = std::move(cm);
  });

  CalibrationResult res;
  res.joint_true = DiscreteJoint(M, K);
  res.joint_model = DiscreteJoint(M, K);
  res.per_trial_tv.resize(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    DiscreteJoint jt(M, K), jm(M, K);
    jt.mass = counts_true[t];
    jm.mass = counts_model[t];
    jt.normalize();
    jm.normalize();
    res.per_trial_tv[t] = tv_distance(jt, jm);
    for (std::size_t i = 0; i < M * K; ++i) {
      res.joint_true.mass[i] += counts_true[t][i];
      res.joint_model.mass[i] += counts_model[t][i];
    }
  }
  res.joint_true.normalize();
  res.joint_model.normalize();
  res.tv = tv_distance(res.joint_true, res.joint_model);
  std::tie(res.ci_lower, res.ci_upper) =
      bootstrap_pooled_tv(counts_true, counts_model, M, K, seed);
  return res;
}

AgreementResult agreement_rate(const ClassifierFamilySpec& family,
                               const SourceRef& source, std::size_t n,
                               std::size_t trials,
                               std::size_t test_points_per_trial,
                               std::uint64_t seed, int workers) {
  require(trials >= 1 && test_points_per_trial >= 1, ErrorKind::logic,
          "agreement_rate: trials and test points must be >= 1");
  std::vector<TrialCounts> per_trial(trials);
  parallel_trials(trials, workers, [&](std::size_t t) {
    Rng rs = make_stream(seed, "agree", t);
    LabeledDataset s1 = source.sample(n, rs);
    TrainedClassifier f1 = train(family, s1, rs);
    LabeledDataset s2 = source.sample(n, rs);
    TrainedClassifier f2 = train(family, s2, rs);
    LabeledDataset test_set = source.sample(test_points_per_trial, rs);
    TrialCounts tc;
    tc.tested = test_set.size();
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const int p1 = f1.predict(test_set.point(i), rs);
      const int p2 = f2.predict(test_set.point(i), rs);
      if (p1 == test_set.y[i]) ++tc.accurate;
      if (p1 == p2) ++tc.agreeing;
    }
    per_trial[t] = tc;
  });

  AgreementResult res;
  res.per_trial = std::move(per_trial);
  std::size_t acc = 0, agr = 0, tot = 0;
  for (const auto& tc : res.per_trial) {
    acc += tc.accurate;
    agr += tc.agreeing;
    tot += tc.tested;
  }
  res.accuracy = clopper_pearson(acc, tot, 0.05);
  res.agreement = clopper_pearson(agr, tot, 0.05);
  res.gap = std::abs(res.accuracy.point - res.agreement.point);
  return res;
}

AgreementResult agreement_rate_split(const ClassifierFamilySpec& family,
                                     const LabeledDataset& data,
                                     std::size_t trials, std::uint64_t seed,
                                     int workers) {
  data.validate();
  const std::size_t n = data.size();
  const auto n1 = static_cast<std::size_t>(0.4 * static_cast<double>(n));
  const std::size_t n2 = n1;
  require(n1 >= 1 && n - n1 - n2 >= 1, ErrorKind::logic,
          "agreement_rate_split: dataset too small for a 40/40/20 split");
  std::vector<TrialCounts> per_trial(trials);
  parallel_trials(trials, workers, [&](std::size_t t) {
    Rng rs = make_stream(seed, "agree_split", t);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rs.shuffle(perm);
    auto subset = [&](std::size_t from, std::size_t to) {
      LabeledDataset d;
      d.dim = data.dim;
      d.num_classes = data.num_classes;
      d.x.resize((to - from) * data.dim);
      d.y.resize(to - from);
      for (std::size_t i = from; i < to; ++i) {
        std::copy(data.point(perm[i]), data.point(perm[i]) + data.dim,
                  d.point(i - from));
        d.y[i - from] = data.y[perm[i]];
      }
      return d;
    };
    LabeledDataset s1 = subset(0, n1);
    LabeledDataset s2 = subset(n1, n1 + n2);
    LabeledDataset test_set = subset(n1 + n2, n);
    TrainedClassifier f1 = train(family, s1, rs);
    TrainedClassifier f2 = train(family, s2, rs);
    TrialCounts tc;
    tc.tested = test_set.size();
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const int p1 = f1.predict(test_set.point(i), rs);
      const int p2 = f2.predict(test_set.point(i), rs);
      if (p1 == test_set.y[i]) ++tc.accurate;
      if (p1 == p2) ++tc.agreeing;
    }
    per_trial[t] = tc;
  });

  AgreementResult res;
  res.per_trial = std::move(per_trial);
  std::size_t acc = 0, agr = 0, tot = 0;
  for (const auto& tc : res.per_trial) {
    acc += tc.accurate;
    agr += tc.agreeing;
    tot += tc.tested;
  }
  res.accuracy = clopper_pearson(acc, tot, 0.05);
  res.agreement = clopper_pearson(agr, tot, 0.05);
  res.gap = std::abs(res.accuracy.point - res.agreement.point);
  return res;
}

PointwiseAgreement pointwise_agreement_M(
    const std::vector<std::pair<TrainedClassifier, TrainedClassifier>>& pairs,
    const LabeledDataset& test, Rng& rng) {
  require(!pairs.empty(), ErrorKind::logic, "pointwise_agreement_M: no pairs");
  require(test.size() >= 1, ErrorKind::logic, "pointwise_agreement_M: empty test set");
  PointwiseAgreement res;
  res.m_values.resize(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    double m = 0.0;
    for (const auto& [f1, f2] : pairs) {
      const int p1 = f1.predict(test.point(i), rng);
      const int p2 = f2.predict(test.point(i), rng);
      m += (p1 == test.y[i] ? 1.0 : 0.0) - (p1 == p2 ? 1.0 : 0.0);
    }
    m /= static_cast<double>(pairs.size());
    res.m_values[i] = m;
    res.mean_m += m;
    res.mean_abs_m += std::abs(m);
  }
  res.mean_m /= static_cast<double>(test.size());
  res.mean_abs_m /= static_cast<double>(test.size());
  return res;
}

PointwiseDensity pointwise_density_H(
    const std::vector<TrainedClassifier>& ensemble,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        eval_points,
    Rng& rng) {
  require(!ensemble.empty(), ErrorKind::logic, "pointwise_density_H: empty ensemble");
  require(!eval_points.empty(), ErrorKind::logic, "pointwise_density_H: no eval points");
  const std::size_t K = ensemble.front().num_classes;
  PointwiseDensity res;
  res.h_values.reserve(eval_points.size());
  for (const auto& [x, pmf] : eval_points) {
    require(pmf.size() == K, ErrorKind::logic, "pointwise_density_H: pmf size mismatch");
    double s = 0.0;
    for (double p : pmf) {
      require(p >= 0.0, ErrorKind::logic, "pointwise_density_H: negative pmf entry");
      s += p;
    }
    require(std::abs(s - 1.0) <= 1e-9, ErrorKind::logic,
            "pointwise_density_H: pmf does not sum to 1");
    const std::vector<double> epmf = ensemble_predict_pmf(ensemble, x.data(), rng);
    const double h = tv_pmf(epmf, pmf);
    res.h_values.push_back(h);
    res.mean_h += h;
  }
  res.mean_h /= static_cast<double>(eval_points.size());
  return res;
}

}  // namespace dgbench

// Acceptance gate: twelve end-to-end checks, one PASS/FAIL line each.
// Returns nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgbench/classifiers.hpp"
#include "dgbench/dataset.hpp"
#include "dgbench/distributions.hpp"
#include "dgbench/errors.hpp"
#include "dgbench/experiments.hpp"
#include "dgbench/joint.hpp"
#include "dgbench/metrics.hpp"
#include "dgbench/nn_oracle.hpp"
#include "dgbench/partition.hpp"
#include "dgbench/rng.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::json;
using namespace dgbench;

namespace {

int g_failures = 0;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt1(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << x;
  return os.str();
}

std::string fmt4(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << x;
  return os.str();
}

void guarded(int id, const std::string& label,
             const std::function<std::pair<bool, std::string>()>& body) {
  const double t0 = now_s();
  bool ok = false;
  std::string detail;
  try {
    auto [p, d] = body();
    ok = p;
    detail = d;
  } catch (const std::exception& e) {
    detail = std::string("unexpected exception: ") + e.what();
  }
  std::printf("%s criterion %d: %s (%s) [%ss]\n", ok ? "PASS" : "FAIL", id,
              label.c_str(), detail.c_str(), fmt1(now_s() - t0).c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

FiniteDomainDistribution random_finite(Rng& r, std::size_t A, std::size_t K) {
  for (;;) {
    std::vector<std::vector<double>> pts(A, std::vector<double>(2));
    for (auto& p : pts) {
      p[0] = 10.0 * r.uniform();
      p[1] = 10.0 * r.uniform();
    }
    std::vector<double> prob(A);
    double s = 0.0;
    for (auto& q : prob) {
      q = 0.05 + r.uniform();
      s += q;
    }
    for (auto& q : prob) q /= s;
    std::vector<std::vector<double>> pmf(A, std::vector<double>(K));
    for (auto& row : pmf) {
      double t = 0.0;
      for (auto& q : row) {
        q = 0.05 + r.uniform();
        t += q;
      }
      for (auto& q : row) q /= t;
    }
    try {
      return finite_from_points(pts, prob, pmf);
    } catch (const DgError&) {
      // distance collision; redraw
    }
  }
}

Partition random_partition(Rng& r, std::size_t A) {
  const std::size_t M = 1 + r.uniform_index(A);
  std::vector<int> map(A);
  for (auto& c : map) c = static_cast<int>(r.uniform_index(M));
  return Partition::by_atom_map(map);
}

Partition identity_partition(std::size_t A) {
  std::vector<int> map(A);
  std::iota(map.begin(), map.end(), 0);
  return Partition::by_atom_map(map);
}

// One shared pool of randomized enumerable instances for criteria 1 and 2.
struct RandomInstance {
  FiniteDomainDistribution fin;
  Partition part = Partition::constant_cell();
};

RandomInstance theorem_instance(int rep) {
  Rng r = make_stream(4242, "acceptance/theorem", static_cast<std::uint64_t>(rep));
  const std::size_t A = 3 + r.uniform_index(4);  // 3..6 atoms
  const std::size_t K = 2 + r.uniform_index(2);  // 2..3 classes
  RandomInstance inst;
  inst.fin = random_finite(r, A, K);
  inst.part = random_partition(r, A);
  return inst;
}

ExperimentConfig make_cfg(const njson& params, const fs::path& out_dir,
                          int workers) {
  ExperimentConfig c;
  c.kind = params.at("kind").get<std::string>();
  c.seed = params.at("seed").get<std::uint64_t>();
  c.seed_source = "config";
  c.out_dir = out_dir.string();
  c.workers = workers;
  c.params = params;
  return c;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ------------------------------------------------------------ criteria

std::pair<bool, std::string> criterion1() {
  const double t0 = now_s();
  int checked = 0, violations = 0;
  double worst = -1.0;
  for (int rep = 0; rep < 24; ++rep) {
    const RandomInstance inst = theorem_instance(rep);
    for (std::size_t n = 1; n <= 6; ++n) {
      ++checked;
      try {
        const CalibrationOracle fc = exact_feature_calibration_tv(
            inst.fin, n, inst.part, EnumerationBudget::exact());
        worst = std::max(worst, fc.tv - (fc.eps + fc.delta));
        if (fc.tv > fc.eps + fc.delta + 1e-9) ++violations;
      } catch (const DgError&) {
        ++violations;
      }
    }
  }
  const double elapsed = now_s() - t0;
  const bool ok = violations == 0 && elapsed < 30.0;
  return {ok, "tv <= eps+delta+1e-9 held on " +
                  std::to_string(checked - violations) + "/" +
                  std::to_string(checked) +
                  " enumerations across 24 random instances, worst slack " +
                  fmt4(worst) + ", limit 30s"};
}

std::pair<bool, std::string> criterion2() {
  const double t0 = now_s();
  int checked = 0, violations = 0;
  double worst = -1.0;
  for (int rep = 0; rep < 24; ++rep) {
    const RandomInstance inst = theorem_instance(rep);
    for (std::size_t n = 1; n <= 6; ++n) {
      ++checked;
      try {
        const AgreementOracle ag = exact_agreement_vs_accuracy(
            inst.fin, n, EnumerationBudget::exact());
        worst = std::max(worst, ag.gap - ag.delta);
        if (ag.gap > ag.delta + 1e-9) ++violations;
      } catch (const DgError&) {
        ++violations;
      }
    }
  }
  const double elapsed = now_s() - t0;
  const bool ok = violations == 0 && elapsed < 60.0;
  return {ok, "|acc-agr| <= coupling delta+1e-9 held on " +
                  std::to_string(checked - violations) + "/" +
                  std::to_string(checked) +
                  " enumerations, worst slack " + fmt4(worst) + ", limit 60s"};
}

std::pair<bool, std::string> criterion3() {
  int matched = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 50; ++i) {
    Rng r = make_stream(777, "acceptance/mc", static_cast<std::uint64_t>(i));
    const std::size_t A = 3 + r.uniform_index(3);
    const std::size_t K = 2 + r.uniform_index(2);
    const FiniteDomainDistribution fin = random_finite(r, A, K);
    const std::size_t n = 1 + r.uniform_index(4);
    const Partition ident = identity_partition(A);

    const CalibrationOracle fco =
        exact_feature_calibration_tv(fin, n, ident, EnumerationBudget::exact());
    const AgreementOracle ago =
        exact_agreement_vs_accuracy(fin, n, EnumerationBudget::exact());

    const ClassifierFamilySpec nn = ClassifierFamilySpec::one_nn();
    const CalibrationResult cr = feature_calibration_gap(
        nn, SourceRef(fin), ident, n, 200, 500, 90000 + i, 1);
    const AgreementResult ar =
        agreement_rate(nn, SourceRef(fin), n, 1000, 1, 91000 + i, 1);

    const double fc_hw = (cr.ci_upper - cr.ci_lower) / 2.0;
    const bool ok_fc = std::abs(cr.tv - fco.tv) <= 3.0 * fc_hw;
    const bool ok_acc = std::abs(ar.accuracy.point - ago.accuracy) <=
                        3.0 * ar.accuracy.half_width();
    const bool ok_agr = std::abs(ar.agreement.point - ago.agreement) <=
                        3.0 * ar.agreement.half_width();
    if (ok_fc && ok_acc && ok_agr) ++matched;
    if (fc_hw > 0.0) {
      worst_ratio = std::max(worst_ratio, std::abs(cr.tv - fco.tv) / fc_hw);
    }
  }
  return {matched >= 48, std::to_string(matched) +
                             "/50 instances matched the exact oracle within "
                             "3 CI half-widths (need >= 48), worst tv ratio " +
                             fmt4(worst_ratio)};
}

std::pair<bool, std::string> criterion4(const fs::path& root) {
  const double t0 = now_s();
  const njson params = {
      {"kind", "calibrate"},
      {"seed", 2024},
      {"source", {{"type", "toy_four_cluster"}, {"separation", 10.0}}},
      {"families",
       {njson{{"kind", "one_nn"}},
        njson{{"kind", "decision_tree"}},
        njson{{"kind", "kernel"}, {"kernel", "rbf"}, {"sigma", 0.06},
              {"lambda", 0.0}}}},
      {"p_grid", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}},
      {"n", 1000},
      {"trials", 50},
      {"test_points_per_trial", 400}};
  const ExperimentReport rep =
      run_experiment(make_cfg(params, root / "c4", 1));
  double worst = 0.0;
  std::string worst_at = "-";
  for (const auto& fam : rep.json["results"]["families"]) {
    for (const auto& pt : fam["points"]) {
      const double p = pt["p"].get<double>();
      const double rate = pt["flip_rate"]["point"].get<double>();
      if (std::abs(rate - p) > worst) {
        worst = std::abs(rate - p);
        worst_at = fam["family"].get<std::string>() + " at p=" + fmt1(p * 10.0);
        worst_at += "/10";
      }
    }
  }
  const double elapsed = now_s() - t0;
  const bool ok = worst <= 0.05 && elapsed < 180.0;
  return {ok, "flip rate tracked the diagonal on 3 families x 6 noise "
              "levels, worst |rate-p| " +
                  fmt4(worst) + " (" + worst_at + "), limit 0.05 and 180s"};
}

std::pair<bool, std::string> criterion5(const fs::path& root) {
  const njson params = {
      {"kind", "constant_partition"},
      {"seed", 501},
      {"source", {{"type", "cluster_grid"}, {"num_classes", 5}, {"dim", 5},
                  {"scale", 3.0}}},
      {"families",
       {njson{{"kind", "one_nn"}},
        njson{{"kind", "decision_tree"}},
        njson{{"kind", "kernel"}, {"kernel", "rbf"}, {"sigma", 0.112},
              {"lambda", 0.0}}}},
      {"n_pool", 4500},
      {"test_pool", 4500},
      {"trials", 8}};
  const ExperimentReport rep =
      run_experiment(make_cfg(params, root / "c5", 1));
  double worst = 0.0;
  for (const auto& fam : rep.json["results"]["families"]) {
    worst = std::max(worst, fam["mean_marginal_tv"].get<double>());
  }
  return {worst <= 0.05,
          "output marginal matched the (l+1)-proportional train marginal "
          "for all 3 families, worst mean TV " +
              fmt4(worst) + ", limit 0.05"};
}

std::pair<bool, std::string> criterion6() {
  int good = 0;
  double worst_gap = 0.0;
  for (int task = 0; task < 10; ++task) {
    Rng r = make_stream(7000 + task, "acceptance/tabular", 0);
    const std::size_t K = 2 + static_cast<std::size_t>(task) % 4;
    const std::size_t d = 4 + static_cast<std::size_t>(task) % 9;
    const std::size_t C =
        K + static_cast<std::size_t>(task) % (K + 1);  // K..2K clusters
    ClusterMixture mix;
    mix.dim = d;
    mix.num_classes = K;
    std::vector<double> w(C);
    double wsum = 0.0;
    for (auto& x : w) {
      x = 0.4 + r.uniform();
      wsum += x;
    }
    for (std::size_t c = 0; c < C; ++c) {
      Cluster cl;
      cl.weight = w[c] / wsum;
      cl.spread = 1.0;
      cl.center.resize(d);
      for (auto& z : cl.center) z = 4.0 * r.normal();
      cl.label_pmf.assign(K, 0.0);
      const std::size_t main_class = c % K;
      if (task % 2 == 1) {
        for (auto& q : cl.label_pmf) q = 0.08 / static_cast<double>(K - 1);
      }
      cl.label_pmf[main_class] = task % 2 == 1 ? 0.92 : 1.0;
      cl.cluster_id = static_cast<int>(c);
      mix.clusters.push_back(std::move(cl));
    }
    mix.validate();
    Rng rs = make_stream(7000 + task, "acceptance/tabular_data", 1);
    const LabeledDataset data = sample_dataset(mix, 2250, rs);
    const AgreementResult ar = agreement_rate_split(
        ClassifierFamilySpec::decision_tree(), data, 5, 7000 + task, 1);
    const double gap = std::abs(ar.accuracy.point - ar.agreement.point);
    const bool overlap = ar.accuracy.lower <= ar.agreement.upper &&
                         ar.agreement.lower <= ar.accuracy.upper;
    worst_gap = std::max(worst_gap, gap);
    if (gap <= 0.05 && overlap) ++good;
  }
  return {good >= 8, "trees matched agreement to accuracy on " +
                         std::to_string(good) +
                         "/10 synthetic tabular tasks (need >= 8, gap <= "
                         "0.05 with overlapping CP intervals), worst gap " +
                         fmt4(worst_gap)};
}

std::pair<bool, std::string> criterion7() {
  ClusterMixture mix;
  mix.dim = 10;
  mix.num_classes = 10;
  for (int i = 0; i < 10; ++i) {
    Cluster easy;
    easy.weight = 0.05;
    easy.center.assign(10, 0.0);
    easy.center[i] = 20.0;
    easy.spread = 1.0;
    easy.label_pmf.assign(10, 0.0);
    easy.label_pmf[i] = 1.0;
    easy.cluster_id = i;
    mix.clusters.push_back(std::move(easy));
  }
  Cluster hard;
  hard.weight = 0.5;
  hard.center.assign(10, 0.0);
  hard.center[0] = -20.0;
  hard.spread = 1.0;
  hard.label_pmf.assign(10, 0.1);
  hard.cluster_id = 10;
  mix.clusters.push_back(std::move(hard));
  mix.validate();

  const ClassifierFamilySpec nn = ClassifierFamilySpec::one_nn();
  const AgreementResult ar = agreement_rate(nn, mix, 500, 30, 300, 70707, 1);
  std::size_t tested = 0;
  for (const auto& tc : ar.per_trial) tested += tc.tested;
  const auto se = [&](double p) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(tested));
  };
  const double dev_acc = std::abs(ar.accuracy.point - 0.55);
  const double dev_agr = std::abs(ar.agreement.point - 0.55);
  const bool ok_acc = dev_acc <= 2.0 * se(ar.accuracy.point);
  const bool ok_agr = dev_agr <= 2.0 * se(ar.agreement.point);

  std::vector<std::pair<TrainedClassifier, TrainedClassifier>> pairs;
  for (int i = 0; i < 30; ++i) {
    Rng ri = make_stream(70707, "acceptance/bimodal_pair",
                         static_cast<std::uint64_t>(i));
    TrainedClassifier a = train(nn, sample_dataset(mix, 500, ri), ri);
    TrainedClassifier b = train(nn, sample_dataset(mix, 500, ri), ri);
    pairs.emplace_back(std::move(a), std::move(b));
  }
  Rng re = make_stream(70707, "acceptance/bimodal_eval", 0);
  const LabeledDataset eval_set = sample_dataset(mix, 300, re);
  const PointwiseAgreement pa = pointwise_agreement_M(pairs, eval_set, re);
  const bool ok_m = std::abs(pa.mean_m) <= 0.02;

  return {ok_acc && ok_agr && ok_m,
          "accuracy " + fmt4(ar.accuracy.point) + " and agreement " +
              fmt4(ar.agreement.point) +
              " both within 2 SE of 0.55 (SE approx " +
              fmt4(se(0.55)) + "), mean pointwise M " + fmt4(pa.mean_m) +
              " within 0.02 of 0"};
}

std::pair<bool, std::string> criterion8(const fs::path& root) {
  const njson params = {
      {"kind", "lambda_sweep"},
      {"seed", 808},
      {"source", {{"type", "cluster_grid"}, {"num_classes", 2}, {"dim", 2},
                  {"scale", 3.0}}},
      {"channel",
       {{"type", "targeted_flip"}, {"from", 0}, {"to", 1}, {"p", 0.3}}},
      {"family", {{"kind", "kernel"}, {"kernel", "rbf"}, {"sigma", 0.1414}}},
      {"lambda_grid", {1e-4, 1e-3, 1e-2, 1e-1, 1.0}},
      {"scale_lambda_by_n", true},
      {"n", 1000},
      {"trials", 20},
      {"test_points_per_trial", 500}};
  const ExperimentReport rep =
      run_experiment(make_cfg(params, root / "c8", 1));
  const double max_tv = rep.json["results"]["max_tv_train_test"].get<double>();
  const auto inversions =
      rep.json["results"]["off_diag_inversions"].get<std::size_t>();
  const bool ok = max_tv <= 0.1 && inversions <= 1;
  return {ok, "across 4 decades of lambda: max train/test joint TV " +
                  fmt4(max_tv) + " (limit 0.1), off-diagonal inversions " +
                  std::to_string(inversions) + " (limit 1)"};
}

std::pair<bool, std::string> criterion9(const fs::path& root) {
  const njson params = {
      {"kind", "student_teacher"},
      {"seed", 909},
      {"source", {{"type", "toy_four_cluster"}, {"separation", 10.0},
                  {"noise_p", 0.0}}},
      {"family",
       {{"kind", "kernel"}, {"kernel", "laplace"}, {"sigma", 0.0707}}},
      {"n_grid", {100, 200, 500, 1000, 2000}},
      {"k_grid", {100, 200, 500, 1000, 2000}},
      {"trials", 4},
      {"test_points", 1000}};
  const ExperimentReport rep =
      run_experiment(make_cfg(params, root / "c9", 1));
  const double max_diff =
      rep.json["results"]["max_abs_diff_k_le_n_half"].get<double>();
  return {max_diff <= 0.03,
          "kernel students matched real-label controls on all grid cells "
          "with k <= n/2, max |E(n,k)-E(k)| " +
              fmt4(max_diff) + ", limit 0.03"};
}

std::pair<bool, std::string> criterion10() {
  const ClusterMixture mix = toy_four_cluster(10.0, 0.3);
  const ClassifierFamilySpec nn = ClassifierFamilySpec::one_nn();
  std::vector<TrainedClassifier> members(25);
  for (std::size_t m = 0; m < members.size(); ++m) {
    Rng rm = make_stream(1010, "acceptance/ensemble", m);
    members[m] = train(nn, sample_dataset(mix, 1000, rm), rm);
  }
  Rng rt = make_stream(1010, "acceptance/ensemble_test", 0);
  const LabeledDataset test = sample_dataset(mix, 2000, rt);
  std::size_t cat = 0, ens_flipped = 0;
  double member_rate = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (test.partition_cells[i] != 2) continue;  // Cat cell only
    ++cat;
    if (plurality_ensemble(members, test.point(i), rt) == 0) ++ens_flipped;
    member_rate += ensemble_predict_pmf(members, test.point(i), rt)[0];
  }
  const double single = member_rate / static_cast<double>(cat);
  const double ens =
      static_cast<double>(ens_flipped) / static_cast<double>(cat);
  const bool ok = ens <= 0.06 && std::abs(single - 0.3) <= 0.05;
  return {ok, "plurality vote cut the flipped-cell mass from " +
                  fmt4(single) + " (single member, expect ~0.3) to " +
                  fmt4(ens) + " (limit 0.06) on " + std::to_string(cat) +
                  " Cat test points"};
}

std::pair<bool, std::string> criterion11() {
  const std::vector<double> ps = {0.1, 0.5, 0.9};
  const std::vector<std::size_t> ns = {10, 100};
  double min_cov = 1.0;
  int combo = 0;
  for (double p : ps) {
    for (std::size_t n : ns) {
      Rng r = make_stream(1111, "acceptance/coverage",
                          static_cast<std::uint64_t>(combo++));
      int covered = 0;
      for (int sim = 0; sim < 10000; ++sim) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (r.uniform() < p) ++k;
        }
        const BinomialCI ci = clopper_pearson(k, n, 0.05);
        if (ci.lower <= p && p <= ci.upper) ++covered;
      }
      min_cov = std::min(min_cov, covered / 10000.0);
    }
  }
  return {min_cov >= 0.94,
          "Clopper-Pearson coverage over 10^4 binomials per (p, n) combo: "
          "minimum " +
              fmt4(min_cov) + ", limit 0.94"};
}

std::pair<bool, std::string> criterion12(const fs::path& root) {
  const std::vector<njson> configs = {
      {{"kind", "calibrate"},
       {"seed", 12001},
       {"source", {{"type", "toy_four_cluster"}, {"separation", 10.0}}},
       {"families", {njson{{"kind", "one_nn"}}}},
       {"p_grid", {0.0, 0.3}},
       {"n", 60},
       {"trials", 3},
       {"test_points_per_trial", 40}},
      {{"kind", "constant_partition"},
       {"seed", 12002},
       {"families", {njson{{"kind", "one_nn"}}}},
       {"n_pool", 300},
       {"test_pool", 300},
       {"trials", 2}},
      {{"kind", "coarse_partition"},
       {"seed", 12003},
       {"source", {{"type", "toy_four_cluster"}, {"separation", 10.0},
                   {"noise_p", 0.3}}},
       {"family", {{"kind", "one_nn"}}},
       {"partitions", {njson{{"kind", "by_label_coarsening"}, {"map", {0, 0}}}}},
       {"n", 60},
       {"trials", 3},
       {"test_points_per_trial", 40}},
      {{"kind", "multi_feature"},
       {"seed", 12004},
       {"source", {{"type", "toy_four_cluster"}, {"separation", 10.0}}},
       {"family", {{"kind", "one_nn"}}},
       {"partitions", {njson{{"kind", "by_cluster_id"}}}},
       {"n", 60},
       {"trials", 3},
       {"test_points_per_trial", 40}},
      {{"kind", "agree"},
       {"seed", 12005},
       {"source", {{"type", "cluster_grid"}, {"num_classes", 2}, {"dim", 2},
                   {"scale", 4.0}}},
       {"family", {{"kind", "one_nn"}}},
       {"n", 40},
       {"trials", 20},
       {"test_points_per_trial", 4}},
      {{"kind", "lambda_sweep"},
       {"seed", 12006},
       {"family", {{"kind", "kernel"}, {"kernel", "rbf"}, {"sigma", 0.15}}},
       {"lambda_grid", {0.01, 1.0}},
       {"n", 80},
       {"trials", 3},
       {"test_points_per_trial", 50}},
      {{"kind", "verify_nn"},
       {"seed", 12007},
       {"source",
        {{"type", "finite"},
         {"points", {{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.01}, {4.0, 4.03}}},
         {"prob", {0.25, 0.25, 0.25, 0.25}},
         {"label_pmf", {{1.0, 0.0}, {1.0, 0.0}, {0.3, 0.7}, {0.0, 1.0}}}}},
       {"n_list", {2, 3}}},
      {{"kind", "student_teacher"},
       {"seed", 12008},
       {"source", {{"type", "cluster_grid"}, {"num_classes", 2}, {"dim", 2},
                   {"scale", 3.0}}},
       {"family", {{"kind", "one_nn"}}},
       {"n_grid", {30, 60}},
       {"k_grid", {30, 60}},
       {"trials", 2},
       {"test_points", 100}},
      {{"kind", "pointwise"},
       {"seed", 12009},
       {"source", {{"type", "toy_four_cluster"}, {"separation", 10.0},
                   {"noise_p", 0.3}}},
       {"family", {{"kind", "one_nn"}}},
       {"ensemble_size", 4},
       {"n", 50},
       {"eval_points", 30}}};

  int identical = 0;
  std::string bad;
  for (const auto& params : configs) {
    const std::string kind = params.at("kind").get<std::string>();
    const fs::path base = root / "c12" / kind;
    run_experiment(make_cfg(params, base / "r1", 1));
    run_experiment(make_cfg(params, base / "r2", 1));
    run_experiment(make_cfg(params, base / "r3", 3));
    const std::string b1 = read_bytes(base / "r1" / "report.json");
    const std::string b2 = read_bytes(base / "r2" / "report.json");
    const std::string b3 = read_bytes(base / "r3" / "report.json");
    if (!b1.empty() && b1 == b2 && b1 == b3) {
      ++identical;
    } else if (bad.empty()) {
      bad = kind;
    }
  }
  const bool ok = identical == static_cast<int>(configs.size());
  std::string detail = "report.json byte-identical across reruns and worker "
                       "counts 1 and 3 for " +
                       std::to_string(identical) + "/9 runner kinds";
  if (!ok) detail += " (first mismatch: " + bad + ")";
  return {ok, detail};
}

}  // namespace

int main() {
  const double t0 = now_s();
  fs::path root;
  try {
    root = fs::temp_directory_path() / "dgbench_acceptance";
    std::error_code ec;
    fs::remove_all(root, ec);
    fs::create_directories(root);
  } catch (const std::exception& e) {
    std::printf("FAIL setup: %s\n", e.what());
    return 1;
  }

  guarded(1, "exact calibration bound on randomized finite domains", criterion1);
  guarded(2, "exact agreement bound on the same instance family", criterion2);
  guarded(3, "Monte-Carlo estimates match the exact oracle", criterion3);
  guarded(4, "flip-rate diagonal on the four-cluster toy task",
          [&] { return criterion4(root); });
  guarded(5, "constant-partition marginal matching", [&] { return criterion5(root); });
  guarded(6, "tree agreement vs accuracy on tabular tasks", criterion6);
  guarded(7, "bimodal EASY/HARD accuracy, agreement and pointwise M",
          criterion7);
  guarded(8, "lambda sweep keeps train/test joints close", [&] { return criterion8(root); });
  guarded(9, "student-teacher error grid matches controls", [&] { return criterion9(root); });
  guarded(10, "25-member plurality ensemble reverts the flipped cell",
          criterion10);
  guarded(11, "Clopper-Pearson empirical coverage", criterion11);
  guarded(12, "byte-identical reports across worker counts", [&] { return criterion12(root); });

  std::printf("acceptance: %d/12 criteria passed in %ss\n", 12 - g_failures,
              fmt1(now_s() - t0).c_str());
  return g_failures == 0 ? 0 : 1;
}

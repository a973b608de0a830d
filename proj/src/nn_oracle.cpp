#include "dgbench/nn_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dgbench/rng.hpp"

namespace dgbench {

EnumerationBudget EnumerationBudget::exact(std::size_t max_states) {
  EnumerationBudget b;
  b.max_states = max_states;
  b.mode = Mode::exact;
  return b;
}

EnumerationBudget EnumerationBudget::monte_carlo(std::size_t trials,
                                                 std::uint64_t seed) {
  EnumerationBudget b;
  b.mode = Mode::monte_carlo;
  b.mc_trials = trials;
  b.mc_seed = seed;
  return b;
}

namespace {

void check_exact_budget(const FiniteDomainDistribution& source, std::size_t n,
                        const EnumerationBudget& budget) {
  const double states = std::pow(static_cast<double>(source.num_atoms),
                                 static_cast<double>(n));
  require(states <= static_cast<double>(budget.max_states), ErrorKind::logic,
          "enumeration budget exceeded (|atoms|^n = " +
              std::to_string(states) + " > " +
              std::to_string(budget.max_states) + "); use monte_carlo mode");
}

std::vector<double> dots_row(const FiniteDomainDistribution& s, std::size_t a) {
  std::vector<double> out(s.num_atoms, 0.0);
  for (std::size_t b = 0; b < s.num_atoms; ++b) {
    out[b] = std::inner_product(s.label_pmf[a].begin(), s.label_pmf[a].end(),
                                s.label_pmf[b].begin(), 0.0);
  }
  return out;
}

// Index of the nearest atom to `t` among a sampled train multiset.
std::size_t nn_of(const FiniteDomainDistribution& s, std::size_t t,
                  const std::vector<std::size_t>& train) {
  std::size_t best = train[0];
  for (std::size_t i = 1; i < train.size(); ++i) {
    if (s.dist[t][train[i]] < s.dist[t][best]) best = train[i];
  }
  return best;
}

std::vector<std::size_t> sample_train(const FiniteDomainDistribution& s,
                                      std::size_t n, Rng& rng) {
  std::vector<std::size_t> train(n);
  for (std::size_t i = 0; i < n; ++i) train[i] = rng.categorical(s.prob);
  return train;
}

// Upper bound on the expected plug-in bias of TV(hat_p, p) at sample size N:
// 0.5 * sum_i sqrt(hat_p_i (1 - hat_p_i) / N). Added to Monte-Carlo half
// widths for TV-type estimators so the reported interval covers the
// estimator's upward bias, not only its variance.
double tv_bias_bound(const std::vector<double>& pmf, double n_samples) {
  double s = 0.0;
  for (double p : pmf) s += std::sqrt(std::max(0.0, p * (1.0 - p)) / n_samples);
  return 0.5 * s;
}

struct BatchStats {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 * sd / sqrt(B)
};

BatchStats batch_stats(const std::vector<double>& values) {
  const auto b = static_cast<double>(values.size());
  BatchStats st;
  for (double v : values) st.mean += v;
  st.mean /= b;
  double var = 0.0;
  for (double v : values) var += (v - st.mean) * (v - st.mean);
  var /= (b - 1.0);
  st.half_width = 1.96 * std::sqrt(var / b);
  return st;
}

constexpr std::size_t kBatches = 10;

}  // namespace

std::vector<std::vector<double>> nn_visit_law(
    const FiniteDomainDistribution& source, std::size_t n) {
  source.validate();
  require(n >= 1, ErrorKind::logic, "nn_visit_law: n must be >= 1");
  const std::size_t A = source.num_atoms;
  std::vector<std::vector<double>> nu(A, std::vector<double>(A, 0.0));
  for (std::size_t t = 0; t < A; ++t) {
    std::vector<std::size_t> order(A);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return source.dist[t][a] < source.dist[t][b];
    });
    double q = 0.0;
    for (std::size_t a : order) {
      const double keep_out = std::max(0.0, 1.0 - q);
      const double keep_out_incl = std::max(0.0, 1.0 - q - source.prob[a]);
      nu[t][a] = std::pow(keep_out, static_cast<double>(n)) -
                 std::pow(keep_out_incl, static_cast<double>(n));
      q += source.prob[a];
    }
  }
  return nu;
}

namespace detail {

std::vector<std::vector<double>> nn_visit_law_brute(
    const FiniteDomainDistribution& source, std::size_t n) {
  source.validate();
  const std::size_t A = source.num_atoms;
  const double states = std::pow(static_cast<double>(A), static_cast<double>(n));
  require(states <= 2e7, ErrorKind::logic, "nn_visit_law_brute: too many states");
  std::vector<std::vector<double>> nu(A, std::vector<double>(A, 0.0));
  std::vector<std::size_t> tuple(n, 0);
  for (;;) {
    double w = 1.0;
    for (std::size_t i : tuple) w *= source.prob[i];
    if (w > 0.0) {
      for (std::size_t t = 0; t < A; ++t) {
        nu[t][nn_of(source, t, tuple)] += w;
      }
    }
    std::size_t pos = 0;
    while (pos < n && ++tuple[pos] == A) {
      tuple[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return nu;
}

}  // namespace detail

OracleScalar exact_nn_regularity_delta(const FiniteDomainDistribution& source,
                                       std::size_t n,
                                       const EnumerationBudget& budget) {
  source.validate();
  const std::size_t A = source.num_atoms;
  if (budget.mode == EnumerationBudget::Mode::exact) {
    check_exact_budget(source, n, budget);
    const auto nu = nn_visit_law(source, n);
    std::vector<double> marginal(A, 0.0);
    for (std::size_t t = 0; t < A; ++t) {
      for (std::size_t a = 0; a < A; ++a) {
        marginal[a] += source.prob[t] * nu[t][a];
      }
    }
    return {tv_pmf(marginal, source.prob), 0.0};
  }

  Rng rng(budget.mc_seed);
  const std::size_t per_batch = std::max<std::size_t>(1, budget.mc_trials / kBatches);
  std::vector<double> batch_tv(kBatches);
  std::vector<double> total_counts(A, 0.0);
  for (std::size_t b = 0; b < kBatches; ++b) {
    std::vector<double> counts(A, 0.0);
    for (std::size_t i = 0; i < per_batch; ++i) {
      const std::size_t x = rng.categorical(source.prob);
      const auto train = sample_train(source, n, rng);
      counts[nn_of(source, x, train)] += 1.0;
    }
    std::vector<double> pmf(A);
    for (std::size_t a = 0; a < A; ++a) {
      pmf[a] = counts[a] / static_cast<double>(per_batch);
      total_counts[a] += counts[a];
    }
    batch_tv[b] = tv_pmf(pmf, source.prob);
  }
  const double total = static_cast<double>(per_batch * kBatches);
  std::vector<double> pooled(A);
  for (std::size_t a = 0; a < A; ++a) pooled[a] = total_counts[a] / total;
  const BatchStats st = batch_stats(batch_tv);
  return {tv_pmf(pooled, source.prob),
          st.half_width + tv_bias_bound(pooled, total)};
}

CalibrationOracle exact_feature_calibration_tv(
    const FiniteDomainDistribution& source, std::size_t n, const Partition& L,
    const EnumerationBudget& budget) {
  source.validate();
  const std::size_t A = source.num_atoms;
  const std::size_t K = source.num_classes;
  const std::size_t M = L.M;

  CalibrationOracle res;
  res.joint_true = enumerate_joint(source, L);
  res.delta = exact_nn_regularity_delta(source, n, budget).value;

  std::vector<int> cell(A);
  for (std::size_t a = 0; a < A; ++a) cell[a] = L.cell_of_atom(a);

  if (budget.mode == EnumerationBudget::Mode::exact) {
    check_exact_budget(source, n, budget);
    const auto nu = nn_visit_law(source, n);
    res.joint_nn = DiscreteJoint(M, K);
    for (std::size_t t = 0; t < A; ++t) {
      for (std::size_t a = 0; a < A; ++a) {
        if (nu[t][a] == 0.0) continue;
        if (cell[a] != cell[t]) res.eps += source.prob[t] * nu[t][a];
        for (std::size_t l = 0; l < K; ++l) {
          res.joint_nn.at(cell[t], l) +=
              source.prob[t] * nu[t][a] * source.label_pmf[a][l];
        }
      }
    }
    res.tv = tv_distance(res.joint_true, res.joint_nn);
    require(res.tv <= res.eps + res.delta + 1e-9, ErrorKind::theorem,
            "feature-calibration bound violated: tv " + std::to_string(res.tv) +
                " > eps " + std::to_string(res.eps) + " + delta " +
                std::to_string(res.delta));
    return res;
  }

  Rng rng(splitmix64(budget.mc_seed ^ 0x66636761ULL));
  const std::size_t per_batch = std::max<std::size_t>(1, budget.mc_trials / kBatches);
  std::vector<double> batch_tv(kBatches);
  DiscreteJoint pooled(M, K);
  std::size_t eps_hits = 0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    DiscreteJoint batch(M, K);
    for (std::size_t i = 0; i < per_batch; ++i) {
      const std::size_t x = rng.categorical(source.prob);
      const auto train = sample_train(source, n, rng);
      const std::size_t a = nn_of(source, x, train);
      if (cell[a] != cell[x]) ++eps_hits;
      for (std::size_t l = 0; l < K; ++l) {
        batch.at(cell[x], l) += source.label_pmf[a][l];
      }
    }
    for (std::size_t i = 0; i < M * K; ++i) pooled.mass[i] += batch.mass[i];
    batch.normalize();
    batch_tv[b] = tv_distance(res.joint_true, batch);
  }
  const double total = static_cast<double>(per_batch * kBatches);
  pooled.normalize();
  res.joint_nn = pooled;
  res.tv = tv_distance(res.joint_true, pooled);
  res.eps = static_cast<double>(eps_hits) / total;
  const BatchStats st = batch_stats(batch_tv);
  res.ci_half_width = st.half_width + tv_bias_bound(pooled.mass, total);
  require(res.tv <= res.eps + res.delta + 1e-9 + 3.0 * res.ci_half_width,
          ErrorKind::theorem,
          "feature-calibration bound violated beyond Monte-Carlo noise");
  return res;
}

OracleScalar coupling_delta(const FiniteDomainDistribution& source,
                            std::size_t n, const EnumerationBudget& budget) {
  source.validate();
  const std::size_t A = source.num_atoms;
  if (budget.mode == EnumerationBudget::Mode::exact) {
    check_exact_budget(source, n, budget);
    const auto nu = nn_visit_law(source, n);
    double delta = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t b = 0; b < A; ++b) {
        const double lhs = source.prob[a] * nu[a][b];
        double rhs = 0.0;
        for (std::size_t t = 0; t < A; ++t) {
          rhs += source.prob[t] * nu[t][a] * nu[t][b];
        }
        delta += std::abs(lhs - rhs);
      }
    }
    return {0.5 * delta, 0.0};
  }

  Rng rng(splitmix64(budget.mc_seed ^ 0x63706C64ULL));
  const std::size_t per_batch = std::max<std::size_t>(1, budget.mc_trials / kBatches);
  std::vector<double> batch_tv(kBatches);
  std::vector<double> lhs_total(A * A, 0.0), rhs_total(A * A, 0.0);
  for (std::size_t b = 0; b < kBatches; ++b) {
    std::vector<double> lhs(A * A, 0.0), rhs(A * A, 0.0);
    for (std::size_t i = 0; i < per_batch; ++i) {
      {
        const std::size_t x = rng.categorical(source.prob);
        const auto s2 = sample_train(source, n, rng);
        lhs[x * A + nn_of(source, x, s2)] += 1.0;
      }
      {
        const std::size_t x = rng.categorical(source.prob);
        const auto s1 = sample_train(source, n, rng);
        const auto s2 = sample_train(source, n, rng);
        rhs[nn_of(source, x, s1) * A + nn_of(source, x, s2)] += 1.0;
      }
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < A * A; ++i) {
      tv += std::abs(lhs[i] - rhs[i]) / static_cast<double>(per_batch);
      lhs_total[i] += lhs[i];
      rhs_total[i] += rhs[i];
    }
    batch_tv[b] = 0.5 * tv;
  }
  const double total = static_cast<double>(per_batch * kBatches);
  double tv = 0.0;
  for (std::size_t i = 0; i < A * A; ++i) {
    lhs_total[i] /= total;
    rhs_total[i] /= total;
    tv += std::abs(lhs_total[i] - rhs_total[i]);
  }
  const BatchStats st = batch_stats(batch_tv);
  return {0.5 * tv, st.half_width + tv_bias_bound(lhs_total, total) +
                        tv_bias_bound(rhs_total, total)};
}

AgreementOracle exact_agreement_vs_accuracy(
    const FiniteDomainDistribution& source, std::size_t n,
    const EnumerationBudget& budget) {
  source.validate();
  const std::size_t A = source.num_atoms;

  AgreementOracle res;
  const OracleScalar dl = coupling_delta(source, n, budget);
  res.delta = dl.value;

  std::vector<std::vector<double>> dots(A);
  for (std::size_t a = 0; a < A; ++a) dots[a] = dots_row(source, a);

  if (budget.mode == EnumerationBudget::Mode::exact) {
    check_exact_budget(source, n, budget);
    const auto nu = nn_visit_law(source, n);
    for (std::size_t t = 0; t < A; ++t) {
      double acc_t = 0.0;
      for (std::size_t a = 0; a < A; ++a) acc_t += nu[t][a] * dots[t][a];
      double agr_t = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        if (nu[t][a] == 0.0) continue;
        for (std::size_t b = 0; b < A; ++b) {
          agr_t += nu[t][a] * nu[t][b] * dots[a][b];
        }
      }
      res.accuracy += source.prob[t] * acc_t;
      res.agreement += source.prob[t] * agr_t;
    }
    res.gap = std::abs(res.accuracy - res.agreement);
    require(res.gap <= res.delta + 1e-9, ErrorKind::theorem,
            "agreement bound violated: |accuracy - agreement| " +
                std::to_string(res.gap) + " > coupling delta " +
                std::to_string(res.delta));
    return res;
  }

  Rng rng(splitmix64(budget.mc_seed ^ 0x61677261ULL));
  const std::size_t per_batch = std::max<std::size_t>(1, budget.mc_trials / kBatches);
  std::vector<double> batch_acc(kBatches), batch_agr(kBatches);
  for (std::size_t b = 0; b < kBatches; ++b) {
    double acc = 0.0, agr = 0.0;
    for (std::size_t i = 0; i < per_batch; ++i) {
      const std::size_t x = rng.categorical(source.prob);
      const auto s1 = sample_train(source, n, rng);
      const auto s2 = sample_train(source, n, rng);
      const std::size_t a1 = nn_of(source, x, s1);
      const std::size_t a2 = nn_of(source, x, s2);
      acc += dots[x][a1];
      agr += dots[a1][a2];
    }
    batch_acc[b] = acc / static_cast<double>(per_batch);
    batch_agr[b] = agr / static_cast<double>(per_batch);
  }
  const BatchStats sa = batch_stats(batch_acc);
  const BatchStats sg = batch_stats(batch_agr);
  res.accuracy = sa.mean;
  res.agreement = sg.mean;
  res.gap = std::abs(res.accuracy - res.agreement);
  res.ci_half_width = sa.half_width + sg.half_width;
  require(res.gap <= res.delta + 1e-9 +
                         3.0 * (res.ci_half_width + dl.ci_half_width),
          ErrorKind::theorem,
          "agreement bound violated beyond Monte-Carlo noise");
  return res;
}

}  // namespace dgbench

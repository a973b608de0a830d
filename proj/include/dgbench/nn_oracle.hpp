#pragma once

#include <cstdint>
#include <vector>

#include "dgbench/distributions.hpp"
#include "dgbench/joint.hpp"
#include "dgbench/partition.hpp"

namespace dgbench {

// Caps the enumeration state space |atoms|^n. monte_carlo mode estimates
// the same quantities by sampling and carries a batch-based CI.
struct EnumerationBudget {
  enum class Mode { exact, monte_carlo };
  std::size_t max_states = 10'000'000;
  Mode mode = Mode::exact;
  std::size_t mc_trials = 200'000;
  std::uint64_t mc_seed = 1;

  static EnumerationBudget exact(std::size_t max_states = 10'000'000);
  static EnumerationBudget monte_carlo(std::size_t trials,
                                       std::uint64_t seed = 1);
};

// A value plus its Monte-Carlo half-width (0 in exact mode).
struct OracleScalar {
  double value = 0.0;
  double ci_half_width = 0.0;
};

struct CalibrationOracle {
  double tv = 0.0;     // TV((L(x), y), (L(x), NN_S(x) label))
  double eps = 0.0;    // P(L(NN_S(x)) != L(x)), L's distinguishability for 1-NN
  double delta = 0.0;  // regularity constant of the source at this n
  DiscreteJoint joint_true;
  DiscreteJoint joint_nn;
  double ci_half_width = 0.0;  // on tv, Monte-Carlo mode only
};

struct AgreementOracle {
  double accuracy = 0.0;
  double agreement = 0.0;
  double gap = 0.0;    // |accuracy - agreement|
  double delta = 0.0;  // coupling TV
  double ci_half_width = 0.0;  // on the rates, Monte-Carlo mode only
};

// Law of "the nearest train atom of test atom x", nu[x][a] = P(NN_S(x) = a)
// over S ~ D^n: the sum over all ordered train sets, evaluated in closed
// form by ordering atoms by distance from x (P(no strictly closer atom in
// S) - P(no atom at most as close in S)).
std::vector<std::vector<double>> nn_visit_law(
    const FiniteDomainDistribution& source, std::size_t n);

namespace detail {
// Literal |atoms|^n enumeration of the same law; cross-checks nn_visit_law
// in the test suite.
std::vector<std::vector<double>> nn_visit_law_brute(
    const FiniteDomainDistribution& source, std::size_t n);
}  // namespace detail

// TV between the law of NN_S(x) (S ~ D^n, x ~ D) and the law of x.
OracleScalar exact_nn_regularity_delta(const FiniteDomainDistribution& source,
                                       std::size_t n,
                                       const EnumerationBudget& budget);

// Exact Feature Calibration check for 1-NN; hard theorem error unless
// tv <= eps + delta + 1e-9.
CalibrationOracle exact_feature_calibration_tv(
    const FiniteDomainDistribution& source, std::size_t n, const Partition& L,
    const EnumerationBudget& budget);

// TV between the two coupling laws over atom pairs: (x, NN_{S2}(x)) versus
// (NN_{S1}(x), NN_{S2}(x)) with independent S1, S2 and x ~ D.
OracleScalar coupling_delta(const FiniteDomainDistribution& source,
                            std::size_t n, const EnumerationBudget& budget);

// Exact 1-NN accuracy and independent-pair agreement, labels integrated
// analytically through the label pmfs; hard theorem error unless
// |accuracy - agreement| <= coupling delta + 1e-9.
AgreementOracle exact_agreement_vs_accuracy(
    const FiniteDomainDistribution& source, std::size_t n,
    const EnumerationBudget& budget);

}  // namespace dgbench

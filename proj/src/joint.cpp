#include "dgbench/joint.hpp"

#include <boost/math/distributions/beta.hpp>
#include <algorithm>
#include <cmath>

namespace dgbench {

double DiscreteJoint::total() const {
  double s = 0.0;
  for (double v : mass) s += v;
  return s;
}

void DiscreteJoint::validate() const {
  require(M >= 1 && K >= 1 && mass.size() == M * K, ErrorKind::logic,
          "DiscreteJoint: inconsistent dimensions");
  for (double v : mass) {
    require(v >= 0.0, ErrorKind::logic, "DiscreteJoint: negative mass");
  }
  require(std::abs(total() - 1.0) <= 1e-9, ErrorKind::logic,
          "DiscreteJoint: mass does not sum to 1");
}

void DiscreteJoint::normalize() {
  const double s = total();
  require(s > 0.0, ErrorKind::logic, "DiscreteJoint: cannot normalize zero mass");
  for (double& v : mass) v /= s;
}

double tv_distance(const DiscreteJoint& p, const DiscreteJoint& q) {
  require(p.M == q.M && p.K == q.K, ErrorKind::logic,
          "tv_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    s += std::abs(p.mass[i] - q.mass[i]);
  }
  return 0.5 * s;
}

double tv_pmf(const std::vector<double>& p, const std::vector<double>& q) {
  require(p.size() == q.size(), ErrorKind::logic, "tv_pmf: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

DiscreteJoint empirical_joint(const std::vector<int>& cells,
                              const std::vector<int>& labels, std::size_t M,
                              std::size_t K) {
  require(cells.size() == labels.size(), ErrorKind::logic,
          "empirical_joint: length mismatch");
  require(!cells.empty(), ErrorKind::logic, "empirical_joint: empty input");
  DiscreteJoint j(M, K);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    require(cells[i] >= 0 && static_cast<std::size_t>(cells[i]) < M &&
                labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < K,
            ErrorKind::logic, "empirical_joint: index out of range");
    j.at(cells[i], labels[i]) += 1.0;
  }
  j.normalize();
  return j;
}

DiscreteJoint empirical_joint(const std::vector<int>& cells,
                              const std::vector<int>& labels) {
  require(!cells.empty() && cells.size() == labels.size(), ErrorKind::logic,
          "empirical_joint: empty or mismatched input");
  const int mc = *std::max_element(cells.begin(), cells.end());
  const int ml = *std::max_element(labels.begin(), labels.end());
  return empirical_joint(cells, labels, static_cast<std::size_t>(mc) + 1,
                         static_cast<std::size_t>(ml) + 1);
}

BinomialCI clopper_pearson(std::size_t successes, std::size_t n,
                           double alpha) {
  require(n >= 1 && successes <= n, ErrorKind::logic,
          "clopper_pearson: need 0 <= successes <= n, n >= 1");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::logic,
          "clopper_pearson: alpha must lie in (0, 1)");
  const double k = static_cast<double>(successes);
  const double m = static_cast<double>(n);
  BinomialCI ci;
  ci.point = k / m;
  ci.confidence = 1.0 - alpha;
  if (successes == 0) {
    ci.lower = 0.0;
  } else {
    boost::math::beta_distribution<double> lo(k, m - k + 1.0);
    ci.lower = boost::math::quantile(lo, alpha / 2.0);
  }
  if (successes == n) {
    ci.upper = 1.0;
  } else {
    boost::math::beta_distribution<double> hi(k + 1.0, m - k);
    ci.upper = boost::math::quantile(hi, 1.0 - alpha / 2.0);
  }
  return ci;
}

}  // namespace dgbench

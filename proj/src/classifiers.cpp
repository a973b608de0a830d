#include "dgbench/classifiers.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dgbench {

void ClassifierFamilySpec::validate() const {
  require(k >= 1, ErrorKind::logic, "ClassifierFamilySpec: k must be >= 1");
  require(sigma > 0.0, ErrorKind::logic, "ClassifierFamilySpec: sigma must be positive");
  require(lambda >= 0.0, ErrorKind::logic, "ClassifierFamilySpec: lambda must be >= 0");
}

std::string ClassifierFamilySpec::name() const {
  switch (kind) {
    case FamilyKind::one_nn:
      return "one_nn";
    case FamilyKind::k_nn:
      return "k_nn(" + std::to_string(k) + ")";
    case FamilyKind::randomized_k_nn:
      return "randomized_k_nn(" + std::to_string(k) + ")";
    case FamilyKind::decision_tree:
      return "decision_tree";
    case FamilyKind::kernel: {
      const char* kk = kernel_kind == KernelKind::rbf ? "rbf" : "laplace";
      return std::string("kernel(") + kk + ",sigma=" + std::to_string(sigma) +
             ",lambda=" + std::to_string(lambda) + ")";
    }
  }
  return "unknown";
}

ClassifierFamilySpec ClassifierFamilySpec::one_nn() { return {}; }

ClassifierFamilySpec ClassifierFamilySpec::k_nn(int k) {
  ClassifierFamilySpec s;
  s.kind = FamilyKind::k_nn;
  s.k = k;
  s.validate();
  return s;
}

ClassifierFamilySpec ClassifierFamilySpec::randomized_k_nn(int k) {
  ClassifierFamilySpec s;
  s.kind = FamilyKind::randomized_k_nn;
  s.k = k;
  s.validate();
  return s;
}

ClassifierFamilySpec ClassifierFamilySpec::decision_tree() {
  ClassifierFamilySpec s;
  s.kind = FamilyKind::decision_tree;
  return s;
}

ClassifierFamilySpec ClassifierFamilySpec::kernel(KernelKind kind, double sigma,
                                                  double lambda) {
  ClassifierFamilySpec s;
  s.kind = FamilyKind::kernel;
  s.kernel_kind = kind;
  s.sigma = sigma;
  s.lambda = lambda;
  s.validate();
  return s;
}

double kernel_eval(KernelKind kind, double sigma, std::size_t d,
                   const double* x1, const double* x2) {
  require(sigma > 0.0, ErrorKind::logic, "kernel_eval: sigma must be positive");
  const double st = sigma * std::sqrt(static_cast<double>(d));
  double r2 = 0.0;
  for (std::size_t t = 0; t < d; ++t) {
    const double diff = x1[t] - x2[t];
    r2 += diff * diff;
  }
  if (kind == KernelKind::rbf) return std::exp(-r2 / (2.0 * st * st));
  return std::exp(-std::sqrt(r2) / st);
}

namespace {

double squared_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t t = 0; t < d; ++t) {
    const double diff = a[t] - b[t];
    s += diff * diff;
  }
  return s;
}

// Indices of the k nearest train points, ordered by (distance, train index).
std::vector<std::size_t> k_nearest(const LabeledDataset& train, const double* x,
                                   std::size_t k) {
  const std::size_t n = train.size();
  std::vector<std::pair<double, std::size_t>> by_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    by_dist[i] = {squared_dist(train.point(i), x, train.dim), i};
  }
  const std::size_t kk = std::min(k, n);
  std::partial_sort(by_dist.begin(), by_dist.begin() + kk, by_dist.end());
  std::vector<std::size_t> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = by_dist[i].second;
  return out;
}

int plurality_label(const std::vector<int>& labels, std::size_t K) {
  std::vector<std::size_t> counts(K, 0);
  for (int l : labels) ++counts[l];
  return static_cast<int>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double gini_from_counts(const std::vector<std::size_t>& counts, std::size_t n) {
  double s = 0.0;
  for (std::size_t c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(n);
    s += f * f;
  }
  return 1.0 - s;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
  std::vector<std::size_t> left, right;
};

// Best (threshold, impurity) on one feature; candidates are midpoints
// between consecutive distinct sorted values, scanned in ascending order,
// strict improvement only (so the earliest candidate wins ties).
void scan_feature(const LabeledDataset& data,
                  const std::vector<std::size_t>& idx, int feature,
                  SplitChoice& best) {
  const std::size_t n = idx.size();
  std::vector<std::pair<double, std::size_t>> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    vals[i] = {data.x[idx[i] * data.dim + feature], idx[i]};
  }
  std::sort(vals.begin(), vals.end());
  std::vector<std::size_t> left_counts(data.num_classes, 0);
  std::vector<std::size_t> right_counts(data.num_classes, 0);
  for (std::size_t i = 0; i < n; ++i) ++right_counts[data.y[vals[i].second]];

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const int lbl = data.y[vals[i].second];
    ++left_counts[lbl];
    --right_counts[lbl];
    const double v = vals[i].first;
    const double w = vals[i + 1].first;
    if (!(v < w)) continue;
    const std::size_t nl = i + 1;
    const std::size_t nr = n - nl;
    const double impurity =
        (static_cast<double>(nl) * gini_from_counts(left_counts, nl) +
         static_cast<double>(nr) * gini_from_counts(right_counts, nr)) /
        static_cast<double>(n);
    if (best.found && impurity >= best.impurity) continue;
    double thr = v + (w - v) / 2.0;
    if (!(thr >= v) || thr >= w) thr = v;  // guard against rounding to the boundary
    best.found = true;
    best.feature = feature;
    best.threshold = thr;
    best.impurity = impurity;
    best.left.clear();
    best.right.clear();
    for (std::size_t t = 0; t < n; ++t) {
      if (vals[t].first <= thr) {
        best.left.push_back(vals[t].second);
      } else {
        best.right.push_back(vals[t].second);
      }
    }
  }
}

void build_tree(TrainedClassifier& model, const LabeledDataset& data, Rng& rng) {
  const std::size_t d = data.dim;
  const std::size_t m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));

  struct Task {
    int node;
    std::vector<std::size_t> idx;
  };
  std::vector<Task> stack;
  model.nodes.clear();
  model.nodes.emplace_back();
  {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    stack.push_back({0, std::move(all)});
  }

  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();

    std::vector<int> labels;
    labels.reserve(task.idx.size());
    for (std::size_t i : task.idx) labels.push_back(data.y[i]);
    const bool pure =
        std::all_of(labels.begin(), labels.end(),
                    [&](int l) { return l == labels.front(); });
    if (pure || task.idx.size() == 1) {
      model.nodes[task.node].leaf_label = labels.front();
      continue;
    }

    // floor(sqrt(d)) features sampled without replacement; if every sampled
    // feature is constant on this node the scan widens through the rest of
    // the permutation so that purity stays reachable whenever any feature
    // can still split.
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    SplitChoice best;
    for (std::size_t j = 0; j < d; ++j) {
      if (j >= m && best.found) break;
      scan_feature(data, task.idx, perm[j], best);
    }

    if (!best.found) {
      model.nodes[task.node].leaf_label =
          plurality_label(labels, data.num_classes);
      model.interpolating = false;  // conflicting labels on identical points
      continue;
    }

    const int left_id = static_cast<int>(model.nodes.size());
    model.nodes.emplace_back();
    const int right_id = static_cast<int>(model.nodes.size());
    model.nodes.emplace_back();
    TreeNode& nd = model.nodes[task.node];
    nd.feature = best.feature;
    nd.threshold = best.threshold;
    nd.left = left_id;
    nd.right = right_id;
    stack.push_back({right_id, std::move(best.right)});
    stack.push_back({left_id, std::move(best.left)});
  }
}

void fit_kernel(TrainedClassifier& model, const LabeledDataset& data) {
  const std::size_t n = data.size();
  const std::size_t K = data.num_classes;
  const auto& spec = model.spec;
  model.sigma_tilde = spec.sigma * std::sqrt(static_cast<double>(data.dim));

  Eigen::MatrixXd G(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    G(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r2 = squared_dist(data.point(i), data.point(j), data.dim);
      if (spec.lambda == 0.0) {
        require(r2 > 0.0, ErrorKind::logic, "duplicate points under interpolation");
      }
      const double v = spec.kernel_kind == KernelKind::rbf
                           ? std::exp(-r2 / (2.0 * model.sigma_tilde * model.sigma_tilde))
                           : std::exp(-std::sqrt(r2) / model.sigma_tilde);
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  Eigen::MatrixXd A = G;
  for (std::size_t i = 0; i < n; ++i) A(i, i) += spec.lambda;

  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, K);
  for (std::size_t i = 0; i < n; ++i) Y(i, data.y[i]) = 1.0;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  Eigen::MatrixXd alpha = ldlt.solve(Y);
  const double residual = (A * alpha - Y).cwiseAbs().maxCoeff();
  model.solve_residual = residual;
  require(residual <= 1e-8 * static_cast<double>(n), ErrorKind::logic,
          "kernel system too ill-conditioned: solve residual " +
              std::to_string(residual) + ", rcond " + std::to_string(ldlt.rcond()));

  model.alpha.resize(n * K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < K; ++l) model.alpha[i * K + l] = alpha(i, l);
  }
}

}  // namespace

TrainedClassifier train(const ClassifierFamilySpec& spec,
                        const LabeledDataset& data, Rng& rng) {
  spec.validate();
  data.validate();
  TrainedClassifier model;
  model.spec = spec;
  model.dim = data.dim;
  model.num_classes = data.num_classes;
  switch (spec.kind) {
    case FamilyKind::one_nn:
    case FamilyKind::k_nn:
    case FamilyKind::randomized_k_nn:
      model.train_set = data;
      break;
    case FamilyKind::decision_tree:
      build_tree(model, data, rng);
      break;
    case FamilyKind::kernel:
      model.train_set = data;
      fit_kernel(model, data);
      break;
  }
  return model;
}

std::vector<double> TrainedClassifier::scores(const double* x) const {
  require(spec.kind == FamilyKind::kernel, ErrorKind::logic,
          "scores: only kernel models expose class scores");
  const std::size_t n = train_set.size();
  const std::size_t K = num_classes;
  std::vector<double> g(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double r2 = squared_dist(train_set.point(i), x, dim);
    const double kv = spec.kernel_kind == KernelKind::rbf
                          ? std::exp(-r2 / (2.0 * sigma_tilde * sigma_tilde))
                          : std::exp(-std::sqrt(r2) / sigma_tilde);
    for (std::size_t l = 0; l < K; ++l) g[l] += alpha[i * K + l] * kv;
  }
  return g;
}

int TrainedClassifier::predict(const double* x, Rng& rng) const {
  switch (spec.kind) {
    case FamilyKind::one_nn: {
      const auto nn = k_nearest(train_set, x, 1);
      return train_set.y[nn[0]];
    }
    case FamilyKind::k_nn: {
      const auto nn = k_nearest(train_set, x, spec.k);
      std::vector<int> labels;
      labels.reserve(nn.size());
      for (std::size_t i : nn) labels.push_back(train_set.y[i]);
      return plurality_label(labels, num_classes);
    }
    case FamilyKind::randomized_k_nn: {
      const auto nn = k_nearest(train_set, x, spec.k);
      return train_set.y[nn[rng.uniform_index(nn.size())]];
    }
    case FamilyKind::decision_tree: {
      int node = 0;
      while (nodes[node].feature >= 0) {
        const TreeNode& nd = nodes[node];
        node = (x[nd.feature] <= nd.threshold) ? nd.left : nd.right;
      }
      return nodes[node].leaf_label;
    }
    case FamilyKind::kernel: {
      const std::vector<double> g = scores(x);
      const double top = *std::max_element(g.begin(), g.end());
      for (std::size_t l = 0; l < g.size(); ++l) {
        if (g[l] >= top - 1e-12) return static_cast<int>(l);
      }
      return 0;
    }
  }
  throw DgError(ErrorKind::logic, "predict: unknown classifier kind");
}

int TrainedClassifier::predict(const std::vector<double>& x, Rng& rng) const {
  require(x.size() == dim, ErrorKind::logic, "predict: dimension mismatch");
  return predict(x.data(), rng);
}

std::vector<int> predict_all(const TrainedClassifier& model,
                             const LabeledDataset& data, Rng& rng) {
  require(data.dim == model.dim, ErrorKind::logic, "predict_all: dimension mismatch");
  std::vector<int> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = model.predict(data.point(i), rng);
  }
  return out;
}

double train_error(const TrainedClassifier& model, const LabeledDataset& data,
                   Rng& rng) {
  require(data.size() >= 1, ErrorKind::logic, "train_error: empty data");
  const std::vector<int> pred = predict_all(model, data, rng);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (pred[i] != data.y[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

std::vector<double> ensemble_predict_pmf(
    const std::vector<TrainedClassifier>& models, const double* x, Rng& rng) {
  require(!models.empty(), ErrorKind::logic, "ensemble_predict_pmf: empty ensemble");
  const std::size_t K = models.front().num_classes;
  const std::size_t d = models.front().dim;
  std::vector<double> pmf(K, 0.0);
  for (const auto& m : models) {
    require(m.num_classes == K && m.dim == d, ErrorKind::logic,
            "ensemble_predict_pmf: members disagree on (d, K)");
    pmf[m.predict(x, rng)] += 1.0;
  }
  for (double& v : pmf) v /= static_cast<double>(models.size());
  return pmf;
}

int plurality_ensemble(const std::vector<TrainedClassifier>& models,
                       const double* x, Rng& rng) {
  const std::vector<double> pmf = ensemble_predict_pmf(models, x, rng);
  return static_cast<int>(
      std::max_element(pmf.begin(), pmf.end()) - pmf.begin());
}

std::string TrainedClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = spec.name();
  j["dim"] = dim;
  j["num_classes"] = num_classes;
  j["interpolating"] = interpolating;
  switch (spec.kind) {
    case FamilyKind::one_nn:
    case FamilyKind::k_nn:
    case FamilyKind::randomized_k_nn: {
      std::string bytes(reinterpret_cast<const char*>(train_set.x.data()),
                        train_set.x.size() * sizeof(double));
      j["train_set"] = {{"n", train_set.size()},
                        {"feature_hash", fnv1a(bytes)}};
      break;
    }
    case FamilyKind::decision_tree: {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& nd : nodes) {
        if (nd.feature < 0) {
          arr.push_back({{"leaf", nd.leaf_label}});
        } else {
          arr.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right}});
        }
      }
      j["nodes"] = std::move(arr);
      break;
    }
    case FamilyKind::kernel: {
      j["sigma_tilde"] = sigma_tilde;
      j["solve_residual"] = solve_residual;
      nlohmann::ordered_json pts = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < train_set.size(); ++i) {
        pts.push_back(std::vector<double>(train_set.point(i),
                                          train_set.point(i) + dim));
      }
      j["support_points"] = std::move(pts);
      j["alpha"] = alpha;
      break;
    }
  }
  return j.dump(2);
}

}  // namespace dgbench

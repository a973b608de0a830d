#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dgbench/dataset.hpp"
#include "dgbench/rng.hpp"

namespace dgbench {

enum class FamilyKind { one_nn, k_nn, randomized_k_nn, decision_tree, kernel };
enum class KernelKind { rbf, laplace };

struct ClassifierFamilySpec {
  FamilyKind kind = FamilyKind::one_nn;
  int k = 1;  // k_nn / randomized_k_nn neighbor count
  KernelKind kernel_kind = KernelKind::rbf;
  double sigma = 1.0;   // per-dimension bandwidth; effective sigma is sigma*sqrt(d)
  double lambda = 0.0;  // ridge regularization

  void validate() const;
  std::string name() const;

  static ClassifierFamilySpec one_nn();
  static ClassifierFamilySpec k_nn(int k);
  static ClassifierFamilySpec randomized_k_nn(int k);
  static ClassifierFamilySpec decision_tree();
  static ClassifierFamilySpec kernel(KernelKind kind, double sigma, double lambda);
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_label = -1;
};

struct TrainedClassifier {
  ClassifierFamilySpec spec;
  std::size_t dim = 0;
  std::size_t num_classes = 0;

  LabeledDataset train_set;     // NN variants and kernel support points
  std::vector<TreeNode> nodes;  // decision_tree
  std::vector<double> alpha;    // kernel coefficients, n x K row-major
  double sigma_tilde = 0.0;     // kernel effective bandwidth sigma*sqrt(d)
  double solve_residual = 0.0;  // kernel solve check, max-norm
  bool interpolating = true;    // false if purity was unreachable (tree)

  // Per-class kernel scores g_l(x) = sum_i alpha[i][l] * k(x_i, x).
  std::vector<double> scores(const double* x) const;

  int predict(const double* x, Rng& rng) const;
  int predict(const std::vector<double>& x, Rng& rng) const;

  std::string to_json() const;
};

// Kernel value between two d-vectors: rbf exp(-r^2 / (2*st^2)), laplace
// exp(-r / st), with st = sigma * sqrt(d).
double kernel_eval(KernelKind kind, double sigma, std::size_t d,
                   const double* x1, const double* x2);

TrainedClassifier train(const ClassifierFamilySpec& spec,
                        const LabeledDataset& data, Rng& rng);

std::vector<int> predict_all(const TrainedClassifier& model,
                             const LabeledDataset& data, Rng& rng);

double train_error(const TrainedClassifier& model, const LabeledDataset& data,
                   Rng& rng);

std::vector<double> ensemble_predict_pmf(
    const std::vector<TrainedClassifier>& models, const double* x, Rng& rng);

int plurality_ensemble(const std::vector<TrainedClassifier>& models,
                       const double* x, Rng& rng);

}  // namespace dgbench

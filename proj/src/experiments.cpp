#include "dgbench/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "dgbench/classifiers.hpp"
#include "dgbench/dataset.hpp"
#include "dgbench/distributions.hpp"
#include "dgbench/joint.hpp"
#include "dgbench/metrics.hpp"
#include "dgbench/nn_oracle.hpp"
#include "dgbench/noise.hpp"
#include "dgbench/parallel.hpp"
#include "dgbench/partition.hpp"
#include "dgbench/svg.hpp"

namespace dgbench {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- config

// Strict accessor over one JSON object: every read marks its key, finish()
// rejects whatever was never read, and all errors carry the field path.
class ConfigView {
 public:
  ConfigView(const json& j, std::string path)
      : j_(&j), path_(std::move(path)) {
    require(j.is_object(), ErrorKind::config,
            "config error at " + path_ + ": expected an object");
  }

  const json* maybe(const std::string& key) {
    used_.insert(key);
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  const json& get(const std::string& key) {
    const json* p = maybe(key);
    require(p != nullptr, ErrorKind::config,
            "config error at " + at(key) + ": required field missing");
    return *p;
  }

  bool has(const std::string& key) const { return j_->contains(key); }

  double number(const std::string& key) {
    const json& v = get(key);
    require(v.is_number(), ErrorKind::config,
            "config error at " + at(key) + ": expected a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double def) {
    return maybe(key) ? number(key) : def;
  }

  std::int64_t integer(const std::string& key) {
    const json& v = get(key);
    require(v.is_number_integer(), ErrorKind::config,
            "config error at " + at(key) + ": expected an integer");
    return v.get<std::int64_t>();
  }

  std::int64_t integer_or(const std::string& key, std::int64_t def) {
    return maybe(key) ? integer(key) : def;
  }

  std::size_t count(const std::string& key) {
    const std::int64_t v = integer(key);
    require(v >= 1, ErrorKind::config,
            "config error at " + at(key) + ": expected a positive count");
    return static_cast<std::size_t>(v);
  }

  std::size_t count_or(const std::string& key, std::size_t def) {
    return maybe(key) ? count(key) : def;
  }

  std::string str(const std::string& key) {
    const json& v = get(key);
    require(v.is_string(), ErrorKind::config,
            "config error at " + at(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string str_or(const std::string& key, const std::string& def) {
    return maybe(key) ? str(key) : def;
  }

  bool flag_or(const std::string& key, bool def) {
    const json* p = maybe(key);
    if (!p) return def;
    require(p->is_boolean(), ErrorKind::config,
            "config error at " + at(key) + ": expected a boolean");
    return p->get<bool>();
  }

  std::vector<double> number_list(const std::string& key) {
    const json& v = get(key);
    require(v.is_array() && !v.empty(), ErrorKind::config,
            "config error at " + at(key) + ": expected a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
      require(e.is_number(), ErrorKind::config,
              "config error at " + at(key) + ": expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<double> number_list_or(const std::string& key,
                                     std::vector<double> def) {
    return maybe(key) ? number_list(key) : std::move(def);
  }

  std::vector<int> int_list(const std::string& key) {
    const json& v = get(key);
    require(v.is_array() && !v.empty(), ErrorKind::config,
            "config error at " + at(key) + ": expected a non-empty array");
    std::vector<int> out;
    for (const auto& e : v) {
      require(e.is_number_integer(), ErrorKind::config,
              "config error at " + at(key) + ": expected integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::vector<std::size_t> count_list_or(const std::string& key,
                                         std::vector<std::size_t> def) {
    if (!maybe(key)) return def;
    std::vector<std::size_t> out;
    for (int v : int_list(key)) {
      require(v >= 1, ErrorKind::config,
              "config error at " + at(key) + ": expected positive counts");
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }

  ConfigView object(const std::string& key) {
    return ConfigView(get(key), at(key));
  }

  const json& array(const std::string& key) {
    const json& v = get(key);
    require(v.is_array() && !v.empty(), ErrorKind::config,
            "config error at " + at(key) + ": expected a non-empty array");
    return v;
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }
  const std::string& path() const { return path_; }

  void finish() {
    for (const auto& [key, value] : j_->items()) {
      require(used_.contains(key), ErrorKind::config,
              "config error at " + at(key) + ": unknown field");
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------- helpers

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general);
  return std::string(buf, ptr);
}

std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

struct Table {
  std::string name;
  std::vector<std::string> rows;  // first row is the header
};

struct Figure {
  std::string name;  // file name without extension
  std::string svg;
};

struct RunnerOutput {
  ojson results = ojson::object();
  ojson trials = ojson::array();
  std::vector<Table> tables;
  std::vector<Figure> figures;
};

ojson joint_to_json(const DiscreteJoint& j) {
  ojson rows = ojson::array();
  for (std::size_t c = 0; c < j.M; ++c) {
    ojson row = ojson::array();
    for (std::size_t l = 0; l < j.K; ++l) row.push_back(j.at(c, l));
    rows.push_back(std::move(row));
  }
  return ojson{{"M", j.M}, {"K", j.K}, {"mass", std::move(rows)}};
}

ojson ci_to_json(const BinomialCI& ci) {
  return ojson{{"point", ci.point},
               {"lower", ci.lower},
               {"upper", ci.upper},
               {"confidence", ci.confidence}};
}

std::vector<std::string> index_names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values,
                                            std::uint64_t seed) {
  const std::size_t B = 200;
  std::vector<double> boots(B);
  for (std::size_t b = 0; b < B; ++b) {
    Rng rs = make_stream(seed, "bootstrap_mean", b);
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      s += values[rs.uniform_index(values.size())];
    }
    boots[b] = s / static_cast<double>(values.size());
  }
  std::sort(boots.begin(), boots.end());
  return {boots[static_cast<std::size_t>(0.025 * B)],
          boots[static_cast<std::size_t>(0.975 * B) - 1]};
}

std::vector<double> label_marginal(const std::vector<int>& labels,
                                   std::size_t K) {
  std::vector<double> m(K, 0.0);
  for (int l : labels) m[l] += 1.0;
  for (double& v : m) v /= static_cast<double>(labels.size());
  return m;
}

// ---------------------------------------------------------------- parsing

struct OwnedSource {
  std::optional<ClusterMixture> mix;
  std::optional<FiniteDomainDistribution> fin;
  std::vector<std::string> cell_names;   // per cluster / atom
  std::vector<std::string> class_names;  // per label

  SourceRef ref() const {
    if (mix) return SourceRef(*mix);
    return SourceRef(*fin);
  }
  std::size_t num_classes() const {
    return mix ? mix->num_classes : fin->num_classes;
  }
  std::size_t num_cells() const {
    return mix ? mix->num_clusters() : fin->num_atoms;
  }
  // Conditional label pmf of the cluster/atom a point was drawn from.
  const std::vector<double>& pmf_of_cell(int cell) const {
    return mix ? mix->clusters[cell].label_pmf : fin->label_pmf[cell];
  }
};

OwnedSource parse_source(ConfigView v) {
  OwnedSource src;
  const std::string type = v.str("type");
  if (type == "toy_four_cluster") {
    const double sep = v.number_or("separation", 10.0);
    const double noise_p = v.number_or("noise_p", 0.0);
    v.finish();
    src.mix = toy_four_cluster(sep, noise_p);
    src.cell_names = {"Truck", "Ship", "Cat", "Dog"};
    src.class_names = {"Object", "Animal"};
    return src;
  }
  if (type == "cluster_grid") {
    const auto K = static_cast<std::size_t>(v.integer("num_classes"));
    require(K >= 1, ErrorKind::config,
            "config error at " + v.at("num_classes") + ": must be >= 1");
    const auto d = v.count_or("dim", K);
    require(d >= K, ErrorKind::config,
            "config error at " + v.at("dim") + ": need dim >= num_classes");
    const double scale = v.number_or("scale", 3.0);
    const double spread = v.number_or("spread", 1.0);
    std::vector<double> weights =
        v.number_list_or("weights", std::vector<double>(K, 1.0 / K));
    require(weights.size() == K, ErrorKind::config,
            "config error at " + v.at("weights") + ": need one weight per class");
    v.finish();
    ClusterMixture m;
    m.dim = d;
    m.num_classes = K;
    for (std::size_t l = 0; l < K; ++l) {
      Cluster c;
      c.weight = weights[l];
      c.center.assign(d, 0.0);
      c.center[l] = scale;
      c.spread = spread;
      c.label_pmf.assign(K, 0.0);
      c.label_pmf[l] = 1.0;
      c.cluster_id = static_cast<int>(l);
      m.clusters.push_back(std::move(c));
    }
    m.validate();
    src.mix = std::move(m);
    src.cell_names = index_names("c", K);
    src.class_names = index_names("y", K);
    return src;
  }
  if (type == "clusters") {
    const auto d = v.count("dim");
    const auto K = v.count("num_classes");
    const json& arr = v.array("clusters");
    v.finish();
    ClusterMixture m;
    m.dim = d;
    m.num_classes = K;
    std::size_t i = 0;
    for (const auto& e : arr) {
      ConfigView cv(e, v.at("clusters") + "[" + std::to_string(i) + "]");
      Cluster c;
      c.weight = cv.number("weight");
      c.center = cv.number_list("center");
      c.spread = cv.number_or("spread", 1.0);
      c.label_pmf = cv.number_list("label_pmf");
      c.cluster_id = static_cast<int>(cv.integer_or("cluster_id",
                                                    static_cast<std::int64_t>(i)));
      // Runners index joints and label pmfs by the sampled cell id, so
      // explicit ids must coincide with cluster positions.
      require(c.cluster_id == static_cast<int>(i), ErrorKind::config,
              "config error at " + cv.path() +
                  ".cluster_id: must equal the cluster's index");
      cv.finish();
      m.clusters.push_back(std::move(c));
      ++i;
    }
    m.validate();
    src.mix = std::move(m);
    src.cell_names = index_names("cell", m.clusters.size());
    src.class_names = index_names("y", K);
    return src;
  }
  if (type == "finite") {
    const json& pts = v.array("points");
    const std::vector<double> prob = v.number_list("prob");
    const json& pmfs = v.array("label_pmf");
    v.finish();
    std::vector<std::vector<double>> points, label_pmf;
    for (const auto& p : pts) points.push_back(p.get<std::vector<double>>());
    for (const auto& p : pmfs) label_pmf.push_back(p.get<std::vector<double>>());
    src.fin = finite_from_points(points, prob, label_pmf);
    src.cell_names = index_names("atom", points.size());
    src.class_names = index_names("y", src.fin->num_classes);
    return src;
  }
  throw DgError(ErrorKind::config, "config error at " + v.at("type") +
                                       ": unknown source type '" + type + "'");
}

ClassifierFamilySpec parse_family(const json& j, const std::string& path) {
  ConfigView v(j, path);
  const std::string kind = v.str("kind");
  ClassifierFamilySpec spec;
  if (kind == "one_nn") {
    spec = ClassifierFamilySpec::one_nn();
  } else if (kind == "k_nn") {
    spec = ClassifierFamilySpec::k_nn(static_cast<int>(v.integer("k")));
  } else if (kind == "randomized_k_nn") {
    spec = ClassifierFamilySpec::randomized_k_nn(static_cast<int>(v.integer("k")));
  } else if (kind == "decision_tree") {
    spec = ClassifierFamilySpec::decision_tree();
  } else if (kind == "kernel") {
    const std::string kk = v.str_or("kernel", "rbf");
    require(kk == "rbf" || kk == "laplace", ErrorKind::config,
            "config error at " + v.at("kernel") + ": expected rbf or laplace");
    spec = ClassifierFamilySpec::kernel(
        kk == "rbf" ? KernelKind::rbf : KernelKind::laplace, v.number("sigma"),
        v.number_or("lambda", 0.0));
  } else {
    throw DgError(ErrorKind::config, "config error at " + v.at("kind") +
                                         ": unknown family kind '" + kind + "'");
  }
  v.finish();
  return spec;
}

Partition parse_partition(const json& j, const std::string& path,
                          const OwnedSource& src) {
  ConfigView v(j, path);
  const std::string kind = v.str("kind");
  Partition p;
  if (kind == "by_cluster_id") {
    p = Partition::by_cluster_id(src.num_cells());
  } else if (kind == "by_clean_label") {
    p = Partition::by_clean_label(src.num_classes());
  } else if (kind == "by_label_coarsening") {
    p = Partition::by_label_coarsening(v.int_list("map"));
    require(p.map.size() == src.num_classes(), ErrorKind::config,
            "config error at " + v.at("map") + ": need one cell per class");
  } else if (kind == "constant") {
    p = Partition::constant_cell();
  } else if (kind == "by_atom_map") {
    p = Partition::by_atom_map(v.int_list("map"));
    require(p.map.size() == src.num_cells(), ErrorKind::config,
            "config error at " + v.at("map") + ": need one cell per atom");
  } else {
    throw DgError(ErrorKind::config, "config error at " + v.at("kind") +
                                         ": unknown partition kind '" + kind +
                                         "'");
  }
  v.finish();
  return p;
}

ConfusionChannel parse_channel(const json& j, const std::string& path,
                               std::size_t K, std::uint64_t seed) {
  ConfigView v(j, path);
  const std::string type = v.str("type");
  ConfusionChannel ch;
  if (type == "identity") {
    ch = identity_channel(K);
  } else if (type == "targeted_flip") {
    ch = targeted_flip(K, static_cast<int>(v.integer("from")),
                       static_cast<int>(v.integer("to")), v.number("p"));
  } else if (type == "random_sparse") {
    Rng rs = make_stream(seed, "channel", 0);
    ch = random_sparse_channel(K, rs);
  } else {
    throw DgError(ErrorKind::config, "config error at " + v.at("type") +
                                         ": unknown channel type '" + type +
                                         "'");
  }
  v.finish();
  return ch;
}

// ---------------------------------------------------------------- runners

RunnerOutput run_calibrate(const ExperimentConfig& cfg, ConfigView& v) {
  OwnedSource base = parse_source(v.object("source"));
  require(base.mix.has_value(), ErrorKind::config,
          "config error at " + v.at("source") +
              ": calibrate needs a cluster-mixture source");
  const json& fam_arr = v.array("families");
  std::vector<ClassifierFamilySpec> families;
  for (std::size_t i = 0; i < fam_arr.size(); ++i) {
    families.push_back(parse_family(
        fam_arr[i], v.at("families") + "[" + std::to_string(i) + "]"));
  }
  std::string mode = v.str_or("noise_mode", "");
  if (mode.empty()) {
    mode = base.cell_names.size() == 4 && base.cell_names[2] == "Cat"
               ? "toy"
               : "targeted";
  }
  require(mode == "toy" || mode == "targeted" || mode == "random_sparse",
          ErrorKind::config,
          "config error at " + v.at("noise_mode") +
              ": expected toy, targeted or random_sparse");
  const std::size_t n = v.count_or("n", 1000);
  const std::size_t trials = v.count_or("trials", 50);
  const std::size_t tppt = v.count_or("test_points_per_trial", 400);
  const std::size_t K = base.num_classes();
  const std::size_t M = base.num_cells();

  RunnerOutput out;

  if (mode == "random_sparse") {
    v.finish();
    require(K >= 3, ErrorKind::config,
            "config error at " + v.at("source") +
                ": random_sparse needs at least 3 classes");
    const ConfusionChannel ch =
        parse_channel(json{{"type", "random_sparse"}}, "$", K, cfg.seed);
    out.results["channel"] = json::parse(ch.to_json());
    Table table{"trials", {"family,trial,train_error,tv_train_test"}};
    ojson fam_results = ojson::array();
    for (std::size_t f = 0; f < families.size(); ++f) {
      struct TrialOut {
        std::vector<double> ctr, cte;
        double train_err = 0.0;
      };
      std::vector<TrialOut> res(trials);
      parallel_trials(trials, cfg.workers, [&](std::size_t t) {
        Rng rs = make_stream(cfg.seed, "calibrate/" + std::to_string(f), t);
        LabeledDataset train_set = base.ref().sample(n, rs);
        train_set = apply_channel(train_set, ch, rs);
        TrainedClassifier model = train(families[f], train_set, rs);
        LabeledDataset test_set = base.ref().sample(tppt, rs);
        test_set = apply_channel(test_set, ch, rs);
        TrialOut to;
        to.ctr.assign(K * K, 0.0);
        to.cte.assign(K * K, 0.0);
        for (std::size_t i = 0; i < train_set.size(); ++i) {
          const int pred = model.predict(train_set.point(i), rs);
          to.ctr[train_set.clean_labels[i] * K + pred] += 1.0;
          if (pred != train_set.y[i]) to.train_err += 1.0;
        }
        to.train_err /= static_cast<double>(train_set.size());
        for (std::size_t i = 0; i < test_set.size(); ++i) {
          const int pred = model.predict(test_set.point(i), rs);
          to.cte[test_set.clean_labels[i] * K + pred] += 1.0;
        }
        res[t] = std::move(to);
      });
      DiscreteJoint jtr(K, K), jte(K, K);
      for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < K * K; ++i) {
          jtr.mass[i] += res[t].ctr[i];
          jte.mass[i] += res[t].cte[i];
        }
      }
      jtr.normalize();
      jte.normalize();
      const double tv = tv_distance(jtr, jte);
      for (std::size_t t = 0; t < trials; ++t) {
        DiscreteJoint a(K, K), b(K, K);
        a.mass = res[t].ctr;
        b.mass = res[t].cte;
        a.normalize();
        b.normalize();
        const double tvt = tv_distance(a, b);
        table.rows.push_back(families[f].name() + "," + fmt(t) + "," +
                             fmt(res[t].train_err) + "," + fmt(tvt));
        out.trials.push_back(ojson{{"family", families[f].name()},
                                   {"trial", t},
                                   {"train_error", res[t].train_err},
                                   {"tv_train_test", tvt}});
      }
      fam_results.push_back(ojson{{"family", families[f].name()},
                                  {"tv_train_test", tv},
                                  {"train_joint", joint_to_json(jtr)},
                                  {"test_joint", joint_to_json(jte)}});
      out.figures.push_back(
          {"train_joint_f" + std::to_string(f),
           render_heatmap_svg(jtr, base.class_names, base.class_names,
                              families[f].name() + " train joint")});
      out.figures.push_back(
          {"test_joint_f" + std::to_string(f),
           render_heatmap_svg(jte, base.class_names, base.class_names,
                              families[f].name() + " test joint")});
    }
    out.results["families"] = std::move(fam_results);
    out.tables.push_back(std::move(table));
    return out;
  }

  // toy / targeted modes share the p-grid mechanics; they differ in how the
  // noise enters (rebuilt source versus explicit channel) and in which
  // (cell, label) pair counts as a flip.
  const std::vector<double> p_grid =
      v.number_list_or("p_grid", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
  double separation = 10.0;
  int flip_from = 0, flip_to = 1;
  std::size_t flip_cell = 0;
  int flip_label = 0;
  if (mode == "toy") {
    ConfigView sv(v.get("source"), v.at("source"));
    separation = sv.number_or("separation", 10.0);
    sv.maybe("type");
    sv.maybe("noise_p");
    flip_cell = 2;   // Cat cluster
    flip_label = 0;  // predicted Object
  } else {
    flip_from = static_cast<int>(v.integer_or("flip_from", 0));
    flip_to = static_cast<int>(v.integer_or("flip_to", 1));
    require(flip_from != flip_to && flip_from >= 0 && flip_to >= 0 &&
                static_cast<std::size_t>(flip_from) < K &&
                static_cast<std::size_t>(flip_to) < K,
            ErrorKind::config,
            "config error at " + v.at("flip_from") + ": bad flip pair");
  }
  v.finish();

  struct TrialOut {
    std::size_t flip_tested = 0, flips = 0;
    double train_err = 0.0;
    std::vector<double> ctr, cte;  // (cell, prediction) counts
  };
  const std::size_t P = p_grid.size();
  std::vector<TrialOut> res(families.size() * P * trials);

  parallel_trials(res.size(), cfg.workers, [&](std::size_t task) {
    const std::size_t f = task / (P * trials);
    const std::size_t pi = (task / trials) % P;
    const double p = p_grid[pi];
    Rng rs = make_stream(cfg.seed, "calibrate", task);
    ClusterMixture local;
    const ClusterMixture* srcp = &*base.mix;
    if (mode == "toy") {
      local = toy_four_cluster(separation, p);
      srcp = &local;
    }
    LabeledDataset train_set = sample_dataset(*srcp, n, rs);
    if (mode == "targeted") {
      train_set = apply_channel(
          train_set, targeted_flip(K, flip_from, flip_to, p), rs);
    }
    TrainedClassifier model = train(families[f], train_set, rs);
    LabeledDataset test_set = sample_dataset(*srcp, tppt, rs);

    TrialOut to;
    to.ctr.assign(M * K, 0.0);
    to.cte.assign(M * K, 0.0);
    for (std::size_t i = 0; i < train_set.size(); ++i) {
      const int pred = model.predict(train_set.point(i), rs);
      to.ctr[train_set.partition_cells[i] * K + pred] += 1.0;
      if (pred != train_set.y[i]) to.train_err += 1.0;
    }
    to.train_err /= static_cast<double>(train_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const int pred = model.predict(test_set.point(i), rs);
      to.cte[test_set.partition_cells[i] * K + pred] += 1.0;
      const bool in_flip_population =
          mode == "toy"
              ? test_set.partition_cells[i] == static_cast<int>(flip_cell)
              : test_set.y[i] == flip_from;
      if (in_flip_population) {
        ++to.flip_tested;
        const int target = mode == "toy" ? flip_label : flip_to;
        if (pred == target) ++to.flips;
      }
    }
    res[task] = std::move(to);
  });

  Table table{"trials",
              {"family,p,trial,flip_tested,flips,flip_rate,train_error"}};
  Table agg{"aggregate",
            {"family,p,flip_rate,ci_lower,ci_upper,diagonal,bayes_step"}};
  ojson fam_results = ojson::array();
  for (std::size_t f = 0; f < families.size(); ++f) {
    ojson points = ojson::array();
    std::vector<double> observed;
    for (std::size_t pi = 0; pi < P; ++pi) {
      std::size_t flips = 0, tested = 0;
      DiscreteJoint jtr(M, K), jte(M, K);
      for (std::size_t t = 0; t < trials; ++t) {
        const TrialOut& to = res[(f * P + pi) * trials + t];
        flips += to.flips;
        tested += to.flip_tested;
        for (std::size_t i = 0; i < M * K; ++i) {
          jtr.mass[i] += to.ctr[i];
          jte.mass[i] += to.cte[i];
        }
        const double rate =
            to.flip_tested == 0
                ? 0.0
                : static_cast<double>(to.flips) /
                      static_cast<double>(to.flip_tested);
        table.rows.push_back(families[f].name() + "," + fmt(p_grid[pi]) + "," +
                             fmt(t) + "," + fmt(to.flip_tested) + "," +
                             fmt(to.flips) + "," + fmt(rate) + "," +
                             fmt(to.train_err));
        out.trials.push_back(ojson{{"family", families[f].name()},
                                   {"p", p_grid[pi]},
                                   {"trial", t},
                                   {"flip_tested", to.flip_tested},
                                   {"flips", to.flips},
                                   {"flip_rate", rate},
                                   {"train_error", to.train_err}});
      }
      jtr.normalize();
      jte.normalize();
      const BinomialCI ci = clopper_pearson(flips, std::max<std::size_t>(tested, 1), 0.05);
      const double p = p_grid[pi];
      const double bayes = p < 0.5 ? 0.0 : (p > 0.5 ? 1.0 : 0.5);
      observed.push_back(ci.point);
      agg.rows.push_back(families[f].name() + "," + fmt(p) + "," +
                         fmt(ci.point) + "," + fmt(ci.lower) + "," +
                         fmt(ci.upper) + "," + fmt(p) + "," + fmt(bayes));
      points.push_back(ojson{{"p", p},
                             {"flip_rate", ci_to_json(ci)},
                             {"diagonal", p},
                             {"bayes_step", bayes},
                             {"train_joint", joint_to_json(jtr)},
                             {"test_joint", joint_to_json(jte)}});
      out.figures.push_back(
          {"test_joint_f" + std::to_string(f) + "_p" + std::to_string(pi),
           render_heatmap_svg(jte, base.cell_names, base.class_names,
                              families[f].name() + " test joint, p=" + fmt(p))});
      out.figures.push_back(
          {"train_joint_f" + std::to_string(f) + "_p" + std::to_string(pi),
           render_heatmap_svg(jtr, base.cell_names, base.class_names,
                              families[f].name() + " train joint, p=" + fmt(p))});
    }
    std::vector<double> bayes_series, diag_series;
    for (double p : p_grid) {
      diag_series.push_back(p);
      bayes_series.push_back(p < 0.5 ? 0.0 : (p > 0.5 ? 1.0 : 0.5));
    }
    out.figures.push_back(
        {"flip_rate_f" + std::to_string(f),
         render_curves_svg(p_grid,
                           {{"observed", observed, "#1f4e8c"},
                            {"diagonal", diag_series, "#888888"},
                            {"bayes", bayes_series, "#c03030"}},
                           "noise p", "test flip rate",
                           families[f].name() + " flip rate")});
    fam_results.push_back(
        ojson{{"family", families[f].name()}, {"points", std::move(points)}});
  }
  out.results["mode"] = mode;
  out.results["families"] = std::move(fam_results);
  out.tables.push_back(std::move(table));
  out.tables.push_back(std::move(agg));
  return out;
}

RunnerOutput run_constant_partition(const ExperimentConfig& cfg,
                                    ConfigView& v) {
  OwnedSource src = [&] {
    if (v.has("source")) return parse_source(v.object("source"));
    const json def{{"type", "cluster_grid"}, {"num_classes", 5},
                   {"dim", 5}, {"scale", 3.0}};
    return parse_source(ConfigView(def, "$.source(default)"));
  }();
  const std::size_t K = src.num_classes();
  std::vector<double> target(K);
  if (const json* tj = v.maybe("target"); tj && tj->is_array()) {
    target = v.number_list("target");
    require(target.size() == K, ErrorKind::config,
            "config error at " + v.at("target") + ": need one mass per class");
  } else {
    require(!v.has("target") || v.get("target").is_string(), ErrorKind::config,
            "config error at " + v.at("target") +
                ": expected an array or \"proportional\"");
    double s = 0.0;
    for (std::size_t l = 0; l < K; ++l) s += static_cast<double>(l + 1);
    for (std::size_t l = 0; l < K; ++l) {
      target[l] = static_cast<double>(l + 1) / s;
    }
  }
  const json& fam_arr = v.array("families");
  std::vector<ClassifierFamilySpec> families;
  for (std::size_t i = 0; i < fam_arr.size(); ++i) {
    families.push_back(parse_family(
        fam_arr[i], v.at("families") + "[" + std::to_string(i) + "]"));
  }
  const std::size_t n_pool = v.count_or("n_pool", 4500);
  const std::size_t test_pool = v.count_or("test_pool", n_pool);
  const std::size_t trials = v.count_or("trials", 20);
  v.finish();

  struct TrialOut {
    double tv = 0.0;
    std::size_t n_train = 0, n_test = 0;
    std::vector<double> out_marginal, train_marginal;
  };
  std::vector<TrialOut> res(families.size() * trials);
  parallel_trials(res.size(), cfg.workers, [&](std::size_t task) {
    const std::size_t f = task / trials;
    Rng rs = make_stream(cfg.seed, "constant_partition", task);
    LabeledDataset pool_tr = src.ref().sample(n_pool, rs);
    LabeledDataset pool_te = src.ref().sample(test_pool, rs);
    LabeledDataset tr = rebalance(pool_tr, target, rs);
    LabeledDataset te = rebalance(pool_te, target, rs);
    TrainedClassifier model = train(families[f], tr, rs);
    const std::vector<int> preds = predict_all(model, te, rs);
    TrialOut to;
    to.n_train = tr.size();
    to.n_test = te.size();
    to.out_marginal = label_marginal(preds, K);
    to.train_marginal = label_marginal(tr.y, K);
    to.tv = tv_pmf(to.out_marginal, to.train_marginal);
    res[task] = std::move(to);
  });

  RunnerOutput out;
  Table table{"trials", {"family,trial,n_train,n_test,marginal_tv"}};
  Table agg{"aggregate", {"family,mean_marginal_tv,ci_lower,ci_upper"}};
  ojson fam_results = ojson::array();
  ojson target_json = ojson::array();
  for (double q : target) target_json.push_back(q);
  for (std::size_t f = 0; f < families.size(); ++f) {
    std::vector<double> tvs(trials);
    DiscreteJoint out_m(1, K), train_m(1, K);
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialOut& to = res[f * trials + t];
      tvs[t] = to.tv;
      for (std::size_t l = 0; l < K; ++l) {
        out_m.mass[l] += to.out_marginal[l] / static_cast<double>(trials);
        train_m.mass[l] += to.train_marginal[l] / static_cast<double>(trials);
      }
      table.rows.push_back(families[f].name() + "," + fmt(t) + "," +
                           fmt(to.n_train) + "," + fmt(to.n_test) + "," +
                           fmt(to.tv));
      out.trials.push_back(ojson{{"family", families[f].name()},
                                 {"trial", t},
                                 {"n_train", to.n_train},
                                 {"n_test", to.n_test},
                                 {"marginal_tv", to.tv}});
    }
    double mean = 0.0;
    for (double tv : tvs) mean += tv;
    mean /= static_cast<double>(trials);
    const auto [lo, hi] = bootstrap_mean_ci(tvs, cfg.seed + f);
    agg.rows.push_back(families[f].name() + "," + fmt(mean) + "," + fmt(lo) +
                       "," + fmt(hi));
    fam_results.push_back(ojson{{"family", families[f].name()},
                                {"mean_marginal_tv", mean},
                                {"ci_lower", lo},
                                {"ci_upper", hi},
                                {"mean_output_marginal", joint_to_json(out_m)},
                                {"mean_train_marginal", joint_to_json(train_m)}});
    out.figures.push_back(
        {"marginals_f" + std::to_string(f),
         render_heatmap_svg(out_m, {"output"}, src.class_names,
                            families[f].name() + " mean output marginal")});
  }
  out.results["target_marginal"] = std::move(target_json);
  out.results["families"] = std::move(fam_results);
  out.tables.push_back(std::move(table));
  out.tables.push_back(std::move(agg));
  return out;
}

RunnerOutput run_coarse_multi(const ExperimentConfig& cfg, ConfigView& v) {
  RunnerOutput out;

  // Fixture replay: per-coarse-cell predicted-subclass fractions versus
  // true fractions from a predictions CSV (columns coarse_cell, true_sub,
  // pred_sub).
  if (const json* pc = v.maybe("predictions_csv")) {
    require(pc->is_string(), ErrorKind::config,
            "config error at " + v.at("predictions_csv") + ": expected a path");
    std::ifstream in(pc->get<std::string>());
    require(in.good(), ErrorKind::io,
            "cannot open predictions file '" + pc->get<std::string>() + "'");
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::io,
            "predictions file is empty");
    auto split = [](const std::string& s) {
      std::vector<std::string> f;
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) f.push_back(tok);
      return f;
    };
    const auto header = split(line);
    require(header.size() == 3 && header[0] == "coarse_cell" &&
                header[1] == "true_sub" && header[2] == "pred_sub",
            ErrorKind::io,
            "predictions file needs header coarse_cell,true_sub,pred_sub");
    std::map<std::string, std::map<std::string, std::pair<std::size_t, std::size_t>>>
        counts;  // cell -> sub -> (true count, pred count)
    std::map<std::string, std::size_t> totals;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line);
      require(f.size() == 3, ErrorKind::io, "predictions file: ragged row");
      ++totals[f[0]];
      ++counts[f[0]][f[1]].first;
      ++counts[f[0]][f[2]].second;
    }
    Table table{"subclass_fractions",
                {"coarse_cell,subclass,true_fraction,predicted_fraction"}};
    ojson cells = ojson::array();
    for (const auto& [cell, subs] : counts) {
      const auto total = static_cast<double>(totals[cell]);
      ojson rows = ojson::array();
      for (const auto& [sub, cnt] : subs) {
        const double tf = static_cast<double>(cnt.first) / total;
        const double pf = static_cast<double>(cnt.second) / total;
        table.rows.push_back(cell + "," + sub + "," + fmt(tf) + "," + fmt(pf));
        rows.push_back(ojson{{"subclass", sub},
                             {"true_fraction", tf},
                             {"predicted_fraction", pf}});
      }
      cells.push_back(ojson{{"coarse_cell", cell},
                            {"count", totals[cell]},
                            {"subclasses", std::move(rows)}});
    }
    out.results["subclass_report"] = std::move(cells);
    out.tables.push_back(std::move(table));
    v.finish();
    return out;
  }

  OwnedSource src = parse_source(v.object("source"));
  const ClassifierFamilySpec family =
      parse_family(v.get("family"), v.at("family"));
  const std::size_t K = src.num_classes();
  std::optional<ConfusionChannel> channel;
  if (v.has("channel")) {
    channel = parse_channel(v.get("channel"), v.at("channel"), K, cfg.seed);
  } else {
    v.maybe("channel");
  }
  const json& part_arr = v.array("partitions");
  std::vector<Partition> partitions;
  for (std::size_t i = 0; i < part_arr.size(); ++i) {
    partitions.push_back(
        parse_partition(part_arr[i],
                        v.at("partitions") + "[" + std::to_string(i) + "]",
                        src));
  }
  const std::size_t n = v.count_or("n", 500);
  const std::size_t trials = v.count_or("trials", 200);
  const std::size_t tppt = v.count_or("test_points_per_trial", 200);
  v.finish();

  const std::size_t NP = partitions.size();
  struct TrialOut {
    std::vector<std::vector<double>> ct, cm;  // per partition
  };
  std::vector<TrialOut> res(trials);
  parallel_trials(trials, cfg.workers, [&](std::size_t t) {
    Rng rs = make_stream(cfg.seed, "coarse_multi", t);
    LabeledDataset train_set = src.ref().sample(n, rs);
    if (channel) train_set = apply_channel(train_set, *channel, rs);
    TrainedClassifier model = train(family, train_set, rs);
    LabeledDataset test_set = src.ref().sample(tppt, rs);
    if (channel) test_set = apply_channel(test_set, *channel, rs);
    TrialOut to;
    to.ct.resize(NP);
    to.cm.resize(NP);
    for (std::size_t pi = 0; pi < NP; ++pi) {
      to.ct[pi].assign(partitions[pi].M * K, 0.0);
      to.cm[pi].assign(partitions[pi].M * K, 0.0);
    }
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const int pred = model.predict(test_set.point(i), rs);
      for (std::size_t pi = 0; pi < NP; ++pi) {
        const auto cell = static_cast<std::size_t>(
            partitions[pi].cell_of(test_set, i));
        to.ct[pi][cell * K + test_set.y[i]] += 1.0;
        to.cm[pi][cell * K + pred] += 1.0;
      }
    }
    res[t] = std::move(to);
  });

  Table table{"trials", {"partition,trial,tv"}};
  Table agg{"aggregate", {"partition,tv,ci_lower,ci_upper"}};
  ojson part_results = ojson::array();
  for (std::size_t pi = 0; pi < NP; ++pi) {
    const std::size_t M = partitions[pi].M;
    DiscreteJoint jt(M, K), jm(M, K);
    std::vector<std::vector<double>> all_ct(trials), all_cm(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      all_ct[t] = res[t].ct[pi];
      all_cm[t] = res[t].cm[pi];
      DiscreteJoint a(M, K), b(M, K);
      a.mass = res[t].ct[pi];
      b.mass = res[t].cm[pi];
      a.normalize();
      b.normalize();
      const double tvt = tv_distance(a, b);
      table.rows.push_back(partitions[pi].name() + "," + fmt(t) + "," + fmt(tvt));
      out.trials.push_back(ojson{{"partition", partitions[pi].name()},
                                 {"trial", t},
                                 {"tv", tvt}});
      for (std::size_t i = 0; i < M * K; ++i) {
        jt.mass[i] += res[t].ct[pi][i];
        jm.mass[i] += res[t].cm[pi][i];
      }
    }
    jt.normalize();
    jm.normalize();
    const double tv = tv_distance(jt, jm);
    // Bootstrap over trials, pooled-TV percentile interval.
    const std::size_t B = 200;
    std::vector<double> boots(B);
    for (std::size_t b = 0; b < B; ++b) {
      Rng rs = make_stream(cfg.seed, "coarse_multi/boot" + std::to_string(pi), b);
      DiscreteJoint bt(M, K), bm(M, K);
      for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t pick = rs.uniform_index(trials);
        for (std::size_t i = 0; i < M * K; ++i) {
          bt.mass[i] += all_ct[pick][i];
          bm.mass[i] += all_cm[pick][i];
        }
      }
      bt.normalize();
      bm.normalize();
      boots[b] = tv_distance(bt, bm);
    }
    std::sort(boots.begin(), boots.end());
    const double lo = boots[static_cast<std::size_t>(0.025 * B)];
    const double hi = boots[static_cast<std::size_t>(0.975 * B) - 1];
    agg.rows.push_back(partitions[pi].name() + "," + fmt(tv) + "," + fmt(lo) +
                       "," + fmt(hi));
    part_results.push_back(ojson{{"partition", partitions[pi].name()},
                                 {"tv", tv},
                                 {"ci_lower", lo},
                                 {"ci_upper", hi},
                                 {"joint_true", joint_to_json(jt)},
                                 {"joint_model", joint_to_json(jm)}});
    const auto cell_names = index_names("cell", M);
    out.figures.push_back(
        {"joint_true_p" + std::to_string(pi),
         render_heatmap_svg(jt, cell_names, src.class_names,
                            partitions[pi].name() + " true joint")});
    out.figures.push_back(
        {"joint_model_p" + std::to_string(pi),
         render_heatmap_svg(jm, cell_names, src.class_names,
                            partitions[pi].name() + " model joint")});
  }
  out.results["family"] = family.name();
  out.results["partitions"] = std::move(part_results);
  out.tables.push_back(std::move(table));
  out.tables.push_back(std::move(agg));
  return out;
}

RunnerOutput run_agree(const ExperimentConfig& cfg, ConfigView& v) {
  const ClassifierFamilySpec family =
      parse_family(v.get("family"), v.at("family"));
  const std::size_t trials = v.count_or("trials", 1000);
  AgreementResult ar;
  if (v.has("dataset_csv")) {
    const std::string path = v.str("dataset_csv");
    v.maybe("n");
    v.maybe("test_points_per_trial");
    v.finish();
    LabeledDataset data = load_csv(path);
    ar = agreement_rate_split(family, data, trials, cfg.seed, cfg.workers);
  } else {
    OwnedSource src = parse_source(v.object("source"));
    const std::size_t n = v.count_or("n", 500);
    const std::size_t tppt = v.count_or("test_points_per_trial", 1);
    v.finish();
    ar = agreement_rate(family, src.ref(), n, trials, tppt, cfg.seed,
                        cfg.workers);
  }

  RunnerOutput out;
  Table table{"trials", {"trial,tested,accurate,agreeing,accuracy,agreement"}};
  for (std::size_t t = 0; t < ar.per_trial.size(); ++t) {
    const TrialCounts& tc = ar.per_trial[t];
    const double acc = static_cast<double>(tc.accurate) /
                       static_cast<double>(tc.tested);
    const double agr = static_cast<double>(tc.agreeing) /
                       static_cast<double>(tc.tested);
    table.rows.push_back(fmt(t) + "," + fmt(tc.tested) + "," +
                         fmt(tc.accurate) + "," + fmt(tc.agreeing) + "," +
                         fmt(acc) + "," + fmt(agr));
    out.trials.push_back(ojson{{"trial", t},
                               {"tested", tc.tested},
                               {"accurate", tc.accurate},
                               {"agreeing", tc.agreeing}});
  }
  Table agg{"aggregate",
            {"metric,point,ci_lower,ci_upper",
             "accuracy," + fmt(ar.accuracy.point) + "," +
                 fmt(ar.accuracy.lower) + "," + fmt(ar.accuracy.upper),
             "agreement," + fmt(ar.agreement.point) + "," +
                 fmt(ar.agreement.lower) + "," + fmt(ar.agreement.upper),
             "gap," + fmt(ar.gap) + ",,"}};
  out.results["family"] = family.name();
  out.results["accuracy"] = ci_to_json(ar.accuracy);
  out.results["agreement"] = ci_to_json(ar.agreement);
  out.results["gap"] = ar.gap;
  out.results["intervals_overlap"] =
      ar.accuracy.lower <= ar.agreement.upper &&
      ar.agreement.lower <= ar.accuracy.upper;
  out.tables.push_back(std::move(table));
  out.tables.push_back(std::move(agg));
  return out;
}

RunnerOutput run_lambda_sweep(const ExperimentConfig& cfg, ConfigView& v) {
  OwnedSource src = [&] {
    if (v.has("source")) return parse_source(v.object("source"));
    const json def{{"type", "cluster_grid"}, {"num_classes", 2},
                   {"dim", 2}, {"scale", 3.0}};
    return parse_source(ConfigView(def, "$.source(default)"));
  }();
  const std::size_t K = src.num_classes();
  ConfusionChannel channel =
      v.has("channel")
          ? parse_channel(v.get("channel"), v.at("channel"), K, cfg.seed)
          : targeted_flip(K, 0, 1, 0.3);
  v.maybe("channel");
  ConfigView fv = v.object("family");
  require(fv.str("kind") == "kernel", ErrorKind::config,
          "config error at " + v.at("family") +
              ": lambda_sweep requires a kernel family");
  const std::string kk = fv.str_or("kernel", "rbf");
  const double sigma = fv.number("sigma");
  fv.maybe("lambda");
  fv.finish();
  const KernelKind kkind = kk == "laplace" ? KernelKind::laplace : KernelKind::rbf;
  const std::vector<double> grid =
      v.number_list_or("lambda_grid", {0.0, 1e-3, 1e-2, 1e-1, 1.0});
  const bool scale_by_n = v.flag_or("scale_lambda_by_n", true);
  const std::size_t n = v.count_or("n", 1000);
  const std::size_t trials = v.count_or("trials", 20);
  const std::size_t tppt = v.count_or("test_points_per_trial", 500);
  v.finish();

  const std::size_t L = grid.size();
  struct TrialOut {
    std::vector<double> ctr, cte;       // per-lambda flattened (K*K)
    std::vector<double> train_err;      // per lambda
  };
  std::vector<TrialOut> res(trials);
  parallel_trials(trials, cfg.workers, [&](std::size_t t) {
    Rng rs = make_stream(cfg.seed, "lambda_sweep", t);
    LabeledDataset train_set = src.ref().sample(n, rs);
    train_set = apply_channel(train_set, channel, rs);
    LabeledDataset test_set = src.ref().sample(tppt, rs);
    TrialOut to;
    to.ctr.assign(L * K * K, 0.0);
    to.cte.assign(L * K * K, 0.0);
    to.train_err.assign(L, 0.0);
    for (std::size_t li = 0; li < L; ++li) {
      const double lambda =
          grid[li] * (scale_by_n ? static_cast<double>(n) : 1.0);
      const ClassifierFamilySpec spec =
          ClassifierFamilySpec::kernel(kkind, sigma, lambda);
      TrainedClassifier model = train(spec, train_set, rs);
      for (std::size_t i = 0; i < train_set.size(); ++i) {
        const int pred = model.predict(train_set.point(i), rs);
        to.ctr[li * K * K + train_set.clean_labels[i] * K + pred] += 1.0;
        if (pred != train_set.y[i]) to.train_err[li] += 1.0;
      }
      to.train_err[li] /= static_cast<double>(train_set.size());
      for (std::size_t i = 0; i < test_set.size(); ++i) {
        const int pred = model.predict(test_set.point(i), rs);
        to.cte[li * K * K + test_set.y[i] * K + pred] += 1.0;
      }
    }
    res[t] = std::move(to);
  });

  RunnerOutput out;
  Table table{"trials",
              {"trial,lambda,effective_lambda,train_error,off_diag_train,"
               "off_diag_test,tv_train_test"}};
  Table agg{"aggregate",
            {"lambda,effective_lambda,train_error,off_diag_train,off_diag_test,"
             "tv_train_test"}};
  ojson per_lambda = ojson::array();
  std::vector<double> off_series, tv_series;
  for (std::size_t li = 0; li < L; ++li) {
    const double lambda = grid[li] * (scale_by_n ? static_cast<double>(n) : 1.0);
    DiscreteJoint jtr(K, K), jte(K, K);
    double mean_terr = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      DiscreteJoint a(K, K), b(K, K);
      for (std::size_t i = 0; i < K * K; ++i) {
        a.mass[i] = res[t].ctr[li * K * K + i];
        b.mass[i] = res[t].cte[li * K * K + i];
        jtr.mass[i] += a.mass[i];
        jte.mass[i] += b.mass[i];
      }
      a.normalize();
      b.normalize();
      double offa = 0.0, offb = 0.0;
      for (std::size_t c = 0; c < K; ++c) {
        for (std::size_t l = 0; l < K; ++l) {
          if (c != l) {
            offa += a.at(c, l);
            offb += b.at(c, l);
          }
        }
      }
      const double tvt = tv_distance(a, b);
      mean_terr += res[t].train_err[li];
      table.rows.push_back(fmt(t) + "," + fmt(grid[li]) + "," + fmt(lambda) +
                           "," + fmt(res[t].train_err[li]) + "," + fmt(offa) +
                           "," + fmt(offb) + "," + fmt(tvt));
      out.trials.push_back(ojson{{"trial", t},
                                 {"lambda", grid[li]},
                                 {"effective_lambda", lambda},
                                 {"train_error", res[t].train_err[li]},
                                 {"off_diag_train", offa},
                                 {"off_diag_test", offb},
                                 {"tv_train_test", tvt}});
    }
    mean_terr /= static_cast<double>(trials);
    jtr.normalize();
    jte.normalize();
    double off_tr = 0.0, off_te = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
      for (std::size_t l = 0; l < K; ++l) {
        if (c != l) {
          off_tr += jtr.at(c, l);
          off_te += jte.at(c, l);
        }
      }
    }
    const double tv = tv_distance(jtr, jte);
    off_series.push_back(off_te);
    tv_series.push_back(tv);
    agg.rows.push_back(fmt(grid[li]) + "," + fmt(lambda) + "," +
                       fmt(mean_terr) + "," + fmt(off_tr) + "," + fmt(off_te) +
                       "," + fmt(tv));
    per_lambda.push_back(ojson{{"lambda", grid[li]},
                               {"effective_lambda", lambda},
                               {"train_error", mean_terr},
                               {"off_diag_train", off_tr},
                               {"off_diag_test", off_te},
                               {"tv_train_test", tv},
                               {"train_joint", joint_to_json(jtr)},
                               {"test_joint", joint_to_json(jte)}});
    out.figures.push_back(
        {"train_joint_l" + std::to_string(li),
         render_heatmap_svg(jtr, src.class_names, src.class_names,
                            "train joint, lambda=" + fmt(lambda))});
    out.figures.push_back(
        {"test_joint_l" + std::to_string(li),
         render_heatmap_svg(jte, src.class_names, src.class_names,
                            "test joint, lambda=" + fmt(lambda))});
  }
  std::size_t inversions = 0;
  for (std::size_t li = 0; li + 1 < L; ++li) {
    if (off_series[li + 1] > off_series[li] + 1e-12) ++inversions;
  }
  out.results["channel"] = json::parse(channel.to_json());
  out.results["per_lambda"] = std::move(per_lambda);
  out.results["off_diag_inversions"] = inversions;
  out.results["max_tv_train_test"] =
      *std::max_element(tv_series.begin(), tv_series.end());
  std::vector<double> xs;
  for (std::size_t li = 0; li < L; ++li) xs.push_back(static_cast<double>(li));
  out.figures.push_back(
      {"off_diag_curve",
       render_curves_svg(xs,
                         {{"off_diag_test", off_series, "#1f4e8c"},
                          {"tv_train_test", tv_series, "#c03030"}},
                         "lambda grid index", "mass",
                         "off-diagonal test mass and train/test TV")});
  out.tables.push_back(std::move(table));
  out.tables.push_back(std::move(agg));
  return out;
}

RunnerOutput run_verify_nn(const ExperimentConfig& cfg, ConfigView& v) {
  OwnedSource src = parse_source(v.object("source"));
  require(src.fin.has_value(), ErrorKind::config,
          "config error at " + v.at("source") +
              ": verify_nn needs a finite source");
  const FiniteDomainDistribution& fin = *src.fin;
  std::vector<std::size_t> ns = v.count_list_or("n_list", {});
  if (ns.empty()) ns.push_back(v.count_or("n", 4));
  v.maybe("n");
  Partition part = [&]() {
    if (v.has("partition")) {
      return parse_partition(v.get("partition"), v.at("partition"), src);
    }
    v.maybe("partition");
    std::vector<int> ident(fin.num_atoms);
    std::iota(ident.begin(), ident.end(), 0);
    return Partition::by_atom_map(ident);
  }();
  EnumerationBudget budget;
  if (v.has("budget")) {
    ConfigView bv = v.object("budget");
    budget.max_states = bv.count_or("max_states", 10'000'000);
    const std::string mode = bv.str_or("mode", "exact");
    require(mode == "exact" || mode == "monte_carlo", ErrorKind::config,
            "config error at " + bv.at("mode") +
                ": expected exact or monte_carlo");
    if (mode == "monte_carlo") {
      budget.mode = EnumerationBudget::Mode::monte_carlo;
      budget.mc_trials = bv.count_or("mc_trials", 200'000);
      budget.mc_seed = cfg.seed;
    } else {
      bv.maybe("mc_trials");
    }
    bv.finish();
  } else {
    v.maybe("budget");
  }
  v.finish();

  RunnerOutput out;
  Table table{"results",
              {"n,tv,eps,delta,tv_bound,accuracy,agreement,gap,coupling_delta"}};
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const std::size_t n = ns[i];
    const CalibrationOracle fc =
        exact_feature_calibration_tv(fin, n, part, budget);
    const AgreementOracle ag = exact_agreement_vs_accuracy(fin, n, budget);
    table.rows.push_back(fmt(n) + "," + fmt(fc.tv) + "," + fmt(fc.eps) + "," +
                         fmt(fc.delta) + "," + fmt(fc.eps + fc.delta) + "," +
                         fmt(ag.accuracy) + "," + fmt(ag.agreement) + "," +
                         fmt(ag.gap) + "," + fmt(ag.delta));
    rows.push_back(ojson{{"n", n},
                         {"tv", fc.tv},
                         {"eps", fc.eps},
                         {"delta", fc.delta},
                         {"tv_bound", fc.eps + fc.delta},
                         {"tv_ci_half_width", fc.ci_half_width},
                         {"accuracy", ag.accuracy},
                         {"agreement", ag.agreement},
                         {"gap", ag.gap},
                         {"coupling_delta", ag.delta},
                         {"joint_true", joint_to_json(fc.joint_true)},
                         {"joint_nn", joint_to_json(fc.joint_nn)}});
    out.trials.push_back(rows.back());
    const auto cell_names = index_names("cell", part.M);
    out.figures.push_back(
        {"joint_true_n" + std::to_string(n),
         render_heatmap_svg(fc.joint_true, cell_names, src.class_names,
                            "true joint, n=" + fmt(n))});
    out.figures.push_back(
        {"joint_nn_n" + std::to_string(n),
         render_heatmap_svg(fc.joint_nn, cell_names, src.class_names,
                            "1-NN joint, n=" + fmt(n))});
  }
  out.results["mode"] = budget.mode == EnumerationBudget::Mode::exact
                            ? "exact"
                            : "monte_carlo";
  out.results["partition"] = part.name();
  out.results["records"] = std::move(rows);
  out.tables.push_back(std::move(table));
  return out;
}

RunnerOutput run_student_teacher(const ExperimentConfig& cfg, ConfigView& v) {
  OwnedSource src = parse_source(v.object("source"));
  const ClassifierFamilySpec family =
      parse_family(v.get("family"), v.at("family"));
  const std::vector<std::size_t> n_grid =
      v.count_list_or("n_grid", {100, 200, 500, 1000, 2000});
  const std::vector<std::size_t> k_grid =
      v.count_list_or("k_grid", {100, 200, 500, 1000, 2000});
  const std::size_t trials = v.count_or("trials", 4);
  const std::size_t test_points = v.count_or("test_points", 1000);
  v.finish();

  const std::size_t NN = n_grid.size(), NK = k_grid.size();
  std::vector<double> errs(NN * NK * trials, 0.0);
  parallel_trials(errs.size(), cfg.workers, [&](std::size_t task) {
    const std::size_t ni = task / (NK * trials);
    const std::size_t ki = (task / trials) % NK;
    Rng rs = make_stream(cfg.seed, "student_teacher", task);
    LabeledDataset teacher_data = src.ref().sample(n_grid[ni], rs);
    TrainedClassifier teacher = train(family, teacher_data, rs);
    LabeledDataset pseudo = src.ref().sample(k_grid[ki], rs);
    for (std::size_t i = 0; i < pseudo.size(); ++i) {
      pseudo.y[i] = teacher.predict(pseudo.point(i), rs);
    }
    pseudo.clean_labels.clear();
    TrainedClassifier student = train(family, pseudo, rs);
    LabeledDataset test_set = src.ref().sample(test_points, rs);
    errs[task] = train_error(student, test_set, rs);
  });
  std::vector<double> ctrl(NK * trials, 0.0);
  parallel_trials(ctrl.size(), cfg.workers, [&](std::size_t task) {
    const std::size_t ki = task / trials;
    Rng rs = make_stream(cfg.seed, "student_teacher/control", task);
    LabeledDataset data = src.ref().sample(k_grid[ki], rs);
    TrainedClassifier model = train(family, data, rs);
    LabeledDataset test_set = src.ref().sample(test_points, rs);
    ctrl[task] = train_error(model, test_set, rs);
  });

  RunnerOutput out;
  Table table{"trials", {"n,k,trial,student_error"}};
  Table ctable{"control_trials", {"k,trial,control_error"}};
  DiscreteJoint E(NN, NK), D(NN, NK);
  std::vector<double> ctrl_mean(NK, 0.0);
  for (std::size_t ki = 0; ki < NK; ++ki) {
    for (std::size_t t = 0; t < trials; ++t) {
      ctrl_mean[ki] += ctrl[ki * trials + t];
      ctable.rows.push_back(fmt(k_grid[ki]) + "," + fmt(t) + "," +
                            fmt(ctrl[ki * trials + t]));
    }
    ctrl_mean[ki] /= static_cast<double>(trials);
  }
  double max_diff_half = 0.0;
  for (std::size_t ni = 0; ni < NN; ++ni) {
    for (std::size_t ki = 0; ki < NK; ++ki) {
      double mean = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        const double e = errs[(ni * NK + ki) * trials + t];
        mean += e;
        table.rows.push_back(fmt(n_grid[ni]) + "," + fmt(k_grid[ki]) + "," +
                             fmt(t) + "," + fmt(e));
        out.trials.push_back(ojson{{"n", n_grid[ni]},
                                   {"k", k_grid[ki]},
                                   {"trial", t},
                                   {"student_error", e}});
      }
      mean /= static_cast<double>(trials);
      E.at(ni, ki) = mean;
      D.at(ni, ki) = std::abs(mean - ctrl_mean[ki]);
      if (2 * k_grid[ki] <= n_grid[ni]) {
        max_diff_half = std::max(max_diff_half, D.at(ni, ki));
      }
    }
  }
  ojson ej = ojson::array(), dj = ojson::array(), cj = ojson::array();
  for (std::size_t ni = 0; ni < NN; ++ni) {
    ojson er = ojson::array(), dr = ojson::array();
    for (std::size_t ki = 0; ki < NK; ++ki) {
      er.push_back(E.at(ni, ki));
      dr.push_back(D.at(ni, ki));
    }
    ej.push_back(std::move(er));
    dj.push_back(std::move(dr));
  }
  for (std::size_t ki = 0; ki < NK; ++ki) cj.push_back(ctrl_mean[ki]);
  ojson ngrid_json = ojson::array(), kgrid_json = ojson::array();
  for (std::size_t x : n_grid) ngrid_json.push_back(x);
  for (std::size_t x : k_grid) kgrid_json.push_back(x);
  out.results["family"] = family.name();
  out.results["n_grid"] = std::move(ngrid_json);
  out.results["k_grid"] = std::move(kgrid_json);
  out.results["E"] = std::move(ej);
  out.results["control_E"] = std::move(cj);
  out.results["abs_diff"] = std::move(dj);
  out.results["max_abs_diff_k_le_n_half"] = max_diff_half;
  std::vector<std::string> n_names, k_names;
  for (std::size_t x : n_grid) n_names.push_back("n=" + std::to_string(x));
  for (std::size_t x : k_grid) k_names.push_back("k=" + std::to_string(x));
  out.figures.push_back({"student_error",
                         render_heatmap_svg(E, n_names, k_names,
                                            "student test error E(n,k)")});
  out.figures.push_back(
      {"diff_vs_control",
       render_heatmap_svg(D, n_names, k_names, "|E(n,k) - control E(k)|")});
  out.tables.push_back(std::move(table));
  out.tables.push_back(std::move(ctable));
  return out;
}

RunnerOutput run_pointwise(const ExperimentConfig& cfg, ConfigView& v) {
  OwnedSource src = parse_source(v.object("source"));
  const ClassifierFamilySpec family =
      parse_family(v.get("family"), v.at("family"));
  const std::size_t ensemble_size = v.count_or("ensemble_size", 100);
  const std::size_t n = v.count_or("n", 1000);
  const std::size_t eval_points = v.count_or("eval_points", 400);
  v.finish();

  const std::size_t K = src.num_classes();
  const std::size_t M = src.num_cells();
  std::vector<TrainedClassifier> members(ensemble_size);
  parallel_trials(ensemble_size, cfg.workers, [&](std::size_t m) {
    Rng rs = make_stream(cfg.seed, "pointwise/member", m);
    members[m] = train(family, src.ref().sample(n, rs), rs);
  });

  Rng rs_eval = make_stream(cfg.seed, "pointwise/eval", 0);
  LabeledDataset eval_set = src.ref().sample(eval_points, rs_eval);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> pts;
  pts.reserve(eval_points);
  for (std::size_t i = 0; i < eval_points; ++i) {
    pts.emplace_back(
        std::vector<double>(eval_set.point(i), eval_set.point(i) + eval_set.dim),
        src.pmf_of_cell(eval_set.partition_cells[i]));
  }
  const PointwiseDensity pd = pointwise_density_H(members, pts, rs_eval);

  std::vector<std::pair<TrainedClassifier, TrainedClassifier>> pairs;
  for (std::size_t i = 0; i + 1 < ensemble_size; i += 2) {
    pairs.emplace_back(members[i], members[i + 1]);
  }
  PointwiseAgreement pa;
  if (!pairs.empty()) pa = pointwise_agreement_M(pairs, eval_set, rs_eval);

  DiscreteJoint j_single(M, K), j_plural(M, K), j_true(M, K);
  for (std::size_t i = 0; i < eval_points; ++i) {
    const std::vector<double> pmf =
        ensemble_predict_pmf(members, eval_set.point(i), rs_eval);
    const auto cell = static_cast<std::size_t>(eval_set.partition_cells[i]);
    for (std::size_t l = 0; l < K; ++l) j_single.at(cell, l) += pmf[l];
    const int plural = static_cast<int>(
        std::max_element(pmf.begin(), pmf.end()) - pmf.begin());
    j_plural.at(cell, plural) += 1.0;
    j_true.at(cell, eval_set.y[i]) += 1.0;
  }
  j_single.normalize();
  j_plural.normalize();
  j_true.normalize();

  RunnerOutput out;
  Table table{"eval_points", {"point,cell,h,m"}};
  for (std::size_t i = 0; i < eval_points; ++i) {
    const double m = pairs.empty() ? 0.0 : pa.m_values[i];
    table.rows.push_back(fmt(i) + "," + fmt(eval_set.partition_cells[i]) + "," +
                         fmt(pd.h_values[i]) + "," + fmt(m));
    out.trials.push_back(ojson{{"point", i},
                               {"cell", eval_set.partition_cells[i]},
                               {"h", pd.h_values[i]},
                               {"m", m}});
  }
  ojson hist = ojson::array();
  {
    std::vector<std::size_t> bins(10, 0);
    for (double h : pd.h_values) {
      const auto b = std::min<std::size_t>(
          9, static_cast<std::size_t>(h * 10.0));
      ++bins[b];
    }
    for (std::size_t b = 0; b < 10; ++b) {
      hist.push_back(ojson{{"bin_low", b / 10.0},
                           {"bin_high", (b + 1) / 10.0},
                           {"count", bins[b]}});
    }
  }
  out.results["family"] = family.name();
  out.results["ensemble_size"] = ensemble_size;
  out.results["num_pairs"] = pairs.size();
  out.results["mean_h"] = pd.mean_h;
  out.results["h_histogram"] = std::move(hist);
  if (pairs.empty()) {
    out.results["mean_m"] = nullptr;
    out.results["mean_abs_m"] = nullptr;
  } else {
    out.results["mean_m"] = pa.mean_m;
    out.results["mean_abs_m"] = pa.mean_abs_m;
  }
  out.results["joint_true"] = joint_to_json(j_true);
  out.results["joint_single_member"] = joint_to_json(j_single);
  out.results["joint_plurality"] = joint_to_json(j_plural);
  out.figures.push_back({"joint_single_member",
                         render_heatmap_svg(j_single, src.cell_names,
                                            src.class_names,
                                            "average member joint")});
  out.figures.push_back({"joint_plurality",
                         render_heatmap_svg(j_plural, src.cell_names,
                                            src.class_names,
                                            "plurality ensemble joint")});
  out.tables.push_back(std::move(table));
  return out;
}

// ---------------------------------------------------------------- assembly

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::io, "cannot open '" + path.string() + "'");
  out << content;
  require(out.good(), ErrorKind::io, "write failed for '" + path.string() + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& config_path,
                                        const std::string& cli_kind,
                                        const std::string& out_dir, int workers,
                                        bool has_cli_seed,
                                        std::uint64_t cli_seed) {
  std::ifstream in(config_path);
  require(in.good(), ErrorKind::io,
          "cannot open config file '" + config_path + "'");
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DgError(ErrorKind::config,
                  std::string("config parse error: ") + e.what());
  }
  require(parsed.is_object(), ErrorKind::config,
          "config error at $: expected an object");

  ExperimentConfig cfg;
  cfg.params = parsed;
  require(parsed.contains("kind") && parsed["kind"].is_string(),
          ErrorKind::config, "config error at $.kind: required string missing");
  cfg.kind = parsed["kind"].get<std::string>();
  static const std::set<std::string> kinds = {
      "calibrate",    "constant_partition", "coarse_partition",
      "multi_feature", "agree",             "lambda_sweep",
      "verify_nn",    "student_teacher",    "pointwise"};
  require(kinds.contains(cfg.kind), ErrorKind::config,
          "config error at $.kind: unknown experiment kind '" + cfg.kind + "'");
  require(cli_kind.empty() || cli_kind == cfg.kind, ErrorKind::config,
          "config error at $.kind: config says '" + cfg.kind +
              "' but the command line says '" + cli_kind + "'");
  if (parsed.contains("seed")) {
    require(parsed["seed"].is_number_unsigned(), ErrorKind::config,
            "config error at $.seed: expected a nonnegative integer");
    cfg.seed = parsed["seed"].get<std::uint64_t>();
    cfg.seed_source = "config";
  } else if (has_cli_seed) {
    cfg.seed = cli_seed;
    cfg.seed_source = "cli_flag";
  } else {
    throw DgError(ErrorKind::config, "config error at $.seed: seed required");
  }
  cfg.out_dir = out_dir;
  cfg.workers = workers > 0 ? workers : default_workers();
  return cfg;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();

  ConfigView v(config.params, "$");
  v.maybe("kind");
  v.maybe("seed");
  RunnerOutput out;
  if (config.kind == "calibrate") {
    out = run_calibrate(config, v);
  } else if (config.kind == "constant_partition") {
    out = run_constant_partition(config, v);
  } else if (config.kind == "coarse_partition" ||
             config.kind == "multi_feature") {
    out = run_coarse_multi(config, v);
  } else if (config.kind == "agree") {
    out = run_agree(config, v);
  } else if (config.kind == "lambda_sweep") {
    out = run_lambda_sweep(config, v);
  } else if (config.kind == "verify_nn") {
    out = run_verify_nn(config, v);
  } else if (config.kind == "student_teacher") {
    out = run_student_teacher(config, v);
  } else if (config.kind == "pointwise") {
    out = run_pointwise(config, v);
  } else {
    throw DgError(ErrorKind::config,
                  "config error at $.kind: unknown experiment kind '" +
                      config.kind + "'");
  }

  char hash[32];
  std::snprintf(hash, sizeof(hash), "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a(config.params.dump())));

  ExperimentReport report;
  report.json["toolkit"] =
      ojson{{"name", kToolkitName}, {"version", kToolkitVersion}};
  report.json["kind"] = config.kind;
  report.json["seed"] = config.seed;
  report.json["seed_source"] = config.seed_source;
  report.json["config"] = config.params;
  report.json["config_hash"] = hash;
  report.json["results"] = std::move(out.results);
  report.json["trials"] = std::move(out.trials);

  const fs::path base(config.out_dir);
  fs::create_directories(base / "tables");
  fs::create_directories(base / "figures");
  write_text_file(base / "report.json", report.json.dump(2) + "\n");
  for (const auto& t : out.tables) {
    std::string content;
    for (const auto& row : t.rows) content += row + "\n";
    write_text_file(base / "tables" / (t.name + ".csv"), content);
  }
  for (const auto& f : out.figures) {
    write_text_file(base / "figures" / (f.name + ".svg"), f.svg);
  }

  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  report.wall_clock_seconds = elapsed;
  ojson meta{{"toolkit", ojson{{"name", kToolkitName},
                               {"version", kToolkitVersion}}},
             {"out_dir", config.out_dir},
             {"workers", config.workers},
             {"wall_clock_seconds", elapsed}};
  write_text_file(base / "run_meta.json", meta.dump(2) + "\n");
  return report;
}

}  // namespace dgbench

#include "dgbench/noise.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace dgbench {

void ConfusionChannel::validate() const {
  require(K >= 1 && cond.size() == K, ErrorKind::logic,
          "ConfusionChannel: dimension mismatch");
  for (const auto& row : cond) {
    require(row.size() == K, ErrorKind::logic, "ConfusionChannel: matrix not square");
  }
  for (std::size_t j = 0; j < K; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      require(cond[i][j] >= 0.0, ErrorKind::logic, "ConfusionChannel: negative entry");
      s += cond[i][j];
    }
    require(std::abs(s - 1.0) <= 1e-12, ErrorKind::logic,
            "ConfusionChannel: column " + std::to_string(j) + " does not sum to 1");
  }
}

std::vector<double> ConfusionChannel::column(std::size_t clean) const {
  require(clean < K, ErrorKind::logic, "ConfusionChannel: clean label out of range");
  std::vector<double> col(K);
  for (std::size_t i = 0; i < K; ++i) col[i] = cond[i][clean];
  return col;
}

std::string ConfusionChannel::to_json() const {
  validate();
  nlohmann::ordered_json j;
  j["columns_are_clean_labels"] = true;
  j["K"] = K;
  j["cond"] = cond;
  return j.dump(2);
}

ConfusionChannel ConfusionChannel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DgError(ErrorKind::io, std::string("channel JSON parse error: ") + e.what());
  }
  require(j.contains("columns_are_clean_labels") &&
              j["columns_are_clean_labels"].is_boolean() &&
              j["columns_are_clean_labels"].get<bool>(),
          ErrorKind::io, "channel JSON must declare columns_are_clean_labels: true");
  require(j.contains("K") && j.contains("cond"), ErrorKind::io,
          "channel JSON missing K or cond");
  ConfusionChannel c;
  c.K = j["K"].get<std::size_t>();
  c.cond = j["cond"].get<std::vector<std::vector<double>>>();
  c.validate();
  return c;
}

ConfusionChannel identity_channel(std::size_t K) {
  require(K >= 1, ErrorKind::logic, "identity_channel: K must be >= 1");
  ConfusionChannel c;
  c.K = K;
  c.cond.assign(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < K; ++i) c.cond[i][i] = 1.0;
  return c;
}

ConfusionChannel targeted_flip(std::size_t K, int from, int to, double p) {
  require(from != to, ErrorKind::logic, "targeted_flip: from == to");
  require(from >= 0 && to >= 0 && static_cast<std::size_t>(from) < K &&
              static_cast<std::size_t>(to) < K,
          ErrorKind::logic, "targeted_flip: label out of range");
  require(p >= 0.0 && p <= 1.0, ErrorKind::logic, "targeted_flip: p must lie in [0, 1]");
  ConfusionChannel c = identity_channel(K);
  c.cond[from][from] = 1.0 - p;
  c.cond[to][from] = p;
  c.validate();
  return c;
}

ConfusionChannel random_sparse_channel(std::size_t K, Rng& rng) {
  require(K >= 3, ErrorKind::logic, "random_sparse_channel: K must be >= 3");
  ConfusionChannel c;
  c.K = K;
  c.cond.assign(K, std::vector<double>(K, 0.0));
  for (std::size_t j = 0; j < K; ++j) {
    c.cond[j][j] = 0.5;
    std::size_t a = rng.uniform_index(K - 1);
    if (a >= j) ++a;
    std::size_t b = rng.uniform_index(K - 2);
    if (b >= std::min(j, a)) ++b;
    if (b >= std::max(j, a)) ++b;
    c.cond[a][j] = 0.2;
    c.cond[b][j] = 0.3;
  }
  c.validate();
  return c;
}

LabeledDataset apply_channel(const LabeledDataset& data,
                             const ConfusionChannel& channel, Rng& rng) {
  data.validate();
  channel.validate();
  require(data.num_classes == channel.K, ErrorKind::logic,
          "apply_channel: label count mismatch");
  LabeledDataset out = data;
  if (out.clean_labels.empty()) out.clean_labels = data.y;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.y[i] = static_cast<int>(rng.categorical(channel.column(data.y[i])));
  }
  out.validate();
  return out;
}

}  // namespace dgbench

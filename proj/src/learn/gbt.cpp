#include "fairsim/learn/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fairsim::learn {

namespace {

using nlohmann::json;

constexpr double kMinSplitGain = 1e-12;
constexpr double kRateClamp = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void validate_params(const GbtParams& p) {
  if (p.n_trees < 0 || p.max_depth < 1 || p.learning_rate <= 0 || p.reg_lambda < 0)
    throw std::invalid_argument("GbtParams: out of range");
}

void check_matrix(const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
  if (x.empty()) throw std::invalid_argument("gbt: empty dataset");
  if (x.size() != y.size()) throw std::invalid_argument("gbt: x/y size mismatch");
  for (const auto& row : x)
    if (row.size() != x[0].size()) throw std::invalid_argument("gbt: ragged feature matrix");
}

// Mean-one normalization; the weight scale carries no information for a
// weighted loss, and fixing it keeps fits bitwise identical under w -> c*w.
std::vector<double> normalize_weights(std::span<const double> weights, std::size_t n) {
  std::vector<double> w;
  if (weights.empty()) {
    w.assign(n, 1.0);
    return w;
  }
  if (weights.size() != n) throw std::invalid_argument("gbt: weight size mismatch");
  double total = 0;
  for (double v : weights) {
    if (!(v >= 0)) throw std::invalid_argument("gbt: negative weight");
    total += v;
  }
  if (total <= 0) throw std::invalid_argument("gbt: all weights are zero");
  // uniform weights rescale to exactly 1, keeping scale invariance bitwise
  if (std::all_of(weights.begin(), weights.end(), [&](double v) { return v == weights[0]; })) {
    w.assign(n, 1.0);
    return w;
  }
  w.assign(weights.begin(), weights.end());
  const double scale = static_cast<double>(n) / total;
  for (double& v : w) v *= scale;
  return w;
}

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const GbtParams& params;
  GbtTree tree;
  // leaf assignment for the training rows, filled as leaves are finalized
  std::vector<double>& row_delta;

  std::int32_t build(std::vector<std::int32_t>& idx, int depth) {
    double g = 0, h = 0;
    for (std::int32_t i : idx) {
      g += grad[i];
      h += hess[i];
    }
    const double lambda = params.reg_lambda;

    int best_feature = -1;
    double best_gain = kMinSplitGain, best_threshold = 0;
    if (depth < params.max_depth && idx.size() >= 2) {
      const double parent_score = g * g / (h + lambda);
      const std::size_t d = x[0].size();
      std::vector<std::int32_t> sorted = idx;
      for (std::size_t j = 0; j < d; ++j) {
        std::sort(sorted.begin(), sorted.end(), [&](std::int32_t a, std::int32_t b) {
          const double va = x[a][j], vb = x[b][j];
          return va < vb || (va == vb && a < b);
        });
        double gl = 0, hl = 0;
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
          gl += grad[sorted[k]];
          hl += hess[sorted[k]];
          const double lo = x[sorted[k]][j], hi = x[sorted[k + 1]][j];
          if (lo == hi) continue;
          const double gr = g - gl, hr = h - hl;
          const double gain =
              0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score);
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(j);
            best_threshold = lo + 0.5 * (hi - lo);
          }
        }
      }
    }

    const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (best_feature < 0) {
      const double value = -params.learning_rate * g / (h + params.reg_lambda);
      tree.nodes[id].value = value;
      for (std::int32_t i : idx) row_delta[i] = value;
      return id;
    }

    std::vector<std::int32_t> left_idx, right_idx;
    for (std::int32_t i : idx) {
      (x[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_idx : right_idx)
          .push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const std::int32_t left = build(left_idx, depth + 1);
    const std::int32_t right = build(right_idx, depth + 1);
    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }
};

json tree_to_json(const GbtTree& t) {
  json nodes = json::array();
  for (const GbtNode& n : t.nodes)
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  return nodes;
}

GbtTree tree_from_json(const json& nodes) {
  GbtTree t;
  for (const json& e : nodes) {
    GbtNode n;
    n.feature = e.at(0).get<int>();
    n.threshold = e.at(1).get<double>();
    n.left = e.at(2).get<std::int32_t>();
    n.right = e.at(3).get<std::int32_t>();
    n.value = e.at(4).get<double>();
    t.nodes.push_back(n);
  }
  return t;
}

}  // namespace

double GbtTree::predict(std::span<const double> row) const {
  std::int32_t at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const GbtNode& n = nodes[static_cast<std::size_t>(at)];
    at = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

GbtModel GbtModel::fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       std::span<const double> weights, const GbtParams& params) {
  validate_params(params);
  check_matrix(x, y);
  const std::vector<double> w = normalize_weights(weights, x.size());

  GbtModel m;
  m.params_ = params;
  m.fitted_ = true;

  double pos = 0, total = 0;
  bool saw[2] = {false, false};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw std::invalid_argument("gbt: labels must be 0/1");
    if (w[i] > 0) saw[y[i]] = true;
    pos += w[i] * y[i];
    total += w[i];
  }
  const double rate = std::clamp(pos / total, kRateClamp, 1.0 - kRateClamp);
  m.base_score_ = std::log(rate / (1.0 - rate));
  if (!saw[0] || !saw[1]) return m;  // constant predictor at the base rate

  std::vector<double> margins(x.size(), m.base_score_);
  m.boost(x, y, w, margins, params.n_trees);
  return m;
}

void GbtModel::boost(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<double>& w, std::vector<double>& margins, int rounds) {
  const std::size_t n = x.size();
  std::vector<double> grad(n), hess(n), delta(n);
  for (int t = 0; t < rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margins[i]);
      grad[i] = w[i] * (p - y[i]);
      hess[i] = w[i] * p * (1.0 - p);
    }
    TreeBuilder builder{x, grad, hess, params_, {}, delta};
    std::vector<std::int32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    builder.build(idx, 0);
    trees_.push_back(std::move(builder.tree));
    for (std::size_t i = 0; i < n; ++i) margins[i] += delta[i];
  }
}

void GbtModel::append(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      std::span<const double> weights, int n_new_trees) {
  if (!fitted_) throw std::logic_error("GbtModel::append: model not fitted");
  if (x.empty() || n_new_trees <= 0) return;
  check_matrix(x, y);
  const std::vector<double> w = normalize_weights(weights, x.size());
  std::vector<double> margins(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) margins[i] = predict_margin_one(x[i]);
  boost(x, y, w, margins, n_new_trees);
}

double GbtModel::predict_margin_one(std::span<const double> row) const {
  if (!fitted_) throw std::logic_error("GbtModel: not fitted");
  double z = base_score_;
  for (const GbtTree& t : trees_) z += t.predict(row);
  return z;
}

double GbtModel::predict_proba_one(std::span<const double> row) const {
  return sigmoid(predict_margin_one(row));
}

std::vector<double> GbtModel::predict_proba(const std::vector<std::vector<double>>& x) const {
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(predict_proba_one(row));
  return out;
}

std::vector<int> GbtModel::predict(const std::vector<std::vector<double>>& x,
                                   double threshold) const {
  std::vector<int> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(predict_proba_one(row) >= threshold ? 1 : 0);
  return out;
}

std::string GbtModel::to_json() const {
  json j;
  j["schema"] = "fairsim-gbt";
  j["version"] = 1;
  j["params"] = {{"n_trees", params_.n_trees},
                 {"max_depth", params_.max_depth},
                 {"learning_rate", params_.learning_rate},
                 {"reg_lambda", params_.reg_lambda}};
  j["base_score"] = base_score_;
  json trees = json::array();
  for (const GbtTree& t : trees_) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j.dump(2);
}

GbtModel GbtModel::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("GbtModel::from_json: ") + e.what());
  }
  if (j.value("schema", "") != "fairsim-gbt" || j.value("version", 0) != 1)
    throw std::invalid_argument("GbtModel::from_json: unknown schema");
  GbtModel m;
  const json& p = j.at("params");
  m.params_.n_trees = p.at("n_trees").get<int>();
  m.params_.max_depth = p.at("max_depth").get<int>();
  m.params_.learning_rate = p.at("learning_rate").get<double>();
  m.params_.reg_lambda = p.at("reg_lambda").get<double>();
  m.base_score_ = j.at("base_score").get<double>();
  for (const json& t : j.at("trees")) m.trees_.push_back(tree_from_json(t));
  m.fitted_ = true;
  return m;
}

}  // namespace fairsim::learn

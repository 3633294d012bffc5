#include "fairsim/learn/hoeffding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairsim::learn {

namespace {

constexpr double kDegenerateSigma = 1e-12;
constexpr double kMinMass = 1e-9;

// entropy in bits, matching the R = log2(n_classes) = 1 range of the bound
double entropy2(double w0, double w1) {
  const double n = w0 + w1;
  if (n <= 0) return 0;
  double h = 0;
  for (double w : {w0, w1}) {
    if (w <= 0) continue;
    const double p = w / n;
    h -= p * std::log2(p);
  }
  return h;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

void HoeffdingTree::GaussStat::add(double v, double wt) {
  w += wt;
  const double delta = v - mean;
  mean += delta * wt / w;
  m2 += wt * delta * (v - mean);
}

double HoeffdingTree::GaussStat::mass_below(double t) const {
  if (w <= 0) return 0;
  const double sd = std::sqrt(variance());
  if (sd < kDegenerateSigma) return mean <= t ? w : 0;
  return w * normal_cdf((t - mean) / sd);
}

HoeffdingTree::HoeffdingTree(HoeffdingParams params) : params_(params) {
  if (params_.grace_period < 1 || params_.split_confidence <= 0 ||
      params_.split_confidence >= 1 || params_.tie_threshold < 0 || params_.n_split_points < 1)
    throw std::invalid_argument("HoeffdingParams: out of range");
  nodes_.emplace_back();
}

std::int32_t HoeffdingTree::route(std::span<const double> row) const {
  std::int32_t at = 0;
  while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
    const Node& n = nodes_[static_cast<std::size_t>(at)];
    at = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return at;
}

void HoeffdingTree::learn_one(std::span<const double> row, int label, double weight) {
  if (label != 0 && label != 1) throw std::invalid_argument("HoeffdingTree: labels must be 0/1");
  if (!(weight >= 0)) throw std::invalid_argument("HoeffdingTree: negative weight");
  if (weight == 0) return;
  if (n_features_ == 0) n_features_ = row.size();
  if (row.size() != n_features_)
    throw std::invalid_argument("HoeffdingTree: feature width mismatch");

  const std::int32_t id = route(row);
  Node& leaf = nodes_[static_cast<std::size_t>(id)];
  if (leaf.feats.empty()) leaf.feats.resize(n_features_);
  leaf.class_w[label] += weight;
  for (std::size_t j = 0; j < n_features_; ++j) {
    FeatureStat& f = leaf.feats[j];
    f.per_class[label].add(row[j], weight);
    if (!f.seen) {
      f.lo = f.hi = row[j];
      f.seen = true;
    } else {
      f.lo = std::min(f.lo, row[j]);
      f.hi = std::max(f.hi, row[j]);
    }
  }
  leaf.since_check += weight;
  if (leaf.since_check >= params_.grace_period && leaf.class_w[0] > 0 && leaf.class_w[1] > 0) {
    leaf.since_check = 0;
    try_split(id);
  }
}

void HoeffdingTree::try_split(std::int32_t id) {
  Node& leaf = nodes_[static_cast<std::size_t>(id)];
  const double n = leaf.class_w[0] + leaf.class_w[1];
  const double parent_h = entropy2(leaf.class_w[0], leaf.class_w[1]);

  double best = 0, second = 0, best_threshold = 0;
  int best_feature = -1;
  double best_left[2] = {0, 0};
  for (std::size_t j = 0; j < leaf.feats.size(); ++j) {
    const FeatureStat& f = leaf.feats[j];
    if (!f.seen || f.lo == f.hi) continue;
    double feat_best = -1, feat_threshold = 0, feat_left[2] = {0, 0};
    for (int k = 1; k <= params_.n_split_points; ++k) {
      const double t = f.lo + (f.hi - f.lo) * k / (params_.n_split_points + 1);
      double l0 = f.per_class[0].mass_below(t);
      double l1 = f.per_class[1].mass_below(t);
      const double lw = l0 + l1;
      const double rw = n - lw;
      if (lw < kMinMass || rw < kMinMass) continue;
      const double gain = parent_h - (lw * entropy2(l0, l1) +
                                      rw * entropy2(leaf.class_w[0] - l0, leaf.class_w[1] - l1)) /
                                         n;
      if (gain > feat_best) {
        feat_best = gain;
        feat_threshold = t;
        feat_left[0] = l0;
        feat_left[1] = l1;
      }
    }
    if (feat_best < 0) continue;
    if (feat_best > best) {
      second = best;
      best = feat_best;
      best_feature = static_cast<int>(j);
      best_threshold = feat_threshold;
      best_left[0] = feat_left[0];
      best_left[1] = feat_left[1];
    } else if (feat_best > second) {
      second = feat_best;
    }
  }
  if (best_feature < 0 || best <= 0) return;

  const double eps = std::sqrt(std::log(1.0 / params_.split_confidence) / (2.0 * n));
  if (!(best - second > eps || eps < params_.tie_threshold)) return;

  Node left, right;
  left.class_w[0] = best_left[0];
  left.class_w[1] = best_left[1];
  right.class_w[0] = leaf.class_w[0] - best_left[0];
  right.class_w[1] = leaf.class_w[1] - best_left[1];
  const std::int32_t li = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(std::move(left));
  const std::int32_t ri = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(std::move(right));
  Node& parent = nodes_[static_cast<std::size_t>(id)];  // re-fetch, push_back may relocate
  parent.feature = best_feature;
  parent.threshold = best_threshold;
  parent.left = li;
  parent.right = ri;
  parent.feats.clear();
  parent.feats.shrink_to_fit();
}

double HoeffdingTree::predict_proba_one(std::span<const double> row) const {
  if (n_features_ != 0 && row.size() != n_features_)
    throw std::invalid_argument("HoeffdingTree: feature width mismatch");
  const Node& leaf = nodes_[static_cast<std::size_t>(route(row))];
  return (leaf.class_w[1] + 1.0) / (leaf.class_w[0] + leaf.class_w[1] + 2.0);
}

int HoeffdingTree::leaf_count() const {
  int leaves = 0;
  for (const Node& n : nodes_)
    if (n.feature < 0) ++leaves;
  return leaves;
}

}  // namespace fairsim::learn

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fairsim::learn {

struct HoeffdingParams {
  int grace_period = 200;          // leaf weight between split attempts
  double split_confidence = 1e-7;  // delta in the Hoeffding bound
  double tie_threshold = 0.05;     // split anyway once the bound shrinks below tau
  int n_split_points = 10;         // candidate thresholds per feature
};

// Incremental binary decision tree with the Hoeffding split bound. Each
// leaf summarizes every feature with one Gaussian per class; candidate
// thresholds are evenly spaced across the observed range. Nodes are only
// ever added, never revised.
class HoeffdingTree {
 public:
  explicit HoeffdingTree(HoeffdingParams params = {});

  void learn_one(std::span<const double> row, int label, double weight = 1.0);
  double predict_proba_one(std::span<const double> row) const;

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int leaf_count() const;
  const HoeffdingParams& params() const { return params_; }

 private:
  struct GaussStat {
    double w = 0, mean = 0, m2 = 0;
    void add(double v, double wt);
    double variance() const { return w > 0 ? m2 / w : 0.0; }
    // class mass expected at or below the threshold
    double mass_below(double t) const;
  };
  struct FeatureStat {
    GaussStat per_class[2];
    double lo = 0, hi = 0;
    bool seen = false;
  };
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    std::int32_t left = -1, right = -1;
    double class_w[2] = {0, 0};
    std::vector<FeatureStat> feats;  // cleared when the node splits
    double since_check = 0;
  };

  std::int32_t route(std::span<const double> row) const;
  void try_split(std::int32_t leaf);

  HoeffdingParams params_;
  std::vector<Node> nodes_;
  std::size_t n_features_ = 0;
};

}  // namespace fairsim::learn

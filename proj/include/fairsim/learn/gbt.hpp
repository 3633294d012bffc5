#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fairsim::learn {

struct GbtParams {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double reg_lambda = 1.0;
};

// Binary split node; leaves carry the already-shrunken output value.
struct GbtNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

struct GbtTree {
  std::vector<GbtNode> nodes;
  double predict(std::span<const double> row) const;
};

// Gradient-boosted trees on logistic loss with second-order leaf values.
// Sample weights are rescaled to mean one on entry, so uniformly scaling
// all weights cannot change the fit. Appending never mutates earlier
// trees, which lets a fitted model double as the cache for incremental
// updates.
class GbtModel {
 public:
  static GbtModel fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      std::span<const double> weights, const GbtParams& params = {});

  void append(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
              std::span<const double> weights, int n_new_trees);

  double predict_margin_one(std::span<const double> row) const;
  double predict_proba_one(std::span<const double> row) const;
  std::vector<double> predict_proba(const std::vector<std::vector<double>>& x) const;
  std::vector<int> predict(const std::vector<std::vector<double>>& x,
                           double threshold = 0.5) const;

  bool fitted() const { return fitted_; }
  const GbtParams& params() const { return params_; }
  double base_score() const { return base_score_; }
  const std::vector<GbtTree>& trees() const { return trees_; }

  std::string to_json() const;
  static GbtModel from_json(const std::string& text);

 private:
  void boost(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
             const std::vector<double>& w, std::vector<double>& margins, int rounds);

  GbtParams params_;
  double base_score_ = 0.0;  // log odds of the weighted base rate
  std::vector<GbtTree> trees_;
  bool fitted_ = false;
};

}  // namespace fairsim::learn

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairsim/types.hpp"

namespace fairsim::mitigate {

// A (group, label) cell with zero support makes frequency reweighing
// meaningless; the thrower reports the observed counts.
struct DegenerateCellError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-cell instance weights, indexed by group and binary label.
struct WeightTable {
  double w[kNumGroups][2] = {{1, 1}, {1, 1}};

  double at(Group g, int label) const { return w[group_index(g)][label]; }
  // per-row weights for an aligned (group, label) dataset
  std::vector<double> expand(std::span<const Group> groups, std::span<const int> labels) const;
};

// w(g,y) = P(y) * P(g) / P(g,y) from empirical frequencies. Preserves total
// weight mass: sum over rows of w(g_i, y_i) equals the row count.
WeightTable kamiran_calders_weights(std::span<const Group> groups, std::span<const int> labels);

// Fixed per-group weights applied to both label cells.
WeightTable manual_weights(double weight_a = 0.5, double weight_b = 1.5);

struct EmaOptions {
  double ema_lambda = 0.01;
  double w_min = 0.1;
  double w_max = 10.0;
};

// Streaming reweigher: exponentially weighted moving averages of the label,
// group, and joint rates feed the same ratio as the batch table, clipped
// into [w_min, w_max]. The first instance of a never-seen cell gets weight 1.
class EmaReweigher {
 public:
  using Options = EmaOptions;

  explicit EmaReweigher(Options opt = Options());

  // updates all EMAs with this observation, then emits its weight
  double update(Group g, int label);

  // the clipped weight the current state assigns to a (g, y) cell; update()
  // emits weight(g, y) except on a cell's first observation
  double weight(Group g, int label) const;

  double p_label() const { return p_y_; }    // P(y = 1)
  double p_group_a() const { return p_a_; }  // P(g = A)
  double p_cell(Group g, int label) const { return p_gy_[group_index(g)][label]; }
  std::uint64_t observations() const { return n_; }
  const Options& options() const { return opt_; }

 private:
  Options opt_;
  double p_y_ = 0.5;
  double p_a_ = 0.5;
  double p_gy_[kNumGroups][2] = {{0.25, 0.25}, {0.25, 0.25}};
  bool seen_[kNumGroups][2] = {{false, false}, {false, false}};
  std::uint64_t n_ = 0;
};

}  // namespace fairsim::mitigate

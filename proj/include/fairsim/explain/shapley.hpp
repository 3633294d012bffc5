#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fairsim::explain {

// Interventional value function over a frozen model: v(S) is the mean model
// output across background rows with the features in S overridden by the
// explained instance. Subsets are bitmasks over feature indices.
class ValueFunction {
 public:
  using Model = std::function<double(const std::vector<double>&)>;

  ValueFunction(Model model, std::vector<std::vector<double>> background,
                std::vector<double> instance);

  double eval(std::uint32_t subset) const;
  int n_features() const { return static_cast<int>(instance_.size()); }
  const std::vector<double>& instance() const { return instance_; }
  const std::vector<std::vector<double>>& background() const { return background_; }

 private:
  Model model_;
  std::vector<std::vector<double>> background_;
  std::vector<double> instance_;
};

// Order-2 Shapley-Taylor decomposition of v(N) - v(empty): per-feature main
// effects plus one term per unordered feature pair, summing exactly to the
// prediction shift (efficiency).
struct ShapleyExplanation {
  std::vector<std::string> feature_names;
  std::vector<double> phi;       // main effects, aligned with feature_names
  std::vector<double> phi_pair;  // packed upper triangle, see pair_index
  double baseline = 0;           // v(empty)
  double prediction = 0;         // v(N)

  int n_features() const { return static_cast<int>(phi.size()); }
  static std::size_t pair_index(int n, int i, int j);
  double pair(int i, int j) const;  // symmetric accessor
};

// Exact enumeration over all 2^d subsets; throws for d > 15 (a sampling
// approximation would be needed beyond that, which this tool does not do).
ShapleyExplanation shapley_order2(const ValueFunction& vf,
                                  std::vector<std::string> feature_names = {});

}  // namespace fairsim::explain

#include "fairsim/explain/shapley.hpp"

#include <bit>
#include <stdexcept>

namespace fairsim::explain {

ValueFunction::ValueFunction(Model model, std::vector<std::vector<double>> background,
                             std::vector<double> instance)
    : model_(std::move(model)),
      background_(std::move(background)),
      instance_(std::move(instance)) {
  if (!model_) throw std::invalid_argument("ValueFunction: null model");
  if (background_.empty()) throw std::invalid_argument("ValueFunction: empty background");
  if (instance_.empty()) throw std::invalid_argument("ValueFunction: empty instance");
  for (const auto& row : background_)
    if (row.size() != instance_.size())
      throw std::invalid_argument("ValueFunction: background width mismatch");
}

double ValueFunction::eval(std::uint32_t subset) const {
  const int d = n_features();
  if (d < 32 && subset >> d)
    throw std::invalid_argument("ValueFunction: subset has bits beyond the feature count");
  double total = 0;
  std::vector<double> hybrid(instance_.size());
  for (const auto& row : background_) {
    for (int i = 0; i < d; ++i) hybrid[i] = (subset >> i) & 1u ? instance_[i] : row[i];
    total += model_(hybrid);
  }
  return total / static_cast<double>(background_.size());
}

std::size_t ShapleyExplanation::pair_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n || i == j) throw std::out_of_range("ShapleyExplanation: bad pair");
  // offset of row i in the packed upper triangle, then the column
  return static_cast<std::size_t>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
}

double ShapleyExplanation::pair(int i, int j) const {
  return phi_pair[pair_index(n_features(), i, j)];
}

ShapleyExplanation shapley_order2(const ValueFunction& vf, std::vector<std::string> feature_names) {
  const int d = vf.n_features();
  if (d > 15)
    throw std::invalid_argument(
        "shapley_order2: exact enumeration is limited to 15 features; larger models need a "
        "sampling approximation");
  if (feature_names.empty())
    for (int i = 0; i < d; ++i) feature_names.push_back("f" + std::to_string(i));
  if (static_cast<int>(feature_names.size()) != d)
    throw std::invalid_argument("shapley_order2: feature name count mismatch");

  const std::uint32_t full = (1u << d) - 1;
  std::vector<double> v(full + 1);
  for (std::uint32_t s = 0; s <= full; ++s) v[s] = vf.eval(s);

  // 1 / C(d-1, t) weights for the pair average over context sizes
  std::vector<double> choose(d, 1.0);
  for (int t = 1; t < d; ++t) choose[t] = choose[t - 1] * (d - t) / t;

  ShapleyExplanation out;
  out.feature_names = std::move(feature_names);
  out.baseline = v[0];
  out.prediction = v[full];
  out.phi.resize(d);
  for (int i = 0; i < d; ++i) out.phi[i] = v[1u << i] - v[0];

  out.phi_pair.assign(static_cast<std::size_t>(d) * (d - 1) / 2, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const std::uint32_t bi = 1u << i, bj = 1u << j;
      const std::uint32_t rest = full & ~(bi | bj);
      double acc = 0;
      // iterate all subsets of the remaining features, including empty
      std::uint32_t t = 0;
      while (true) {
        // grouped so an unread i or j cancels bitwise to an exact zero
        const double delta = (v[t | bi | bj] - v[t | bi]) - (v[t | bj] - v[t]);
        acc += delta / choose[std::popcount(t)];
        if (t == rest) break;
        t = (t - rest) & rest;  // next subset of rest
      }
      out.phi_pair[ShapleyExplanation::pair_index(d, i, j)] = 2.0 * acc / d;
    }
  return out;
}

}  // namespace fairsim::explain

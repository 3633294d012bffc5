#include "fairsim/mitigate/reweigh.hpp"

#include <algorithm>
#include <sstream>

namespace fairsim::mitigate {

std::vector<double> WeightTable::expand(std::span<const Group> groups,
                                        std::span<const int> labels) const {
  if (groups.size() != labels.size())
    throw std::invalid_argument("WeightTable::expand: size mismatch");
  std::vector<double> out;
  out.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) out.push_back(at(groups[i], labels[i]));
  return out;
}

WeightTable kamiran_calders_weights(std::span<const Group> groups, std::span<const int> labels) {
  if (groups.size() != labels.size() || groups.empty())
    throw std::invalid_argument("kamiran_calders_weights: bad input");
  double cell[kNumGroups][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("kamiran_calders_weights: labels must be 0/1");
    cell[group_index(groups[i])][labels[i]] += 1;
  }
  const double n = static_cast<double>(groups.size());
  const double n_a = cell[0][0] + cell[0][1];
  const double n_pos = cell[0][1] + cell[1][1];

  WeightTable t;
  for (int g = 0; g < kNumGroups; ++g)
    for (int y = 0; y < 2; ++y) {
      if (cell[g][y] == 0) {
        std::ostringstream msg;
        msg << "kamiran_calders_weights: empty (group,label) cell " << (g == 0 ? "A" : "B") << ","
            << y << "; counts A=(" << cell[0][0] << "," << cell[0][1] << ") B=(" << cell[1][0]
            << "," << cell[1][1] << ")";
        throw DegenerateCellError(msg.str());
      }
      const double p_g = (g == 0 ? n_a : n - n_a) / n;
      const double p_y = (y == 1 ? n_pos : n - n_pos) / n;
      t.w[g][y] = p_y * p_g / (cell[g][y] / n);
    }
  return t;
}

WeightTable manual_weights(double weight_a, double weight_b) {
  if (!(weight_a > 0) || !(weight_b > 0))
    throw std::invalid_argument("manual_weights: weights must be positive");
  WeightTable t;
  t.w[0][0] = t.w[0][1] = weight_a;
  t.w[1][0] = t.w[1][1] = weight_b;
  return t;
}

EmaReweigher::EmaReweigher(Options opt) : opt_(opt) {
  if (!(opt_.ema_lambda > 0) || !(opt_.ema_lambda < 1))
    throw std::invalid_argument("EmaReweigher: lambda must be in (0,1)");
  if (!(opt_.w_min > 0) || opt_.w_min > opt_.w_max)
    throw std::invalid_argument("EmaReweigher: need 0 < w_min <= w_max");
}

double EmaReweigher::update(Group g, int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("EmaReweigher: labels must be 0/1");
  const int gi = group_index(g);
  const bool first = !seen_[gi][label];
  seen_[gi][label] = true;
  ++n_;

  const double lam = opt_.ema_lambda;
  p_y_ = (1 - lam) * p_y_ + lam * label;
  p_a_ = (1 - lam) * p_a_ + lam * (gi == 0 ? 1.0 : 0.0);
  for (int gg = 0; gg < kNumGroups; ++gg)
    for (int yy = 0; yy < 2; ++yy)
      p_gy_[gg][yy] = (1 - lam) * p_gy_[gg][yy] + lam * (gg == gi && yy == label ? 1.0 : 0.0);

  if (first) return 1.0;
  return weight(g, label);
}

double EmaReweigher::weight(Group g, int label) const {
  if (label != 0 && label != 1) throw std::invalid_argument("EmaReweigher: labels must be 0/1");
  const int gi = group_index(g);
  const double py = label == 1 ? p_y_ : 1.0 - p_y_;
  const double pg = gi == 0 ? p_a_ : 1.0 - p_a_;
  const double pgy = p_gy_[gi][label];
  if (pgy <= 0) return opt_.w_max;
  return std::clamp(py * pg / pgy, opt_.w_min, opt_.w_max);
}

}  // namespace fairsim::mitigate

#include "fairsim/mitigate/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairsim::mitigate {

namespace {

ViolationReport violation_impl(ConstraintKind kind, std::span<const double> score,
                               std::span<const Group> groups, std::span<const int> labels) {
  if (score.size() != groups.size() || score.size() != labels.size())
    throw std::invalid_argument("constraint_violation: size mismatch");

  ViolationReport r;
  r.kind = kind;
  if (kind == ConstraintKind::kDemographicParity) {
    double sum[kNumGroups] = {0, 0}, cnt[kNumGroups] = {0, 0};
    double total = 0;
    for (std::size_t i = 0; i < score.size(); ++i) {
      const int g = group_index(groups[i]);
      sum[g] += score[i];
      cnt[g] += 1;
      total += score[i];
    }
    const double n = static_cast<double>(score.size());
    const double pooled = n > 0 ? total / n : 0.0;
    for (int g = 0; g < kNumGroups; ++g) {
      r.names.push_back(std::string("dp:") + (g == 0 ? "A" : "B"));
      const bool ok = cnt[g] > 0;
      r.defined.push_back(ok);
      r.gamma.push_back(ok ? sum[g] / cnt[g] - pooled : 0.0);
      if (!ok) r.any_undefined = true;
    }
  } else {
    double sum[kNumGroups][2] = {{0, 0}, {0, 0}}, cnt[kNumGroups][2] = {{0, 0}, {0, 0}};
    double lsum[2] = {0, 0}, lcnt[2] = {0, 0};
    for (std::size_t i = 0; i < score.size(); ++i) {
      if (labels[i] != 0 && labels[i] != 1)
        throw std::invalid_argument("constraint_violation: labels must be 0/1");
      const int g = group_index(groups[i]);
      sum[g][labels[i]] += score[i];
      cnt[g][labels[i]] += 1;
      lsum[labels[i]] += score[i];
      lcnt[labels[i]] += 1;
    }
    for (int g = 0; g < kNumGroups; ++g)
      for (int y = 0; y < 2; ++y) {
        r.names.push_back(std::string("eo:") + (g == 0 ? "A" : "B") + "|y=" + (y ? "1" : "0"));
        const bool ok = cnt[g][y] > 0;
        r.defined.push_back(ok);
        r.gamma.push_back(ok ? sum[g][y] / cnt[g][y] - lsum[y] / lcnt[y] : 0.0);
        if (!ok) r.any_undefined = true;
      }
  }
  for (double v : r.gamma) r.max_abs = std::max(r.max_abs, std::abs(v));
  return r;
}

}  // namespace

std::string to_string(ConstraintKind kind) {
  return kind == ConstraintKind::kDemographicParity ? "demographic_parity" : "equalized_odds";
}

ViolationReport constraint_violation(ConstraintKind kind, std::span<const int> predictions,
                                     std::span<const Group> groups, std::span<const int> labels) {
  std::vector<double> score;
  score.reserve(predictions.size());
  for (int p : predictions) {
    if (p != 0 && p != 1)
      throw std::invalid_argument("constraint_violation: predictions must be 0/1");
    score.push_back(p);
  }
  return violation_impl(kind, score, groups, labels);
}

ViolationReport constraint_violation(ConstraintKind kind, std::span<const double> probabilities,
                                     std::span<const Group> groups, std::span<const int> labels) {
  return violation_impl(kind, probabilities, groups, labels);
}

}  // namespace fairsim::mitigate

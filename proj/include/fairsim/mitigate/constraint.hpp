#pragma once

#include <span>
#include <string>
#include <vector>

#include "fairsim/types.hpp"

namespace fairsim::mitigate {

enum class ConstraintKind {
  kDemographicParity,  // per-group approval rate vs pooled rate
  kEqualizedOdds,      // per-(group,label) approval rate vs label-conditional rate
};

std::string to_string(ConstraintKind kind);

// Signed per-component constraint gaps. Component order is frozen:
// DP -> [A, B]; EO -> [(A,y=0), (A,y=1), (B,y=0), (B,y=1)].
// Components with an empty cell read 0 and are flagged undefined.
struct ViolationReport {
  ConstraintKind kind = ConstraintKind::kDemographicParity;
  std::vector<double> gamma;
  std::vector<bool> defined;
  std::vector<std::string> names;
  double max_abs = 0;
  bool any_undefined = false;
};

ViolationReport constraint_violation(ConstraintKind kind, std::span<const int> predictions,
                                     std::span<const Group> groups, std::span<const int> labels);

// Probability overload: rates are expectations of the randomized decision.
ViolationReport constraint_violation(ConstraintKind kind, std::span<const double> probabilities,
                                     std::span<const Group> groups, std::span<const int> labels);

}  // namespace fairsim::mitigate

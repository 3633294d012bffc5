#include "fairsim/data/dataset.hpp"

#include <algorithm>

namespace fairsim::data {

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "wealth",     "education",   "trust",   "fin_lit",  "credit_score",
      "loan_hist",  "loan_amount", "has_job", "has_car",  "has_house",
  };
  return names;
}

int feature_index(const std::string& name) {
  const auto& names = feature_names();
  for (int i = 0; i < kFeatureCount; ++i)
    if (names[static_cast<std::size_t>(i)] == name) return i;
  throw SchemaError("unknown feature name: '" + name + "'");
}

bool is_integer_feature(int index) {
  return index == kEducation || index == kLoanHist;
}

bool is_boolean_feature(int index) {
  return index == kHasJob || index == kHasCar || index == kHasHouse;
}

VisibilityMask VisibilityMask::defaults() {
  return VisibilityMask{{"wealth", "education", "trust", "credit_score"}};
}

VisibilityMask VisibilityMask::none() { return VisibilityMask{}; }

void VisibilityMask::validate() const {
  for (const std::string& name : hidden) feature_index(name);  // throws on unknown
  if (hidden.size() >= static_cast<std::size_t>(kFeatureCount))
    throw SchemaError("visibility mask hides every feature");
}

std::vector<int> VisibilityMask::visible_indices() const {
  validate();
  std::vector<int> out;
  const auto& names = feature_names();
  for (int i = 0; i < kFeatureCount; ++i)
    if (!hidden.count(names[static_cast<std::size_t>(i)])) out.push_back(i);
  return out;
}

std::vector<std::string> VisibilityMask::visible_names() const {
  std::vector<std::string> out;
  for (int i : visible_indices()) out.push_back(feature_names()[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<double> mask_features(const DatasetRow& row, const VisibilityMask& mask) {
  std::vector<double> out;
  for (int i : mask.visible_indices()) out.push_back(row.features[static_cast<std::size_t>(i)]);
  return out;
}

ModelInput mask_dataset(std::span<const DatasetRow> rows, const VisibilityMask& mask) {
  ModelInput in;
  in.feature_names = mask.visible_names();
  std::vector<int> idx = mask.visible_indices();
  in.x.reserve(rows.size());
  in.y.reserve(rows.size());
  in.groups.reserve(rows.size());
  for (const DatasetRow& r : rows) {
    std::vector<double> v;
    v.reserve(idx.size());
    for (int i : idx) v.push_back(r.features[static_cast<std::size_t>(i)]);
    in.x.push_back(std::move(v));
    in.y.push_back(r.label ? 1 : 0);
    in.groups.push_back(r.group);
  }
  return in;
}

}  // namespace fairsim::data

#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fairsim/common.hpp"
#include "fairsim/types.hpp"

namespace fairsim::data {

inline constexpr int kDatasetSchemaVersion = 1;

// Feature indices; the order here is the canonical column order everywhere
// (exports, masks, model inputs).
enum Feature : int {
  kWealth = 0,
  kEducation,
  kTrust,
  kFinLit,
  kCreditScore,
  kLoanHist,
  kLoanAmount,
  kHasJob,
  kHasCar,
  kHasHouse,
  kFeatureCount,
};

const std::array<std::string, kFeatureCount>& feature_names();
int feature_index(const std::string& name);  // throws SchemaError on unknown names
bool is_integer_feature(int index);          // education, loan_hist
bool is_boolean_feature(int index);          // has_job, has_car, has_house

// One loan application. Features are stored as doubles in schema order;
// ordinal and boolean attributes are widened on capture.
struct DatasetRow {
  int entity_id = -1;
  int timestep = -1;
  Group group = Group::A;
  std::array<double, kFeatureCount> features{};
  bool label = false;        // loan approved
  double raw_score = 0.0;    // diagnostics only
  double biased_score = 0.0; // diagnostics only

  bool operator==(const DatasetRow&) const = default;
};

// Which feature columns are withheld from model inputs. The default hides
// the attributes a lender cannot observe directly.
struct VisibilityMask {
  std::set<std::string> hidden;

  static VisibilityMask defaults();  // wealth, education, trust, credit_score
  static VisibilityMask none();      // everything visible

  // Throws SchemaError on unknown feature names or if nothing stays visible.
  void validate() const;

  std::vector<int> visible_indices() const;     // schema order
  std::vector<std::string> visible_names() const;
};

// Visible feature values of one row, in schema order.
std::vector<double> mask_features(const DatasetRow& row, const VisibilityMask& mask);

// The only gate between raw rows and anything that fits a model: feature
// matrices carry masked columns only, while labels and group membership ride
// alongside for training, mitigation and disaggregated evaluation.
struct ModelInput {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<Group> groups;

  std::size_t size() const { return x.size(); }
};

ModelInput mask_dataset(std::span<const DatasetRow> rows, const VisibilityMask& mask);

}  // namespace fairsim::data

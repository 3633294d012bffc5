#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairsim/kvfile.hpp"
#include "fairsim/types.hpp"

namespace fairsim::sim {

// Education is a small ordinal scale, 0 (none) .. 4 (postgraduate).
inline constexpr int kEducationLevels = 5;

// Per-group sampling parameters for freshly spawned entities.
struct GroupParams {
  double wealth_min = 0.0;
  double wealth_max = 0.0;
  double p_has_job = 0.0;
  double p_has_car = 0.0;
  double p_has_house = 0.0;
  std::vector<double> education_probs;  // one entry per education level
  double loan_hist_mean = 0.0;          // Poisson mean of prior loan count
};

struct ScenarioConfig {
  // Bias knobs. lbl_beta scales qualification scores up for group A and down
  // for group B; rep_alpha is the probability that a new entity is group A.
  double lbl_beta = 0.0;
  double rep_alpha = 0.5;

  int n_steps = 10000;
  double spawn_prob = 0.6;          // chance a new entity enters per step
  double qualify_threshold = 0.5;   // biased score at/above this qualifies
  double label_flip_prob = 0.05;    // symmetric label noise
  double trust_join_threshold = 0.6;
  double trust_adapt_rate = 0.1;    // step size toward peer average trust
  double transaction_prob = 0.2;    // chance of one exchange per step
  double transaction_fraction = 0.01;  // share of poorer endpoint's wealth moved
  std::uint64_t rng_seed = 1;

  GroupParams group_a;
  GroupParams group_b;

  const GroupParams& params(Group g) const { return g == Group::A ? group_a : group_b; }

  // Throws ConfigError on out-of-range values.
  void validate() const;

  static ScenarioConfig defaults();
};

inline constexpr int kConfigSchemaVersion = 1;

// Plain-text round trip (see KvFile for the format).
ScenarioConfig scenario_from_kv(const KvFile& kv, const std::string& prefix = "scenario");
void scenario_to_kv(const ScenarioConfig& cfg, KvFile& kv, const std::string& prefix = "scenario");
ScenarioConfig load_scenario_file(const std::string& path);
void save_scenario_file(const ScenarioConfig& cfg, const std::string& path);

}  // namespace fairsim::sim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairsim/kvfile.hpp"
#include "fairsim/sim/config.hpp"

namespace fairsim::run {

inline constexpr int kPlanSchemaVersion = 1;

// The five mitigation variants, in report order.
const std::vector<std::string>& all_variants();
bool known_variant(const std::string& id);
bool is_eg_variant(const std::string& id);

// Scenario grid x variants x pipelines x seeds. Defaults give the 16-cell
// grid at desk scale; full scale raises n_steps to 10000.
struct ExperimentPlan {
  std::vector<double> lbl_values = {0.0, 0.4, 0.5, 0.6};
  std::vector<double> rep_values = {0.5, 0.6, 0.7, 0.8};
  std::vector<std::string> variants = all_variants();
  std::vector<std::string> pipelines = {"offline", "online"};
  std::vector<std::uint64_t> seeds = {1, 2};
  int n_steps = 2000;
  int jobs = 1;
  std::string out_dir = "out";
  sim::ScenarioConfig base = sim::ScenarioConfig::defaults();

  void validate() const;  // throws ConfigError

  static ExperimentPlan defaults() { return {}; }
};

ExperimentPlan plan_from_kv(const KvFile& kv);
void plan_to_kv(const ExperimentPlan& plan, KvFile& kv);
ExperimentPlan load_plan_file(const std::string& path);
void save_plan_file(const ExperimentPlan& plan, const std::string& path);

// One unit of work in the grid.
struct CellId {
  double lbl = 0;
  double rep = 0;
  std::string pipeline;
  std::string variant;
  std::uint64_t seed = 0;
};

std::string scenario_tag(double lbl, double rep);  // "lbl0.4_rep0.5"

// <out>/results/<tag>/<pipeline>/<variant>/seed_<k>
std::string cell_dir(const ExperimentPlan& plan, const CellId& cell);
// <out>/datasets/<tag>/seed_<k>.csv
std::string dataset_path(const ExperimentPlan& plan, double lbl, double rep,
                         std::uint64_t seed);

// Deterministic per-(scenario, seed) generator seed.
std::uint64_t dataset_seed(std::uint64_t plan_seed, double lbl, double rep);

// The plan's scenario template with the cell's bias knobs and seed applied.
sim::ScenarioConfig scenario_for(const ExperimentPlan& plan, double lbl, double rep,
                                 std::uint64_t seed);

}  // namespace fairsim::run

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "fairsim/data/dataset.hpp"
#include "fairsim/metrics/metrics.hpp"

namespace fairsim::run {

// Evaluation protocol constants. Offline holds out the most recent fifth of
// applications; online scores prequentially after the warmup prefix.
inline constexpr std::size_t kWarmupRows = 500;
inline constexpr std::size_t kOnlineEgWindow = 100;
inline constexpr std::size_t kCalibrationInterval = 500;
inline constexpr int kOfflineCandidates = 3;
inline constexpr int kOnlineCandidates = 10;
inline constexpr int kOnlineEgAppendTrees = 10;

struct PipelineResult {
  metrics::PerformanceReport performance;
  std::map<Group, metrics::PerformanceReport> per_group;
  metrics::FairnessReport fairness;
  bool converged = true;   // only EG variants can clear this
  std::string model_json;  // persisted predictor state
};

PipelineResult run_offline(const data::ModelInput& full, const std::string& variant,
                           std::uint64_t tune_seed);
PipelineResult run_online(const data::ModelInput& full, const std::string& variant,
                          std::uint64_t tune_seed);

// Probability predictor over a masked feature row, for explanations.
using Proba = std::function<double(const std::vector<double>&)>;

// Offline predictors (and online EG ensembles) load straight from the
// persisted JSON; online Hoeffding pipelines are rebuilt by replaying the
// stream, which is deterministic given the same inputs and tune seed.
Proba predictor_from_json(const std::string& model_json);
Proba online_predictor_rebuild(const data::ModelInput& full, const std::string& variant,
                               std::uint64_t tune_seed);

// Row index where the offline test segment starts (time-ordered 80/20).
std::size_t offline_test_start(std::size_t n_rows);

}  // namespace fairsim::run

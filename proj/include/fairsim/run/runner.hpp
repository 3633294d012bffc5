#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairsim/run/pipeline.hpp"
#include "fairsim/run/plan.hpp"

namespace fairsim::run {

struct RunRecord {
  CellId cell;
  std::uint64_t fingerprint = 0;  // dataset fingerprint, shared by all variants of a cell
  bool ok = false;
  std::string status = "pending";  // "ok" or "failed: <reason>"
  PipelineResult result;           // meaningful only when ok
};

struct RunSummary {
  std::vector<RunRecord> records;  // grid order: scenario, seed, pipeline, variant
  int failed = 0;
  metrics::RankTable offline_ranks;
  metrics::RankTable online_ranks;
};

// Evaluates the whole grid. Each (scenario, seed) dataset is generated once
// and exported; every cell then writes metrics.json and model.json under its
// cell directory. A cell failure is recorded and the run continues.
// Aggregate tables land in <out>/results_tables.
RunSummary run_plan(const ExperimentPlan& plan);

// Generates and exports the plan's datasets without evaluating anything.
void generate_datasets(const ExperimentPlan& plan);

// Rebuilds the aggregate tables from the metrics.json files already on
// disk; cells without one are reported as failed.
RunSummary aggregate_from_disk(const ExperimentPlan& plan);

struct ExplainRequest {
  double lbl = 0.4;
  double rep = 0.6;
  std::uint64_t seed = 1;
  std::string pipeline = "offline";
  std::string variant = "eg_dp";  // mitigated side; the baseline is always included
  long long instance = -1;        // row index, or -1 for a seeded evaluation-segment draw
  int top_k = 6;                  // interaction edges kept per graph
};

// Second-order attribution of one instance under the baseline and the
// mitigated model of an already-run cell. Writes <side>_shapley.json,
// <side>_graph.json and <side>_graph.dot per side plus instance.json, and
// returns the directory they were written to.
std::string explain_cell(const ExperimentPlan& plan, const ExplainRequest& req);

}  // namespace fairsim::run

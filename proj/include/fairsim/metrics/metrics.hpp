#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairsim/types.hpp"

namespace fairsim::metrics {

// Probabilities are clamped into [kProbEps, 1-kProbEps] before taking logs.
inline constexpr double kProbEps = 1e-15;

// Decision threshold applied to calibrated probabilities everywhere.
inline constexpr double kDecisionThreshold = 0.5;

double log_loss(std::span<const double> probs, std::span<const int> labels);

// Mann-Whitney AUC with average ranks for tied scores; nullopt when only one
// class is present.
std::optional<double> roc_auc(std::span<const double> probs, std::span<const int> labels);

std::vector<int> threshold_predictions(std::span<const double> probs,
                                       double threshold = kDecisionThreshold);

struct PerformanceReport {
  double accuracy = 0;
  double precision = 0;  // 0 when nothing is predicted positive
  double recall = 0;     // 0 when no positive labels exist
  double log_loss = 0;
  std::optional<double> roc_auc;
  double approval_rate = 0;  // share of positive predictions
  int support = 0;
};

PerformanceReport performance_metrics(std::span<const double> probs,
                                      std::span<const int> labels,
                                      double threshold = kDecisionThreshold);

// Per-group performance on the same prediction vector.
std::map<Group, PerformanceReport> group_disaggregate(std::span<const double> probs,
                                                      std::span<const int> labels,
                                                      std::span<const Group> groups,
                                                      double threshold = kDecisionThreshold);

// Signed gaps, protected minus privileged: negative values favor group A.
//   spd = approval(B) - approval(A)
//   eod = tpr(B) - tpr(A)
struct FairnessReport {
  double spd = 0;
  double eod = 0;
  double approval_a = 0, approval_b = 0;
  double tpr_a = 0, tpr_b = 0;
  // eod needs positives in both groups; spd needs members in both groups.
  bool spd_defined = false;
  bool eod_defined = false;

  static FairnessReport from_rates(double approval_a, double approval_b, double tpr_a,
                                   double tpr_b);
};

FairnessReport fairness_metrics(std::span<const int> preds, std::span<const int> labels,
                                std::span<const Group> groups);

// Composite scores across the variants of one scenario. Each performance
// component (auc, accuracy, precision, recall, inverted log loss) is min-max
// normalized across variants before averaging; components missing for any
// variant, or constant across variants, contribute a neutral 0.5.
// fairness = -mean(|spd|, |eod|), skipping undefined gaps.
struct CompositeScores {
  double performance = 0;
  double fairness = 0;
  bool degenerate = false;  // fewer than two variants to normalize across
};

std::vector<CompositeScores> composite_scores(std::span<const PerformanceReport> perf,
                                              std::span<const FairnessReport> fair);

// Competition ranks (ties share the minimum rank), 1 = best.
std::vector<int> min_ranks_desc(std::span<const double> scores);

// Cross-scenario rank bookkeeping for a fixed variant list.
struct RankTable {
  std::vector<std::string> variants;
  struct ScenarioRow {
    std::string scenario;
    std::vector<int> perf_rank;
    std::vector<int> fair_rank;
  };
  std::vector<ScenarioRow> rows;
  // counts[v] of rank-1 / rank-2 finishes; ties credit every holder.
  std::vector<int> perf_first, perf_second, fair_first, fair_second;
};

RankTable rank_variants(const std::vector<std::string>& variants,
                        const std::vector<std::pair<std::string, std::vector<CompositeScores>>>&
                            scenario_scores);

}  // namespace fairsim::metrics

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fairsim/learn/gbt.hpp"
#include "fairsim/mitigate/constraint.hpp"
#include "fairsim/types.hpp"

namespace fairsim::mitigate {

struct EgOptions {
  ConstraintKind constraint = ConstraintKind::kDemographicParity;
  double eps = 0.02;          // constraint slack, also the stop threshold for the gap
  double eta = 2.0;           // multiplier learning rate
  int max_iter = 20;          // T
  double bound = 100.0;       // total multiplier mass B
};

// Fits a cost-reduced weighted classifier; receives features, the
// relabeled targets, and the per-row costs as weights.
using EgBuilder = std::function<learn::GbtModel(
    const std::vector<std::vector<double>>& x, const std::vector<int>& y,
    const std::vector<double>& w)>;

// Uniform mixture over the reduction's iterates. For metrics the randomized
// classifier is derandomized through its expected probability.
struct EgEnsemble {
  std::vector<learn::GbtModel> members;
  std::vector<double> mix;  // >= 0, sums to 1
  std::vector<std::vector<double>> multiplier_history;
  EgOptions options;
  bool converged = false;
  double final_gap = 0;

  double predict_proba_one(std::span<const double> row) const;
  std::vector<double> predict_proba(const std::vector<std::vector<double>>& x) const;
  std::vector<int> predict(const std::vector<std::vector<double>>& x,
                           double threshold = 0.5) const;
};

// Exponentiated-gradient reduction: alternates weighted-classification best
// responses against multiplicative multiplier updates on the signed
// constraint pairs, stopping once the duality-gap estimate over the iterate
// set drops below eps.
EgEnsemble eg_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                  const std::vector<Group>& groups, const EgBuilder& builder,
                  const EgOptions& options);

// Convenience wrapper fitting fresh boosters with fixed params.
EgEnsemble eg_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                  const std::vector<Group>& groups, const learn::GbtParams& params,
                  const EgOptions& options);

// Streaming variant: each window runs the same reduction, with the base
// learner step appending boosters to a shared cache. The cache itself
// advances on the plain window (unit weights) after the window's ensemble
// is formed, so constraint corrections never contaminate it. An empty
// cache makes the first window identical to batch eg_fit.
class IncrementalEg {
 public:
  IncrementalEg(learn::GbtParams params, EgOptions options, int append_trees = 10);

  const EgEnsemble& process_window(const std::vector<std::vector<double>>& x,
                                   const std::vector<int>& y, const std::vector<Group>& groups);

  const EgEnsemble& latest() const { return latest_; }
  const learn::GbtModel& cache() const { return cache_; }
  bool has_cache() const { return cache_.fitted(); }
  int windows_processed() const { return windows_; }

 private:
  learn::GbtParams params_;
  EgOptions options_;
  int append_trees_;
  learn::GbtModel cache_;
  EgEnsemble latest_;
  int windows_ = 0;
};

// Runs the stream in fixed-size windows and returns the last ensemble.
EgEnsemble eg_fit_incremental(const std::vector<std::vector<double>>& x,
                              const std::vector<int>& y, const std::vector<Group>& groups,
                              const learn::GbtParams& params, const EgOptions& options,
                              std::size_t window, int append_trees = 10);

}  // namespace fairsim::mitigate

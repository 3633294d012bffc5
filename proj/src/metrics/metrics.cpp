#include "fairsim/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fairsim::metrics {

namespace {

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

}  // namespace

double log_loss(std::span<const double> probs, std::span<const int> labels) {
  check_sizes(probs.size(), labels.size(), "log_loss");
  if (probs.empty()) throw std::invalid_argument("log_loss: empty input");
  double total = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double p = clamp_prob(probs[i]);
    total += labels[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(probs.size());
}

std::optional<double> roc_auc(std::span<const double> probs, std::span<const int> labels) {
  check_sizes(probs.size(), labels.size(), "roc_auc");
  std::size_t n = probs.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y ? 1u : 0u;
  std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

  // Average ranks across tied scores, then the Mann-Whitney U statistic.
  double rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<int> threshold_predictions(std::span<const double> probs, double threshold) {
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
  return out;
}

PerformanceReport performance_metrics(std::span<const double> probs,
                                      std::span<const int> labels, double threshold) {
  check_sizes(probs.size(), labels.size(), "performance_metrics");
  if (probs.empty()) throw std::invalid_argument("performance_metrics: empty input");
  PerformanceReport r;
  r.support = static_cast<int>(probs.size());
  int tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    bool pred = probs[i] >= threshold;
    bool y = labels[i] != 0;
    if (pred && y) ++tp;
    else if (pred && !y) ++fp;
    else if (!pred && y) ++fn;
    else ++tn;
  }
  double n = static_cast<double>(r.support);
  r.accuracy = (tp + tn) / n;
  r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.approval_rate = (tp + fp) / n;
  r.log_loss = log_loss(probs, labels);
  r.roc_auc = roc_auc(probs, labels);
  return r;
}

std::map<Group, PerformanceReport> group_disaggregate(std::span<const double> probs,
                                                      std::span<const int> labels,
                                                      std::span<const Group> groups,
                                                      double threshold) {
  check_sizes(probs.size(), labels.size(), "group_disaggregate");
  check_sizes(probs.size(), groups.size(), "group_disaggregate");
  std::map<Group, PerformanceReport> out;
  for (Group g : {Group::A, Group::B}) {
    std::vector<double> p;
    std::vector<int> y;
    for (std::size_t i = 0; i < probs.size(); ++i)
      if (groups[i] == g) {
        p.push_back(probs[i]);
        y.push_back(labels[i]);
      }
    if (!p.empty()) out[g] = performance_metrics(p, y, threshold);
  }
  return out;
}

FairnessReport FairnessReport::from_rates(double approval_a, double approval_b, double tpr_a,
                                          double tpr_b) {
  FairnessReport r;
  r.approval_a = approval_a;
  r.approval_b = approval_b;
  r.tpr_a = tpr_a;
  r.tpr_b = tpr_b;
  r.spd = approval_b - approval_a;
  r.eod = tpr_b - tpr_a;
  r.spd_defined = true;
  r.eod_defined = true;
  return r;
}

FairnessReport fairness_metrics(std::span<const int> preds, std::span<const int> labels,
                                std::span<const Group> groups) {
  check_sizes(preds.size(), labels.size(), "fairness_metrics");
  check_sizes(preds.size(), groups.size(), "fairness_metrics");
  double n[2] = {0, 0}, pos_pred[2] = {0, 0}, pos_label[2] = {0, 0}, tp[2] = {0, 0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    int g = group_index(groups[i]);
    n[g] += 1;
    if (preds[i]) pos_pred[g] += 1;
    if (labels[i]) {
      pos_label[g] += 1;
      if (preds[i]) tp[g] += 1;
    }
  }
  FairnessReport r;
  r.spd_defined = n[0] > 0 && n[1] > 0;
  if (r.spd_defined) {
    r.approval_a = pos_pred[0] / n[0];
    r.approval_b = pos_pred[1] / n[1];
    r.spd = r.approval_b - r.approval_a;
  }
  r.eod_defined = pos_label[0] > 0 && pos_label[1] > 0;
  if (r.eod_defined) {
    r.tpr_a = tp[0] / pos_label[0];
    r.tpr_b = tp[1] / pos_label[1];
    r.eod = r.tpr_b - r.tpr_a;
  }
  return r;
}

namespace {

// Min-max across variants; a constant column maps everyone to neutral 0.5.
std::vector<double> normalize_column(const std::vector<double>& raw) {
  auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(raw.size(), 0.5);
  if (hi > lo)
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
  return out;
}

}  // namespace

std::vector<CompositeScores> composite_scores(std::span<const PerformanceReport> perf,
                                              std::span<const FairnessReport> fair) {
  check_sizes(perf.size(), fair.size(), "composite_scores");
  std::size_t n = perf.size();
  std::vector<CompositeScores> out(n);
  if (n == 0) return out;

  // With a single variant there is nothing to normalize against: fall back
  // to raw values and flag the result.
  bool degenerate = n < 2;
  bool have_auc = std::all_of(perf.begin(), perf.end(),
                              [](const PerformanceReport& p) { return p.roc_auc.has_value(); });

  // Column-major raw values; log loss inverted after normalization.
  std::vector<std::vector<double>> columns;
  if (have_auc) {
    std::vector<double> c;
    for (const auto& p : perf) c.push_back(*p.roc_auc);
    columns.push_back(std::move(c));
  }
  for (auto field : {&PerformanceReport::accuracy, &PerformanceReport::precision,
                     &PerformanceReport::recall}) {
    std::vector<double> c;
    for (const auto& p : perf) c.push_back(p.*field);
    columns.push_back(std::move(c));
  }
  {
    std::vector<double> c;
    for (const auto& p : perf) c.push_back(p.log_loss);
    if (!degenerate) c = normalize_column(c);
    for (double& v : c) v = 1.0 - v;
    columns.push_back(std::move(c));
  }

  if (!degenerate)
    for (std::size_t col = 0; col + 1 < columns.size(); ++col)
      columns[col] = normalize_column(columns[col]);

  for (std::size_t i = 0; i < n; ++i) {
    double total = 0;
    for (const auto& c : columns) total += c[i];
    out[i].performance = total / static_cast<double>(columns.size());
    out[i].degenerate = degenerate;

    double mass = 0;
    int parts = 0;
    if (fair[i].spd_defined) {
      mass += std::abs(fair[i].spd);
      ++parts;
    }
    if (fair[i].eod_defined) {
      mass += std::abs(fair[i].eod);
      ++parts;
    }
    out[i].fairness = parts > 0 ? -mass / parts : 0.0;
  }
  return out;
}

std::vector<int> min_ranks_desc(std::span<const double> scores) {
  std::vector<int> ranks(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int higher = 0;
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (scores[j] > scores[i]) ++higher;
    ranks[i] = higher + 1;
  }
  return ranks;
}

RankTable rank_variants(
    const std::vector<std::string>& variants,
    const std::vector<std::pair<std::string, std::vector<CompositeScores>>>& scenario_scores) {
  RankTable t;
  t.variants = variants;
  std::size_t v = variants.size();
  t.perf_first.assign(v, 0);
  t.perf_second.assign(v, 0);
  t.fair_first.assign(v, 0);
  t.fair_second.assign(v, 0);
  for (const auto& [scenario, scores] : scenario_scores) {
    if (scores.size() != v)
      throw std::invalid_argument("rank_variants: scores/variants size mismatch");
    std::vector<double> perf, fair;
    for (const auto& s : scores) {
      perf.push_back(s.performance);
      fair.push_back(s.fairness);
    }
    RankTable::ScenarioRow row;
    row.scenario = scenario;
    row.perf_rank = min_ranks_desc(perf);
    row.fair_rank = min_ranks_desc(fair);
    for (std::size_t i = 0; i < v; ++i) {
      if (row.perf_rank[i] == 1) t.perf_first[i]++;
      if (row.perf_rank[i] == 2) t.perf_second[i]++;
      if (row.fair_rank[i] == 1) t.fair_first[i]++;
      if (row.fair_rank[i] == 2) t.fair_second[i]++;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace fairsim::metrics

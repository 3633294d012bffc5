#include "fairsim/mitigate/eg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fairsim::mitigate {

namespace {

// Row-to-component bookkeeping shared by both constraint kinds. Component
// order matches ViolationReport: DP -> [A, B]; EO -> [(A,0),(A,1),(B,0),(B,1)].
struct MomentLayout {
  int n_components = 0;
  std::vector<int> comp_of;       // per row
  std::vector<int> base_of;       // per row: 0 for DP, the label for EO
  std::vector<double> comp_size;  // rows per component
  std::vector<double> base_size;  // rows per base stratum
};

MomentLayout make_layout(ConstraintKind kind, const std::vector<int>& y,
                         const std::vector<Group>& groups) {
  MomentLayout m;
  const std::size_t n = y.size();
  m.comp_of.resize(n);
  m.base_of.resize(n);
  if (kind == ConstraintKind::kDemographicParity) {
    m.n_components = kNumGroups;
    m.comp_size.assign(kNumGroups, 0);
    m.base_size.assign(1, static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      m.comp_of[i] = group_index(groups[i]);
      m.base_of[i] = 0;
      m.comp_size[static_cast<std::size_t>(m.comp_of[i])] += 1;
    }
  } else {
    m.n_components = kNumGroups * 2;
    m.comp_size.assign(static_cast<std::size_t>(m.n_components), 0);
    m.base_size.assign(2, 0);
    for (std::size_t i = 0; i < n; ++i) {
      m.comp_of[i] = group_index(groups[i]) * 2 + y[i];
      m.base_of[i] = y[i];
      m.comp_size[static_cast<std::size_t>(m.comp_of[i])] += 1;
      m.base_size[static_cast<std::size_t>(y[i])] += 1;
    }
  }
  return m;
}

double error_rate(const std::vector<int>& preds, const std::vector<int>& y) {
  double wrong = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) wrong += preds[i] != y[i];
  return wrong / static_cast<double>(preds.size());
}

}  // namespace

double EgEnsemble::predict_proba_one(std::span<const double> row) const {
  double p = 0;
  for (std::size_t m = 0; m < members.size(); ++m)
    p += mix[m] * members[m].predict_proba_one(row);
  return p;
}

std::vector<double> EgEnsemble::predict_proba(const std::vector<std::vector<double>>& x) const {
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(predict_proba_one(row));
  return out;
}

std::vector<int> EgEnsemble::predict(const std::vector<std::vector<double>>& x,
                                     double threshold) const {
  std::vector<int> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(predict_proba_one(row) >= threshold ? 1 : 0);
  return out;
}

EgEnsemble eg_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                  const std::vector<Group>& groups, const EgBuilder& builder,
                  const EgOptions& options) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n || groups.size() != n)
    throw std::invalid_argument("eg_fit: bad input sizes");
  if (options.max_iter < 1 || options.eps < 0 || options.eta <= 0 || options.bound <= 0)
    throw std::invalid_argument("eg_fit: bad options");
  for (int v : y)
    if (v != 0 && v != 1) throw std::invalid_argument("eg_fit: labels must be 0/1");

  const MomentLayout layout = make_layout(options.constraint, y, groups);
  const int K = layout.n_components;
  // one (+, -) multiplier pair per component: gamma_k <= eps and -gamma_k <= eps
  std::vector<double> theta(static_cast<std::size_t>(2 * K), 0.0);

  EgEnsemble ens;
  ens.options = options;

  std::vector<double> gamma_mix(static_cast<std::size_t>(K), 0.0);
  std::vector<double> lambda_mean(static_cast<std::size_t>(2 * K), 0.0);
  std::vector<std::vector<double>> member_gamma;
  std::vector<double> member_err;
  double err_mix = 0;

  std::vector<double> cost(n), w(n);
  std::vector<int> relabel(n);
  for (int t = 0; t < options.max_iter; ++t) {
    // project exp(theta) onto the bounded simplex of total mass <= bound
    std::vector<double> lambda(static_cast<std::size_t>(2 * K));
    double exp_sum = 1.0;  // the implicit slack coordinate
    for (std::size_t j = 0; j < lambda.size(); ++j) {
      lambda[j] = std::exp(theta[j]);
      exp_sum += lambda[j];
    }
    for (double& l : lambda) l = options.bound * l / exp_sum;
    ens.multiplier_history.push_back(lambda);

    // net multiplier per component and the shared base-stratum pull
    std::vector<double> dlam(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k)
      dlam[static_cast<std::size_t>(k)] = lambda[static_cast<std::size_t>(2 * k)] -
                                          lambda[static_cast<std::size_t>(2 * k + 1)];
    std::vector<double> base_pull(layout.base_size.size(), 0.0);
    for (int k = 0; k < K; ++k) {
      if (layout.comp_size[static_cast<std::size_t>(k)] == 0) continue;
      const int b = options.constraint == ConstraintKind::kDemographicParity ? 0 : k % 2;
      base_pull[static_cast<std::size_t>(b)] +=
          dlam[static_cast<std::size_t>(k)] / layout.base_size[static_cast<std::size_t>(b)];
    }

    // cost of switching row i's prediction from 0 to 1
    double max_abs_cost = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double c = (1.0 - 2.0 * y[i]) / static_cast<double>(n);
      const std::size_t k = static_cast<std::size_t>(layout.comp_of[i]);
      if (layout.comp_size[k] > 0) c += dlam[k] / layout.comp_size[k];
      c -= base_pull[static_cast<std::size_t>(layout.base_of[i])];
      cost[i] = c;
      max_abs_cost = std::max(max_abs_cost, std::abs(c));
    }
    if (max_abs_cost == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        relabel[i] = y[i];
        w[i] = 1.0;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        relabel[i] = cost[i] < 0 ? 1 : 0;
        w[i] = std::abs(cost[i]);
      }
    }

    ens.members.push_back(builder(x, relabel, w));
    const std::vector<int> preds = ens.members.back().predict(x);
    const ViolationReport report =
        constraint_violation(options.constraint, std::span<const int>(preds), groups,
                             std::span<const int>(y));
    member_gamma.push_back(report.gamma);
    member_err.push_back(error_rate(preds, y));

    // uniform mixture statistics; error and gamma are both linear in the
    // member predictions
    const double m = static_cast<double>(ens.members.size());
    err_mix = 0;
    std::fill(gamma_mix.begin(), gamma_mix.end(), 0.0);
    for (std::size_t s = 0; s < member_gamma.size(); ++s) {
      err_mix += member_err[s] / m;
      for (int k = 0; k < K; ++k)
        gamma_mix[static_cast<std::size_t>(k)] += member_gamma[s][static_cast<std::size_t>(k)] / m;
    }
    for (std::size_t j = 0; j < lambda_mean.size(); ++j) {
      lambda_mean[j] = 0;
      for (const auto& hist : ens.multiplier_history) lambda_mean[j] += hist[j] / m;
    }

    // infinite slack never binds: the optimal multiplier is zero and the
    // saddle point is the plain weighted fit, so the gap is already closed
    if (std::isinf(options.eps)) {
      ens.final_gap = 0;
      ens.converged = true;
      break;
    }

    // duality gap over the iterate set: the mixture against its worst
    // multiplier, minus the best single member against the mean multiplier
    double worst = 0;
    for (int k = 0; k < K; ++k)
      worst = std::max(worst, std::abs(gamma_mix[static_cast<std::size_t>(k)]) - options.eps);
    const double upper = err_mix + options.bound * std::max(0.0, worst);
    double lower = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < member_gamma.size(); ++s) {
      double l = member_err[s];
      for (int k = 0; k < K; ++k) {
        const double g = member_gamma[s][static_cast<std::size_t>(k)];
        l += lambda_mean[static_cast<std::size_t>(2 * k)] * (g - options.eps);
        l += lambda_mean[static_cast<std::size_t>(2 * k + 1)] * (-g - options.eps);
      }
      lower = std::min(lower, l);
    }
    ens.final_gap = std::max(0.0, upper - lower);
    if (ens.final_gap < options.eps) {
      ens.converged = true;
      break;
    }

    // multiplicative update in log space on the signed pairs
    for (int k = 0; k < K; ++k) {
      const double g = report.gamma[static_cast<std::size_t>(k)];
      theta[static_cast<std::size_t>(2 * k)] += options.eta * (g - options.eps);
      theta[static_cast<std::size_t>(2 * k + 1)] += options.eta * (-g - options.eps);
    }
  }

  ens.mix.assign(ens.members.size(), 1.0 / static_cast<double>(ens.members.size()));
  return ens;
}

EgEnsemble eg_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                  const std::vector<Group>& groups, const learn::GbtParams& params,
                  const EgOptions& options) {
  EgBuilder builder = [&params](const std::vector<std::vector<double>>& bx,
                                const std::vector<int>& by, const std::vector<double>& bw) {
    return learn::GbtModel::fit(bx, by, bw, params);
  };
  return eg_fit(x, y, groups, builder, options);
}

IncrementalEg::IncrementalEg(learn::GbtParams params, EgOptions options, int append_trees)
    : params_(params), options_(options), append_trees_(append_trees) {
  if (append_trees_ < 1) throw std::invalid_argument("IncrementalEg: append_trees must be >= 1");
}

const EgEnsemble& IncrementalEg::process_window(const std::vector<std::vector<double>>& x,
                                                const std::vector<int>& y,
                                                const std::vector<Group>& groups) {
  if (x.empty()) throw std::invalid_argument("IncrementalEg: empty window");
  EgBuilder builder;
  if (cache_.fitted()) {
    builder = [this](const std::vector<std::vector<double>>& bx, const std::vector<int>& by,
                     const std::vector<double>& bw) {
      learn::GbtModel m = cache_;
      m.append(bx, by, bw, append_trees_);
      return m;
    };
  } else {
    builder = [this](const std::vector<std::vector<double>>& bx, const std::vector<int>& by,
                     const std::vector<double>& bw) {
      return learn::GbtModel::fit(bx, by, bw, params_);
    };
  }
  latest_ = eg_fit(x, y, groups, builder, options_);

  // the cache tracks the raw stream so constraint costs never leak forward
  if (cache_.fitted()) {
    cache_.append(x, y, {}, append_trees_);
  } else {
    cache_ = learn::GbtModel::fit(x, y, {}, params_);
  }
  ++windows_;
  return latest_;
}

EgEnsemble eg_fit_incremental(const std::vector<std::vector<double>>& x,
                              const std::vector<int>& y, const std::vector<Group>& groups,
                              const learn::GbtParams& params, const EgOptions& options,
                              std::size_t window, int append_trees) {
  if (window == 0) throw std::invalid_argument("eg_fit_incremental: window must be positive");
  if (x.empty() || y.size() != x.size() || groups.size() != x.size())
    throw std::invalid_argument("eg_fit_incremental: bad input sizes");
  IncrementalEg inc(params, options, append_trees);
  for (std::size_t start = 0; start < x.size(); start += window) {
    const std::size_t end = std::min(start + window, x.size());
    std::vector<std::vector<double>> wx(x.begin() + static_cast<std::ptrdiff_t>(start),
                                        x.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<int> wy(y.begin() + static_cast<std::ptrdiff_t>(start),
                        y.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<Group> wg(groups.begin() + static_cast<std::ptrdiff_t>(start),
                          groups.begin() + static_cast<std::ptrdiff_t>(end));
    inc.process_window(wx, wy, wg);
  }
  return inc.latest();
}

}  // namespace fairsim::mitigate

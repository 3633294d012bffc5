#include "fairsim/sim/entity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairsim::sim {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double edu_norm(int education) {
  return static_cast<double>(education) / (kEducationLevels - 1);
}

double wealth_norm(double wealth) { return clamp01(wealth / kWealthScale); }

// Prior loan counts saturate quickly as a signal; cap before normalizing.
constexpr double kLoanHistCap = 5.0;

double loan_hist_norm(int loan_hist) {
  return std::min(static_cast<double>(loan_hist), kLoanHistCap) / kLoanHistCap;
}

}  // namespace

double derive_trust(int education, double wealth) {
  return clamp01(0.05 + 0.40 * edu_norm(education) + 0.55 * wealth_norm(wealth));
}

double derive_finlit(int education, double wealth, double trust) {
  return clamp01(0.30 * edu_norm(education) + 0.30 * wealth_norm(wealth) + 0.40 * trust);
}

Entity spawn_entity(int id, Group group, const ScenarioConfig& cfg, Rng& rng) {
  const GroupParams& gp = cfg.params(group);
  Entity e;
  e.id = id;
  e.group = group;
  e.wealth = rng.uniform(gp.wealth_min, gp.wealth_max);
  e.education = static_cast<int>(rng.categorical(gp.education_probs));
  e.trust = derive_trust(e.education, e.wealth);
  e.fin_lit = derive_finlit(e.education, e.wealth, e.trust);
  e.loan_hist = rng.poisson(gp.loan_hist_mean);
  e.credit_score = clamp01(0.15 + 0.35 * wealth_norm(e.wealth) + 0.30 * e.fin_lit +
                           0.10 * loan_hist_norm(e.loan_hist) + 0.10 * rng.uniform());
  e.loan_amount = e.wealth * rng.log_uniform(0.5, 1.6);
  e.has_job = rng.bernoulli(gp.p_has_job);
  e.has_car = rng.bernoulli(gp.p_has_car);
  e.has_house = rng.bernoulli(gp.p_has_house);
  e.state = LifecycleState::active;
  return e;
}

double score_applicant(const Entity& e) {
  double s = 0.28 * wealth_norm(e.wealth) +
             0.22 * e.credit_score +
             0.18 * e.fin_lit +
             0.07 * loan_hist_norm(e.loan_hist) +
             0.12 * (e.has_job ? 1.0 : 0.0) +
             0.07 * (e.has_car ? 1.0 : 0.0) +
             0.06 * (e.has_house ? 1.0 : 0.0);
  return clamp01(s);
}

double apply_label_bias(double raw_score, Group g, double beta) {
  double factor = g == Group::A ? 1.0 + beta : 1.0 - beta;
  return clamp01(raw_score * factor);
}

bool draw_label(double biased_score, const ScenarioConfig& cfg, Rng& rng) {
  bool qualified = biased_score >= cfg.qualify_threshold;
  if (rng.bernoulli(cfg.label_flip_prob)) qualified = !qualified;
  return qualified;
}

bool assign_label(Entity& e, double biased_score, const ScenarioConfig& cfg, Rng& rng) {
  if (e.state != LifecycleState::applied)
    throw std::logic_error("assign_label: entity has not applied");
  bool approved = draw_label(biased_score, cfg, rng);
  e.state = LifecycleState::processed;
  return approved;
}

}  // namespace fairsim::sim

#include "fairsim/sim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fairsim::sim {

namespace {

void check_prob(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ConfigError(std::string(name) + " must lie in [0,1]");
}

void validate_group(const GroupParams& gp, const char* label) {
  std::string who(label);
  if (!(gp.wealth_min >= 0) || !(gp.wealth_max >= gp.wealth_min))
    throw ConfigError(who + ": wealth range must satisfy 0 <= min <= max");
  check_prob(gp.p_has_job, (who + ".p_has_job").c_str());
  check_prob(gp.p_has_car, (who + ".p_has_car").c_str());
  check_prob(gp.p_has_house, (who + ".p_has_house").c_str());
  if (gp.education_probs.size() != static_cast<std::size_t>(kEducationLevels))
    throw ConfigError(who + ": education_probs needs exactly " +
                      std::to_string(kEducationLevels) + " entries");
  double total = 0;
  for (double p : gp.education_probs) {
    if (p < 0) throw ConfigError(who + ": education_probs must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError(who + ": education_probs must sum to 1");
  if (!(gp.loan_hist_mean >= 0))
    throw ConfigError(who + ": loan_hist_mean must be non-negative");
}

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << " ";
    os << v[i];
  }
  return os.str();
}

GroupParams group_from_kv(const KvFile& kv, const std::string& p) {
  GroupParams gp;
  gp.wealth_min = kv.get_double(p + ".wealth_min");
  gp.wealth_max = kv.get_double(p + ".wealth_max");
  gp.p_has_job = kv.get_double(p + ".p_has_job");
  gp.p_has_car = kv.get_double(p + ".p_has_car");
  gp.p_has_house = kv.get_double(p + ".p_has_house");
  gp.education_probs = kv.get_double_list(p + ".education_probs");
  gp.loan_hist_mean = kv.get_double(p + ".loan_hist_mean");
  return gp;
}

void group_to_kv(const GroupParams& gp, KvFile& kv, const std::string& p) {
  kv.set(p + ".wealth_min", std::to_string(gp.wealth_min));
  kv.set(p + ".wealth_max", std::to_string(gp.wealth_max));
  kv.set(p + ".p_has_job", std::to_string(gp.p_has_job));
  kv.set(p + ".p_has_car", std::to_string(gp.p_has_car));
  kv.set(p + ".p_has_house", std::to_string(gp.p_has_house));
  kv.set(p + ".education_probs", join_doubles(gp.education_probs));
  kv.set(p + ".loan_hist_mean", std::to_string(gp.loan_hist_mean));
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(lbl_beta >= 0.0 && lbl_beta < 1.0))
    throw ConfigError("lbl_beta must lie in [0,1)");
  check_prob(rep_alpha, "rep_alpha");
  if (n_steps < 0) throw ConfigError("n_steps must be non-negative");
  check_prob(spawn_prob, "spawn_prob");
  check_prob(qualify_threshold, "qualify_threshold");
  check_prob(label_flip_prob, "label_flip_prob");
  check_prob(trust_join_threshold, "trust_join_threshold");
  if (!(trust_adapt_rate > 0.0 && trust_adapt_rate <= 1.0))
    throw ConfigError("trust_adapt_rate must lie in (0,1]");
  check_prob(transaction_prob, "transaction_prob");
  if (!(transaction_fraction >= 0.0 && transaction_fraction <= 1.0))
    throw ConfigError("transaction_fraction must lie in [0,1]");
  validate_group(group_a, "group_a");
  validate_group(group_b, "group_b");
}

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig cfg;
  cfg.group_a.wealth_min = 50.0;
  cfg.group_a.wealth_max = 89.0;
  cfg.group_a.p_has_job = 0.9;
  cfg.group_a.p_has_car = 0.8;
  cfg.group_a.p_has_house = 0.6;
  cfg.group_a.education_probs = {0.02, 0.08, 0.25, 0.35, 0.30};
  cfg.group_a.loan_hist_mean = 2.5;

  cfg.group_b.wealth_min = 30.0;
  cfg.group_b.wealth_max = 59.0;
  cfg.group_b.p_has_job = 0.7;
  cfg.group_b.p_has_car = 0.5;
  cfg.group_b.p_has_house = 0.3;
  cfg.group_b.education_probs = {0.35, 0.35, 0.20, 0.08, 0.02};
  cfg.group_b.loan_hist_mean = 0.6;
  return cfg;
}

ScenarioConfig scenario_from_kv(const KvFile& kv, const std::string& prefix) {
  int version = static_cast<int>(kv.get_int("schema_version", kConfigSchemaVersion));
  if (version != kConfigSchemaVersion)
    throw ConfigError("unsupported config schema_version " + std::to_string(version));
  ScenarioConfig d = ScenarioConfig::defaults();
  ScenarioConfig cfg = d;
  const std::string& p = prefix;
  cfg.lbl_beta = kv.get_double(p + ".lbl_beta", d.lbl_beta);
  cfg.rep_alpha = kv.get_double(p + ".rep_alpha", d.rep_alpha);
  cfg.n_steps = static_cast<int>(kv.get_int(p + ".n_steps", d.n_steps));
  cfg.spawn_prob = kv.get_double(p + ".spawn_prob", d.spawn_prob);
  cfg.qualify_threshold = kv.get_double(p + ".qualify_threshold", d.qualify_threshold);
  cfg.label_flip_prob = kv.get_double(p + ".label_flip_prob", d.label_flip_prob);
  cfg.trust_join_threshold = kv.get_double(p + ".trust_join_threshold", d.trust_join_threshold);
  cfg.trust_adapt_rate = kv.get_double(p + ".trust_adapt_rate", d.trust_adapt_rate);
  cfg.transaction_prob = kv.get_double(p + ".transaction_prob", d.transaction_prob);
  cfg.transaction_fraction =
      kv.get_double(p + ".transaction_fraction", d.transaction_fraction);
  cfg.rng_seed = kv.get_uint(p + ".rng_seed", d.rng_seed);
  if (kv.has(p + ".group_a.wealth_min")) cfg.group_a = group_from_kv(kv, p + ".group_a");
  if (kv.has(p + ".group_b.wealth_min")) cfg.group_b = group_from_kv(kv, p + ".group_b");
  cfg.validate();
  return cfg;
}

void scenario_to_kv(const ScenarioConfig& cfg, KvFile& kv, const std::string& prefix) {
  kv.set("schema_version", std::to_string(kConfigSchemaVersion));
  const std::string& p = prefix;
  kv.set(p + ".lbl_beta", std::to_string(cfg.lbl_beta));
  kv.set(p + ".rep_alpha", std::to_string(cfg.rep_alpha));
  kv.set(p + ".n_steps", std::to_string(cfg.n_steps));
  kv.set(p + ".spawn_prob", std::to_string(cfg.spawn_prob));
  kv.set(p + ".qualify_threshold", std::to_string(cfg.qualify_threshold));
  kv.set(p + ".label_flip_prob", std::to_string(cfg.label_flip_prob));
  kv.set(p + ".trust_join_threshold", std::to_string(cfg.trust_join_threshold));
  kv.set(p + ".trust_adapt_rate", std::to_string(cfg.trust_adapt_rate));
  kv.set(p + ".transaction_prob", std::to_string(cfg.transaction_prob));
  kv.set(p + ".transaction_fraction", std::to_string(cfg.transaction_fraction));
  kv.set(p + ".rng_seed", std::to_string(cfg.rng_seed));
  group_to_kv(cfg.group_a, kv, p + ".group_a");
  group_to_kv(cfg.group_b, kv, p + ".group_b");
}

ScenarioConfig load_scenario_file(const std::string& path) {
  return scenario_from_kv(KvFile::parse_file(path));
}

void save_scenario_file(const ScenarioConfig& cfg, const std::string& path) {
  KvFile kv;
  scenario_to_kv(cfg, kv);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file: " + path);
  out << kv.serialize();
}

}  // namespace fairsim::sim

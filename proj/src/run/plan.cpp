#include "fairsim/run/plan.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <set>

#include "fairsim/rng.hpp"

namespace fairsim::run {

namespace {

std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& vs) {
  std::string out;
  for (double v : vs) {
    if (!out.empty()) out += ' ';
    out += fmt_value(v);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& all_variants() {
  static const std::vector<std::string> ids = {"baseline", "reweigh_auto", "reweigh_manual",
                                               "eg_dp", "eg_eo"};
  return ids;
}

bool known_variant(const std::string& id) {
  const auto& ids = all_variants();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool is_eg_variant(const std::string& id) { return id == "eg_dp" || id == "eg_eo"; }

void ExperimentPlan::validate() const {
  if (lbl_values.empty() || rep_values.empty()) throw ConfigError("plan: empty scenario grid");
  if (variants.empty()) throw ConfigError("plan: no variants");
  for (const auto& v : variants)
    if (!known_variant(v)) throw ConfigError("plan: unknown variant '" + v + "'");
  if (std::set<std::string>(variants.begin(), variants.end()).size() != variants.size())
    throw ConfigError("plan: duplicate variant");
  if (pipelines.empty()) throw ConfigError("plan: no pipelines");
  for (const auto& p : pipelines)
    if (p != "offline" && p != "online") throw ConfigError("plan: unknown pipeline '" + p + "'");
  if (seeds.empty()) throw ConfigError("plan: no seeds");
  if (n_steps < 0) throw ConfigError("plan: n_steps must be >= 0");
  if (jobs < 1) throw ConfigError("plan: jobs must be >= 1");
  if (out_dir.empty()) throw ConfigError("plan: empty output directory");
  for (double lbl : lbl_values)
    for (double rep : rep_values) {
      sim::ScenarioConfig cfg = base;
      cfg.lbl_beta = lbl;
      cfg.rep_alpha = rep;
      cfg.n_steps = n_steps;
      cfg.validate();
    }
}

ExperimentPlan plan_from_kv(const KvFile& kv) {
  ExperimentPlan plan;
  const auto version = kv.get_int("schema_version", kPlanSchemaVersion);
  if (version != kPlanSchemaVersion)
    throw ConfigError("plan: unsupported schema_version " + std::to_string(version));

  if (kv.has("plan.lbl_values")) plan.lbl_values = kv.get_double_list("plan.lbl_values");
  if (kv.has("plan.rep_values")) plan.rep_values = kv.get_double_list("plan.rep_values");
  if (kv.has("plan.variants")) plan.variants = kv.get_string_list("plan.variants");
  if (kv.has("plan.pipelines")) plan.pipelines = kv.get_string_list("plan.pipelines");
  if (kv.has("plan.seeds")) {
    plan.seeds.clear();
    for (double s : kv.get_double_list("plan.seeds"))
      plan.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  plan.n_steps = static_cast<int>(kv.get_int("plan.n_steps", plan.n_steps));
  plan.jobs = static_cast<int>(kv.get_int("plan.jobs", plan.jobs));
  plan.out_dir = kv.get_string("plan.out_dir", plan.out_dir);
  // scenario template; every cell overrides the bias knobs, n_steps and seed
  if (!kv.keys_with_prefix("scenario").empty()) plan.base = sim::scenario_from_kv(kv);
  plan.validate();
  return plan;
}

void plan_to_kv(const ExperimentPlan& plan, KvFile& kv) {
  kv.set("schema_version", std::to_string(kPlanSchemaVersion));
  kv.set("plan.lbl_values", join_doubles(plan.lbl_values));
  kv.set("plan.rep_values", join_doubles(plan.rep_values));
  std::string vs;
  for (const auto& v : plan.variants) vs += (vs.empty() ? "" : " ") + v;
  kv.set("plan.variants", vs);
  std::string ps;
  for (const auto& p : plan.pipelines) ps += (ps.empty() ? "" : " ") + p;
  kv.set("plan.pipelines", ps);
  std::string ss;
  for (auto s : plan.seeds) ss += (ss.empty() ? "" : " ") + std::to_string(s);
  kv.set("plan.seeds", ss);
  kv.set("plan.n_steps", std::to_string(plan.n_steps));
  kv.set("plan.jobs", std::to_string(plan.jobs));
  kv.set("plan.out_dir", plan.out_dir);
  sim::scenario_to_kv(plan.base, kv);
}

ExperimentPlan load_plan_file(const std::string& path) {
  return plan_from_kv(KvFile::parse_file(path));
}

void save_plan_file(const ExperimentPlan& plan, const std::string& path) {
  KvFile kv;
  plan_to_kv(plan, kv);
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot write " + path);
  const std::string text = kv.serialize();
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

std::string scenario_tag(double lbl, double rep) {
  return "lbl" + fmt_value(lbl) + "_rep" + fmt_value(rep);
}

std::string cell_dir(const ExperimentPlan& plan, const CellId& cell) {
  return plan.out_dir + "/results/" + scenario_tag(cell.lbl, cell.rep) + "/" + cell.pipeline +
         "/" + cell.variant + "/seed_" + std::to_string(cell.seed);
}

std::string dataset_path(const ExperimentPlan& plan, double lbl, double rep,
                         std::uint64_t seed) {
  return plan.out_dir + "/datasets/" + scenario_tag(lbl, rep) + "/seed_" +
         std::to_string(seed) + ".csv";
}

std::uint64_t dataset_seed(std::uint64_t plan_seed, double lbl, double rep) {
  const auto a = mix_seed(plan_seed, std::bit_cast<std::uint64_t>(lbl));
  return mix_seed(a, std::bit_cast<std::uint64_t>(rep));
}

sim::ScenarioConfig scenario_for(const ExperimentPlan& plan, double lbl, double rep,
                                 std::uint64_t seed) {
  sim::ScenarioConfig cfg = plan.base;
  cfg.lbl_beta = lbl;
  cfg.rep_alpha = rep;
  cfg.n_steps = plan.n_steps;
  cfg.rng_seed = dataset_seed(seed, lbl, rep);
  return cfg;
}

}  // namespace fairsim::run

#include "fairsim/run/runner.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "fairsim/common.hpp"
#include "fairsim/data/io.hpp"
#include "fairsim/explain/graph.hpp"
#include "fairsim/rng.hpp"
#include "fairsim/sim/simulation.hpp"

namespace fairsim::run {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Child-stream salts; each derived seed is mix_seed(dataset_seed, salt).
constexpr std::uint64_t kOfflineTuneSalt = 0x6f66666c;
constexpr std::uint64_t kOnlineTuneSalt = 0x6f6e6c69;
constexpr std::uint64_t kBackgroundSalt = 0x62676b64;
constexpr std::uint64_t kInstanceSalt = 0x696e7374;

constexpr std::size_t kBackgroundRows = 100;

std::uint64_t tune_seed_for(std::uint64_t ds_seed, const std::string& pipeline) {
  return mix_seed(ds_seed, pipeline == "offline" ? kOfflineTuneSalt : kOnlineTuneSalt);
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fp_hex(std::uint64_t fp) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("short write to " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

json perf_to_json(const metrics::PerformanceReport& p) {
  json j{{"accuracy", p.accuracy},   {"precision", p.precision},
         {"recall", p.recall},       {"log_loss", p.log_loss},
         {"approval_rate", p.approval_rate}, {"support", p.support}};
  if (p.roc_auc)
    j["roc_auc"] = *p.roc_auc;
  else
    j["roc_auc"] = nullptr;
  return j;
}

metrics::PerformanceReport perf_from_json(const json& j) {
  metrics::PerformanceReport p;
  p.accuracy = j.at("accuracy").get<double>();
  p.precision = j.at("precision").get<double>();
  p.recall = j.at("recall").get<double>();
  p.log_loss = j.at("log_loss").get<double>();
  p.approval_rate = j.at("approval_rate").get<double>();
  p.support = j.at("support").get<int>();
  if (!j.at("roc_auc").is_null()) p.roc_auc = j.at("roc_auc").get<double>();
  return p;
}

json fairness_to_json(const metrics::FairnessReport& f) {
  return json{{"spd", f.spd},
              {"eod", f.eod},
              {"approval_a", f.approval_a},
              {"approval_b", f.approval_b},
              {"tpr_a", f.tpr_a},
              {"tpr_b", f.tpr_b},
              {"spd_defined", f.spd_defined},
              {"eod_defined", f.eod_defined}};
}

metrics::FairnessReport fairness_from_json(const json& j) {
  metrics::FairnessReport f;
  f.spd = j.at("spd").get<double>();
  f.eod = j.at("eod").get<double>();
  f.approval_a = j.at("approval_a").get<double>();
  f.approval_b = j.at("approval_b").get<double>();
  f.tpr_a = j.at("tpr_a").get<double>();
  f.tpr_b = j.at("tpr_b").get<double>();
  f.spd_defined = j.at("spd_defined").get<bool>();
  f.eod_defined = j.at("eod_defined").get<bool>();
  return f;
}

std::string metrics_json(const RunRecord& rec) {
  json j{{"schema", "fairsim-metrics"},
         {"version", 1},
         {"scenario", scenario_tag(rec.cell.lbl, rec.cell.rep)},
         {"pipeline", rec.cell.pipeline},
         {"variant", rec.cell.variant},
         {"seed", rec.cell.seed},
         {"dataset_fingerprint", fp_hex(rec.fingerprint)},
         {"converged", rec.result.converged},
         {"performance", perf_to_json(rec.result.performance)},
         {"fairness", fairness_to_json(rec.result.fairness)}};
  json groups = json::object();
  for (const auto& [g, report] : rec.result.per_group) groups[to_string(g)] = perf_to_json(report);
  j["per_group"] = groups;
  return j.dump(2) + "\n";
}

void record_from_metrics_json(const std::string& text, RunRecord& rec) {
  const json j = json::parse(text);
  if (j.value("schema", "") != "fairsim-metrics")
    throw SchemaError("metrics json has an unknown schema");
  rec.fingerprint = std::stoull(j.at("dataset_fingerprint").get<std::string>(), nullptr, 16);
  rec.result.converged = j.at("converged").get<bool>();
  rec.result.performance = perf_from_json(j.at("performance"));
  rec.result.fairness = fairness_from_json(j.at("fairness"));
  rec.result.per_group.clear();
  for (const auto& [key, val] : j.at("per_group").items())
    rec.result.per_group[key == "A" ? Group::A : Group::B] = perf_from_json(val);
}

struct Unit {
  double lbl = 0;
  double rep = 0;
  std::uint64_t seed = 0;
  std::size_t first_record = 0;  // contiguous pipelines x variants block
};

// Dataset generation plus every cell of one (scenario, seed). Never throws:
// failures are recorded on the affected cells and the run moves on.
void process_unit(const ExperimentPlan& plan, const Unit& unit,
                  std::vector<RunRecord>& records) {
  const std::size_t n_cells = plan.pipelines.size() * plan.variants.size();
  data::ModelInput full;
  std::uint64_t fp = 0;
  std::string dataset_error;
  try {
    const sim::ScenarioConfig cfg = scenario_for(plan, unit.lbl, unit.rep, unit.seed);
    const sim::SimulationResult res = sim::run_simulation(cfg);
    const std::string path = dataset_path(plan, unit.lbl, unit.rep, unit.seed);
    fs::create_directories(fs::path(path).parent_path());
    data::export_csv(res.rows, path);
    fp = data::fingerprint(res.rows);
    full = data::mask_dataset(res.rows, data::VisibilityMask::defaults());
  } catch (const std::exception& e) {
    dataset_error = std::string("failed: dataset generation: ") + e.what();
  }

  std::size_t idx = unit.first_record;
  for (const auto& pipeline : plan.pipelines) {
    const std::uint64_t tune =
        tune_seed_for(dataset_seed(unit.seed, unit.lbl, unit.rep), pipeline);
    for (const auto& variant : plan.variants) {
      RunRecord& rec = records[idx++];
      rec.fingerprint = fp;
      if (!dataset_error.empty()) {
        rec.ok = false;
        rec.status = dataset_error;
        continue;
      }
      const auto t0 = std::chrono::steady_clock::now();
      try {
        rec.result = pipeline == "offline" ? run_offline(full, variant, tune)
                                           : run_online(full, variant, tune);
        rec.ok = true;
        rec.status = "ok";
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.status = std::string("failed: ") + e.what();
      }
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      try {
        const std::string dir = cell_dir(plan, rec.cell);
        fs::create_directories(dir);
        if (rec.ok) {
          write_text(dir + "/metrics.json", metrics_json(rec));
          write_text(dir + "/model.json", rec.result.model_json);
          fs::remove(dir + "/failed.txt");
        } else {
          write_text(dir + "/failed.txt", rec.status + "\n");
          fs::remove(dir + "/metrics.json");
          fs::remove(dir + "/model.json");
        }
        // wall time lives apart from metrics.json, which stays deterministic
        write_text(dir + "/timings.txt", "wall_ms=" + std::to_string(ms) + "\n");
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.status = std::string("failed: ") + e.what();
      }
    }
  }
}

std::vector<RunRecord> grid_records(const ExperimentPlan& plan, std::vector<Unit>* units) {
  std::vector<RunRecord> records;
  for (double lbl : plan.lbl_values)
    for (double rep : plan.rep_values)
      for (std::uint64_t seed : plan.seeds) {
        if (units) units->push_back({lbl, rep, seed, records.size()});
        for (const auto& pipeline : plan.pipelines)
          for (const auto& variant : plan.variants) {
            RunRecord rec;
            rec.cell = CellId{lbl, rep, pipeline, variant, seed};
            records.push_back(std::move(rec));
          }
      }
  return records;
}

metrics::PerformanceReport mean_perf(const std::vector<const RunRecord*>& recs) {
  metrics::PerformanceReport m;
  double auc_sum = 0;
  int auc_n = 0;
  for (const RunRecord* r : recs) {
    const auto& p = r->result.performance;
    m.accuracy += p.accuracy;
    m.precision += p.precision;
    m.recall += p.recall;
    m.log_loss += p.log_loss;
    m.approval_rate += p.approval_rate;
    m.support += p.support;
    if (p.roc_auc) {
      auc_sum += *p.roc_auc;
      ++auc_n;
    }
  }
  const double n = static_cast<double>(recs.size());
  m.accuracy /= n;
  m.precision /= n;
  m.recall /= n;
  m.log_loss /= n;
  m.approval_rate /= n;
  if (auc_n > 0) m.roc_auc = auc_sum / auc_n;
  return m;
}

metrics::FairnessReport mean_fair(const std::vector<const RunRecord*>& recs) {
  metrics::FairnessReport m;
  int spd_n = 0, eod_n = 0;
  for (const RunRecord* r : recs) {
    const auto& f = r->result.fairness;
    if (f.spd_defined) {
      m.spd += f.spd;
      ++spd_n;
    }
    if (f.eod_defined) {
      m.eod += f.eod;
      ++eod_n;
    }
    m.approval_a += f.approval_a;
    m.approval_b += f.approval_b;
    m.tpr_a += f.tpr_a;
    m.tpr_b += f.tpr_b;
  }
  const double n = static_cast<double>(recs.size());
  if (spd_n > 0) {
    m.spd /= spd_n;
    m.spd_defined = true;
  }
  if (eod_n > 0) {
    m.eod /= eod_n;
    m.eod_defined = true;
  }
  m.approval_a /= n;
  m.approval_b /= n;
  m.tpr_a /= n;
  m.tpr_b /= n;
  return m;
}

void write_cells_csv(const ExperimentPlan& plan, const RunSummary& s) {
  std::string csv =
      "scenario,pipeline,variant,seed,status,fingerprint,accuracy,precision,recall,"
      "log_loss,roc_auc,approval_rate,spd,eod,converged\n";
  for (const RunRecord& rec : s.records) {
    csv += scenario_tag(rec.cell.lbl, rec.cell.rep) + ',' + rec.cell.pipeline + ',' +
           rec.cell.variant + ',' + std::to_string(rec.cell.seed) + ',' +
           csv_field(rec.status) + ',' + fp_hex(rec.fingerprint) + ',';
    if (rec.ok) {
      const auto& p = rec.result.performance;
      const auto& f = rec.result.fairness;
      csv += fmt_g(p.accuracy) + ',' + fmt_g(p.precision) + ',' + fmt_g(p.recall) + ',' +
             fmt_g(p.log_loss) + ',' + (p.roc_auc ? fmt_g(*p.roc_auc) : std::string()) + ',' +
             fmt_g(p.approval_rate) + ',' + (f.spd_defined ? fmt_g(f.spd) : std::string()) +
             ',' + (f.eod_defined ? fmt_g(f.eod) : std::string()) + ',' +
             (rec.result.converged ? "1" : "0");
    } else {
      csv += ",,,,,,,,";
    }
    csv += '\n';
  }
  write_text(plan.out_dir + "/results_tables/cells.csv", csv);
}

void write_appendix_csv(const ExperimentPlan& plan, const RunSummary& s,
                        const std::string& pipeline) {
  std::string csv = "scenario,variant,seed,group,support,accuracy,precision,recall,approval_rate\n";
  for (const RunRecord& rec : s.records) {
    if (!rec.ok || rec.cell.pipeline != pipeline) continue;
    for (const auto& [g, p] : rec.result.per_group) {
      csv += scenario_tag(rec.cell.lbl, rec.cell.rep) + ',' + rec.cell.variant + ',' +
             std::to_string(rec.cell.seed) + ',' + to_string(g) + ',' +
             std::to_string(p.support) + ',' + fmt_g(p.accuracy) + ',' + fmt_g(p.precision) +
             ',' + fmt_g(p.recall) + ',' + fmt_g(p.approval_rate) + '\n';
    }
  }
  write_text(plan.out_dir + "/results_tables/appendix_" + pipeline + ".csv", csv);
}

void write_ranks_csv(const ExperimentPlan& plan, const metrics::RankTable& table,
                     const std::string& pipeline) {
  std::string csv = "scenario";
  for (const auto& v : table.variants) csv += ",perf_rank:" + v;
  for (const auto& v : table.variants) csv += ",fair_rank:" + v;
  csv += '\n';
  for (const auto& row : table.rows) {
    csv += row.scenario;
    for (int r : row.perf_rank) csv += ',' + std::to_string(r);
    for (int r : row.fair_rank) csv += ',' + std::to_string(r);
    csv += '\n';
  }
  write_text(plan.out_dir + "/results_tables/ranks_" + pipeline + ".csv", csv);
}

// Mean-over-seeds composites per scenario, ranked across variants. A
// scenario enters a pipeline's table only when every variant has at least
// one successful seed, so columns always line up.
metrics::RankTable rank_pipeline(const ExperimentPlan& plan, const RunSummary& s,
                                 const std::string& pipeline) {
  std::vector<std::pair<std::string, std::vector<metrics::CompositeScores>>> scenario_scores;
  for (double lbl : plan.lbl_values)
    for (double rep : plan.rep_values) {
      std::vector<metrics::PerformanceReport> perf;
      std::vector<metrics::FairnessReport> fair;
      bool complete = true;
      for (const auto& variant : plan.variants) {
        std::vector<const RunRecord*> recs;
        for (const RunRecord& rec : s.records)
          if (rec.ok && rec.cell.pipeline == pipeline && rec.cell.variant == variant &&
              rec.cell.lbl == lbl && rec.cell.rep == rep)
            recs.push_back(&rec);
        if (recs.empty()) {
          complete = false;
          break;
        }
        perf.push_back(mean_perf(recs));
        fair.push_back(mean_fair(recs));
      }
      if (!complete) continue;
      scenario_scores.emplace_back(scenario_tag(lbl, rep),
                                   metrics::composite_scores(perf, fair));
    }
  return metrics::rank_variants(plan.variants, scenario_scores);
}

void write_summary_json(const ExperimentPlan& plan, const RunSummary& s) {
  json j{{"schema", "fairsim-summary"},
         {"version", 1},
         {"cells", s.records.size()},
         {"failed", s.failed}};
  json rankings = json::object();
  for (const auto& pipeline : plan.pipelines) {
    const metrics::RankTable& t = pipeline == "offline" ? s.offline_ranks : s.online_ranks;
    rankings[pipeline] = json{{"variants", t.variants},
                              {"scenarios", t.rows.size()},
                              {"perf_first", t.perf_first},
                              {"perf_second", t.perf_second},
                              {"fair_first", t.fair_first},
                              {"fair_second", t.fair_second}};
  }
  j["rankings"] = rankings;
  write_text(plan.out_dir + "/results_tables/summary.json", j.dump(2) + "\n");
}

void aggregate(const ExperimentPlan& plan, RunSummary& s) {
  s.failed = 0;
  for (const RunRecord& rec : s.records)
    if (!rec.ok) ++s.failed;
  fs::create_directories(plan.out_dir + "/results_tables");
  write_cells_csv(plan, s);
  for (const auto& pipeline : plan.pipelines) {
    metrics::RankTable table = rank_pipeline(plan, s, pipeline);
    write_appendix_csv(plan, s, pipeline);
    write_ranks_csv(plan, table, pipeline);
    (pipeline == "offline" ? s.offline_ranks : s.online_ranks) = std::move(table);
  }
  write_summary_json(plan, s);
}

}  // namespace

RunSummary run_plan(const ExperimentPlan& plan) {
  plan.validate();
  fs::create_directories(plan.out_dir);
  save_plan_file(plan, plan.out_dir + "/plan.kv");

  RunSummary s;
  std::vector<Unit> units;
  s.records = grid_records(plan, &units);

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t u = next.fetch_add(1);
      if (u >= units.size()) return;
      process_unit(plan, units[u], s.records);
    }
  };
  const std::size_t n_jobs =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(plan.jobs, 1)), units.size());
  if (n_jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_jobs);
    for (std::size_t i = 0; i < n_jobs; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  aggregate(plan, s);
  return s;
}

void generate_datasets(const ExperimentPlan& plan) {
  plan.validate();
  for (double lbl : plan.lbl_values)
    for (double rep : plan.rep_values)
      for (std::uint64_t seed : plan.seeds) {
        const sim::ScenarioConfig cfg = scenario_for(plan, lbl, rep, seed);
        const sim::SimulationResult res = sim::run_simulation(cfg);
        const std::string path = dataset_path(plan, lbl, rep, seed);
        fs::create_directories(fs::path(path).parent_path());
        data::export_csv(res.rows, path);
      }
}

RunSummary aggregate_from_disk(const ExperimentPlan& plan) {
  plan.validate();
  RunSummary s;
  s.records = grid_records(plan, nullptr);
  for (RunRecord& rec : s.records) {
    const std::string dir = cell_dir(plan, rec.cell);
    const std::string path = dir + "/metrics.json";
    if (!fs::exists(path)) {
      rec.ok = false;
      rec.status = fs::exists(dir + "/failed.txt")
                       ? read_text(dir + "/failed.txt")
                       : "failed: missing " + path;
      while (!rec.status.empty() && rec.status.back() == '\n') rec.status.pop_back();
      continue;
    }
    try {
      record_from_metrics_json(read_text(path), rec);
      rec.ok = true;
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.status = std::string("failed: unreadable ") + path + ": " + e.what();
    }
  }
  aggregate(plan, s);
  return s;
}

std::string explain_cell(const ExperimentPlan& plan, const ExplainRequest& req) {
  plan.validate();
  if (!known_variant(req.variant) || req.variant == "baseline")
    throw ConfigError("explain: variant must be one of the mitigated ones, got '" +
                      req.variant + "'");
  if (req.pipeline != "offline" && req.pipeline != "online")
    throw ConfigError("explain: unknown pipeline '" + req.pipeline + "'");
  if (req.top_k < 0) throw ConfigError("explain: top_k must be >= 0");

  const sim::ScenarioConfig cfg = scenario_for(plan, req.lbl, req.rep, req.seed);
  const sim::SimulationResult res = sim::run_simulation(cfg);
  const data::ModelInput full = data::mask_dataset(res.rows, data::VisibilityMask::defaults());
  const std::size_t n = full.size();
  const std::uint64_t ds_seed = dataset_seed(req.seed, req.lbl, req.rep);
  const std::string tag = scenario_tag(req.lbl, req.rep);

  auto predictor = [&](const std::string& variant) -> Proba {
    CellId cell{req.lbl, req.rep, req.pipeline, variant, req.seed};
    const std::string path = cell_dir(plan, cell) + "/model.json";
    if (!fs::exists(path))
      throw ConfigError("explain: missing " + path + "; run the plan first");
    if (req.pipeline == "online" && !is_eg_variant(variant))
      return online_predictor_rebuild(full, variant, tune_seed_for(ds_seed, req.pipeline));
    return predictor_from_json(read_text(path));
  };
  const Proba base = predictor("baseline");
  const Proba mitigated = predictor(req.variant);

  const std::size_t eval_start =
      req.pipeline == "offline" ? offline_test_start(n) : kWarmupRows;
  if (eval_start >= n)
    throw ConfigError("explain: no evaluation rows in a dataset of " + std::to_string(n));

  std::size_t row;
  if (req.instance >= 0) {
    row = static_cast<std::size_t>(req.instance);
    if (row >= n)
      throw ConfigError("explain: instance " + std::to_string(req.instance) +
                        " out of range for " + std::to_string(n) + " rows");
  } else {
    Rng r(mix_seed(ds_seed, kInstanceSalt));
    row = eval_start +
          static_cast<std::size_t>(r.uniform_int(0, static_cast<std::int64_t>(n - eval_start) - 1));
  }

  // background rows come from the segment the models trained on
  const std::size_t train_end =
      req.pipeline == "offline" ? offline_test_start(n) : std::min(n, kWarmupRows);
  Rng bg_rng(mix_seed(ds_seed, kBackgroundSalt));
  std::vector<std::vector<double>> background;
  background.reserve(kBackgroundRows);
  for (std::size_t i = 0; i < kBackgroundRows; ++i)
    background.push_back(
        full.x[static_cast<std::size_t>(bg_rng.uniform_int(0, static_cast<std::int64_t>(train_end) - 1))]);

  const std::string out_dir =
      plan.out_dir + "/explain/" + tag + "/" + req.pipeline + "/seed_" + std::to_string(req.seed);
  fs::create_directories(out_dir);

  json inst{{"schema", "fairsim-explain-instance"},
            {"version", 1},
            {"scenario", tag},
            {"pipeline", req.pipeline},
            {"variant", req.variant},
            {"seed", req.seed},
            {"row", row},
            {"label", full.y[row]},
            {"group", to_string(full.groups[row])}};
  json feats = json::object();
  for (std::size_t i = 0; i < full.feature_names.size(); ++i)
    feats[full.feature_names[i]] = full.x[row][i];
  inst["features"] = feats;

  const std::pair<std::string, const Proba*> sides[] = {{"baseline", &base},
                                                        {req.variant, &mitigated}};
  for (const auto& [name, proba] : sides) {
    explain::ValueFunction vf(*proba, background, full.x[row]);
    const explain::ShapleyExplanation expl = explain::shapley_order2(vf, full.feature_names);
    const explain::InteractionGraph graph = explain::build_interaction_graph(expl, req.top_k);
    write_text(out_dir + "/" + name + "_shapley.json", explain::explanation_to_json(expl) + "\n");
    write_text(out_dir + "/" + name + "_graph.json", explain::graph_to_json(graph) + "\n");
    write_text(out_dir + "/" + name + "_graph.dot", explain::graph_to_dot(graph));
    inst["prediction_" + name] = expl.prediction;
    inst["hub_concentration_" + name] = explain::hub_concentration(graph);
  }
  write_text(out_dir + "/instance.json", inst.dump(2) + "\n");
  return out_dir;
}

}  // namespace fairsim::run

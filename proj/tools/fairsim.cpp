// fairsim: scenario grids for loan-approval models, with fairness metrics,
// mitigation variants and per-instance attributions.
//
// Exit codes: 0 all cells ok, 2 some cells failed, 1 bad usage or hard error.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "fairsim/run/runner.hpp"

namespace {

using namespace fairsim;

void print_rank_counts(const std::string& pipeline, const metrics::RankTable& t) {
  if (t.rows.empty()) {
    std::printf("%s: no scenario had every variant succeed, nothing ranked\n",
                pipeline.c_str());
    return;
  }
  std::printf("%s rankings over %zu scenario(s):\n", pipeline.c_str(), t.rows.size());
  std::printf("  %-16s %11s %11s\n", "variant", "perf #1/#2", "fair #1/#2");
  for (std::size_t i = 0; i < t.variants.size(); ++i)
    std::printf("  %-16s %5d/%-5d %5d/%-5d\n", t.variants[i].c_str(), t.perf_first[i],
                t.perf_second[i], t.fair_first[i], t.fair_second[i]);
}

void print_summary(const run::ExperimentPlan& plan, const run::RunSummary& s) {
  std::printf("cells: %zu ok, %d failed\n", s.records.size() - s.failed, s.failed);
  for (const auto& rec : s.records)
    if (!rec.ok)
      std::printf("  %s: %s\n", run::cell_dir(plan, rec.cell).c_str(), rec.status.c_str());
  for (const auto& pipeline : plan.pipelines)
    print_rank_counts(pipeline, pipeline == "offline" ? s.offline_ranks : s.online_ranks);
  std::printf("tables: %s/results_tables\n", plan.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loan-application fairness lab: simulate, mitigate, audit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string pipeline = "both";
  std::string variant;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool full = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "plan file (key = value); defaults used if absent");
    cmd->add_option("--out", out_dir, "output directory (default: the plan's, usually ./out)");
    cmd->add_option("--seed", seed, "replace the plan's seed list with this single seed");
    cmd->add_option("--jobs", jobs, "worker threads over (scenario, seed) units");
    cmd->add_flag("--full", full, "full scale: n_steps=10000 instead of the desk-scale 2000");
    cmd->add_option("--pipeline", pipeline, "offline, online or both")
        ->check(CLI::IsMember({"offline", "online", "both"}));
    cmd->add_option("--variant", variant, "restrict the run to one mitigation variant")
        ->check(CLI::IsMember(run::all_variants()));
  };

  CLI::App* generate = app.add_subcommand("generate", "write the plan's datasets and stop");
  CLI::App* run_cmd = app.add_subcommand("run", "evaluate every grid cell and aggregate");
  CLI::App* report = app.add_subcommand("report", "rebuild aggregate tables from cells on disk");
  CLI::App* explain = app.add_subcommand("explain", "attribute one decision of a run cell");
  add_common(generate);
  add_common(run_cmd);
  add_common(report);
  add_common(explain);

  run::ExplainRequest req;
  CLI::Option* opt_lbl = explain->add_option("--lbl", req.lbl, "scenario label-bias value");
  CLI::Option* opt_rep = explain->add_option("--rep", req.rep, "scenario representation value");
  explain->add_option("--instance", req.instance,
                      "dataset row to explain (default: seeded draw from the eval segment)");
  explain->add_option("--top-k", req.top_k, "interaction edges kept in the graph");

  CLI11_PARSE(app, argc, argv);

  try {
    run::ExperimentPlan plan = config_path.empty() ? run::ExperimentPlan::defaults()
                                                   : run::load_plan_file(config_path);
    if (!out_dir.empty()) plan.out_dir = out_dir;
    if (seed != 0) plan.seeds = {seed};
    if (full) plan.n_steps = 10000;
    if (jobs > 0) plan.jobs = jobs;
    if (pipeline != "both") plan.pipelines = {pipeline};
    if (!variant.empty() && !explain->parsed()) plan.variants = {variant};
    plan.validate();

    if (generate->parsed()) {
      run::generate_datasets(plan);
      std::printf("datasets: %s/datasets (%zu scenario(s) x %zu seed(s))\n",
                  plan.out_dir.c_str(), plan.lbl_values.size() * plan.rep_values.size(),
                  plan.seeds.size());
      return 0;
    }
    if (run_cmd->parsed()) {
      const run::RunSummary s = run::run_plan(plan);
      print_summary(plan, s);
      return s.failed == 0 ? 0 : 2;
    }
    if (report->parsed()) {
      const run::RunSummary s = run::aggregate_from_disk(plan);
      print_summary(plan, s);
      return s.failed == 0 ? 0 : 2;
    }
    // explain
    if (!opt_lbl->count()) req.lbl = plan.lbl_values.front();
    if (!opt_rep->count()) req.rep = plan.rep_values.front();
    req.seed = plan.seeds.front();
    if (pipeline != "both") req.pipeline = pipeline;
    if (!variant.empty()) req.variant = variant;
    const std::string dir = run::explain_cell(plan, req);
    std::printf("explanations: %s\n", dir.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

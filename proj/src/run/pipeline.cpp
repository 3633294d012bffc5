#include "fairsim/run/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <stdexcept>

#include "fairsim/common.hpp"
#include "fairsim/learn/calibration.hpp"
#include "fairsim/learn/gbt.hpp"
#include "fairsim/learn/hoeffding.hpp"
#include "fairsim/learn/isotonic.hpp"
#include "fairsim/learn/scaler.hpp"
#include "fairsim/learn/search.hpp"
#include "fairsim/mitigate/eg.hpp"
#include "fairsim/mitigate/reweigh.hpp"
#include "fairsim/run/plan.hpp"

namespace fairsim::run {

namespace {

using json = nlohmann::json;

struct Slice {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<Group> groups;
};

Slice slice(const data::ModelInput& in, std::size_t lo, std::size_t hi) {
  Slice s;
  s.x.assign(in.x.begin() + lo, in.x.begin() + hi);
  s.y.assign(in.y.begin() + lo, in.y.begin() + hi);
  s.groups.assign(in.groups.begin() + lo, in.groups.begin() + hi);
  return s;
}

mitigate::ConstraintKind constraint_of(const std::string& variant) {
  return variant == "eg_eo" ? mitigate::ConstraintKind::kEqualizedOdds
                            : mitigate::ConstraintKind::kDemographicParity;
}

std::vector<double> offline_weights(const std::string& variant, const std::vector<Group>& groups,
                                    const std::vector<int>& y) {
  if (variant == "reweigh_auto")
    return mitigate::kamiran_calders_weights(groups, y).expand(groups, y);
  if (variant == "reweigh_manual") return mitigate::manual_weights().expand(groups, y);
  return {};  // baseline
}

PipelineResult finish(const std::vector<double>& probs, const std::vector<int>& labels,
                      const std::vector<Group>& groups, bool converged,
                      std::string model_json) {
  PipelineResult r;
  const auto preds = metrics::threshold_predictions(probs);
  r.performance = metrics::performance_metrics(probs, labels);
  r.per_group = metrics::group_disaggregate(probs, labels, groups);
  r.fairness = metrics::fairness_metrics(preds, labels, groups);
  r.converged = converged;
  r.model_json = std::move(model_json);
  return r;
}

json calibrator_json(const learn::IsotonicCalibrator& c) {
  return json{{"x", c.breakpoints()}, {"y", c.values()}};
}

learn::IsotonicCalibrator calibrator_from(const json& j) {
  return learn::IsotonicCalibrator::from_points(j.at("x").get<std::vector<double>>(),
                                                j.at("y").get<std::vector<double>>());
}

json model_header(const std::string& pipeline, const std::string& variant,
                  const std::string& kind) {
  return json{{"schema", "fairsim-model"}, {"version", 1}, {"pipeline", pipeline},
              {"variant", variant},        {"kind", kind}};
}

std::string eg_model_json(const mitigate::EgEnsemble& ens, const std::string& pipeline,
                          const std::string& variant) {
  json j = model_header(pipeline, variant, "eg");
  j["constraint"] = mitigate::to_string(ens.options.constraint);
  j["converged"] = ens.converged;
  j["mix"] = ens.mix;
  j["members"] = json::array();
  for (const auto& m : ens.members) j["members"].push_back(json::parse(m.to_json()));
  return j.dump(2);
}

// prequential records past the warmup prefix
struct Collector {
  std::vector<double> probs;
  std::vector<int> labels;
  std::vector<Group> groups;

  void add(double p, int y, Group g) {
    probs.push_back(p);
    labels.push_back(y);
    groups.push_back(g);
  }
};

struct OnlineState {
  bool is_eg = false;
  mitigate::EgEnsemble ensemble;
  learn::HoeffdingParams tuned;
  learn::HoeffdingTree tree;
  std::optional<learn::StreamingScaler> scaler;
  learn::CalibrationBuffer calib{kCalibrationInterval};
};

learn::HoeffdingParams tune_hoeffding(const data::ModelInput& full, std::uint64_t tune_seed) {
  const std::size_t n = full.size();
  const std::size_t prefix = std::min<std::size_t>(1000, n / 5);
  const std::size_t score_from = prefix - prefix / 5;

  learn::SearchSpec spec;
  spec.n_candidates = kOnlineCandidates;
  spec.seed = tune_seed;
  const auto candidates = learn::sample_hoeffding_candidates(spec);
  auto outcome = learn::pick_best(candidates, [&](const learn::HoeffdingParams& hp) {
    learn::HoeffdingTree t(hp);
    learn::StreamingScaler sc(full.feature_names.size());
    std::vector<double> tail_probs;
    std::vector<int> tail_y;
    for (std::size_t i = 0; i < prefix; ++i) {
      const auto xt = sc.transform(full.x[i]);
      const double p = t.predict_proba_one(xt);
      if (i >= score_from) {
        tail_probs.push_back(p);
        tail_y.push_back(full.y[i]);
      }
      sc.update(full.x[i]);
      t.learn_one(xt, full.y[i], 1.0);
    }
    return metrics::log_loss(tail_probs, tail_y);
  });
  return outcome.best;
}

// One pass over the stream: predict, record, then train. Shared by the
// metrics run and the explain-time rebuild so both see the same final state.
OnlineState online_replay(const data::ModelInput& full, const std::string& variant,
                          std::uint64_t tune_seed, Collector* collect) {
  const std::size_t n = full.size();
  OnlineState st;

  if (is_eg_variant(variant)) {
    st.is_eg = true;
    mitigate::EgOptions opt;
    opt.constraint = constraint_of(variant);
    mitigate::IncrementalEg inc(learn::GbtParams{}, opt, kOnlineEgAppendTrees);
    Slice window;
    for (std::size_t i = 0; i < n; ++i) {
      const double p =
          inc.windows_processed() > 0 ? inc.latest().predict_proba_one(full.x[i]) : 0.5;
      if (collect && i >= kWarmupRows) collect->add(p, full.y[i], full.groups[i]);
      window.x.push_back(full.x[i]);
      window.y.push_back(full.y[i]);
      window.groups.push_back(full.groups[i]);
      if (window.x.size() == kOnlineEgWindow) {
        inc.process_window(window.x, window.y, window.groups);
        window = Slice{};
      }
    }
    if (!window.x.empty()) inc.process_window(window.x, window.y, window.groups);
    st.ensemble = inc.latest();
    return st;
  }

  st.tuned = tune_hoeffding(full, tune_seed);
  st.tree = learn::HoeffdingTree(st.tuned);
  st.scaler.emplace(full.feature_names.size());
  mitigate::EmaReweigher ema;
  const mitigate::WeightTable manual = mitigate::manual_weights();

  for (std::size_t i = 0; i < n; ++i) {
    const auto xt = st.scaler->transform(full.x[i]);
    const double raw = st.tree.predict_proba_one(xt);
    const double p = st.calib.calibrate(raw);
    if (collect && i >= kWarmupRows) collect->add(p, full.y[i], full.groups[i]);
    st.calib.observe(raw, full.y[i]);
    double w = 1.0;
    if (variant == "reweigh_auto")
      w = ema.update(full.groups[i], full.y[i]);
    else if (variant == "reweigh_manual")
      w = manual.at(full.groups[i], full.y[i]);
    st.scaler->update(full.x[i]);
    st.tree.learn_one(xt, full.y[i], w);
  }
  return st;
}

}  // namespace

std::size_t offline_test_start(std::size_t n_rows) { return n_rows - n_rows / 5; }

PipelineResult run_offline(const data::ModelInput& full, const std::string& variant,
                           std::uint64_t tune_seed) {
  if (!known_variant(variant)) throw ConfigError("offline: unknown variant '" + variant + "'");
  const std::size_t n = full.size();
  if (n < 25)
    throw ConfigError("offline: need at least 25 rows, got " + std::to_string(n));
  const std::size_t test_start = offline_test_start(n);
  const std::size_t core_end = test_start - test_start / 5;
  const Slice core = slice(full, 0, core_end);
  const Slice val = slice(full, core_end, test_start);
  const Slice test = slice(full, test_start, n);

  learn::SearchSpec spec;
  spec.n_candidates = kOfflineCandidates;
  spec.seed = tune_seed;
  const auto candidates = learn::sample_gbt_candidates(spec);
  const auto outcome = learn::pick_best(candidates, [&](const learn::GbtParams& p) {
    const auto m = learn::GbtModel::fit(core.x, core.y, {}, p);
    return metrics::log_loss(m.predict_proba(val.x), val.y);
  });
  const learn::GbtParams params = outcome.best;

  if (is_eg_variant(variant)) {
    mitigate::EgOptions opt;
    opt.constraint = constraint_of(variant);
    const auto ens = mitigate::eg_fit(core.x, core.y, core.groups, params, opt);
    const auto probs = ens.predict_proba(test.x);
    return finish(probs, test.y, test.groups, ens.converged,
                  eg_model_json(ens, "offline", variant));
  }

  const auto w = offline_weights(variant, core.groups, core.y);
  const auto model = learn::GbtModel::fit(core.x, core.y, w, params);
  const auto calib = learn::IsotonicCalibrator::fit(model.predict_proba(val.x), val.y);
  const auto probs = calib.transform(model.predict_proba(test.x));

  json j = model_header("offline", variant, "gbt");
  j["model"] = json::parse(model.to_json());
  j["calibrator"] = calibrator_json(calib);
  return finish(probs, test.y, test.groups, true, j.dump(2));
}

PipelineResult run_online(const data::ModelInput& full, const std::string& variant,
                          std::uint64_t tune_seed) {
  if (!known_variant(variant)) throw ConfigError("online: unknown variant '" + variant + "'");
  const std::size_t n = full.size();
  if (n <= kWarmupRows + 10)
    throw ConfigError("online: stream of " + std::to_string(n) +
                      " rows is not longer than the " + std::to_string(kWarmupRows) +
                      "-row warmup");

  Collector collect;
  OnlineState st = online_replay(full, variant, tune_seed, &collect);

  std::string model_json;
  if (st.is_eg) {
    model_json = eg_model_json(st.ensemble, "online", variant);
  } else {
    json j = model_header("online", variant, "hoeffding");
    j["params"] = {{"grace_period", st.tuned.grace_period},
                   {"split_confidence", st.tuned.split_confidence},
                   {"tie_threshold", st.tuned.tie_threshold},
                   {"n_split_points", st.tuned.n_split_points}};
    j["scaler"] = {{"count", st.scaler->count()},
                   {"mean", st.scaler->mean()},
                   {"variance", st.scaler->variance()}};
    j["calibrator"] = calibrator_json(st.calib.calibrator());
    model_json = j.dump(2);
  }
  const bool converged = st.is_eg ? st.ensemble.converged : true;
  return finish(collect.probs, collect.labels, collect.groups, converged, model_json);
}

Proba predictor_from_json(const std::string& model_json) {
  json j;
  try {
    j = json::parse(model_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model json unreadable: ") + e.what());
  }
  if (j.value("schema", "") != "fairsim-model")
    throw ConfigError("model json has an unknown schema");
  const std::string kind = j.value("kind", "");

  if (kind == "gbt") {
    auto model = std::make_shared<learn::GbtModel>(
        learn::GbtModel::from_json(j.at("model").dump()));
    auto calib = std::make_shared<learn::IsotonicCalibrator>(calibrator_from(j.at("calibrator")));
    return [model, calib](const std::vector<double>& row) {
      return calib->transform(model->predict_proba_one(row));
    };
  }
  if (kind == "eg") {
    auto ens = std::make_shared<mitigate::EgEnsemble>();
    ens->mix = j.at("mix").get<std::vector<double>>();
    for (const auto& m : j.at("members"))
      ens->members.push_back(learn::GbtModel::from_json(m.dump()));
    if (ens->members.size() != ens->mix.size())
      throw ConfigError("model json: member/mix size mismatch");
    return [ens](const std::vector<double>& row) { return ens->predict_proba_one(row); };
  }
  if (kind == "hoeffding")
    throw ConfigError(
        "online hoeffding predictors are not stored whole; rebuild one by replaying the stream");
  throw ConfigError("model json has unknown kind '" + kind + "'");
}

Proba online_predictor_rebuild(const data::ModelInput& full, const std::string& variant,
                               std::uint64_t tune_seed) {
  auto st = std::make_shared<OnlineState>(online_replay(full, variant, tune_seed, nullptr));
  if (st->is_eg)
    return [st](const std::vector<double>& row) { return st->ensemble.predict_proba_one(row); };
  return [st](const std::vector<double>& row) {
    const auto xt = st->scaler->transform(row);
    return st->calib.calibrate(st->tree.predict_proba_one(xt));
  };
}

}  // namespace fairsim::run

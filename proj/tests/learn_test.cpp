#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fairsim/learn/calibration.hpp"
#include "fairsim/learn/gbt.hpp"
#include "fairsim/learn/hoeffding.hpp"
#include "fairsim/learn/isotonic.hpp"
#include "fairsim/learn/scaler.hpp"
#include "fairsim/learn/search.hpp"
#include "fairsim/metrics/metrics.hpp"
#include "fairsim/rng.hpp"

using namespace fairsim;
using namespace fairsim::learn;

TEST_CASE("batch scaler: z-scores, constant columns, width checks") {
  std::vector<std::vector<double>> x = {{1, 7}, {2, 7}, {3, 7}};
  StandardScaler s;
  s.fit(x);
  auto z = s.transform(x);

  double mean0 = 0, var0 = 0;
  for (const auto& r : z) mean0 += r[0];
  mean0 /= 3;
  for (const auto& r : z) var0 += (r[0] - mean0) * (r[0] - mean0);
  var0 /= 3;
  CHECK(std::abs(mean0) < 1e-12);
  CHECK(var0 == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& r : z) CHECK(r[1] == 0.0);  // constant column

  CHECK_THROWS_AS(s.transform(std::vector<double>{1.0}), std::invalid_argument);
  StandardScaler unfit;
  CHECK_THROWS_AS(unfit.fit(std::vector<std::vector<double>>{}), std::invalid_argument);
}

TEST_CASE("streaming scaler matches batch statistics to 1e-9") {
  Rng rng(11);
  std::vector<std::vector<double>> x;
  StreamingScaler stream(3);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> row = {rng.uniform(-5, 5), rng.uniform() * 100, 42.0};
    stream.update(row);
    x.push_back(row);
  }
  StandardScaler batch;
  batch.fit(x);
  auto var = stream.variance();
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(stream.mean()[j] == doctest::Approx(batch.mean()[j]).epsilon(1e-9));
    const double batch_var = batch.std_dev()[j] * batch.std_dev()[j];
    if (j == 2) {
      CHECK(var[j] == doctest::Approx(0.0).epsilon(1e-9));
    } else {
      CHECK(var[j] == doctest::Approx(batch_var).epsilon(1e-9));
    }
  }
  // same row scales identically through either path
  std::vector<double> probe = {1.0, 50.0, 42.0};
  auto a = stream.transform(probe);
  auto b = batch.transform(probe);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-9));
}

TEST_CASE("streaming scaler passes rows through before any update") {
  StreamingScaler s(2);
  auto out = s.transform({3.0, -4.0});
  CHECK(out == std::vector<double>{3.0, -4.0});
}

namespace {

// Exhaustive monotone least squares on <= 6 points: every candidate fit is
// piecewise constant on consecutive blocks at block means.
std::vector<double> monotone_ls_oracle(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (unsigned cut = 0; cut < (1u << (n - 1)); ++cut) {
    std::vector<double> fit(n);
    double prev = -std::numeric_limits<double>::infinity();
    bool ok = true;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const bool boundary = i + 1 == n || (cut >> i) & 1u;
      if (!boundary) continue;
      double mean = 0;
      for (std::size_t k = start; k <= i; ++k) mean += y[k];
      mean /= static_cast<double>(i - start + 1);
      if (mean < prev) ok = false;
      for (std::size_t k = start; k <= i; ++k) fit[k] = mean;
      prev = mean;
      start = i + 1;
    }
    if (!ok) continue;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) sse += (fit[i] - y[i]) * (fit[i] - y[i]);
    if (sse < best_sse) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("isotonic: PAV equals exhaustive monotone least squares") {
  std::vector<double> scores = {0.1, 0.2, 0.3, 0.4};
  std::vector<int> labels = {1, 0, 1, 0};
  auto cal = IsotonicCalibrator::fit(scores, labels);
  auto oracle = monotone_ls_oracle({1, 0, 1, 0});
  REQUIRE(cal.breakpoints().size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(cal.values()[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  for (std::size_t i = 1; i < 4; ++i) CHECK(cal.values()[i] >= cal.values()[i - 1]);

  SUBCASE("six-point random label patterns") {
    std::vector<double> xs = {0.05, 0.2, 0.35, 0.5, 0.7, 0.9};
    for (unsigned pattern = 0; pattern < 64; ++pattern) {
      std::vector<int> ys;
      for (unsigned b = 0; b < 6; ++b) ys.push_back((pattern >> b) & 1u);
      auto c = IsotonicCalibrator::fit(xs, ys);
      auto o = monotone_ls_oracle(std::vector<double>(ys.begin(), ys.end()));
      for (std::size_t i = 0; i < 6; ++i)
        CHECK(c.values()[i] == doctest::Approx(o[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("isotonic: monotone inputs are reproduced exactly") {
  std::vector<double> scores = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<int> labels = {0, 0, 1, 1, 1};
  auto cal = IsotonicCalibrator::fit(scores, labels);
  for (std::size_t i = 0; i < scores.size(); ++i)
    CHECK(cal.transform(scores[i]) == doctest::Approx(labels[i]));
}

TEST_CASE("isotonic: edge behavior") {
  SUBCASE("all-zero labels give the constant zero map") {
    std::vector<double> s = {0.2, 0.5, 0.8};
    std::vector<int> y = {0, 0, 0};
    auto cal = IsotonicCalibrator::fit(s, y);
    CHECK(cal.transform(0.0) == 0.0);
    CHECK(cal.transform(0.5) == 0.0);
    CHECK(cal.transform(1.0) == 0.0);
  }
  SUBCASE("fewer than two pairs leaves the identity") {
    auto cal = IsotonicCalibrator::fit(std::vector<double>{0.4}, std::vector<int>{1});
    CHECK(cal.identity());
    CHECK(cal.transform(0.37) == 0.37);
    CHECK(cal.transform(1.5) == 1.0);  // clamped into probability range
  }
  SUBCASE("duplicate scores share one pooled value") {
    std::vector<double> s = {0.3, 0.3};
    std::vector<int> y = {0, 1};
    auto cal = IsotonicCalibrator::fit(s, y);
    CHECK(cal.transform(0.3) == doctest::Approx(0.5));
  }
  SUBCASE("interpolation between points and clamping beyond them") {
    auto cal = IsotonicCalibrator::from_points({0.2, 0.6}, {0.1, 0.9});
    CHECK(cal.transform(0.4) == doctest::Approx(0.5));
    CHECK(cal.transform(0.0) == doctest::Approx(0.1));
    CHECK(cal.transform(0.99) == doctest::Approx(0.9));
  }
  SUBCASE("non-finite scores are rejected") {
    std::vector<double> s = {0.1, std::numeric_limits<double>::quiet_NaN()};
    std::vector<int> y = {0, 1};
    CHECK_THROWS_AS(IsotonicCalibrator::fit(s, y), std::invalid_argument);
  }
}

TEST_CASE("isotonic transform is monotone on random fits") {
  Rng rng(77);
  std::vector<double> s;
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) {
    double p = rng.uniform();
    s.push_back(p);
    y.push_back(rng.bernoulli(p) ? 1 : 0);
  }
  auto cal = IsotonicCalibrator::fit(s, y);
  double prev = -1;
  for (double probe = 0.0; probe <= 1.0; probe += 1.0 / 512) {
    double v = cal.transform(probe);
    CHECK(v >= prev);
    prev = v;
  }
}

namespace {

std::vector<std::vector<double>> separable_x() {
  std::vector<std::vector<double>> x;
  Rng rng(5);
  for (int i = 0; i < 200; ++i)
    x.push_back({static_cast<double>(i) / 199.0, rng.uniform()});
  return x;
}

std::vector<int> separable_y(const std::vector<std::vector<double>>& x) {
  std::vector<int> y;
  for (const auto& row : x) y.push_back(row[0] > 0.5 ? 1 : 0);
  return y;
}

}  // namespace

TEST_CASE("gbt: separable data is learned nearly perfectly") {
  auto x = separable_x();
  auto y = separable_y(x);
  auto model = GbtModel::fit(x, y, {}, {});
  auto preds = model.predict(x);
  int correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += preds[i] == y[i];
  CHECK(static_cast<double>(correct) / static_cast<double>(y.size()) >= 0.99);
}

TEST_CASE("gbt: single-class data yields a constant predictor at the class rate") {
  std::vector<std::vector<double>> x = {{0.1}, {0.7}, {0.3}};
  std::vector<int> y = {1, 1, 1};
  auto model = GbtModel::fit(x, y, {}, {});
  CHECK(model.trees().empty());
  CHECK(model.predict_proba_one(std::vector<double>{0.5}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gbt: weight contracts") {
  auto x = separable_x();
  auto y = separable_y(x);
  GbtParams params;
  params.n_trees = 20;

  SUBCASE("doubling every weight changes nothing, bit for bit") {
    std::vector<double> w1(x.size(), 1.0), w2(x.size(), 2.0);
    auto m1 = GbtModel::fit(x, y, w1, params);
    auto m2 = GbtModel::fit(x, y, w2, params);
    auto p1 = m1.predict_proba(x);
    auto p2 = m2.predict_proba(x);
    CHECK(p1 == p2);
  }
  SUBCASE("all-zero weights are rejected") {
    std::vector<double> w(x.size(), 0.0);
    CHECK_THROWS_AS(GbtModel::fit(x, y, w, params), std::invalid_argument);
  }
  SUBCASE("negative weights are rejected") {
    std::vector<double> w(x.size(), 1.0);
    w[3] = -0.5;
    CHECK_THROWS_AS(GbtModel::fit(x, y, w, params), std::invalid_argument);
  }
}

TEST_CASE("gbt: weighted training log loss never increases across rounds") {
  Rng rng(101);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<double> w;
  for (int i = 0; i < 400; ++i) {
    double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    x.push_back({a, b, c});
    double p = 0.2 + 0.6 * a * b;  // noisy, not separable
    y.push_back(rng.bernoulli(p) ? 1 : 0);
    w.push_back(rng.uniform(0.5, 2.0));
  }
  GbtParams params;
  params.n_trees = 40;
  auto model = GbtModel::fit(x, y, w, params);
  REQUIRE(model.trees().size() == 40);

  double wsum = 0;
  for (double v : w) wsum += v;
  std::vector<double> margins(x.size(), model.base_score());
  auto weighted_ll = [&] {
    double ll = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = std::clamp(1.0 / (1.0 + std::exp(-margins[i])), 1e-15, 1.0 - 1e-15);
      ll -= w[i] * (y[i] ? std::log(p) : std::log(1.0 - p));
    }
    return ll / wsum;
  };
  double prev = weighted_ll();
  for (const auto& tree : model.trees()) {
    for (std::size_t i = 0; i < x.size(); ++i) margins[i] += tree.predict(x[i]);
    const double cur = weighted_ll();
    CHECK(cur <= prev + 1e-9);
    prev = cur;
  }
}

TEST_CASE("gbt append: immutability and no-ops") {
  auto x = separable_x();
  auto y = separable_y(x);
  GbtParams params;
  params.n_trees = 10;
  auto model = GbtModel::fit(x, y, {}, params);
  const auto before = model.predict_proba(x);
  const std::size_t n_before = model.trees().size();

  SUBCASE("zero new trees is a no-op") {
    model.append(x, y, {}, 0);
    CHECK(model.trees().size() == n_before);
    CHECK(model.predict_proba(x) == before);
  }
  SUBCASE("empty batch is a no-op") {
    model.append({}, {}, {}, 5);
    CHECK(model.trees().size() == n_before);
  }
  SUBCASE("appended trees leave the prefix ensemble intact") {
    auto copy = model;
    copy.append(x, y, {}, 5);
    REQUIRE(copy.trees().size() == n_before + 5);
    for (std::size_t t = 0; t < n_before; ++t)
      CHECK(copy.trees()[t].nodes.size() == model.trees()[t].nodes.size());
    // prefix prediction = margins minus the new trees' contribution
    for (std::size_t i = 0; i < 5; ++i) {
      double z = copy.base_score();
      for (std::size_t t = 0; t < n_before; ++t) z += copy.trees()[t].predict(x[i]);
      CHECK(1.0 / (1.0 + std::exp(-z)) == doctest::Approx(before[i]).epsilon(1e-12));
    }
  }
  SUBCASE("appending on the training batch does not hurt its log loss") {
    auto copy = model;
    std::vector<int> labels = y;
    std::vector<double> before_ll_probs = copy.predict_proba(x);
    copy.append(x, y, {}, 8);
    std::vector<double> after = copy.predict_proba(x);
    CHECK(metrics::log_loss(after, labels) <= metrics::log_loss(before_ll_probs, labels) + 1e-9);
  }
  SUBCASE("append before fit is an error") {
    GbtModel blank;
    CHECK_THROWS_AS(blank.append(x, y, {}, 1), std::logic_error);
  }
}

TEST_CASE("gbt: json round trip preserves predictions exactly") {
  auto x = separable_x();
  auto y = separable_y(x);
  GbtParams params;
  params.n_trees = 7;
  params.max_depth = 4;
  params.learning_rate = 0.17;
  auto model = GbtModel::fit(x, y, {}, params);
  auto restored = GbtModel::from_json(model.to_json());
  CHECK(restored.params().max_depth == 4);
  CHECK(restored.predict_proba(x) == model.predict_proba(x));
  CHECK_THROWS_AS(GbtModel::from_json("{}"), std::invalid_argument);
  CHECK_THROWS_AS(GbtModel::from_json("not json"), std::invalid_argument);
}

namespace {

// three features, only feature 0 carries signal: label == (x0 > 0.5)
std::vector<double> hoeffding_row(Rng& rng, int* label) {
  const bool flag = rng.bernoulli(0.5);
  *label = flag ? 1 : 0;
  return {flag ? 1.0 : 0.0, rng.uniform(), rng.uniform()};
}

}  // namespace

TEST_CASE("hoeffding: prior prediction is one half") {
  HoeffdingTree tree;
  CHECK(tree.predict_proba_one(std::vector<double>{0.3, 0.4, 0.5}) == 0.5);
  CHECK(tree.node_count() == 1);
}

TEST_CASE("hoeffding: learns a single-feature concept to >= 0.95 held-out accuracy") {
  HoeffdingTree tree;
  Rng rng(19);
  for (int i = 0; i < 10000; ++i) {
    int label = 0;
    auto row = hoeffding_row(rng, &label);
    tree.learn_one(row, label);
  }
  CHECK(tree.node_count() > 1);
  int correct = 0;
  const int held_out = 2000;
  for (int i = 0; i < held_out; ++i) {
    int label = 0;
    auto row = hoeffding_row(rng, &label);
    const int pred = tree.predict_proba_one(row) >= 0.5 ? 1 : 0;
    correct += pred == label;
  }
  CHECK(static_cast<double>(correct) / held_out >= 0.95);
}

TEST_CASE("hoeffding: infinite grace period suppresses splits") {
  HoeffdingParams params;
  params.grace_period = std::numeric_limits<int>::max();
  HoeffdingTree tree(params);
  Rng rng(23);
  double pos = 0;
  const int n = 3000;
  for (int i = 0; i < n; ++i) {
    int label = 0;
    auto row = hoeffding_row(rng, &label);
    tree.learn_one(row, label);
    pos += label;
  }
  CHECK(tree.node_count() == 1);
  // single leaf predicts the Laplace-smoothed majority rate everywhere
  const double expected = (pos + 1.0) / (n + 2.0);
  CHECK(tree.predict_proba_one(std::vector<double>{1, 0, 0}) == doctest::Approx(expected));
  CHECK(tree.predict_proba_one(std::vector<double>{0, 1, 1}) == doctest::Approx(expected));
}

TEST_CASE("hoeffding: integer weights equal repeated presentation") {
  HoeffdingParams params;
  HoeffdingTree weighted(params), repeated(params);
  Rng rng(29);
  for (int i = 0; i < 600; ++i) {
    int label = 0;
    auto row = hoeffding_row(rng, &label);
    weighted.learn_one(row, label, 2.0);
    repeated.learn_one(row, label);
    repeated.learn_one(row, label);
  }
  CHECK(weighted.node_count() == repeated.node_count());
  std::vector<double> probe = {1.0, 0.5, 0.5};
  CHECK(weighted.predict_proba_one(probe) == doctest::Approx(repeated.predict_proba_one(probe)));
}

TEST_CASE("random search: sampling and selection contracts") {
  SearchSpec spec;
  spec.n_candidates = 10;
  spec.seed = 42;

  SUBCASE("candidates respect the advertised ranges and are reproducible") {
    auto a = sample_gbt_candidates(spec);
    auto b = sample_gbt_candidates(spec);
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].max_depth >= 2);
      CHECK(a[i].max_depth <= 5);
      CHECK(a[i].learning_rate >= 0.05);
      CHECK(a[i].learning_rate <= 0.30);
      CHECK(a[i].n_trees >= 50);
      CHECK(a[i].n_trees <= 200);
      CHECK(a[i].max_depth == b[i].max_depth);
      CHECK(a[i].learning_rate == b[i].learning_rate);
      CHECK(a[i].n_trees == b[i].n_trees);
    }
    auto h = sample_hoeffding_candidates(spec);
    for (const auto& p : h) {
      CHECK(p.grace_period >= 100);
      CHECK(p.grace_period <= 500);
      CHECK(p.tie_threshold >= 0.01);
      CHECK(p.tie_threshold <= 0.10);
      CHECK(p.split_confidence >= 1e-9);
      CHECK(p.split_confidence <= 1e-5);
    }
  }
  SUBCASE("single candidate is returned as-is") {
    spec.n_candidates = 1;
    auto c = sample_gbt_candidates(spec);
    auto out = pick_best(c, [](const GbtParams&) { return 1.0; });
    CHECK(out.best_index == 0);
    CHECK(out.best.n_trees == c[0].n_trees);
  }
  SUBCASE("planted optimum wins") {
    auto c = sample_gbt_candidates(spec);
    const GbtParams target = c[6];
    auto out = pick_best(c, [&](const GbtParams& p) {
      return std::abs(p.learning_rate - target.learning_rate) +
             std::abs(p.max_depth - target.max_depth) + std::abs(p.n_trees - target.n_trees);
    });
    CHECK(out.best_index == 6);
  }
  SUBCASE("exact ties keep the earliest candidate") {
    auto c = sample_gbt_candidates(spec);
    auto out = pick_best(c, [](const GbtParams&) { return 0.25; });
    CHECK(out.best_index == 0);
  }
}

TEST_CASE("calibration buffer: refit cadence and loss improvement") {
  CHECK_THROWS_AS(CalibrationBuffer(1), std::invalid_argument);

  CalibrationBuffer buf(50);
  Rng rng(61);
  std::vector<double> window_s;
  std::vector<int> window_y;
  std::size_t seen_refits = 0;
  for (int i = 0; i < 500; ++i) {
    // systematically over-confident raw scores: calibration has work to do
    const double p = rng.uniform();
    const double raw = std::clamp(0.5 + (p - 0.5) * 1.8, 0.0, 1.0);
    const int label = rng.bernoulli(p) ? 1 : 0;

    if (i < 49) {
      CHECK(buf.refit_count() == 0);
      CHECK(buf.calibrate(raw) == raw);  // identity until the first refit
    }
    buf.observe(raw, label);
    window_s.push_back(raw);
    window_y.push_back(label);
    if (window_s.size() > 50) {
      window_s.erase(window_s.begin());
      window_y.erase(window_y.begin());
    }

    if (buf.refit_count() != seen_refits) {
      seen_refits = buf.refit_count();
      // refit must be exactly an isotonic fit of the current window
      auto expect = IsotonicCalibrator::fit(window_s, window_y);
      for (double probe : {0.05, 0.3, 0.55, 0.8, 0.95})
        CHECK(buf.calibrate(probe) == expect.transform(probe));
      auto calibrated = buf.calibrator().transform(window_s);
      CHECK(metrics::log_loss(calibrated, window_y) <=
            metrics::log_loss(window_s, window_y) + 1e-12);
    }
  }
  CHECK(buf.refit_count() == 10);
  CHECK(buf.buffered() == 50);
}

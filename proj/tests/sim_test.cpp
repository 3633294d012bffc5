#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fairsim/data/io.hpp"
#include "fairsim/sim/config.hpp"
#include "fairsim/sim/entity.hpp"
#include "fairsim/sim/network.hpp"
#include "fairsim/sim/simulation.hpp"

using namespace fairsim;
using namespace fairsim::sim;

namespace {

Entity make_entity(int id, Group g, double trust) {
  Entity e;
  e.id = id;
  e.group = g;
  e.trust = trust;
  return e;
}

}  // namespace

TEST_CASE("spawn_entity respects degenerate alpha") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  cfg.rep_alpha = 1.0;
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Group g = rng.bernoulli(cfg.rep_alpha) ? Group::A : Group::B;
    CHECK(g == Group::A);
  }
}

TEST_CASE("spawn_entity: group fraction and attribute ranges at defaults") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  Rng rng(11);
  const int n = 10000;
  int n_a = 0;
  for (int i = 0; i < n; ++i) {
    Group g = rng.bernoulli(cfg.rep_alpha) ? Group::A : Group::B;
    Entity e = spawn_entity(i, g, cfg, rng);
    if (e.group == Group::A) {
      ++n_a;
      CHECK(e.wealth >= 50.0);
      CHECK(e.wealth <= 89.0);
    } else {
      CHECK(e.wealth >= 30.0);
      CHECK(e.wealth <= 59.0);
    }
    CHECK(e.trust >= 0.0);
    CHECK(e.trust <= 1.0);
    CHECK(e.fin_lit >= 0.0);
    CHECK(e.fin_lit <= 1.0);
    CHECK(e.credit_score >= 0.0);
    CHECK(e.credit_score <= 1.0);
    CHECK(e.education >= 0);
    CHECK(e.education < kEducationLevels);
    CHECK(e.loan_amount >= 0.5 * e.wealth - 1e-9);
    CHECK(e.loan_amount <= 1.6 * e.wealth + 1e-9);
    CHECK(e.state == LifecycleState::active);
  }
  // Binomial(10^4, 0.5): sd = 50, so a 3-sigma band around 5000.
  CHECK(n_a > 5000 - 150);
  CHECK(n_a < 5000 + 150);
}

TEST_CASE("spawn sequence is deterministic under a fixed seed") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  for (int rep = 0; rep < 2; ++rep) {
    Rng r1(123), r2(123);
    for (int i = 0; i < 100; ++i) {
      Entity a = spawn_entity(i, Group::A, cfg, r1);
      Entity b = spawn_entity(i, Group::A, cfg, r2);
      CHECK(a.wealth == b.wealth);
      CHECK(a.education == b.education);
      CHECK(a.trust == b.trust);
      CHECK(a.fin_lit == b.fin_lit);
      CHECK(a.credit_score == b.credit_score);
      CHECK(a.loan_hist == b.loan_hist);
      CHECK(a.loan_amount == b.loan_amount);
      CHECK(a.has_job == b.has_job);
      CHECK(a.has_car == b.has_car);
      CHECK(a.has_house == b.has_house);
    }
  }
}

TEST_CASE("derive_trust boundaries and monotonicity") {
  // The map is monotone, so the domain corners are the range extremes.
  double lo = derive_trust(0, 0.0);
  double hi = derive_trust(kEducationLevels - 1, 1e9);
  CHECK(lo == doctest::Approx(0.05));
  CHECK(hi == doctest::Approx(1.0));
  for (int e = 0; e < kEducationLevels; ++e) {
    for (double w = 0.0; w <= 150.0; w += 7.5) {
      double t = derive_trust(e, w);
      CHECK(t >= lo);
      CHECK(t <= hi);
      if (e + 1 < kEducationLevels) CHECK(derive_trust(e + 1, w) >= t);
      CHECK(derive_trust(e, w + 5.0) >= t);
    }
  }
}

TEST_CASE("derive_finlit boundaries and monotonicity") {
  double lo = derive_finlit(0, 0.0, 0.0);
  double hi = derive_finlit(kEducationLevels - 1, 1e9, 1.0);
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(1.0));
  for (int e = 0; e + 1 < kEducationLevels; ++e)
    for (double w = 0.0; w <= 140.0; w += 20.0)
      for (double t = 0.0; t <= 1.0; t += 0.25) {
        double f = derive_finlit(e, w, t);
        CHECK(derive_finlit(e + 1, w, t) >= f);
        CHECK(derive_finlit(e, w + 10.0, t) >= f);
        CHECK(derive_finlit(e, w, std::min(1.0, t + 0.1)) >= f);
      }
}

TEST_CASE("group A dominates group B on derived attributes (Monte Carlo)") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  Rng rng(17);
  const int n = 10000;
  double trust_a = 0, trust_b = 0, fl_a = 0, fl_b = 0;
  for (int i = 0; i < n; ++i) {
    Entity a = spawn_entity(2 * i, Group::A, cfg, rng);
    Entity b = spawn_entity(2 * i + 1, Group::B, cfg, rng);
    trust_a += a.trust;
    trust_b += b.trust;
    fl_a += a.fin_lit;
    fl_b += b.fin_lit;
  }
  CHECK(trust_a / n > trust_b / n);
  CHECK(fl_a / n > fl_b / n);
}

TEST_CASE("maybe_join_network honors threshold and empty network") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  PeerNetwork net;
  Rng rng(3);

  Entity shy = make_entity(0, Group::B, cfg.trust_join_threshold - 0.01);
  CHECK_FALSE(maybe_join_network(shy, net, cfg, rng));
  CHECK(net.size() == 0);

  Entity keen = make_entity(1, Group::A, cfg.trust_join_threshold + 0.01);
  CHECK(maybe_join_network(keen, net, cfg, rng));
  CHECK(net.size() == 1);
  CHECK(net.degree(1) == 0);
}

TEST_CASE("peer network enforces the degree cap") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  cfg.trust_join_threshold = 0.0;  // everyone joins
  PeerNetwork net;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Entity e = make_entity(i, Group::A, 0.9);
    maybe_join_network(e, net, cfg, rng);
  }
  for (int id : net.members()) {
    CHECK(net.degree(id) <= PeerNetwork::kMaxPeers);
    // adjacency symmetric, no self loops
    for (int p : net.peers(id)) {
      CHECK(p != id);
      const auto& back = net.peers(p);
      CHECK(std::count(back.begin(), back.end(), id) == 1);
    }
  }
}

TEST_CASE("update_trust fixed point and frozen example") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  PeerNetwork net;
  std::vector<Entity> all;
  all.push_back(make_entity(0, Group::A, 0.4));
  all.push_back(make_entity(1, Group::A, 0.8));
  net.add_member(0);
  net.add_member(1);
  net.try_connect(0, 1);

  SUBCASE("fixed point when trust equals peer mean") {
    all[0].trust = 0.8;
    update_trust(all[0], all, net, cfg);
    CHECK(all[0].trust == doctest::Approx(0.8));
  }

  SUBCASE("trust 0.4, peer mean 0.8, rate 0.5 -> 0.6") {
    cfg.trust_adapt_rate = 0.5;
    update_trust(all[0], all, net, cfg);
    CHECK(all[0].trust == doctest::Approx(0.6));
  }

  SUBCASE("repeated application converges monotonically to the peer mean") {
    double prev = all[0].trust;
    for (int i = 0; i < 100; ++i) {
      update_trust(all[0], all, net, cfg);
      CHECK(all[0].trust >= prev);
      CHECK(all[0].trust <= 0.8 + 1e-12);
      prev = all[0].trust;
    }
    CHECK(all[0].trust == doctest::Approx(0.8).epsilon(1e-4));
  }
}

TEST_CASE("maybe_transact conserves wealth and respects probability zero") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  PeerNetwork net;
  std::vector<Entity> all;
  for (int i = 0; i < 4; ++i) {
    Entity e = make_entity(i, i % 2 ? Group::B : Group::A, 0.3 + 0.1 * i);
    e.wealth = 40.0 + 10.0 * i;
    all.push_back(e);
    net.add_member(i);
  }
  net.try_connect(0, 1);
  net.try_connect(1, 2);
  net.try_connect(2, 3);

  SUBCASE("probability zero") {
    cfg.transaction_prob = 0.0;
    Rng rng(19);
    auto before = all;
    for (int i = 0; i < 100; ++i) {
      Transfer t = maybe_transact(all, net, cfg, rng);
      CHECK_FALSE(t.happened);
    }
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].wealth == before[i].wealth);
  }

  SUBCASE("conservation and direction") {
    cfg.transaction_prob = 1.0;
    Rng rng(19);
    for (int i = 0; i < 500; ++i) {
      double total_before = 0;
      for (const Entity& e : all) total_before += e.wealth;
      Transfer t = maybe_transact(all, net, cfg, rng);
      REQUIRE(t.happened);
      double total_after = 0;
      for (const Entity& e : all) total_after += e.wealth;
      CHECK(total_after == doctest::Approx(total_before).epsilon(1e-12));
      CHECK(all[static_cast<std::size_t>(t.to)].trust >=
            all[static_cast<std::size_t>(t.from)].trust);
      for (const Entity& e : all) CHECK(e.wealth >= 0.0);
    }
  }
}

TEST_CASE("score_applicant corners and monotonicity") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  Entity lo;
  lo.wealth = 0;
  lo.education = 0;
  lo.fin_lit = 0;
  lo.credit_score = 0;
  lo.loan_hist = 0;
  CHECK(score_applicant(lo) <= cfg.qualify_threshold);
  CHECK(score_applicant(lo) == doctest::Approx(0.0));

  Entity hi;
  hi.wealth = 1e9;
  hi.education = 4;
  hi.fin_lit = 1;
  hi.credit_score = 1;
  hi.loan_hist = 10;
  hi.has_job = hi.has_car = hi.has_house = true;
  CHECK(score_applicant(hi) >= cfg.qualify_threshold);
  CHECK(score_applicant(hi) == doctest::Approx(1.0));

  Entity mid = lo;
  mid.wealth = 50;
  double base = score_applicant(mid);
  Entity richer = mid;
  richer.wealth += 10;
  CHECK(score_applicant(richer) >= base);
  Entity lit = mid;
  lit.fin_lit = 0.5;
  CHECK(score_applicant(lit) >= base);
  Entity credit = mid;
  credit.credit_score = 0.5;
  CHECK(score_applicant(credit) >= base);
  Entity employed = mid;
  employed.has_job = true;
  CHECK(score_applicant(employed) >= base);

  Entity copy = mid;
  CHECK(score_applicant(copy) == score_applicant(mid));
}

TEST_CASE("apply_label_bias matches the published formula") {
  CHECK(apply_label_bias(0.37, Group::A, 0.0) == doctest::Approx(0.37));
  CHECK(apply_label_bias(0.37, Group::B, 0.0) == doctest::Approx(0.37));
  CHECK(apply_label_bias(0.5, Group::A, 0.4) == doctest::Approx(0.7));
  CHECK(apply_label_bias(0.5, Group::B, 0.4) == doctest::Approx(0.3));
  CHECK(apply_label_bias(0.9, Group::A, 0.5) == doctest::Approx(1.0));  // clamp

  // Monotone in beta: A non-decreasing, B non-increasing.
  double prev_a = 0.0, prev_b = 1.0;
  for (double beta = 0.0; beta < 1.0; beta += 0.05) {
    double a = apply_label_bias(0.41, Group::A, beta);
    double b = apply_label_bias(0.41, Group::B, beta);
    CHECK(a >= prev_a);
    CHECK(b <= prev_b);
    prev_a = a;
    prev_b = b;
  }
}

TEST_CASE("draw_label flip behavior") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  Rng rng(29);

  cfg.label_flip_prob = 0.0;
  CHECK(draw_label(cfg.qualify_threshold, cfg, rng));
  CHECK(draw_label(1.0, cfg, rng));
  CHECK_FALSE(draw_label(0.0, cfg, rng));

  cfg.label_flip_prob = 1.0;
  CHECK_FALSE(draw_label(1.0, cfg, rng));
  CHECK(draw_label(0.0, cfg, rng));

  cfg.label_flip_prob = 0.05;
  const int n = 100000;
  int flips = 0;
  for (int i = 0; i < n; ++i)
    if (!draw_label(1.0, cfg, rng)) ++flips;  // score 1.0 qualifies; false means flipped
  double rate = static_cast<double>(flips) / n;
  CHECK(rate > 0.045);
  CHECK(rate < 0.055);
}

TEST_CASE("run_simulation basics") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  cfg.n_steps = 0;
  CHECK(run_simulation(cfg).rows.empty());

  cfg.n_steps = 1500;
  cfg.rng_seed = 42;
  SimulationResult r1 = run_simulation(cfg);
  SimulationResult r2 = run_simulation(cfg);
  CHECK(r1.rows.size() == r2.rows.size());
  CHECK(data::to_csv(r1.rows, true) == data::to_csv(r2.rows, true));

  // One row per spawned entity, rows in time order, ids unique.
  CHECK(static_cast<int>(r1.rows.size()) == r1.stats.entities_spawned);
  std::set<int> ids;
  int prev_step = 0;
  for (const auto& row : r1.rows) {
    CHECK(row.timestep >= prev_step);
    prev_step = row.timestep;
    CHECK(ids.insert(row.entity_id).second);
    CHECK(row.features[data::kTrust] >= 0.0);
    CHECK(row.features[data::kTrust] <= 1.0);
    CHECK(row.raw_score >= 0.0);
    CHECK(row.raw_score <= 1.0);
  }
}

TEST_CASE("simulation reproduces the structural and injected biases") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  cfg.n_steps = 4000;
  cfg.rng_seed = 7;

  auto rates = [](const SimulationResult& r) {
    std::array<double, 2> pos{0, 0}, tot{0, 0};
    for (const auto& row : r.rows) {
      tot[group_index(row.group)] += 1;
      if (row.label) pos[group_index(row.group)] += 1;
    }
    REQUIRE(tot[0] > 0);
    REQUIRE(tot[1] > 0);
    return std::array<double, 2>{pos[0] / tot[0], pos[1] / tot[1]};
  };

  SUBCASE("beta = 0, alpha = 0.5: attribute distributions alone favor A") {
    cfg.lbl_beta = 0.0;
    cfg.rep_alpha = 0.5;
    auto r = rates(run_simulation(cfg));
    CHECK(r[0] > r[1]);
  }

  SUBCASE("beta = 0.4 widens the gap") {
    cfg.lbl_beta = 0.4;
    cfg.rep_alpha = 0.5;
    auto r = rates(run_simulation(cfg));
    CHECK(r[0] > r[1] + 0.3);
  }

  SUBCASE("network membership leans toward group A at defaults") {
    cfg.lbl_beta = 0.0;
    cfg.rep_alpha = 0.5;
    SimulationResult res = run_simulation(cfg);
    double frac_a = static_cast<double>(res.stats.network_members_by_group[0]) /
                    std::max(1, res.stats.spawned_by_group[0]);
    double frac_b = static_cast<double>(res.stats.network_members_by_group[1]) /
                    std::max(1, res.stats.spawned_by_group[1]);
    CHECK(frac_a > frac_b);
  }

  SUBCASE("cumulative received transaction volume favors group A") {
    cfg.lbl_beta = 0.0;
    cfg.rep_alpha = 0.5;
    SimulationResult res = run_simulation(cfg);
    REQUIRE(res.stats.transactions > 0);
    CHECK(res.stats.received_by_group[0] > res.stats.received_by_group[1]);
  }
}

#include "fairsim/sim/simulation.hpp"

namespace fairsim::sim {

namespace {

data::DatasetRow make_row(const Entity& e, int step, double raw, double biased,
                          bool label) {
  data::DatasetRow r;
  r.entity_id = e.id;
  r.timestep = step;
  r.group = e.group;
  r.features[data::kWealth] = e.wealth;
  r.features[data::kEducation] = static_cast<double>(e.education);
  r.features[data::kTrust] = e.trust;
  r.features[data::kFinLit] = e.fin_lit;
  r.features[data::kCreditScore] = e.credit_score;
  r.features[data::kLoanHist] = static_cast<double>(e.loan_hist);
  r.features[data::kLoanAmount] = e.loan_amount;
  r.features[data::kHasJob] = e.has_job ? 1.0 : 0.0;
  r.features[data::kHasCar] = e.has_car ? 1.0 : 0.0;
  r.features[data::kHasHouse] = e.has_house ? 1.0 : 0.0;
  r.label = label;
  r.raw_score = raw;
  r.biased_score = biased;
  return r;
}

}  // namespace

SimulationResult run_simulation(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.rng_seed);

  SimulationResult res;
  std::vector<Entity> entities;
  PeerNetwork net;
  // Application step of each entity, drawn at spawn (uniform over the rest of
  // the run) so every entity applies exactly once.
  std::vector<std::vector<int>> due_at(static_cast<std::size_t>(cfg.n_steps) + 1);

  for (int step = 1; step <= cfg.n_steps; ++step) {
    // Spawn phase.
    if (rng.bernoulli(cfg.spawn_prob)) {
      Group g = rng.bernoulli(cfg.rep_alpha) ? Group::A : Group::B;
      int id = static_cast<int>(entities.size());
      entities.push_back(spawn_entity(id, g, cfg, rng));
      const Entity& e = entities.back();
      res.stats.entities_spawned++;
      res.stats.spawned_by_group[group_index(g)]++;
      due_at[static_cast<std::size_t>(rng.uniform_int(step, cfg.n_steps))].push_back(id);
      if (maybe_join_network(e, net, cfg, rng))
        res.stats.network_members_by_group[group_index(g)]++;
    }

    // Peer influence: members drift toward the average trust of their peers.
    // In-place sweep in join order; deterministic.
    for (int id : net.members())
      update_trust(entities[static_cast<std::size_t>(id)], entities, net, cfg);

    // At most one exchange per step.
    Transfer t = maybe_transact(entities, net, cfg, rng);
    if (t.happened) {
      res.stats.transactions++;
      res.stats.received_by_group[group_index(entities[(std::size_t)t.to].group)] += t.amount;
      res.stats.paid_by_group[group_index(entities[(std::size_t)t.from].group)] += t.amount;
    }

    // Applications due this step, in spawn order.
    for (int id : due_at[static_cast<std::size_t>(step)]) {
      Entity& e = entities[static_cast<std::size_t>(id)];
      e.state = LifecycleState::applied;
      double raw = score_applicant(e);
      double biased = apply_label_bias(raw, e.group, cfg.lbl_beta);
      bool label = assign_label(e, biased, cfg, rng);
      if (label) res.stats.positives_by_group[group_index(e.group)]++;
      res.rows.push_back(make_row(e, step, raw, biased, label));
    }
  }
  return res;
}

}  // namespace fairsim::sim

#pragma once

#include <array>
#include <vector>

#include "fairsim/data/dataset.hpp"
#include "fairsim/sim/config.hpp"
#include "fairsim/sim/entity.hpp"
#include "fairsim/sim/network.hpp"

namespace fairsim::sim {

struct SimulationStats {
  int entities_spawned = 0;
  std::array<int, kNumGroups> spawned_by_group{};
  std::array<int, kNumGroups> network_members_by_group{};
  std::array<double, kNumGroups> received_by_group{};  // transaction volume in
  std::array<double, kNumGroups> paid_by_group{};      // transaction volume out
  int transactions = 0;
  std::array<int, kNumGroups> positives_by_group{};    // emitted labels
};

struct SimulationResult {
  std::vector<data::DatasetRow> rows;  // one per entity, in application order
  SimulationStats stats;
};

// Runs the agent-based model for cfg.n_steps steps. Entities spawn at a
// seeded rate, optionally join the peer network, adapt trust toward their
// peers, occasionally exchange wealth, and each files exactly one loan
// application at a seeded step of its lifetime. Fully deterministic given
// cfg.rng_seed.
SimulationResult run_simulation(const ScenarioConfig& cfg);

}  // namespace fairsim::sim

#pragma once

#include <cstddef>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairsim/rng.hpp"
#include "fairsim/sim/config.hpp"
#include "fairsim/sim/entity.hpp"

namespace fairsim::sim {

// Undirected peer graph with a hard cap on the degree of every node.
class PeerNetwork {
 public:
  static constexpr int kMaxPeers = 3;

  bool contains(int id) const { return adj_.count(id) > 0; }
  std::size_t size() const { return members_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Membership ids in join order.
  const std::vector<int>& members() const { return members_; }

  // Sorted peer ids; id must be a member.
  const std::vector<int>& peers(int id) const;

  int degree(int id) const;

  void add_member(int id);

  // Adds an undirected edge unless it exists, is a self loop, or would push
  // either endpoint past kMaxPeers. Returns whether the edge was added.
  bool try_connect(int a, int b);

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

 private:
  std::unordered_map<int, std::vector<int>> adj_;
  std::vector<int> members_;
  std::vector<std::pair<int, int>> edges_;
};

// Adds e to the network if its trust clears cfg.trust_join_threshold, then
// wires it to up to kMaxPeers uniformly chosen members with spare degree.
// Returns whether the entity joined.
bool maybe_join_network(const Entity& e, PeerNetwork& net, const ScenarioConfig& cfg, Rng& rng);

// Moves e.trust toward the average trust of its peers by trust_adapt_rate.
// No-op for non-members and members without peers.
void update_trust(Entity& e, const std::vector<Entity>& all, const PeerNetwork& net,
                  const ScenarioConfig& cfg);

struct Transfer {
  bool happened = false;
  int from = -1;
  int to = -1;
  double amount = 0.0;
};

// With probability cfg.transaction_prob, moves transaction_fraction of the
// poorer endpoint's wealth across one uniformly chosen edge, from the
// lower-trust endpoint to the higher-trust one. Total wealth is conserved.
Transfer maybe_transact(std::vector<Entity>& all, const PeerNetwork& net,
                        const ScenarioConfig& cfg, Rng& rng);

}  // namespace fairsim::sim

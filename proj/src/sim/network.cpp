#include "fairsim/sim/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace fairsim::sim {

const std::vector<int>& PeerNetwork::peers(int id) const {
  auto it = adj_.find(id);
  if (it == adj_.end()) throw std::out_of_range("PeerNetwork::peers: not a member");
  return it->second;
}

int PeerNetwork::degree(int id) const {
  auto it = adj_.find(id);
  return it == adj_.end() ? 0 : static_cast<int>(it->second.size());
}

void PeerNetwork::add_member(int id) {
  if (adj_.count(id)) return;
  adj_.emplace(id, std::vector<int>{});
  members_.push_back(id);
}

bool PeerNetwork::try_connect(int a, int b) {
  if (a == b) return false;
  auto ia = adj_.find(a);
  auto ib = adj_.find(b);
  if (ia == adj_.end() || ib == adj_.end()) return false;
  if (static_cast<int>(ia->second.size()) >= kMaxPeers) return false;
  if (static_cast<int>(ib->second.size()) >= kMaxPeers) return false;
  if (std::binary_search(ia->second.begin(), ia->second.end(), b)) return false;
  ia->second.insert(std::upper_bound(ia->second.begin(), ia->second.end(), b), b);
  ib->second.insert(std::upper_bound(ib->second.begin(), ib->second.end(), a), a);
  edges_.emplace_back(std::min(a, b), std::max(a, b));
  return true;
}

bool maybe_join_network(const Entity& e, PeerNetwork& net, const ScenarioConfig& cfg,
                        Rng& rng) {
  if (e.trust < cfg.trust_join_threshold) return false;
  if (net.contains(e.id)) return false;

  // Candidates with spare degree, in join order for a reproducible draw.
  std::vector<int> candidates;
  candidates.reserve(net.size());
  for (int id : net.members())
    if (id != e.id && net.degree(id) < PeerNetwork::kMaxPeers) candidates.push_back(id);

  net.add_member(e.id);
  int want = std::min<int>(PeerNetwork::kMaxPeers, static_cast<int>(candidates.size()));
  for (int k = 0; k < want; ++k) {
    std::size_t pick = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1));
    net.try_connect(e.id, candidates[pick]);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
    if (candidates.empty()) break;
  }
  return true;
}

void update_trust(Entity& e, const std::vector<Entity>& all, const PeerNetwork& net,
                  const ScenarioConfig& cfg) {
  if (!net.contains(e.id)) return;
  const std::vector<int>& ps = net.peers(e.id);
  if (ps.empty()) return;
  double mean = 0;
  for (int pid : ps) mean += all[static_cast<std::size_t>(pid)].trust;
  mean /= static_cast<double>(ps.size());
  e.trust += cfg.trust_adapt_rate * (mean - e.trust);
}

Transfer maybe_transact(std::vector<Entity>& all, const PeerNetwork& net,
                        const ScenarioConfig& cfg, Rng& rng) {
  Transfer t;
  if (net.edge_count() == 0) return t;
  if (!rng.bernoulli(cfg.transaction_prob)) return t;

  const auto& edge = net.edges()[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(net.edge_count()) - 1))];
  Entity& ea = all[static_cast<std::size_t>(edge.first)];
  Entity& eb = all[static_cast<std::size_t>(edge.second)];

  // Trust decides direction; the lower-trust side pays. Exact ties fall back
  // to id order so the outcome never depends on evaluation order.
  Entity* payer = &ea;
  Entity* recv = &eb;
  if (ea.trust > eb.trust || (ea.trust == eb.trust && ea.id < eb.id)) {
    payer = &eb;
    recv = &ea;
  }
  double amount = cfg.transaction_fraction * std::min(ea.wealth, eb.wealth);
  payer->wealth -= amount;
  recv->wealth += amount;

  t.happened = true;
  t.from = payer->id;
  t.to = recv->id;
  t.amount = amount;
  return t;
}

}  // namespace fairsim::sim

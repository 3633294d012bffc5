#pragma once

#include <string>
#include <vector>

#include "fairsim/explain/shapley.hpp"

namespace fairsim::explain {

// Node and edge view of a second-order explanation: node size tracks the
// main effect, edge width the pair effect, and negative pair effects are
// marked redundant (the "blue edges").
struct InteractionGraph {
  struct Node {
    std::string name;
    double magnitude = 0;
    int sign = 0;  // -1, 0, +1
    bool operator==(const Node&) const = default;
  };
  struct Edge {
    std::string a, b;
    double magnitude = 0;
    int sign = 0;
    bool redundant = false;  // negative interaction
    bool operator==(const Edge&) const = default;
  };

  std::vector<Node> nodes;
  std::vector<Edge> edges;

  bool operator==(const InteractionGraph&) const = default;
};

// Keeps every feature as a node and the top_k strongest pair effects as
// edges (zero-magnitude pairs never make an edge). Edge order is strength
// descending with lexicographic tie-breaks, so output is deterministic.
InteractionGraph build_interaction_graph(const ShapleyExplanation& expl, int top_k_edges);

// max node magnitude over total node magnitude; 0 when everything is 0
double hub_concentration(const InteractionGraph& g);

std::string graph_to_dot(const InteractionGraph& g);
std::string graph_to_json(const InteractionGraph& g);
InteractionGraph graph_from_json(const std::string& text);

std::string explanation_to_json(const ShapleyExplanation& expl);

}  // namespace fairsim::explain

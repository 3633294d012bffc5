#include "fairsim/explain/graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fairsim::explain {

namespace {

int sign_of(double v) { return v > 0 ? 1 : v < 0 ? -1 : 0; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

InteractionGraph build_interaction_graph(const ShapleyExplanation& expl, int top_k_edges) {
  if (top_k_edges < 0) throw std::invalid_argument("build_interaction_graph: top_k_edges < 0");
  const int d = expl.n_features();
  InteractionGraph g;
  for (int i = 0; i < d; ++i)
    g.nodes.push_back({expl.feature_names[i], std::abs(expl.phi[i]), sign_of(expl.phi[i])});

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (expl.pair(i, j) != 0) pairs.emplace_back(i, j);
  std::sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
    const double mp = std::abs(expl.pair(p.first, p.second));
    const double mq = std::abs(expl.pair(q.first, q.second));
    if (mp != mq) return mp > mq;
    return p < q;
  });
  if (static_cast<int>(pairs.size()) > top_k_edges) pairs.resize(top_k_edges);

  for (const auto& [i, j] : pairs) {
    const double v = expl.pair(i, j);
    g.edges.push_back(
        {expl.feature_names[i], expl.feature_names[j], std::abs(v), sign_of(v), v < 0});
  }
  return g;
}

double hub_concentration(const InteractionGraph& g) {
  double total = 0, peak = 0;
  for (const auto& n : g.nodes) {
    total += n.magnitude;
    peak = std::max(peak, n.magnitude);
  }
  return total > 0 ? peak / total : 0.0;
}

std::string graph_to_dot(const InteractionGraph& g) {
  std::string out = "graph interactions {\n";
  out += "  node [shape=circle style=filled fixedsize=true];\n";
  for (const auto& n : g.nodes) {
    const char* fill = n.sign > 0 ? "salmon" : n.sign < 0 ? "lightblue" : "lightgray";
    out += "  \"" + n.name + "\" [width=" + fmt(0.3 + n.magnitude) + ", fillcolor=" + fill +
           "];\n";
  }
  for (const auto& e : g.edges) {
    const char* color = e.redundant ? "blue" : "gray40";
    out += "  \"" + e.a + "\" -- \"" + e.b + "\" [penwidth=" + fmt(1.0 + 4.0 * e.magnitude) +
           ", color=" + color + "];\n";
  }
  out += "}\n";
  return out;
}

std::string graph_to_json(const InteractionGraph& g) {
  nlohmann::json j;
  j["schema"] = "fairsim-interaction-graph";
  j["version"] = 1;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : g.nodes)
    j["nodes"].push_back({{"name", n.name}, {"magnitude", n.magnitude}, {"sign", n.sign}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges)
    j["edges"].push_back({{"a", e.a},
                          {"b", e.b},
                          {"magnitude", e.magnitude},
                          {"sign", e.sign},
                          {"redundant", e.redundant}});
  return j.dump(2);
}

InteractionGraph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("graph_from_json: not JSON: ") + e.what());
  }
  if (j.value("schema", "") != "fairsim-interaction-graph")
    throw std::invalid_argument("graph_from_json: unknown schema");
  InteractionGraph g;
  for (const auto& n : j.at("nodes"))
    g.nodes.push_back({n.at("name").get<std::string>(), n.at("magnitude").get<double>(),
                       n.at("sign").get<int>()});
  for (const auto& e : j.at("edges"))
    g.edges.push_back({e.at("a").get<std::string>(), e.at("b").get<std::string>(),
                       e.at("magnitude").get<double>(), e.at("sign").get<int>(),
                       e.at("redundant").get<bool>()});
  return g;
}

std::string explanation_to_json(const ShapleyExplanation& expl) {
  nlohmann::json j;
  j["schema"] = "fairsim-shapley2";
  j["version"] = 1;
  j["baseline"] = expl.baseline;
  j["prediction"] = expl.prediction;
  j["phi"] = nlohmann::json::object();
  const int d = expl.n_features();
  for (int i = 0; i < d; ++i) j["phi"][expl.feature_names[i]] = expl.phi[i];
  j["phi_pair"] = nlohmann::json::array();
  for (int i = 0; i < d; ++i)
    for (int k = i + 1; k < d; ++k)
      j["phi_pair"].push_back({{"a", expl.feature_names[i]},
                               {"b", expl.feature_names[k]},
                               {"value", expl.pair(i, k)}});
  return j.dump(2);
}

}  // namespace fairsim::explain

#include <cmath>
#include <cstdio>
#include <map>

#include "gctr/equilibrium.hpp"
#include "gctr/graph.hpp"

namespace gctr {

namespace {

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string fixed2(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

}  // namespace

std::string render_dot(const AttackGraph& graph,
                       const EquilibriumSolution* solution) {
  std::map<NodeId, double> defender;
  std::map<std::pair<NodeId, NodeId>, double> path_mass;
  if (solution != nullptr) {
    for (const auto& [id, p] : solution->defender) defender[id] = p;
    for (const PathStrategy& ps : solution->attacker) {
      if (ps.probability <= 0.0) continue;
      for (std::size_t i = 0; i + 1 < ps.path.nodes.size(); ++i) {
        path_mass[{ps.path.nodes[i], ps.path.nodes[i + 1]}] += ps.probability;
      }
    }
  }

  NodeId entry = graph.empty() ? -1 : graph.min_node_id();
  std::string out = "digraph attack_graph {\n";
  out += "  rankdir=LR;\n";
  out += "  node [style=filled, fontname=\"Helvetica\"];\n";
  for (const auto& [id, node] : graph.nodes()) {
    std::string fill = "lightcyan";
    if (id == entry) fill = "gray80";
    if (node.vulnerable) fill = "teal";
    // User text is escaped; the \n separators are DOT line breaks.
    std::string label = escape(node.name.empty() ? node.label : node.name);
    label += "\\n(id " + escape(node.label) + ")";
    if (auto it = defender.find(id); it != defender.end()) {
      label += "\\ninspect " + fixed2(it->second);
    }
    out += "  n" + std::to_string(id) + " [label=\"" + label +
           "\", fillcolor=" + fill;
    if (node.vulnerable) out += ", fontcolor=white";
    if (node.artificial) out += ", style=\"filled,dashed\"";
    out += "];\n";
  }
  for (const auto& [key, score] : graph.edges()) {
    out += "  n" + std::to_string(key.first) + " -> n" +
           std::to_string(key.second);
    std::string label;
    if (score) label = fixed2(*score);
    if (auto it = path_mass.find(key); it != path_mass.end()) {
      if (!label.empty()) label += " / ";
      label += "p=" + fixed2(it->second);
    }
    if (!label.empty()) out += " [label=\"" + escape(label) + "\"]";
    out += ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace gctr

#include "gctr/digest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace gctr {

namespace {

std::string format_fixed(double value, int precision = 6) {
  if (value == 0.0) value = 0.0;
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
  return buffer;
}

std::string percent_int(double p) {
  return std::to_string(static_cast<long>(std::llround(p * 100.0))) + "%";
}

std::string percent_one_decimal(double p) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1f%%", p * 100.0);
  return buffer;
}

std::string display_name(const AttackGraph& graph, NodeId id) {
  const AttackNode& node = graph.node(id);
  return node.name.empty() ? node.label : node.name;
}

}  // namespace

std::string to_string(DigestMode mode) {
  return mode == DigestMode::algorithmic ? "algorithmic" : "llm";
}

std::string to_string(DigestRole role) {
  switch (role) {
    case DigestRole::attacker: return "attacker";
    case DigestRole::defender: return "defender";
    case DigestRole::merged: return "merged";
  }
  return "merged";
}

DigestMode parse_digest_mode(const std::string& text) {
  if (text == "algorithmic") return DigestMode::algorithmic;
  if (text == "llm") return DigestMode::llm;
  throw DomainError("unknown digest mode '" + text + "'");
}

DigestRole parse_digest_role(const std::string& text) {
  if (text == "attacker") return DigestRole::attacker;
  if (text == "defender") return DigestRole::defender;
  if (text == "merged") return DigestRole::merged;
  throw DomainError("unknown digest role '" + text + "'");
}

TransitionClassification classify_transitions(
    const EquilibriumSolution& solution, const NormalizedGraph& scored,
    const ClassificationThresholds& thresholds) {
  TransitionClassification result;

  // Real edges on positive-probability paths, deduplicated; artificial
  // leaf hops carry a synthetic 1.0 and are skipped.
  std::map<std::pair<NodeId, NodeId>, double> edges;
  for (const PathStrategy& ps : solution.attacker) {
    if (ps.probability <= 1e-12) continue;
    const std::vector<NodeId>& nodes = ps.path.nodes;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      if (scored.graph.node(nodes[i + 1]).artificial) continue;
      std::optional<double> score =
          scored.graph.edge_score(nodes[i], nodes[i + 1]);
      if (!score) continue;
      edges[{nodes[i], nodes[i + 1]}] = *score;
    }
  }
  for (const auto& [key, p] : edges) {
    ScoredTransition transition{key.first, key.second, p};
    if (p < thresholds.bottleneck) result.bottlenecks.push_back(transition);
    if (p > thresholds.high_risk) result.high_risk.push_back(transition);
  }

  std::vector<std::pair<NodeId, double>> support;
  for (const auto& [id, p] : solution.defender) {
    if (p > 1e-12) support.emplace_back(id, p);
  }
  std::stable_sort(support.begin(), support.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  for (const auto& [id, p] : support) result.critical_nodes.push_back(id);
  return result;
}

namespace {

double defender_probability(const EquilibriumSolution& solution, NodeId id) {
  for (const auto& [node, p] : solution.defender) {
    if (node == id) return p;
  }
  return 0.0;
}

std::string path_line(const PathStrategy& ps, const NormalizedGraph& scored) {
  const std::vector<NodeId>& real = ps.path.real_nodes();
  std::string line = "Path " + std::to_string(ps.path_id) + ": ";
  for (std::size_t i = 0; i < real.size(); ++i) {
    if (i > 0) {
      std::optional<double> score =
          scored.graph.edge_score(real[i - 1], real[i]);
      line += " ->[" + percent_int(score.value_or(0.0)) + "] ";
    }
    line += display_name(scored.graph, real[i]);
  }
  line += " ->[100%] Target (" + display_name(scored.graph, real.back()) + ")";
  line += " -- path probability " + percent_int(ps.probability);
  return line;
}

std::string transition_lines(const std::vector<ScoredTransition>& transitions,
                             const NormalizedGraph& scored) {
  if (transitions.empty()) return "- none\n";
  std::string out;
  for (const ScoredTransition& t : transitions) {
    out += "- " + display_name(scored.graph, t.source) + " -> " +
           display_name(scored.graph, t.target) + ": " +
           percent_one_decimal(t.probability) + " success rate\n";
  }
  return out;
}

std::string paths_section(const EquilibriumSolution& solution,
                          const NormalizedGraph& scored) {
  std::vector<PathStrategy> ordered = solution.attacker;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const PathStrategy& a, const PathStrategy& b) {
                     if (a.probability != b.probability) {
                       return a.probability > b.probability;
                     }
                     return a.path_id < b.path_id;
                   });
  std::string out;
  for (const PathStrategy& ps : ordered) out += path_line(ps, scored) + "\n";
  if (ordered.empty()) out += "- none\n";
  return out;
}

std::string critical_node_lines(const TransitionClassification& classification,
                                const EquilibriumSolution& solution,
                                const NormalizedGraph& scored) {
  if (classification.critical_nodes.empty()) return "- none\n";
  std::string out;
  for (NodeId id : classification.critical_nodes) {
    out += "- " + display_name(scored.graph, id) + ": inspection probability " +
           format_fixed(defender_probability(solution, id)) + "\n";
  }
  return out;
}

std::string defender_table_lines(const EquilibriumSolution& solution,
                                 const NormalizedGraph& scored) {
  if (solution.defender.empty()) return "- no defendable nodes\n";
  std::vector<std::pair<NodeId, double>> rows = solution.defender;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::string out;
  for (const auto& [id, p] : rows) {
    out += "- " + display_name(scored.graph, id) + ": " + format_fixed(p) + "\n";
  }
  return out;
}

std::string degeneracy_section(const EquilibriumSolution& solution) {
  if (!solution.degenerate) return "";
  return "### Degenerate Game Notice\nNo defendable interior exists (" +
         solution.degenerate_reason +
         "); the equilibrium value is reported as 0.000000 by rule and does "
         "not mean the attack is contained.\n\n";
}

std::string attacker_body(const EquilibriumSolution& solution,
                          const TransitionClassification& classification,
                          const NormalizedGraph& scored) {
  std::string out = "## Attacker View\n\n";
  out += degeneracy_section(solution);
  out += "### Identified Attack Paths\n" + paths_section(solution, scored) +
         "\n";
  out += "### High-Risk Transitions (reliable moves)\n" +
         transition_lines(classification.high_risk, scored) + "\n";
  out += "### Critical Bottlenecks (attack weaknesses)\n" +
         transition_lines(classification.bottlenecks, scored) + "\n";
  out += "### Critical Nodes (likely inspections)\n" +
         critical_node_lines(classification, solution, scored) + "\n";
  out += "### Tactical Guidance\n";
  std::vector<PathStrategy> ordered = solution.attacker;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const PathStrategy& a, const PathStrategy& b) {
                     if (a.probability != b.probability) {
                       return a.probability > b.probability;
                     }
                     return a.path_id < b.path_id;
                   });
  if (!ordered.empty() && ordered.front().probability > 1e-12) {
    out += "- Commit to Path " + std::to_string(ordered.front().path_id) +
           " (" + percent_int(ordered.front().probability) +
           "): it carries the highest success mass.\n";
  }
  if (!classification.high_risk.empty()) {
    const ScoredTransition& t = classification.high_risk.front();
    out += "- Rely on " + display_name(scored.graph, t.source) + " -> " +
           display_name(scored.graph, t.target) + " (" +
           percent_one_decimal(t.probability) +
           "): it is your most dependable transition.\n";
  }
  if (!classification.bottlenecks.empty()) {
    const ScoredTransition& t = classification.bottlenecks.front();
    out += "- Expect resistance at " + display_name(scored.graph, t.source) +
           " -> " + display_name(scored.graph, t.target) + " (" +
           percent_one_decimal(t.probability) +
           "); prepare an alternative before attempting it.\n";
  }
  if (!classification.critical_nodes.empty()) {
    out += "- Avoid lingering at " +
           display_name(scored.graph, classification.critical_nodes.front()) +
           ": it is the defender's most likely inspection.\n";
  }
  out += "- The guaranteed success probability is " +
         format_fixed(solution.value) + "; plan beyond the equilibrium.\n";
  return out;
}

std::string defender_body(const EquilibriumSolution& solution,
                          const TransitionClassification& classification,
                          const NormalizedGraph& scored) {
  std::string out = "## Defender View\n\n";
  out += degeneracy_section(solution);
  out += "### Critical Nodes (inspection allocation)\n" +
         defender_table_lines(solution, scored) + "\n";
  out += "### High-Risk Transitions (harden first)\n" +
         transition_lines(classification.high_risk, scored) + "\n";
  out += "### Critical Bottlenecks (attacker weaknesses)\n" +
         transition_lines(classification.bottlenecks, scored) + "\n";
  out += "### Identified Attack Paths\n" + paths_section(solution, scored) +
         "\n";
  out += "### Tactical Guidance\n";
  if (!classification.critical_nodes.empty()) {
    NodeId top = classification.critical_nodes.front();
    out += "- Concentrate inspections on " + display_name(scored.graph, top) +
           " (probability " +
           format_fixed(defender_probability(solution, top)) + ").\n";
  }
  if (!classification.high_risk.empty()) {
    const ScoredTransition& t = classification.high_risk.front();
    out += "- Harden " + display_name(scored.graph, t.source) + " -> " +
           display_name(scored.graph, t.target) + " first: the attacker " +
           "succeeds there " + percent_one_decimal(t.probability) +
           " of the time.\n";
  }
  if (!classification.bottlenecks.empty()) {
    const ScoredTransition& t = classification.bottlenecks.front();
    out += "- Watch the bottleneck " + display_name(scored.graph, t.source) +
           " -> " + display_name(scored.graph, t.target) + " (" +
           percent_one_decimal(t.probability) +
           "): the attacker is weakest there.\n";
  }
  out += "- Holding this allocation keeps attacker success at or below " +
         format_fixed(solution.value) + ".\n";
  return out;
}

}  // namespace

Digest render_algorithmic_digest(const EquilibriumSolution& solution,
                                 const TransitionClassification& classification,
                                 DigestRole role,
                                 const NormalizedGraph& scored) {
  Digest digest;
  digest.mode = DigestMode::algorithmic;
  digest.role = role;
  digest.source_solution = solution;

  std::string text = "# G-CTR Security Analysis\n\n";
  switch (role) {
    case DigestRole::attacker:
      text += attacker_body(solution, classification, scored);
      break;
    case DigestRole::defender:
      text += defender_body(solution, classification, scored);
      break;
    case DigestRole::merged:
      text += attacker_body(solution, classification, scored);
      text += "\n";
      text += defender_body(solution, classification, scored);
      break;
  }
  digest.text = std::move(text);
  return digest;
}

const char* const kGuidancePromptTemplate =
    "You are a strategic analyst for an adversarial security exercise. Below "
    "you will find the complete equilibrium analysis of the current attack "
    "graph: the defender strategy table, the attacker strategy table, the "
    "game equilibrium block, and the list of scored transitions. The graph "
    "was extracted from a live exercise log. Every edge carries an effort "
    "score between 0 and 1, where 1 means the transition was trivially "
    "adjacent in the log and 0 means it was unreachable. The defender table "
    "gives the optimal probability of inspecting each defendable node. The "
    "attacker table gives the probability that a rational attacker commits "
    "to each listed path. The equilibrium value is the success probability "
    "both sides can guarantee.\n"
    "\n"
    "Write a strategic digest in markdown with exactly five sections, using "
    "these headings in this order: Identified Attack Paths, Critical "
    "Bottlenecks, Critical Nodes, High-Risk Transitions, Tactical Guidance.\n"
    "\n"
    "In Identified Attack Paths, restate each positive-probability path in "
    "arrow notation with bracketed integer percentages on every hop and "
    "explain in one sentence why it matters. In Critical Bottlenecks, list "
    "the transitions whose score falls below the bottleneck threshold; these "
    "are weak attack steps where the attacker struggles and the defender "
    "holds the advantage. If there are none, write none. In Critical Nodes, "
    "rank the defender-support nodes by inspection probability and state "
    "what each inspection protects. In High-Risk Transitions, list the "
    "transitions whose score exceeds the high-risk threshold; these are "
    "strong attack steps that succeed easily and deserve hardening first. If "
    "there are none, write none. In Tactical Guidance, give at most five "
    "imperative recommendations that follow directly from the tables: where "
    "the next action should concentrate, which transitions to exploit or to "
    "harden, and what the equilibrium value implies about the current "
    "balance of power.\n"
    "\n"
    "Ground every claim in the numbers provided. Do not invent nodes, paths, "
    "or scores that are not in the data. Keep the whole digest under four "
    "hundred words, write plainly, and prefer concrete node names over ids. "
    "The digest will be injected into an operating agent's system prompt, so "
    "make every sentence actionable.\n"
    "\n"
    "The analysis data follows.\n";

InferenceRequest build_llm_prompt(const NormalizedGraph& scored,
                                  const EquilibriumSolution& solution,
                                  const std::string& model_hint) {
  TransitionClassification classification =
      classify_transitions(solution, scored);

  std::string prompt = kGuidancePromptTemplate;
  prompt += "\n";
  prompt += format_solution_tables(solution, scored);
  prompt += "\nEdge scores:\n";
  bool any = false;
  for (const auto& [key, score] : scored.graph.edges()) {
    if (scored.graph.node(key.second).artificial) continue;
    prompt += "- " + display_name(scored.graph, key.first) + " -> " +
              display_name(scored.graph, key.second) + ": " +
              (score ? format_fixed(*score) : "unscored") + "\n";
    any = true;
  }
  if (!any) prompt += "none\n";
  prompt += "\nBottleneck transitions (score < 0.95):\n" +
            transition_lines(classification.bottlenecks, scored);
  prompt += "\nHigh-risk transitions (score > 0.90):\n" +
            transition_lines(classification.high_risk, scored);

  InferenceRequest request;
  request.prompt = std::move(prompt);
  request.temperature = 0.3;
  request.model_hint = model_hint;
  return request;
}

Digest generate_digest(const NormalizedGraph& scored,
                       const EquilibriumSolution& solution, DigestMode mode,
                       DigestRole role, InferenceClient* inference,
                       const DigestOptions& options) {
  TransitionClassification classification =
      classify_transitions(solution, scored, options.thresholds);
  Digest digest =
      render_algorithmic_digest(solution, classification, role, scored);
  if (mode == DigestMode::algorithmic) return digest;

  digest.mode = DigestMode::llm;
  InferenceRequest request =
      build_llm_prompt(scored, solution, options.model_hint);
  digest.temperature = request.temperature;
  if (inference == nullptr) {
    digest.fallback_used = true;
    return digest;
  }
  InferenceResult result =
      complete_with_timeout(*inference, request, options.timeout);
  if (!result.ok || result.text.empty()) {
    digest.fallback_used = true;
    return digest;
  }
  digest.text = result.text;
  digest.fallback_used = false;
  return digest;
}

}  // namespace gctr

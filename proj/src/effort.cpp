#include "gctr/effort.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace gctr {

void EffortWeights::validate() const {
  if (msg < 0.0 || tok < 0.0 || cost < 0.0) {
    throw DomainError("effort weights must be non-negative");
  }
  if (std::abs(msg + tok + cost - 1.0) > 1e-12) {
    throw DomainError("effort weights must sum to 1");
  }
}

double message_effort(int m, int J) {
  if (J < 1) throw DomainError("message total J must be positive");
  if (m < 1 || m > J) throw DomainError("message distance m outside [1, J]");
  if (J == 1) return 1.0;
  return 1.0 - static_cast<double>(m - 1) / static_cast<double>(J - 1);
}

double token_effort(long long t, long long T) {
  if (t < 0 || T < 0) throw DomainError("token counts must be non-negative");
  if (t > T) throw DomainError("edge tokens exceed log total");
  if (T == 0) return 1.0;
  return 1.0 - static_cast<double>(t) / static_cast<double>(T);
}

double cost_effort(double c, double C) {
  if (c < 0.0 || C < 0.0) throw DomainError("costs must be non-negative");
  if (C == 0.0) return 1.0;
  if (c > C) throw DomainError("edge cost exceeds log total");
  return 1.0 - c / C;
}

double estimate_cost(long long y, long long x, double cost_x) {
  if (x < 1) throw DomainError("reference token count must be positive");
  return static_cast<double>(y) / static_cast<double>(x) * cost_x;
}

double effort_score(const EffortWeights& weights, double phi_msg,
                    double phi_tok, double phi_cost) {
  weights.validate();
  for (double phi : {phi_msg, phi_tok, phi_cost}) {
    if (phi < 0.0 || phi > 1.0) {
      throw DomainError("effort components must lie in [0, 1]");
    }
  }
  return weights.msg * phi_msg + weights.tok * phi_tok +
         weights.cost * phi_cost;
}

namespace {

bool valid_anchor(const AttackNode& node, int J) {
  return node.message_id >= 1 && node.message_id <= J;
}

// Vulnerable descendants reachable from `start`, `start` included when
// vulnerable. Ascending id.
std::vector<NodeId> vulnerable_descendants(const AttackGraph& graph,
                                           NodeId start) {
  std::set<NodeId> seen{start};
  std::deque<NodeId> queue{start};
  std::vector<NodeId> found;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    if (graph.node(u).vulnerable) found.push_back(u);
    for (NodeId v : graph.successors(u)) {
      if (seen.insert(v).second) queue.push_back(v);
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

}  // namespace

EdgeMetrics edge_metrics(const AttackEdge& edge,
                         const NormalizedGraph& normalized,
                         const SessionLog& log) {
  const AttackGraph& graph = normalized.graph;
  const int J = log.message_count();
  const AttackNode& source = graph.node(edge.source);
  if (!valid_anchor(source, J)) {
    throw DomainError("edge source " + std::to_string(edge.source) +
                      " has no valid message anchor");
  }

  std::vector<NodeId> candidates = vulnerable_descendants(graph, edge.target);
  if (candidates.empty()) {
    EdgeMetrics metrics;
    metrics.unreachable = true;
    return metrics;
  }

  // Nearest vulnerable descendant by inclusive message span; candidates
  // are id-ascending, so ties resolve to the lowest node id.
  int best_m = 0;
  int best_lo = 0, best_hi = 0;
  bool found = false;
  for (NodeId v : candidates) {
    const AttackNode& target = graph.node(v);
    if (!valid_anchor(target, J)) continue;
    int lo = std::min(source.message_id, target.message_id);
    int hi = std::max(source.message_id, target.message_id);
    int m = hi - lo + 1;
    if (!found || m < best_m) {
      best_m = m;
      best_lo = lo;
      best_hi = hi;
      found = true;
    }
  }
  if (!found) {
    EdgeMetrics metrics;
    metrics.anchors_missing = true;
    return metrics;
  }

  EdgeMetrics metrics;
  metrics.m = best_m;
  if (best_m == 1) {
    // Co-anchored with the vulnerability: the transition happened inside
    // a single message, so no additional tokens or cost were consumed
    // and the effort score is exactly 1.
    return metrics;
  }
  bool all_costs_known = true;
  double cost_sum = 0.0;
  for (int i = best_lo; i <= best_hi; ++i) {
    const MessageRecord& message = log.messages[static_cast<size_t>(i - 1)];
    metrics.t += message.tokens;
    if (message.cost) {
      cost_sum += *message.cost;
    } else {
      all_costs_known = false;
    }
  }
  if (all_costs_known) {
    metrics.c = cost_sum;
  } else if (log.total_tokens > 0) {
    // Proportional estimate from the log totals.
    metrics.c = estimate_cost(metrics.t, log.total_tokens, log.total_cost);
  } else {
    metrics.c = 0.0;
  }
  metrics.c = std::min(metrics.c, log.total_cost);
  return metrics;
}

NormalizedGraph score_edges(const NormalizedGraph& normalized,
                            const SessionLog& log,
                            const EffortWeights& weights) {
  weights.validate();
  const int J = log.message_count();
  NormalizedGraph out = normalized;
  for (const auto& [key, score] : normalized.graph.edges()) {
    const auto& [source, target] = key;
    if (out.graph.node(target).artificial) {
      out.graph.set_edge_score(source, target, 1.0);
      continue;
    }
    const AttackNode& src = out.graph.node(source);
    const AttackNode& tgt = out.graph.node(target);
    if (!valid_anchor(src, J) || !valid_anchor(tgt, J)) {
      out.warnings.push_back("edge " + std::to_string(source) + "->" +
                             std::to_string(target) +
                             ": missing message anchor, score defaults to 0.5");
      out.graph.set_edge_score(source, target, 0.5);
      continue;
    }
    EdgeMetrics metrics = edge_metrics(AttackEdge{source, target, score},
                                       normalized, log);
    if (metrics.unreachable) {
      out.graph.set_edge_score(source, target, 0.0);
      continue;
    }
    if (metrics.anchors_missing) {
      out.warnings.push_back("edge " + std::to_string(source) + "->" +
                             std::to_string(target) +
                             ": vulnerable descendants carry no valid anchor, "
                             "score defaults to 0.5");
      out.graph.set_edge_score(source, target, 0.5);
      continue;
    }
    double value = effort_score(weights, message_effort(metrics.m, J),
                                token_effort(metrics.t, log.total_tokens),
                                cost_effort(metrics.c, log.total_cost));
    out.graph.set_edge_score(source, target, value);
  }
  return out;
}

NormalizedGraph fill_missing_scores(NormalizedGraph normalized, double value) {
  if (value < 0.0 || value > 1.0) {
    throw DomainError("fill score outside [0, 1]");
  }
  std::vector<std::pair<NodeId, NodeId>> unscored;
  for (const auto& [key, score] : normalized.graph.edges()) {
    if (!score) unscored.push_back(key);
  }
  for (const auto& [source, target] : unscored) {
    double fill = normalized.graph.node(target).artificial ? 1.0 : value;
    normalized.graph.set_edge_score(source, target, fill);
  }
  return normalized;
}

}  // namespace gctr

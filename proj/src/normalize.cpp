#include "gctr/normalize.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace gctr {

AttackGraph merge_entry_points(const AttackGraph& graph) {
  if (graph.empty()) throw DomainError("cannot merge entry points of an empty graph");
  AttackGraph out = graph;
  NodeId root = out.min_node_id();
  for (NodeId entry : out.entry_nodes()) {
    if (entry == root) continue;
    out.upsert_edge(root, entry, std::nullopt);
    out.provenance.push_back("merge_entry_points: added " +
                             std::to_string(root) + "->" +
                             std::to_string(entry));
  }
  return out;
}

AttackGraph strip_root_incoming(const AttackGraph& graph, NodeId root) {
  if (!graph.has_node(root)) {
    throw DomainError("root node " + std::to_string(root) + " does not exist");
  }
  AttackGraph out = graph;
  for (NodeId pred : graph.predecessors(root)) {
    out.remove_edge(pred, root);
    out.provenance.push_back("strip_root_incoming: removed " +
                             std::to_string(pred) + "->" +
                             std::to_string(root));
  }
  return out;
}

AttackGraph prune_nonvulnerable_leaves(const AttackGraph& graph) {
  AttackGraph out = graph;
  NodeId root = out.empty() ? 0 : out.min_node_id();
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<NodeId> to_remove;
    for (const auto& [id, node] : out.nodes()) {
      if (id == root) continue;
      if (node.vulnerable || node.artificial) continue;
      if (out.out_degree(id) == 0) to_remove.push_back(id);
    }
    for (NodeId id : to_remove) {
      out.remove_node(id);
      out.provenance.push_back("prune_nonvulnerable_leaves: removed " +
                               std::to_string(id));
      changed = true;
    }
  }
  return out;
}

AttackGraph attach_artificial_leaves(const AttackGraph& graph) {
  AttackGraph out = graph;
  NodeId next_id = out.empty() ? 1 : out.max_node_id() + 1;
  std::vector<NodeId> vulnerable;
  for (const auto& [id, node] : out.nodes()) {
    if (node.vulnerable) vulnerable.push_back(id);
  }
  for (NodeId v : vulnerable) {
    bool already_marked = false;
    for (NodeId succ : out.successors(v)) {
      if (out.node(succ).artificial) {
        already_marked = true;
        break;
      }
    }
    if (already_marked) continue;
    const AttackNode& parent = out.node(v);
    AttackNode leaf;
    leaf.id = next_id++;
    leaf.name = "leaf_" + parent.label;
    leaf.info = "artificial target marker for node " + parent.label;
    leaf.vulnerable = false;
    leaf.message_id = parent.message_id;  // inherits the parent's anchor
    leaf.artificial = true;
    out.add_node(leaf);
    out.upsert_edge(v, leaf.id, 1.0);
    out.provenance.push_back("attach_artificial_leaves: added leaf " +
                             std::to_string(leaf.id) + " for " +
                             std::to_string(v));
  }
  return out;
}

NormalizedGraph normalize(const AttackGraph& graph) {
  {
    ValidationReport report = validate_graph(graph);
    for (const Finding& finding : report.errors) {
      // The pipeline repairs disconnected components (merge step) and
      // cycles through the root (strip step); anything else is fatal.
      // Residual cycles are re-checked below after both repairs.
      if (finding.code == "disconnected" || finding.code == "cycle") continue;
      throw DomainError("graph is not normalizable: " + finding.message);
    }
  }

  AttackGraph merged = merge_entry_points(graph);
  NodeId root = merged.min_node_id();
  AttackGraph stripped = strip_root_incoming(merged, root);

  {
    ValidationReport report = validate_graph(stripped);
    for (const Finding& finding : report.errors) {
      if (finding.code == "cycle") {
        throw DomainError("graph is not normalizable: " + finding.message);
      }
    }
  }

  AttackGraph pruned = prune_nonvulnerable_leaves(stripped);
  AttackGraph finished = attach_artificial_leaves(pruned);

  NormalizedGraph result;
  result.root = root;
  result.provenance = finished.provenance;
  result.graph = std::move(finished);
  for (const auto& [id, node] : result.graph.nodes()) {
    if (!node.artificial) continue;
    std::vector<NodeId> parents = result.graph.predecessors(id);
    if (parents.size() == 1 && result.graph.node(parents.front()).vulnerable) {
      result.targets.emplace_back(parents.front(), id);
    }
  }
  std::sort(result.targets.begin(), result.targets.end());
  if (result.graph.node_count() == 1) {
    result.warnings.push_back(
        "graph reduced to the root only; no attack path exists");
  }
  return result;
}

std::vector<AttackPath> enumerate_attack_paths(const NormalizedGraph& normalized,
                                               int path_ceiling) {
  const AttackGraph& graph = normalized.graph;
  std::vector<AttackPath> paths;
  if (graph.empty()) return paths;

  std::vector<NodeId> current;
  // Artificial successors first so a path sorts before its extensions,
  // then ascending id: lexicographic order of the real-node sequence.
  std::function<void(NodeId)> visit = [&](NodeId u) {
    current.push_back(u);
    const AttackNode& node = graph.node(u);
    if (node.artificial && graph.out_degree(u) == 0) {
      if (static_cast<int>(paths.size()) >= path_ceiling) {
        throw DomainError("path enumeration exceeded ceiling of " +
                          std::to_string(path_ceiling));
      }
      paths.push_back(AttackPath{current, u});
    } else {
      std::vector<NodeId> succs = graph.successors(u);
      std::stable_sort(succs.begin(), succs.end(), [&](NodeId a, NodeId b) {
        bool aa = graph.node(a).artificial;
        bool ab = graph.node(b).artificial;
        if (aa != ab) return aa;
        return a < b;
      });
      for (NodeId v : succs) {
        if (std::find(current.begin(), current.end(), v) != current.end())
          continue;  // acyclic paths only
        visit(v);
      }
    }
    current.pop_back();
  };
  visit(normalized.root);
  return paths;
}

CapRange node_cap(int message_count) {
  if (message_count < 1) throw DomainError("message count must be positive");
  // Percent numerators over denominator 1000; ceil via integer arithmetic
  // to avoid FP edge cases like 0.12 * 50 = 6.000000000000001.
  long long lo_num, hi_num;
  if (message_count < 70) {
    lo_num = 120;  // 12%
    hi_num = 160;  // 16%
  } else if (message_count < 200) {
    lo_num = 60;   // 6%
    hi_num = 120;  // 12%
  } else {
    lo_num = 35;   // 3.5%
    hi_num = 50;   // 5%
  }
  auto ceil_pct = [&](long long num) {
    return static_cast<int>((message_count * num + 999) / 1000);
  };
  CapRange cap;
  cap.min_nodes = std::clamp(ceil_pct(lo_num), 4, 25);
  cap.max_nodes = std::clamp(ceil_pct(hi_num), 4, 25);
  return cap;
}

}  // namespace gctr

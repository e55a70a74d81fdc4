#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gctr/graph.hpp"

namespace gctr {

/// Canonical single-root DAG: exactly one entry node, every leaf an
/// artificial marker hanging off a vulnerable node via a score-1.0 edge.
struct NormalizedGraph {
  AttackGraph graph;
  NodeId root = 0;
  std::vector<std::pair<NodeId, NodeId>> targets;  // (vulnerable, leaf)
  std::vector<std::string> provenance;
  std::vector<std::string> warnings;
};

/// Simple path from the root to one artificial leaf. The leaf is an alias
/// of its vulnerable parent: real_nodes() drops it.
struct AttackPath {
  std::vector<NodeId> nodes;  // root .. artificial leaf
  NodeId target = 0;          // terminal artificial leaf

  std::vector<NodeId> real_nodes() const {
    if (nodes.empty()) return {};
    return std::vector<NodeId>(nodes.begin(), nodes.end() - 1);
  }
};

struct CapRange {
  int min_nodes = 4;
  int max_nodes = 25;
};

/// Connects every extra entry node to the minimum-id node via an
/// artificial unscored edge so exactly one in-degree-0 node remains.
AttackGraph merge_entry_points(const AttackGraph& graph);

/// Drops all edges pointing into the designated root.
AttackGraph strip_root_incoming(const AttackGraph& graph, NodeId root);

/// Recursively removes non-vulnerable, non-artificial leaves. The root
/// survives even when isolated and non-vulnerable.
AttackGraph prune_nonvulnerable_leaves(const AttackGraph& graph);

/// Gives every vulnerable node exactly one artificial successor with a
/// score-1.0 edge. Idempotent.
AttackGraph attach_artificial_leaves(const AttackGraph& graph);

/// Full pipeline: merge entries, strip root incoming, prune, attach
/// leaves. Cycles that survive the root strip are an error. Idempotent.
NormalizedGraph normalize(const AttackGraph& graph);

inline constexpr int kDefaultPathCeiling = 10000;

/// All simple root-to-leaf paths in lexicographic order of the real-node
/// sequence (a path sorts before its extensions). Throws DomainError when
/// more than `path_ceiling` paths exist.
std::vector<AttackPath> enumerate_attack_paths(
    const NormalizedGraph& normalized, int path_ceiling = kDefaultPathCeiling);

/// Adaptive node-count bracket for graph extraction: 12-16% of the
/// message count below 70 messages, 6-12% up to 199, 3.5-5% from 200 on,
/// with both bounds clamped to [4, 25]. Exact integer arithmetic.
CapRange node_cap(int message_count);

}  // namespace gctr

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gctr {

using NodeId = int;

/// Raised by parsers and pipeline stages on malformed or inconsistent input.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// One attack step extracted from a security-exercise log.
/// `message_id` anchors the node to the 1-based log message it came from
/// (0 = no anchor). Artificial nodes are synthesized by normalization
/// (leaf markers, entry merges) and are never vulnerable.
struct AttackNode {
  NodeId id = 0;
  std::string name;
  std::string info;
  bool vulnerable = false;
  int message_id = 0;
  bool artificial = false;
  std::string label;  // original document id ("A"); defaults to decimal id
};

/// Directed exploitable transition. `score` is the effort score in [0, 1]
/// (1 = trivially adjacent, 0 = unreachable); absent until scoring runs.
/// Artificial vulnerable-to-leaf edges are fixed at 1.0.
struct AttackEdge {
  NodeId source = 0;
  NodeId target = 0;
  std::optional<double> score;
};

/// Directed attack graph with unique node ids and at most one edge per
/// ordered (source, target) pair. Immutable by convention after
/// construction; the normalization pipeline copies instead of mutating.
class AttackGraph {
 public:
  using EdgeMap = std::map<std::pair<NodeId, NodeId>, std::optional<double>>;

  void add_node(AttackNode node);  // throws DomainError on duplicate id
  // Inserts the edge; an existing (source, target) pair keeps the maximum
  // score of the two. Self-loops are rejected.
  void upsert_edge(NodeId source, NodeId target,
                   std::optional<double> score = std::nullopt);
  bool remove_edge(NodeId source, NodeId target);
  void remove_node(NodeId id);  // drops incident edges too

  bool has_node(NodeId id) const { return nodes_.count(id) != 0; }
  bool has_edge(NodeId source, NodeId target) const;
  const AttackNode& node(NodeId id) const;
  AttackNode& node(NodeId id);
  std::optional<double> edge_score(NodeId source, NodeId target) const;
  void set_edge_score(NodeId source, NodeId target, double score);

  const std::map<NodeId, AttackNode>& nodes() const { return nodes_; }
  const EdgeMap& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::vector<NodeId> successors(NodeId id) const;    // ascending id
  std::vector<NodeId> predecessors(NodeId id) const;  // ascending id
  int in_degree(NodeId id) const;
  int out_degree(NodeId id) const;
  std::vector<NodeId> entry_nodes() const;  // in-degree 0, ascending
  NodeId min_node_id() const;               // throws on empty graph
  NodeId max_node_id() const;

  // Applied-transformation log, serialized under the reserved
  // "_provenance" key and ignored by consumers.
  std::vector<std::string> provenance;

 private:
  std::map<NodeId, AttackNode> nodes_;
  EdgeMap edges_;
};

struct Finding {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;
  bool ok() const { return errors.empty(); }
};

/// Parses the annotation format: a UTF-8 JSON document with top-level
/// `nodes` and `edges` arrays. A stream of one-document-per-line is also
/// accepted (documents are unioned). String node ids are remapped to
/// integers in first-appearance order; original labels are preserved on
/// the nodes. Throws DomainError naming the offending key on malformed
/// input, duplicate ids, unknown edge endpoints or self-loops.
AttackGraph parse_graph_document(const std::string& text);

/// Emits the single-document form with nodes sorted by id and edges by
/// (source, target). parse(serialize(g)) is isomorphic to g.
std::string serialize_graph_document(const AttackGraph& graph);

/// Structural checks. Errors: empty graph, directed cycle, multiple weak
/// components, artificial node marked vulnerable. Warnings: vulnerable
/// node feeding a non-artificial leaf, missing message anchors.
ValidationReport validate_graph(const AttackGraph& graph);

struct EquilibriumSolution;  // equilibrium.hpp

/// Deterministic DOT rendering: gray entry node, light non-vulnerable,
/// dark vulnerable, dashed artificial nodes. When a solution is given,
/// defender probabilities annotate nodes and attack-path probabilities
/// annotate edges.
std::string render_dot(const AttackGraph& graph,
                       const EquilibriumSolution* solution = nullptr);

}  // namespace gctr

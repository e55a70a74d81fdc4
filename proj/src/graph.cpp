#include "gctr/graph.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gctr {

using nlohmann::json;
using nlohmann::ordered_json;

void AttackGraph::add_node(AttackNode node) {
  if (node.id < 0) {
    throw DomainError("node id must be non-negative, got " +
                      std::to_string(node.id));
  }
  if (nodes_.count(node.id) != 0) {
    throw DomainError("duplicate node id " + std::to_string(node.id));
  }
  if (node.label.empty()) node.label = std::to_string(node.id);
  nodes_.emplace(node.id, std::move(node));
}

void AttackGraph::upsert_edge(NodeId source, NodeId target,
                              std::optional<double> score) {
  if (source == target) {
    throw DomainError("self-loop on node " + std::to_string(source));
  }
  if (!has_node(source) || !has_node(target)) {
    throw DomainError("edge " + std::to_string(source) + "->" +
                      std::to_string(target) + " references unknown node");
  }
  if (score && (*score < 0.0 || *score > 1.0)) {
    throw DomainError("edge score outside [0, 1]");
  }
  auto [it, inserted] = edges_.emplace(std::make_pair(source, target), score);
  if (!inserted) {
    // Multi-edges collapse to one, keeping the maximum score.
    if (score && (!it->second || *score > *it->second)) it->second = score;
  }
}

bool AttackGraph::remove_edge(NodeId source, NodeId target) {
  return edges_.erase(std::make_pair(source, target)) != 0;
}

void AttackGraph::remove_node(NodeId id) {
  nodes_.erase(id);
  for (auto it = edges_.begin(); it != edges_.end();) {
    if (it->first.first == id || it->first.second == id) {
      it = edges_.erase(it);
    } else {
      ++it;
    }
  }
}

bool AttackGraph::has_edge(NodeId source, NodeId target) const {
  return edges_.count(std::make_pair(source, target)) != 0;
}

const AttackNode& AttackGraph::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw DomainError("unknown node id " + std::to_string(id));
  }
  return it->second;
}

AttackNode& AttackGraph::node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw DomainError("unknown node id " + std::to_string(id));
  }
  return it->second;
}

std::optional<double> AttackGraph::edge_score(NodeId source,
                                              NodeId target) const {
  auto it = edges_.find(std::make_pair(source, target));
  if (it == edges_.end()) {
    throw DomainError("unknown edge " + std::to_string(source) + "->" +
                      std::to_string(target));
  }
  return it->second;
}

void AttackGraph::set_edge_score(NodeId source, NodeId target, double score) {
  auto it = edges_.find(std::make_pair(source, target));
  if (it == edges_.end()) {
    throw DomainError("unknown edge " + std::to_string(source) + "->" +
                      std::to_string(target));
  }
  if (score < 0.0 || score > 1.0) throw DomainError("edge score outside [0, 1]");
  it->second = score;
}

std::vector<NodeId> AttackGraph::successors(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& [key, score] : edges_) {
    if (key.first == id) out.push_back(key.second);
  }
  return out;  // EdgeMap iteration is (source, target)-sorted
}

std::vector<NodeId> AttackGraph::predecessors(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& [key, score] : edges_) {
    if (key.second == id) out.push_back(key.first);
  }
  return out;
}

int AttackGraph::in_degree(NodeId id) const {
  int n = 0;
  for (const auto& [key, score] : edges_) {
    if (key.second == id) ++n;
  }
  return n;
}

int AttackGraph::out_degree(NodeId id) const {
  int n = 0;
  for (const auto& [key, score] : edges_) {
    if (key.first == id) ++n;
  }
  return n;
}

std::vector<NodeId> AttackGraph::entry_nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, node] : nodes_) {
    if (in_degree(id) == 0) out.push_back(id);
  }
  return out;
}

NodeId AttackGraph::min_node_id() const {
  if (nodes_.empty()) throw DomainError("empty graph has no minimum node id");
  return nodes_.begin()->first;
}

NodeId AttackGraph::max_node_id() const {
  if (nodes_.empty()) throw DomainError("empty graph has no maximum node id");
  return nodes_.rbegin()->first;
}

namespace {

bool is_integer_literal(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

std::string id_to_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw DomainError("node id must be an integer or string, got " +
                    value.dump());
}

struct RawDocument {
  json nodes;
  json edges;
  std::vector<std::string> provenance;
};

RawDocument require_document(const json& doc) {
  if (!doc.is_object()) throw DomainError("document is not a JSON object");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw DomainError("document is missing a top-level 'nodes' array");
  }
  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    throw DomainError("document is missing a top-level 'edges' array");
  }
  RawDocument raw{doc["nodes"], doc["edges"], {}};
  if (doc.contains("_provenance") && doc["_provenance"].is_array()) {
    for (const auto& entry : doc["_provenance"]) {
      if (entry.is_string()) raw.provenance.push_back(entry.get<std::string>());
    }
  }
  return raw;
}

std::vector<RawDocument> read_documents(const std::string& text) {
  // Whole-text document first; fall back to one document per line.
  try {
    return {require_document(json::parse(text))};
  } catch (const json::parse_error&) {
    // fall through to line mode
  }
  std::vector<RawDocument> docs;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(require_document(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DomainError("line " + std::to_string(line_no) +
                        ": invalid JSON document: " + std::string(e.what()));
    }
  }
  if (docs.empty()) throw DomainError("no JSON document found in input");
  return docs;
}

}  // namespace

AttackGraph parse_graph_document(const std::string& text) {
  std::vector<RawDocument> docs = read_documents(text);

  // First pass over all documents: collect ids in appearance order and
  // decide whether every id is already an integer.
  std::vector<std::string> id_order;
  std::set<std::string> seen;
  bool all_integer = true;
  for (const auto& doc : docs) {
    for (const auto& jnode : doc.nodes) {
      if (!jnode.is_object() || !jnode.contains("id")) {
        throw DomainError("node entry without an 'id' field: " + jnode.dump());
      }
      std::string key = id_to_string(jnode["id"]);
      if (seen.count(key)) throw DomainError("duplicate node id '" + key + "'");
      seen.insert(key);
      id_order.push_back(key);
      if (!is_integer_literal(key)) all_integer = false;
    }
  }
  if (id_order.empty()) throw DomainError("empty node set");

  std::map<std::string, NodeId> id_map;
  if (all_integer) {
    for (const auto& key : id_order) id_map[key] = std::stoi(key);
  } else {
    NodeId next = 1;  // first-appearance order, starting at node 1
    for (const auto& key : id_order) id_map[key] = next++;
  }

  AttackGraph graph;
  for (const auto& doc : docs) {
    for (const auto& jnode : doc.nodes) {
      AttackNode node;
      std::string key = id_to_string(jnode["id"]);
      node.id = id_map.at(key);
      node.label = jnode.value("label", key);
      node.name = jnode.value("name", std::string{});
      node.info = jnode.value("info", std::string{});
      node.vulnerable = jnode.value("vulnerability", false);
      node.artificial = jnode.value("artificial", false);
      if (jnode.contains("message_id")) {
        if (!jnode["message_id"].is_number_integer()) {
          throw DomainError("node '" + key + "': message_id must be an integer");
        }
        node.message_id = jnode["message_id"].get<int>();
        if (node.message_id < 0) {
          throw DomainError("node '" + key + "': message_id must be positive");
        }
      }
      graph.add_node(std::move(node));
    }
  }
  for (const auto& doc : docs) {
    for (const auto& jedge : doc.edges) {
      if (!jedge.is_object() || !jedge.contains("source") ||
          !jedge.contains("target")) {
        throw DomainError("edge entry without source/target: " + jedge.dump());
      }
      std::string src = id_to_string(jedge["source"]);
      std::string tgt = id_to_string(jedge["target"]);
      auto src_it = id_map.find(src);
      auto tgt_it = id_map.find(tgt);
      if (src_it == id_map.end()) {
        throw DomainError("edge references unknown node '" + src + "'");
      }
      if (tgt_it == id_map.end()) {
        throw DomainError("edge references unknown node '" + tgt + "'");
      }
      std::optional<double> score;
      if (jedge.contains("score") && !jedge["score"].is_null()) {
        if (!jedge["score"].is_number()) {
          throw DomainError("edge " + src + "->" + tgt +
                            ": score must be a number");
        }
        score = jedge["score"].get<double>();
        if (*score < 0.0 || *score > 1.0) {
          throw DomainError("edge " + src + "->" + tgt +
                            ": score outside [0, 1]");
        }
      }
      graph.upsert_edge(src_it->second, tgt_it->second, score);
    }
    for (const auto& entry : doc.provenance) graph.provenance.push_back(entry);
  }
  return graph;
}

std::string serialize_graph_document(const AttackGraph& graph) {
  ordered_json doc;
  doc["nodes"] = ordered_json::array();
  for (const auto& [id, node] : graph.nodes()) {
    ordered_json jnode;
    jnode["id"] = id;
    jnode["name"] = node.name;
    jnode["info"] = node.info;
    jnode["vulnerability"] = node.vulnerable;
    jnode["message_id"] = node.message_id;
    if (node.artificial) jnode["artificial"] = true;
    if (node.label != std::to_string(id)) jnode["label"] = node.label;
    doc["nodes"].push_back(std::move(jnode));
  }
  doc["edges"] = ordered_json::array();
  for (const auto& [key, score] : graph.edges()) {
    ordered_json jedge;
    jedge["source"] = key.first;
    jedge["target"] = key.second;
    if (score) jedge["score"] = *score;
    doc["edges"].push_back(std::move(jedge));
  }
  if (!graph.provenance.empty()) doc["_provenance"] = graph.provenance;
  return doc.dump(2) + "\n";
}

namespace {

// Iterative three-color DFS; returns one representative cycle if any.
std::optional<std::vector<NodeId>> find_cycle(const AttackGraph& graph) {
  enum class Color { white, gray, black };
  std::map<NodeId, Color> color;
  for (const auto& [id, node] : graph.nodes()) color[id] = Color::white;

  std::vector<NodeId> stack;
  std::function<std::optional<std::vector<NodeId>>(NodeId)> visit =
      [&](NodeId u) -> std::optional<std::vector<NodeId>> {
    color[u] = Color::gray;
    stack.push_back(u);
    for (NodeId v : graph.successors(u)) {
      if (color[v] == Color::gray) {
        auto it = std::find(stack.begin(), stack.end(), v);
        return std::vector<NodeId>(it, stack.end());
      }
      if (color[v] == Color::white) {
        if (auto cycle = visit(v)) return cycle;
      }
    }
    color[u] = Color::black;
    stack.pop_back();
    return std::nullopt;
  };

  for (const auto& [id, node] : graph.nodes()) {
    if (color[id] == Color::white) {
      if (auto cycle = visit(id)) return cycle;
    }
  }
  return std::nullopt;
}

int weak_component_count(const AttackGraph& graph) {
  std::map<NodeId, NodeId> parent;
  for (const auto& [id, node] : graph.nodes()) parent[id] = id;
  std::function<NodeId(NodeId)> find = [&](NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [key, score] : graph.edges()) {
    parent[find(key.first)] = find(key.second);
  }
  std::set<NodeId> roots;
  for (const auto& [id, node] : graph.nodes()) roots.insert(find(id));
  return static_cast<int>(roots.size());
}

}  // namespace

ValidationReport validate_graph(const AttackGraph& graph) {
  ValidationReport report;
  if (graph.empty()) {
    report.errors.push_back({"empty", "graph has no nodes"});
    return report;
  }

  if (auto cycle = find_cycle(graph)) {
    std::string path;
    for (NodeId id : *cycle) path += std::to_string(id) + "->";
    path += std::to_string(cycle->front());
    report.errors.push_back({"cycle", "directed cycle detected: " + path});
  }

  if (int components = weak_component_count(graph); components > 1) {
    report.errors.push_back(
        {"disconnected", std::to_string(components) +
                             " weakly connected components with no declared "
                             "root policy"});
  }

  for (const auto& [id, node] : graph.nodes()) {
    if (node.artificial && node.vulnerable) {
      report.errors.push_back(
          {"artificial_vulnerable",
           "artificial node " + std::to_string(id) + " marked vulnerable"});
    }
    if (!node.artificial && node.message_id < 1) {
      report.warnings.push_back(
          {"missing_anchor", "node " + std::to_string(id) +
                                 " has no message anchor (message_id < 1)"});
    }
    if (node.vulnerable) {
      for (NodeId succ : graph.successors(id)) {
        const AttackNode& s = graph.node(succ);
        if (!s.artificial && graph.out_degree(succ) == 0 && !s.vulnerable) {
          report.warnings.push_back(
              {"vulnerable_feeds_leaf",
               "vulnerable node " + std::to_string(id) +
                   " feeds non-artificial leaf " + std::to_string(succ) +
                   " (leaf will be pruned)"});
        }
      }
    }
  }
  return report;
}

}  // namespace gctr

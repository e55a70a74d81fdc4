#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>
#include <sstream>

#include "gctr/equilibrium.hpp"
#include "gctr/graph.hpp"
#include "oracles.hpp"

using namespace gctr;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(GCTR_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Canonical comparison: node tuples and edge pairs, labels ignored.
bool isomorphic(const AttackGraph& a, const AttackGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) {
    return false;
  }
  for (const auto& [id, node] : a.nodes()) {
    if (!b.has_node(id)) return false;
    const AttackNode& other = b.node(id);
    if (node.name != other.name || node.vulnerable != other.vulnerable ||
        node.message_id != other.message_id ||
        node.artificial != other.artificial) {
      return false;
    }
  }
  for (const auto& [key, score] : a.edges()) {
    if (!b.has_edge(key.first, key.second)) return false;
    auto other = b.edge_score(key.first, key.second);
    if (score.has_value() != other.has_value()) return false;
    if (score && std::abs(*score - *other) > 1e-15) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parse accepts the two-node annotation example") {
  AttackGraph graph = parse_graph_document(read_fixture("annotation_example.json"));
  CHECK(graph.node_count() == 2);
  CHECK(graph.edge_count() == 1);
  // String ids map to integers in first-appearance order.
  CHECK(graph.node(1).label == "A");
  CHECK(graph.node(2).label == "B");
  CHECK(graph.node(1).vulnerable == false);
  CHECK(graph.node(2).vulnerable == true);
  CHECK(graph.node(2).message_id == 102);
  CHECK(graph.has_edge(1, 2));
}

TEST_CASE("parse rejects an empty node set") {
  CHECK_THROWS_WITH_AS(parse_graph_document(R"({"nodes": [], "edges": []})"),
                       doctest::Contains("empty node set"), DomainError);
}

TEST_CASE("parse names unknown edge endpoints") {
  const char* doc = R"({
    "nodes": [{"id": "A", "name": "a", "info": "", "vulnerability": false, "message_id": 1}],
    "edges": [{"source": "A", "target": "Z"}]
  })";
  CHECK_THROWS_WITH_AS(parse_graph_document(doc), doctest::Contains("'Z'"),
                       DomainError);
}

TEST_CASE("parse rejects duplicate ids and self-loops") {
  CHECK_THROWS_WITH_AS(parse_graph_document(R"({
    "nodes": [{"id": 1, "message_id": 1}, {"id": 1, "message_id": 2}],
    "edges": []
  })"),
                       doctest::Contains("duplicate"), DomainError);
  CHECK_THROWS_WITH_AS(parse_graph_document(R"({
    "nodes": [{"id": 1, "message_id": 1}],
    "edges": [{"source": 1, "target": 1}]
  })"),
                       doctest::Contains("self-loop"), DomainError);
}

TEST_CASE("parse accepts a one-document-per-line stream") {
  std::string stream =
      R"({"nodes": [{"id": 1, "name": "a", "message_id": 1}], "edges": []})"
      "\n"
      R"({"nodes": [{"id": 2, "name": "b", "message_id": 2}], "edges": [{"source": 2, "target": 1}]})"
      "\n";
  AttackGraph graph = parse_graph_document(stream);
  CHECK(graph.node_count() == 2);
  CHECK(graph.has_edge(2, 1));
}

TEST_CASE("multi-edges collapse keeping the maximum score") {
  const char* doc = R"({
    "nodes": [{"id": 1, "message_id": 1}, {"id": 2, "message_id": 2}],
    "edges": [{"source": 1, "target": 2, "score": 0.3},
              {"source": 1, "target": 2, "score": 0.8},
              {"source": 1, "target": 2, "score": 0.5}]
  })";
  AttackGraph graph = parse_graph_document(doc);
  CHECK(graph.edge_count() == 1);
  CHECK(*graph.edge_score(1, 2) == doctest::Approx(0.8));
}

TEST_CASE("round-trip: annotation example is isomorphic") {
  AttackGraph graph = parse_graph_document(read_fixture("annotation_example.json"));
  AttackGraph again = parse_graph_document(serialize_graph_document(graph));
  CHECK(isomorphic(graph, again));
  // Labels survive through the sidecar field.
  CHECK(again.node(1).label == "A");
}

TEST_CASE("round-trip: single node emits an empty edges array") {
  AttackGraph graph;
  AttackNode node;
  node.id = 1;
  node.name = "only";
  node.message_id = 1;
  graph.add_node(node);
  std::string doc = serialize_graph_document(graph);
  CHECK(doc.find("\"edges\": []") != std::string::npos);
  CHECK(isomorphic(graph, parse_graph_document(doc)));
}

TEST_CASE("round-trip: random DAGs stay isomorphic") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    AttackGraph graph = oracle::random_dag(rng, 10);
    AttackGraph again = parse_graph_document(serialize_graph_document(graph));
    CHECK(isomorphic(graph, again));
  }
}

TEST_CASE("parser survives arbitrary garbage with a domain error") {
  std::mt19937 rng(1234);
  std::uniform_int_distribution<int> length(0, 200);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int trial = 0; trial < 300; ++trial) {
    std::string garbage;
    int n = length(rng);
    for (int i = 0; i < n; ++i) {
      garbage += static_cast<char>(byte(rng));
    }
    CHECK_THROWS_AS(parse_graph_document(garbage), DomainError);
  }
  // Valid JSON of the wrong shape fails the same controlled way.
  CHECK_THROWS_AS(parse_graph_document("[1, 2, 3]"), DomainError);
  CHECK_THROWS_AS(parse_graph_document(R"({"nodes": 5, "edges": []})"),
                  DomainError);
  CHECK_THROWS_AS(parse_graph_document("42"), DomainError);
}

TEST_CASE("validate: acyclic chain passes") {
  AttackGraph graph = parse_graph_document(R"({
    "nodes": [{"id": 1, "message_id": 1}, {"id": 2, "message_id": 2},
              {"id": 3, "message_id": 3}],
    "edges": [{"source": 1, "target": 2}, {"source": 2, "target": 3}]
  })");
  CHECK(validate_graph(graph).ok());
}

TEST_CASE("validate: cycle reported") {
  AttackGraph graph = parse_graph_document(R"({
    "nodes": [{"id": 1, "message_id": 1}, {"id": 2, "message_id": 2}],
    "edges": [{"source": 1, "target": 2}, {"source": 2, "target": 1}]
  })");
  ValidationReport report = validate_graph(graph);
  REQUIRE_FALSE(report.ok());
  CHECK(report.errors.front().code == "cycle");
}

TEST_CASE("validate: artificial node marked vulnerable is an error") {
  AttackGraph graph;
  AttackNode node;
  node.id = 1;
  node.message_id = 1;
  node.artificial = true;
  node.vulnerable = true;
  graph.add_node(node);
  ValidationReport report = validate_graph(graph);
  REQUIRE_FALSE(report.ok());
  CHECK(report.errors.front().code == "artificial_vulnerable");
}

TEST_CASE("validate: multiple weak components reported") {
  AttackGraph graph = parse_graph_document(R"({
    "nodes": [{"id": 1, "message_id": 1}, {"id": 2, "message_id": 2},
              {"id": 3, "message_id": 3}, {"id": 4, "message_id": 4}],
    "edges": [{"source": 1, "target": 2}, {"source": 3, "target": 4}]
  })");
  ValidationReport report = validate_graph(graph);
  REQUIRE_FALSE(report.ok());
  CHECK(report.errors.front().code == "disconnected");
}

TEST_CASE("validate: alternative-entry flow graph warns but has no errors") {
  // User Prompt -> web.com -> api -> IDOR (vulnerable) -> Data
  // Exfiltration, plus an alternative entry joining the main flow.
  AttackGraph graph = parse_graph_document(R"({
    "nodes": [
      {"id": 1, "name": "User Prompt", "message_id": 1},
      {"id": 2, "name": "web.com", "message_id": 2},
      {"id": 3, "name": "api.web.com", "message_id": 3},
      {"id": 4, "name": "IDOR Vulnerability", "vulnerability": true, "message_id": 4},
      {"id": 5, "name": "Data Exfiltration", "message_id": 5},
      {"id": 6, "name": "Alternative Entry", "message_id": 2}
    ],
    "edges": [{"source": 1, "target": 2}, {"source": 2, "target": 3},
              {"source": 3, "target": 4}, {"source": 4, "target": 5},
              {"source": 6, "target": 2}]
  })");
  ValidationReport report = validate_graph(graph);
  CHECK(report.ok());
  CHECK_FALSE(report.warnings.empty());
}

TEST_CASE("validate agrees with Kahn cycle oracle on random digraphs") {
  std::mt19937 rng(21);
  std::uniform_int_distribution<int> node_count(2, 12);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = node_count(rng);
    AttackGraph graph;
    for (int i = 1; i <= n; ++i) {
      AttackNode node;
      node.id = i;
      node.message_id = i;
      graph.add_node(node);
    }
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i != j && coin(rng) < 0.15) graph.upsert_edge(i, j, std::nullopt);
      }
    }
    bool reported = false;
    for (const Finding& finding : validate_graph(graph).errors) {
      if (finding.code == "cycle") reported = true;
    }
    CHECK(reported == oracle::has_cycle(graph));
  }
}

TEST_CASE("render_dot: contains both nodes and the edge, byte-stable") {
  AttackGraph graph = parse_graph_document(R"({
    "nodes": [{"id": 1, "name": "start", "message_id": 1},
              {"id": 2, "name": "end", "message_id": 2}],
    "edges": [{"source": 1, "target": 2}]
  })");
  std::string dot = render_dot(graph);
  CHECK(dot.find("n1") != std::string::npos);
  CHECK(dot.find("n2") != std::string::npos);
  CHECK(dot.find("n1 -> n2") != std::string::npos);
  CHECK(dot == render_dot(graph));
}

TEST_CASE("render_dot: defender probabilities annotate nodes") {
  AttackGraph graph = parse_graph_document(R"({
    "nodes": [{"id": 4, "name": "db", "message_id": 1},
              {"id": 5, "name": "esc", "message_id": 2}],
    "edges": [{"source": 4, "target": 5}]
  })");
  EquilibriumSolution solution;
  solution.defender = {{4, 1.0}};
  std::string dot = render_dot(graph, &solution);
  CHECK(dot.find("1.00") != std::string::npos);
}

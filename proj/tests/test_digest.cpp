#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "gctr/digest.hpp"
#include "gctr/effort.hpp"

using namespace gctr;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(GCTR_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

NormalizedGraph load_scored(const std::string& name) {
  return fill_missing_scores(
      normalize(parse_graph_document(read_fixture(name))));
}

struct EchoStub : InferenceClient {
  std::atomic<int> calls{0};
  InferenceResult complete(const InferenceRequest&) override {
    ++calls;
    return InferenceResult::success("stubbed interpretation text");
  }
};

struct FailingStub : InferenceClient {
  std::atomic<int> calls{0};
  InferenceResult complete(const InferenceRequest&) override {
    ++calls;
    return InferenceResult::failure("simulated API error");
  }
};

struct EmptyStub : InferenceClient {
  InferenceResult complete(const InferenceRequest&) override {
    return InferenceResult::success("");
  }
};

struct SlowStub : InferenceClient {
  InferenceResult complete(const InferenceRequest&) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    return InferenceResult::success("too late");
  }
};

// Scored graph with chosen real-edge scores along a two-branch shape.
NormalizedGraph scored_instance(double a, double b, double c) {
  AttackGraph graph;
  auto add = [&](NodeId id, bool vulnerable) {
    AttackNode node;
    node.id = id;
    node.name = "node" + std::to_string(id);
    node.message_id = id;
    node.vulnerable = vulnerable;
    graph.add_node(node);
  };
  add(1, false);
  add(2, false);
  add(3, false);
  add(4, true);
  add(5, true);
  graph.upsert_edge(1, 2, a);
  graph.upsert_edge(2, 4, b);
  graph.upsert_edge(1, 3, c);
  graph.upsert_edge(3, 5, c);
  return fill_missing_scores(normalize(graph));
}

}  // namespace

TEST_CASE("classification thresholds, including the overlap band") {
  NormalizedGraph scored = scored_instance(0.97, 0.50, 0.92);
  EquilibriumSolution solution = solve_equilibrium(scored);
  TransitionClassification classification =
      classify_transitions(solution, scored);

  auto contains = [](const std::vector<ScoredTransition>& list, double p) {
    for (const ScoredTransition& t : list) {
      if (std::abs(t.probability - p) < 1e-12) return true;
    }
    return false;
  };
  CHECK(contains(classification.high_risk, 0.97));
  CHECK(contains(classification.high_risk, 0.92));
  CHECK_FALSE(contains(classification.high_risk, 0.50));
  CHECK(contains(classification.bottlenecks, 0.50));
  CHECK(contains(classification.bottlenecks, 0.92));  // overlap band
  CHECK_FALSE(contains(classification.bottlenecks, 0.97));
}

TEST_CASE("no bottlenecks when every score is at least 0.95") {
  NormalizedGraph scored = scored_instance(0.95, 0.99, 1.0);
  EquilibriumSolution solution = solve_equilibrium(scored);
  TransitionClassification classification =
      classify_transitions(solution, scored);
  CHECK(classification.bottlenecks.empty());
}

TEST_CASE("threshold membership is exact over randomized scores") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    NormalizedGraph scored =
        scored_instance(unit(rng), unit(rng), unit(rng));
    EquilibriumSolution solution = solve_equilibrium(scored);
    TransitionClassification classification =
        classify_transitions(solution, scored);

    std::set<std::pair<NodeId, NodeId>> on_positive_paths;
    for (const PathStrategy& ps : solution.attacker) {
      if (ps.probability <= 1e-12) continue;
      const auto& nodes = ps.path.nodes;
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!scored.graph.node(nodes[i + 1]).artificial) {
          on_positive_paths.insert({nodes[i], nodes[i + 1]});
        }
      }
    }
    for (const auto& [s, t] : on_positive_paths) {
      double p = *scored.graph.edge_score(s, t);
      bool in_bottlenecks = false, in_high_risk = false;
      for (const ScoredTransition& tr : classification.bottlenecks) {
        if (tr.source == s && tr.target == t) in_bottlenecks = true;
      }
      for (const ScoredTransition& tr : classification.high_risk) {
        if (tr.source == s && tr.target == t) in_high_risk = true;
      }
      CHECK(in_bottlenecks == (p < 0.95));
      CHECK(in_high_risk == (p > 0.90));
    }
  }
}

TEST_CASE("critical nodes are defender support in descending order") {
  NormalizedGraph scored = load_scored("two_path.json");
  EquilibriumSolution solution = solve_equilibrium(scored);
  TransitionClassification classification =
      classify_transitions(solution, scored);
  REQUIRE(classification.critical_nodes.size() == 2);
  CHECK(classification.critical_nodes[0] == 2);  // ties break by id
  CHECK(classification.critical_nodes[1] == 3);
}

TEST_CASE("algorithmic rendering is deterministic and carries the style") {
  NormalizedGraph scored = load_scored("two_path.json");
  EquilibriumSolution solution = solve_equilibrium(scored);
  TransitionClassification classification =
      classify_transitions(solution, scored);

  Digest first =
      render_algorithmic_digest(solution, classification,
                                DigestRole::defender, scored);
  Digest second =
      render_algorithmic_digest(solution, classification,
                                DigestRole::defender, scored);
  CHECK(first.text == second.text);
  CHECK_FALSE(first.fallback_used);

  // Arrow notation with bracketed integer percentages.
  CHECK(first.text.find("->[100%]") != std::string::npos);
  CHECK(first.text.find("Path 1:") != std::string::npos);
  CHECK(first.text.find("Target (") != std::string::npos);
}

TEST_CASE("transition lines render one-decimal percentages, arrows integer") {
  // Scores chosen to pin the two formats: 3.1% line, ->[66%] hop.
  AttackGraph graph;
  auto add = [&](NodeId id, const std::string& name, bool vulnerable) {
    AttackNode node;
    node.id = id;
    node.name = name;
    node.message_id = id;
    node.vulnerable = vulnerable;
    graph.add_node(node);
  };
  add(1, "CTF Challenge", false);
  add(2, "Nmap Scan", false);
  add(3, "FTP Service (Port 21)", true);
  graph.upsert_edge(1, 2, 0.66);
  graph.upsert_edge(2, 3, 0.031);
  NormalizedGraph scored = fill_missing_scores(normalize(graph));
  EquilibriumSolution solution = solve_equilibrium(scored);
  Digest digest = generate_digest(scored, solution, DigestMode::algorithmic,
                                  DigestRole::attacker, nullptr);
  CHECK(digest.text.find("CTF Challenge ->[66%] Nmap Scan") !=
        std::string::npos);
  CHECK(digest.text.find(
            "Nmap Scan -> FTP Service (Port 21): 3.1% success rate") !=
        std::string::npos);
}

TEST_CASE("degenerate solutions carry an explicit notice section") {
  AttackGraph graph;
  for (int id = 1; id <= 2; ++id) {
    AttackNode node;
    node.id = id;
    node.message_id = id;
    node.vulnerable = id == 2;
    graph.add_node(node);
  }
  graph.upsert_edge(1, 2, 1.0);
  NormalizedGraph scored = fill_missing_scores(normalize(graph));
  EquilibriumSolution solution = solve_equilibrium(scored);
  REQUIRE(solution.degenerate);
  Digest digest = generate_digest(scored, solution, DigestMode::algorithmic,
                                  DigestRole::merged, nullptr);
  CHECK(digest.text.find("Degenerate Game Notice") != std::string::npos);
}

TEST_CASE("merged digest contains both role bodies verbatim") {
  NormalizedGraph scored = load_scored("privilege_escalation.json");
  EquilibriumSolution solution = solve_equilibrium(scored);
  TransitionClassification classification =
      classify_transitions(solution, scored);

  std::string attacker =
      render_algorithmic_digest(solution, classification,
                                DigestRole::attacker, scored)
          .text;
  std::string defender =
      render_algorithmic_digest(solution, classification,
                                DigestRole::defender, scored)
          .text;
  std::string merged =
      render_algorithmic_digest(solution, classification, DigestRole::merged,
                                scored)
          .text;

  const std::string header = "# G-CTR Security Analysis\n\n";
  std::string attacker_body = attacker.substr(header.size());
  std::string defender_body = defender.substr(header.size());
  CHECK(merged.find(attacker_body) != std::string::npos);
  CHECK(merged.find(defender_body) != std::string::npos);
}

TEST_CASE("llm prompt: five sections, ~350-word template, temperature") {
  NormalizedGraph scored = load_scored("privilege_escalation.json");
  EquilibriumSolution solution = solve_equilibrium(scored);
  InferenceRequest request = build_llm_prompt(scored, solution, "some-model");

  for (const char* section :
       {"Identified Attack Paths", "Critical Bottlenecks", "Critical Nodes",
        "High-Risk Transitions", "Tactical Guidance"}) {
    CHECK(request.prompt.find(section) != std::string::npos);
  }
  CHECK(request.temperature == doctest::Approx(0.3));
  CHECK(request.model_hint == "some-model");

  std::istringstream words(kGuidancePromptTemplate);
  int count = 0;
  std::string word;
  while (words >> word) ++count;
  CHECK(count >= 300);
  CHECK(count <= 400);
}

TEST_CASE("llm prompt states none for an empty bottleneck section") {
  // All scores 1.0: no real edge sits below 0.95.
  NormalizedGraph scored = load_scored("two_path.json");
  EquilibriumSolution solution = solve_equilibrium(scored);
  InferenceRequest request = build_llm_prompt(scored, solution);
  std::size_t marker = request.prompt.find("Bottleneck transitions");
  REQUIRE(marker != std::string::npos);
  CHECK(request.prompt.find("none", marker) != std::string::npos);
}

TEST_CASE("generate_digest: algorithmic mode never touches the client") {
  NormalizedGraph scored = load_scored("two_path.json");
  EquilibriumSolution solution = solve_equilibrium(scored);
  EchoStub stub;
  Digest digest = generate_digest(scored, solution, DigestMode::algorithmic,
                                  DigestRole::merged, &stub);
  CHECK(stub.calls == 0);
  CHECK_FALSE(digest.fallback_used);
  CHECK_FALSE(digest.text.empty());
}

TEST_CASE("generate_digest: llm echo passes through verbatim") {
  NormalizedGraph scored = load_scored("two_path.json");
  EquilibriumSolution solution = solve_equilibrium(scored);
  EchoStub stub;
  Digest digest = generate_digest(scored, solution, DigestMode::llm,
                                  DigestRole::attacker, &stub);
  CHECK(stub.calls == 1);
  CHECK(digest.text == "stubbed interpretation text");
  CHECK_FALSE(digest.fallback_used);
  CHECK(digest.mode == DigestMode::llm);
}

TEST_CASE("generate_digest: failures downgrade to the algorithmic text") {
  NormalizedGraph scored = load_scored("two_path.json");
  EquilibriumSolution solution = solve_equilibrium(scored);
  TransitionClassification classification =
      classify_transitions(solution, scored);
  std::string algorithmic =
      render_algorithmic_digest(solution, classification, DigestRole::merged,
                                scored)
          .text;

  FailingStub failing;
  Digest failed = generate_digest(scored, solution, DigestMode::llm,
                                  DigestRole::merged, &failing);
  CHECK(failed.fallback_used);
  CHECK(failed.text == algorithmic);

  EmptyStub empty;
  Digest emptied = generate_digest(scored, solution, DigestMode::llm,
                                   DigestRole::merged, &empty);
  CHECK(emptied.fallback_used);
  CHECK(emptied.text == algorithmic);

  SlowStub slow;
  DigestOptions options;
  options.timeout = std::chrono::milliseconds(20);
  Digest timed_out = generate_digest(scored, solution, DigestMode::llm,
                                     DigestRole::merged, &slow, options);
  CHECK(timed_out.fallback_used);
  CHECK(timed_out.text == algorithmic);
}

TEST_CASE("digest totality across the fault matrix") {
  NormalizedGraph scored = load_scored("privilege_escalation.json");
  EquilibriumSolution solution = solve_equilibrium(scored);

  EchoStub echo;
  FailingStub failing;
  EmptyStub empty;
  SlowStub slow;
  DigestOptions slow_options;
  slow_options.timeout = std::chrono::milliseconds(20);

  for (DigestRole role :
       {DigestRole::attacker, DigestRole::defender, DigestRole::merged}) {
    for (DigestMode mode : {DigestMode::algorithmic, DigestMode::llm}) {
      struct Case {
        InferenceClient* client;
        DigestOptions options;
        bool expect_fallback;
      };
      for (const Case& c : std::vector<Case>{
               {&echo, DigestOptions{}, false},
               {&failing, DigestOptions{}, true},
               {&empty, DigestOptions{}, true},
               {&slow, slow_options, true}}) {
        Digest digest =
            generate_digest(scored, solution, mode, role, c.client, c.options);
        CHECK_FALSE(digest.text.empty());
        if (mode == DigestMode::algorithmic) {
          CHECK_FALSE(digest.fallback_used);
        } else {
          CHECK(digest.fallback_used == c.expect_fallback);
        }
      }
    }
  }
}

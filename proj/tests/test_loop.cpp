#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "gctr/loop.hpp"

using namespace gctr;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(GCTR_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Script with `count` plain steps; graph swaps can be layered on top.
std::string plain_script(int count) {
  std::string text;
  for (int i = 1; i <= count; ++i) {
    text += R"({"action": "step )" + std::to_string(i) +
            R"(", "status": "ok", "observation": "obs )" + std::to_string(i) +
            R"("})" + "\n";
  }
  return text;
}

AttackGraph seed_graph() {
  AttackGraph graph;
  AttackNode node;
  node.id = 1;
  node.name = "Entry";
  node.message_id = 1;
  graph.add_node(node);
  return graph;
}

// Always returns the same solvable chain graph.
struct FixedGraphUpdater : GraphUpdater {
  std::string document;
  AttackGraph update(const AttackGraph& current, const AgentStep&,
                     int) override {
    if (document.empty()) return current;
    return parse_graph_document(document);
  }
};

const char* kChainDocument = R"({
  "nodes": [
    {"id": 1, "name": "Entry", "message_id": 1},
    {"id": 2, "name": "Foothold", "message_id": 2},
    {"id": 3, "name": "Weakness", "vulnerability": true, "message_id": 3}
  ],
  "edges": [{"source": 1, "target": 2}, {"source": 2, "target": 3}]
})";

struct ThrowingDriver : AgentDriver {
  AgentStep step(const AttackGraph&, const std::string&, int) override {
    throw DomainError("tool transport died");
  }
};

}  // namespace

TEST_CASE("should_trigger fires exactly on the cadence") {
  LoopConfig config;
  config.trigger_every = 5;
  CHECK(should_trigger(5, config));
  CHECK_FALSE(should_trigger(4, config));
  CHECK(should_trigger(10, config));
  CHECK_FALSE(should_trigger(11, config));
}

TEST_CASE("inject_digest appends one block and replaces it afterwards") {
  Digest digest;
  digest.text = "guidance v1";
  std::string prompt = inject_digest("base prompt", digest);
  CHECK(count_digest_blocks(prompt) == 1);
  CHECK(prompt.find("base prompt") != std::string::npos);
  CHECK(prompt.find("guidance v1") != std::string::npos);

  // Idempotent for the identical digest.
  CHECK(inject_digest(prompt, digest) == prompt);

  Digest updated;
  updated.text = "guidance v2";
  std::string replaced = inject_digest(prompt, updated);
  CHECK(count_digest_blocks(replaced) == 1);
  CHECK(replaced.find("guidance v2") != std::string::npos);
  CHECK(replaced.find("guidance v1") == std::string::npos);
}

TEST_CASE("scripted 12-interaction run triggers at 5 and 10") {
  ScriptedDriver driver = ScriptedDriver::from_text(plain_script(12));
  FixedGraphUpdater updater;
  updater.document = kChainDocument;
  LoopConfig config;
  config.trigger_every = 5;
  config.max_interactions = 12;
  RunRecord record = run_loop(driver, updater, seed_graph(), config);

  CHECK(record.interactions.size() == 12);
  REQUIRE(record.triggers.size() == 2);
  CHECK(record.triggers[0].interaction == 5);
  CHECK(record.triggers[1].interaction == 10);
  CHECK(record.terminal_reason == "max_interactions");
  for (const TriggerEntry& trigger : record.triggers) {
    CHECK(trigger.analysis_ok);
    CHECK(trigger.digest_refreshed);
    CHECK(trigger.prompt_digest_blocks == 1);
  }
}

TEST_CASE("single-path graph at a trigger sets value 0 and continues") {
  ScriptedDriver driver = ScriptedDriver::from_text(plain_script(7));
  FixedGraphUpdater updater;
  updater.document = kChainDocument;  // one path only
  LoopConfig config;
  config.trigger_every = 5;
  config.max_interactions = 7;
  RunRecord record = run_loop(driver, updater, seed_graph(), config);
  REQUIRE(record.triggers.size() == 1);
  CHECK(record.triggers[0].value == 0.0);
  CHECK(record.interactions.size() == 7);  // loop continued past the trigger
  CHECK(record.final_value == 0.0);
}

TEST_CASE("zero interaction budget gives an empty record") {
  ScriptedDriver driver = ScriptedDriver::from_text(plain_script(3));
  LoopConfig config;
  config.max_interactions = 0;
  RunRecord record = run_loop(driver, driver, seed_graph(), config);
  CHECK(record.interactions.empty());
  CHECK(record.triggers.empty());
  CHECK(record.terminal_reason == "max_interactions");
}

TEST_CASE("flag capture ends the run with its own terminal reason") {
  std::string script = plain_script(2);
  script += R"({"action": "grab flag", "status": "ok", "observation": "flag{x}", "flag": true})"
            "\n";
  script += plain_script(1);
  ScriptedDriver driver = ScriptedDriver::from_text(script);
  LoopConfig config;
  config.max_interactions = 10;
  RunRecord record = run_loop(driver, driver, seed_graph(), config);
  CHECK(record.terminal_reason == "flag_captured");
  CHECK(record.interactions.size() == 3);
}

TEST_CASE("driver failure aborts with driver_error") {
  ThrowingDriver driver;
  FixedGraphUpdater updater;
  LoopConfig config;
  config.max_interactions = 4;
  RunRecord record = run_loop(driver, updater, seed_graph(), config);
  CHECK(record.terminal_reason == "driver_error");
  CHECK(record.interactions.empty());
  CHECK(record.terminal_detail.find("transport") != std::string::npos);
}

TEST_CASE("analysis failure is recorded and the loop continues") {
  // The seed graph never gains a vulnerable node, so every trigger's
  // equilibrium fails with no_attack_surface.
  ScriptedDriver driver = ScriptedDriver::from_text(plain_script(10));
  FixedGraphUpdater updater;  // keeps the current graph
  LoopConfig config;
  config.trigger_every = 5;
  config.max_interactions = 10;
  RunRecord record = run_loop(driver, updater, seed_graph(), config);
  REQUIRE(record.triggers.size() == 2);
  for (const TriggerEntry& trigger : record.triggers) {
    CHECK_FALSE(trigger.analysis_ok);
    CHECK(trigger.failure.find("no_attack_surface") != std::string::npos);
    CHECK_FALSE(trigger.digest_refreshed);
  }
  CHECK(record.interactions.size() == 10);
  CHECK(record.final_value == 0.0);
}

TEST_CASE("a zero analysis budget stales the digest but adopts the value") {
  ScriptedDriver driver = ScriptedDriver::from_text(plain_script(5));
  FixedGraphUpdater updater;
  updater.document = kChainDocument;
  LoopConfig config;
  config.trigger_every = 5;
  config.max_interactions = 5;
  config.analysis_budget = std::chrono::milliseconds(0);
  RunRecord record = run_loop(driver, updater, seed_graph(), config);
  REQUIRE(record.triggers.size() == 1);
  CHECK(record.triggers[0].analysis_ok);
  CHECK(record.triggers[0].over_budget);
  CHECK_FALSE(record.triggers[0].digest_refreshed);
  CHECK(record.triggers[0].prompt_digest_blocks == 0);  // never injected
  CHECK(record.final_value == 0.0);                     // value still adopted
}

TEST_CASE("strategic position is constant between triggers") {
  ScriptedDriver driver = ScriptedDriver::from_text(
      read_fixture("loop_script.jsonl"));
  LoopConfig config;
  config.trigger_every = 5;
  config.max_interactions = driver.script_length();
  RunRecord record = run_loop(driver, driver, seed_graph(), config);
  REQUIRE(record.triggers.size() == 2);
  // The record's final value equals the last successful trigger value.
  double expected = 0.0;
  for (const TriggerEntry& trigger : record.triggers) {
    if (trigger.analysis_ok) expected = trigger.value;
  }
  CHECK(record.final_value == doctest::Approx(expected));
}

TEST_CASE("run record serializes to a chronological event log") {
  ScriptedDriver driver = ScriptedDriver::from_text(plain_script(6));
  FixedGraphUpdater updater;
  updater.document = kChainDocument;
  LoopConfig config;
  config.trigger_every = 5;
  config.max_interactions = 6;
  RunRecord record = run_loop(driver, updater, seed_graph(), config);
  std::string jsonl = record.to_jsonl();

  std::istringstream lines(jsonl);
  std::string line;
  int interactions = 0, triggers = 0, terminals = 0;
  int last_interaction = 0;
  while (std::getline(lines, line)) {
    if (line.find("\"interaction\"") != std::string::npos &&
        line.find("\"event\":\"interaction\"") != std::string::npos) {
      ++interactions;
    }
    if (line.find("\"event\":\"trigger\"") != std::string::npos) {
      ++triggers;
      CHECK(interactions == 5);  // trigger right after interaction 5
    }
    if (line.find("\"event\":\"terminal\"") != std::string::npos) ++terminals;
    (void)last_interaction;
  }
  CHECK(interactions == 6);
  CHECK(triggers == 1);
  CHECK(terminals == 1);
}

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "gctr/digest.hpp"
#include "gctr/effort.hpp"
#include "gctr/equilibrium.hpp"
#include "gctr/graph.hpp"
#include "gctr/inference.hpp"
#include "gctr/session_log.hpp"

namespace gctr {

struct LoopConfig {
  int trigger_every = 5;
  int max_interactions = 25;
  double success_threshold = 1.0;
  DigestMode digest_mode = DigestMode::algorithmic;
  DigestRole role = DigestRole::merged;
  std::chrono::milliseconds analysis_budget{50000};
  std::chrono::milliseconds execution_budget{70000};
  std::string base_system_prompt =
      "You are a security exercise agent. Work the objective step by step.";
};

struct AgentStep {
  std::string action;
  std::string status;
  std::string observation;
  bool flag_captured = false;
};

/// Selects and executes one action. Throwing aborts the loop with
/// terminal reason driver_error.
class AgentDriver {
 public:
  virtual ~AgentDriver() = default;
  virtual AgentStep step(const AttackGraph& graph,
                         const std::string& system_prompt, int interaction) = 0;
};

/// Refines the attack graph from an executed step's outcome.
class GraphUpdater {
 public:
  virtual ~GraphUpdater() = default;
  virtual AttackGraph update(const AttackGraph& current, const AgentStep& step,
                             int interaction) = 0;
};

/// Replays a JSONL script of {action, status, observation, flag?, graph?}
/// entries; `graph` swaps in a full annotation document at that step.
class ScriptedDriver : public AgentDriver, public GraphUpdater {
 public:
  static ScriptedDriver from_text(const std::string& text);
  static ScriptedDriver from_file(const std::string& path);

  AgentStep step(const AttackGraph& graph, const std::string& system_prompt,
                 int interaction) override;
  AttackGraph update(const AttackGraph& current, const AgentStep& step,
                     int interaction) override;
  int script_length() const { return static_cast<int>(entries_.size()); }

 private:
  struct Entry {
    AgentStep step;
    std::optional<std::string> graph_document;
  };
  std::vector<Entry> entries_;
};

struct InteractionEntry {
  int interaction = 0;
  std::string action;
  std::string status;
  std::string observation;   // truncated summary
  double elapsed_ms = 0.0;   // since loop start
  double duration_ms = 0.0;  // select-execute-update time
  bool over_budget = false;  // exceeded execution_budget
};

struct TriggerEntry {
  int interaction = 0;
  bool analysis_ok = false;
  std::string failure;  // when !analysis_ok
  double value = 0.0;
  bool degenerate = false;
  int path_count = 0;
  double latency_ms = 0.0;
  bool over_budget = false;
  bool digest_refreshed = false;
  bool fallback_used = false;
  std::string digest_mode;
  double temperature = 0.0;  // llm request temperature, recorded verbatim
  int prompt_digest_blocks = 0;
  std::string digest_text;
};

struct RunRecord {
  std::vector<InteractionEntry> interactions;
  std::vector<TriggerEntry> triggers;
  std::string terminal_reason;  // success_threshold | flag_captured |
                                // max_interactions | driver_error
  std::string terminal_detail;
  double final_value = 0.0;
  AttackGraph final_graph;
  std::string final_system_prompt;

  std::string to_jsonl() const;  // line-delimited event log
};

struct LoopDependencies {
  InferenceClient* inference = nullptr;  // llm digest mode
  std::optional<SessionLog> log;  // scores edges when present, else 0.5 fill
  SolverConfig solver;
  EffortWeights weights;
  ClassificationThresholds thresholds;
};

/// True exactly at multiples of the trigger cadence.
bool should_trigger(int interaction, const LoopConfig& config);

/// Replaces any previously injected digest block (fixed sentinel markers)
/// instead of accumulating; idempotent for identical digests.
std::string inject_digest(const std::string& system_prompt,
                          const Digest& digest);
int count_digest_blocks(const std::string& prompt);

/// Closed feedback loop: act, update the graph, and on cadence recompute
/// the equilibrium, adopt its value as the strategic position and refresh
/// the injected digest. Analysis failures and budget overruns are
/// recorded and the loop continues with stale guidance.
RunRecord run_loop(AgentDriver& agent, GraphUpdater& extractor,
                   AttackGraph initial, const LoopConfig& config,
                   const LoopDependencies& deps = {});

}  // namespace gctr

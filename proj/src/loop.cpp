#include "gctr/loop.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gctr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kDigestBegin = "<<<gctr-digest>>>";
constexpr const char* kDigestEnd = "<<<end-gctr-digest>>>";

std::string truncate(const std::string& text, std::size_t limit = 160) {
  if (text.size() <= limit) return text;
  return text.substr(0, limit) + "...";
}

}  // namespace

ScriptedDriver ScriptedDriver::from_text(const std::string& text) {
  ScriptedDriver driver;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DomainError("script line " + std::to_string(line_no) +
                        ": invalid JSON: " + std::string(e.what()));
    }
    Entry entry;
    entry.step.action = record.value("action", std::string{});
    entry.step.status = record.value("status", std::string{"ok"});
    entry.step.observation = record.value("observation", std::string{});
    entry.step.flag_captured = record.value("flag", false);
    if (record.contains("graph")) {
      if (record["graph"].is_string()) {
        entry.graph_document = record["graph"].get<std::string>();
      } else {
        entry.graph_document = record["graph"].dump();
      }
    }
    driver.entries_.push_back(std::move(entry));
  }
  if (driver.entries_.empty()) throw DomainError("script has no entries");
  return driver;
}

ScriptedDriver ScriptedDriver::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open script file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

AgentStep ScriptedDriver::step(const AttackGraph&, const std::string&,
                               int interaction) {
  if (interaction < 1 || interaction > static_cast<int>(entries_.size())) {
    throw DomainError("script exhausted at interaction " +
                      std::to_string(interaction));
  }
  return entries_[static_cast<size_t>(interaction - 1)].step;
}

AttackGraph ScriptedDriver::update(const AttackGraph& current,
                                   const AgentStep&, int interaction) {
  if (interaction < 1 || interaction > static_cast<int>(entries_.size())) {
    throw DomainError("script exhausted at interaction " +
                      std::to_string(interaction));
  }
  const Entry& entry = entries_[static_cast<size_t>(interaction - 1)];
  if (entry.graph_document) return parse_graph_document(*entry.graph_document);
  return current;
}

bool should_trigger(int interaction, const LoopConfig& config) {
  if (interaction < 1) throw DomainError("interaction count must be >= 1");
  if (config.trigger_every < 1) throw DomainError("trigger cadence must be >= 1");
  return interaction % config.trigger_every == 0;
}

std::string inject_digest(const std::string& system_prompt,
                          const Digest& digest) {
  std::string block = std::string(kDigestBegin) + "\n" + digest.text;
  if (block.back() != '\n') block += '\n';
  block += kDigestEnd;

  std::size_t begin = system_prompt.find(kDigestBegin);
  if (begin == std::string::npos) {
    std::string out = system_prompt;
    if (!out.empty() && out.back() != '\n') out += '\n';
    return out + block + "\n";
  }
  std::size_t end = system_prompt.find(kDigestEnd, begin);
  if (end == std::string::npos) {
    // Damaged block: drop everything from the open marker.
    return system_prompt.substr(0, begin) + block + "\n";
  }
  std::size_t after = end + std::string(kDigestEnd).size();
  std::string tail = system_prompt.substr(after);
  if (!tail.empty() && tail.front() == '\n') tail.erase(tail.begin());
  return system_prompt.substr(0, begin) + block + "\n" + tail;
}

int count_digest_blocks(const std::string& prompt) {
  int count = 0;
  std::size_t pos = 0;
  while ((pos = prompt.find(kDigestBegin, pos)) != std::string::npos) {
    ++count;
    pos += std::string(kDigestBegin).size();
  }
  return count;
}

RunRecord run_loop(AgentDriver& agent, GraphUpdater& extractor,
                   AttackGraph initial, const LoopConfig& config,
                   const LoopDependencies& deps) {
  RunRecord record;
  AttackGraph graph = std::move(initial);
  std::optional<Digest> digest;
  std::string system_prompt = config.base_system_prompt;
  double strategic_position = 0.0;
  int interaction = 0;

  const auto loop_start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&loop_start]() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - loop_start)
        .count();
  };

  record.terminal_reason = "max_interactions";
  while (strategic_position < config.success_threshold &&
         interaction < config.max_interactions) {
    AgentStep step;
    const auto step_start = std::chrono::steady_clock::now();
    try {
      step = agent.step(graph, system_prompt, interaction + 1);
      graph = extractor.update(graph, step, interaction + 1);
    } catch (const std::exception& e) {
      record.terminal_reason = "driver_error";
      record.terminal_detail = e.what();
      break;
    }
    ++interaction;
    const auto step_elapsed = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - step_start);
    record.interactions.push_back(InteractionEntry{
        interaction, step.action, step.status, truncate(step.observation),
        elapsed_ms(), step_elapsed.count(),
        step_elapsed > config.execution_budget});

    if (step.flag_captured) {
      record.terminal_reason = "flag_captured";
      break;
    }

    if (should_trigger(interaction, config)) {
      TriggerEntry trigger;
      trigger.interaction = interaction;
      const auto analysis_start = std::chrono::steady_clock::now();
      try {
        NormalizedGraph normalized = normalize(graph);
        NormalizedGraph scored =
            deps.log ? score_edges(normalized, *deps.log, deps.weights)
                     : fill_missing_scores(normalized);
        EquilibriumSolution solution = solve_equilibrium(scored, deps.solver);
        // The strategic position is adopted first, mirroring the
        // analyze-then-interpret order; a budget overrun only stales the
        // digest.
        strategic_position = solution.value;
        trigger.analysis_ok = true;
        trigger.value = solution.value;
        trigger.degenerate = solution.degenerate;
        trigger.path_count = static_cast<int>(solution.attacker.size());

        DigestOptions options;
        options.thresholds = deps.thresholds;
        options.timeout = config.analysis_budget;
        Digest fresh = generate_digest(scored, solution, config.digest_mode,
                                       config.role, deps.inference, options);
        trigger.digest_mode = to_string(config.digest_mode);
        trigger.temperature = fresh.temperature;
        auto analysis_elapsed = std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - analysis_start);
        trigger.latency_ms = analysis_elapsed.count();
        trigger.over_budget =
            analysis_elapsed > config.analysis_budget;
        if (!trigger.over_budget) {
          digest = fresh;
          system_prompt = inject_digest(system_prompt, *digest);
          trigger.digest_refreshed = true;
          trigger.fallback_used = fresh.fallback_used;
          trigger.digest_text = fresh.text;
        }
      } catch (const std::exception& e) {
        trigger.analysis_ok = false;
        trigger.failure = e.what();
        trigger.latency_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() -
                                 analysis_start)
                                 .count();
      }
      trigger.prompt_digest_blocks = count_digest_blocks(system_prompt);
      record.triggers.push_back(std::move(trigger));
    }
  }

  if (record.terminal_reason == "max_interactions" &&
      strategic_position >= config.success_threshold) {
    record.terminal_reason = "success_threshold";
  }
  record.final_value = strategic_position;
  record.final_graph = std::move(graph);
  record.final_system_prompt = std::move(system_prompt);
  return record;
}

std::string RunRecord::to_jsonl() const {
  // Chronological: each interaction, then any trigger it fired.
  std::string out;
  std::size_t next_trigger = 0;
  for (const InteractionEntry& entry : interactions) {
    ordered_json event;
    event["event"] = "interaction";
    event["interaction"] = entry.interaction;
    event["action"] = entry.action;
    event["status"] = entry.status;
    event["observation"] = entry.observation;
    event["elapsed_ms"] = entry.elapsed_ms;
    event["duration_ms"] = entry.duration_ms;
    if (entry.over_budget) event["over_budget"] = true;
    out += event.dump() + "\n";
    while (next_trigger < triggers.size() &&
           triggers[next_trigger].interaction <= entry.interaction) {
      const TriggerEntry& trigger = triggers[next_trigger++];
      ordered_json tevent;
      tevent["event"] = "trigger";
      tevent["interaction"] = trigger.interaction;
      tevent["analysis_ok"] = trigger.analysis_ok;
      if (!trigger.analysis_ok) tevent["failure"] = trigger.failure;
      tevent["value"] = trigger.value;
      tevent["degenerate"] = trigger.degenerate;
      tevent["path_count"] = trigger.path_count;
      tevent["latency_ms"] = trigger.latency_ms;
      tevent["over_budget"] = trigger.over_budget;
      tevent["digest_refreshed"] = trigger.digest_refreshed;
      tevent["fallback_used"] = trigger.fallback_used;
      if (!trigger.digest_mode.empty()) {
        tevent["digest_mode"] = trigger.digest_mode;
        tevent["temperature"] = trigger.temperature;
      }
      tevent["prompt_digest_blocks"] = trigger.prompt_digest_blocks;
      out += tevent.dump() + "\n";
    }
  }
  ordered_json terminal;
  terminal["event"] = "terminal";
  terminal["reason"] = terminal_reason;
  if (!terminal_detail.empty()) terminal["detail"] = terminal_detail;
  terminal["final_value"] = final_value;
  terminal["interactions"] = interactions.size();
  terminal["triggers"] = triggers.size();
  out += terminal.dump() + "\n";
  return out;
}

}  // namespace gctr

#include "gctr/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gctr {

using nlohmann::json;
using nlohmann::ordered_json;

std::string CliConfig::to_json() const {
  ordered_json doc;
  doc["weights"] = {{"msg", weights.msg},
                    {"tok", weights.tok},
                    {"cost", weights.cost}};
  doc["solver"] = {{"lambda_attacker", solver.lambda_attacker},
                   {"lambda_defender", solver.lambda_defender},
                   {"tolerance", solver.tolerance},
                   {"path_ceiling", solver.path_ceiling},
                   {"general_start", solver.general_start}};
  doc["loop"] = {{"trigger_every", loop.trigger_every},
                 {"max_interactions", loop.max_interactions},
                 {"success_threshold", loop.success_threshold},
                 {"digest_mode", to_string(loop.digest_mode)},
                 {"role", to_string(loop.role)},
                 {"analysis_budget_ms", loop.analysis_budget.count()},
                 {"execution_budget_ms", loop.execution_budget.count()},
                 {"base_system_prompt", loop.base_system_prompt}};
  doc["extraction"] = {{"cap_min", extraction.cap.min_nodes},
                       {"cap_max", extraction.cap.max_nodes},
                       {"max_retries", extraction.max_retries},
                       {"forbid_cycles", extraction.forbid_cycles}};
  doc["thresholds"] = {{"bottleneck", thresholds.bottleneck},
                       {"high_risk", thresholds.high_risk}};
  // Credentials are deliberately excluded; only the endpoint shape is
  // persisted.
  doc["endpoint"] = {{"url", endpoint.url},
                     {"model", endpoint.model},
                     {"timeout_ms", endpoint.timeout.count()}};
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

CliConfig CliConfig::from_json(const std::string& text) {
  CliConfig config;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError("invalid config document: " + std::string(e.what()));
  }
  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    config.weights.msg = w.value("msg", config.weights.msg);
    config.weights.tok = w.value("tok", config.weights.tok);
    config.weights.cost = w.value("cost", config.weights.cost);
    config.weights.validate();
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    config.solver.lambda_attacker =
        s.value("lambda_attacker", config.solver.lambda_attacker);
    config.solver.lambda_defender =
        s.value("lambda_defender", config.solver.lambda_defender);
    config.solver.tolerance = s.value("tolerance", config.solver.tolerance);
    config.solver.path_ceiling =
        s.value("path_ceiling", config.solver.path_ceiling);
    config.solver.general_start =
        s.value("general_start", config.solver.general_start);
  }
  if (doc.contains("loop")) {
    const json& l = doc["loop"];
    config.loop.trigger_every =
        l.value("trigger_every", config.loop.trigger_every);
    config.loop.max_interactions =
        l.value("max_interactions", config.loop.max_interactions);
    config.loop.success_threshold =
        l.value("success_threshold", config.loop.success_threshold);
    if (l.contains("digest_mode")) {
      config.loop.digest_mode =
          parse_digest_mode(l["digest_mode"].get<std::string>());
    }
    if (l.contains("role")) {
      config.loop.role = parse_digest_role(l["role"].get<std::string>());
    }
    config.loop.analysis_budget = std::chrono::milliseconds(
        l.value("analysis_budget_ms", config.loop.analysis_budget.count()));
    config.loop.execution_budget = std::chrono::milliseconds(
        l.value("execution_budget_ms", config.loop.execution_budget.count()));
    config.loop.base_system_prompt =
        l.value("base_system_prompt", config.loop.base_system_prompt);
  }
  if (doc.contains("extraction")) {
    const json& e = doc["extraction"];
    config.extraction.cap.min_nodes =
        e.value("cap_min", config.extraction.cap.min_nodes);
    config.extraction.cap.max_nodes =
        e.value("cap_max", config.extraction.cap.max_nodes);
    config.extraction.max_retries =
        e.value("max_retries", config.extraction.max_retries);
    config.extraction.forbid_cycles =
        e.value("forbid_cycles", config.extraction.forbid_cycles);
  }
  if (doc.contains("thresholds")) {
    const json& t = doc["thresholds"];
    config.thresholds.bottleneck =
        t.value("bottleneck", config.thresholds.bottleneck);
    config.thresholds.high_risk =
        t.value("high_risk", config.thresholds.high_risk);
  }
  if (doc.contains("endpoint")) {
    const json& e = doc["endpoint"];
    config.endpoint.url = e.value("url", config.endpoint.url);
    config.endpoint.model = e.value("model", config.endpoint.model);
    config.endpoint.timeout = std::chrono::milliseconds(
        e.value("timeout_ms", config.endpoint.timeout.count()));
  }
  config.seed = doc.value("seed", config.seed);
  return config;
}

CliConfig CliConfig::load(const std::optional<std::string>& path) {
  CliConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw DomainError("cannot open config file '" + *path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = from_json(buffer.str());
  }
  config.apply_env_overrides();
  return config;
}

void CliConfig::apply_env_overrides() {
  if (const char* url = std::getenv("GCTR_INFERENCE_URL")) {
    endpoint.url = url;
  }
  if (const char* key = std::getenv("GCTR_INFERENCE_KEY")) {
    endpoint.api_key = key;
  }
  if (const char* model = std::getenv("GCTR_INFERENCE_MODEL")) {
    endpoint.model = model;
  }
}

}  // namespace gctr

#include "gctr/extraction.hpp"

#include <algorithm>
#include <cctype>

namespace gctr {

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string truncate(const std::string& text, std::size_t limit) {
  if (text.size() <= limit) return text;
  return text.substr(0, limit) + "...";
}

// Strips markdown code fences that models like to wrap JSON in.
std::string strip_fences(const std::string& text) {
  std::size_t start = text.find("```");
  if (start == std::string::npos) return text;
  std::size_t body = text.find('\n', start);
  if (body == std::string::npos) return text;
  std::size_t end = text.find("```", body);
  if (end == std::string::npos) return text;
  return text.substr(body + 1, end - body - 1);
}

}  // namespace

std::string build_extraction_prompt(const SessionLog& log,
                                    const ExtractionConfig& config) {
  std::string prompt;
  if (!config.prompt_preamble.empty()) {
    prompt += config.prompt_preamble + "\n\n";
  }
  prompt +=
      "Read the security exercise log below and produce an attack graph as "
      "a single JSON document with two top-level arrays, `nodes` and "
      "`edges`.\n"
      "Each node carries exactly these fields: id, name, info, "
      "vulnerability, message_id. `id` is a unique identifier, `name` a "
      "short step name, `info` free-form context, `vulnerability` true only "
      "for confirmed exploited weaknesses, and `message_id` the 1-based "
      "index of the log message the step came from.\n"
      "Each edge carries `source` and `target` node ids.\n";
  prompt += "Use at most " + std::to_string(config.cap.max_nodes) +
            " nodes and at least " + std::to_string(config.cap.min_nodes) +
            " when the log supports them.\n";
  if (config.forbid_cycles) {
    prompt +=
        "The graph must be acyclic: never add an edge that closes a "
        "cycle.\n";
  }
  prompt +=
      "Use a single entry point: the node anchored at message 1 is the "
      "start of every path.\n";
  prompt += "\nLog (" + std::to_string(log.message_count()) + " messages):\n";
  for (const MessageRecord& message : log.messages) {
    prompt += std::to_string(message.index) + " [" + to_string(message.role) +
              "] " + truncate(message.text, 400) + "\n";
  }
  return prompt;
}

AttackGraph enforce_node_cap(AttackGraph graph, const CapRange& cap) {
  while (static_cast<int>(graph.node_count()) > cap.max_nodes) {
    NodeId root = graph.min_node_id();
    NodeId victim = -1;
    int victim_degree = 0;
    // Lowest total degree first; ties prefer the highest id so early
    // structure survives.
    for (const auto& [id, node] : graph.nodes()) {
      if (id == root || node.vulnerable) continue;
      int degree = graph.in_degree(id) + graph.out_degree(id);
      if (victim < 0 || degree < victim_degree ||
          (degree == victim_degree && id > victim)) {
        victim = id;
        victim_degree = degree;
      }
    }
    if (victim < 0) break;  // only protected nodes remain
    std::vector<NodeId> preds = graph.predecessors(victim);
    std::vector<NodeId> succs = graph.successors(victim);
    graph.remove_node(victim);
    for (NodeId p : preds) {
      for (NodeId s : succs) {
        if (p != s) graph.upsert_edge(p, s, std::nullopt);
      }
    }
    graph.provenance.push_back("enforce_node_cap: removed " +
                               std::to_string(victim));
  }
  return graph;
}

AttackGraph extract_graph(const SessionLog& log, InferenceClient& inference,
                          const ExtractionConfig& config) {
  InferenceRequest request;
  request.prompt = build_extraction_prompt(log, config);
  request.temperature = 0.3;

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    InferenceResult result = inference.complete(request);
    if (!result.ok) {
      last_error = result.error.empty() ? "inference failed" : result.error;
      continue;
    }
    AttackGraph graph;
    try {
      graph = parse_graph_document(strip_fences(result.text));
    } catch (const DomainError& e) {
      last_error = e.what();
      continue;
    }
    ValidationReport report = validate_graph(graph);
    bool retryable = false;
    for (const Finding& finding : report.errors) {
      // Disconnected fragments are reconnected to the root below;
      // anything else (cycles above all) means a bad response.
      if (finding.code == "disconnected") continue;
      last_error = finding.message;
      retryable = true;
      break;
    }
    if (retryable) continue;

    graph = enforce_node_cap(std::move(graph), config.cap);
    // Cap removal or the model itself may leave disconnected pieces;
    // reconnecting entry points keeps the output valid as returned.
    graph = merge_entry_points(graph);
    return graph;
  }
  throw DomainError("extraction_failed: " + last_error);
}

std::vector<ExtractionRule> default_extraction_rules() {
  return {
      {"vulnerab", true, "Vulnerability"},
      {"exploit", true, "Exploit"},
      {"injection", true, "Injection"},
      {"hardcoded", true, "Hardcoded Secret"},
      {"exposed", true, "Exposure"},
      {"bypass", true, "Bypass"},
      {"flag{", true, "Flag Capture"},
      {"scan", false, "Scan"},
      {"recon", false, "Reconnaissance"},
      {"enumerat", false, "Enumeration"},
      {"discover", false, "Discovery"},
      {"endpoint", false, "Endpoint"},
      {"login", false, "Login"},
      {"credential", false, "Credentials"},
      {"upload", false, "Upload"},
      {"download", false, "Download"},
      {"request", false, "Request"},
  };
}

RuleBasedExtractor::RuleBasedExtractor(SessionLog log,
                                       std::vector<ExtractionRule> rules)
    : log_(std::move(log)), rules_(std::move(rules)) {}

InferenceResult RuleBasedExtractor::complete(const InferenceRequest&) {
  AttackGraph graph;
  NodeId next_id = 1;
  NodeId previous = -1;
  for (const MessageRecord& message : log_.messages) {
    std::string text = lowercase(message.text);
    const ExtractionRule* matched = nullptr;
    for (const ExtractionRule& rule : rules_) {
      if (text.find(lowercase(rule.pattern)) != std::string::npos) {
        matched = &rule;
        break;
      }
    }
    bool is_entry = message.index == 1;
    if (matched == nullptr && !is_entry) continue;

    AttackNode node;
    node.id = next_id++;
    node.message_id = message.index;
    if (matched != nullptr) {
      node.name = matched->tag + " (msg " + std::to_string(message.index) + ")";
      node.vulnerable = matched->vulnerable && !is_entry;
      node.info = truncate(message.text, 120);
    } else {
      node.name = "Exercise Start";
      node.info = truncate(message.text, 120);
    }
    graph.add_node(node);
    if (previous >= 0) graph.upsert_edge(previous, node.id, std::nullopt);
    previous = node.id;
  }
  return InferenceResult::success(serialize_graph_document(graph));
}

}  // namespace gctr

#pragma once

#include <string>
#include <vector>

#include "gctr/graph.hpp"
#include "gctr/inference.hpp"
#include "gctr/normalize.hpp"
#include "gctr/session_log.hpp"

namespace gctr {

struct ExtractionConfig {
  CapRange cap;
  int max_retries = 2;
  std::string prompt_preamble;  // optional custom instruction prefix
  bool forbid_cycles = true;
};

/// Prompt stating the output schema, the node cap, the acyclicity
/// constraint and the single-entry convention, followed by the log.
std::string build_extraction_prompt(const SessionLog& log,
                                    const ExtractionConfig& config);

/// Degree-based reduction to cap.max_nodes: lowest-degree non-vulnerable,
/// non-root nodes go first and edges are re-stitched through removed
/// nodes. The root and vulnerable nodes are never removed, so a graph
/// whose protected nodes already exceed the cap stays at that floor.
AttackGraph enforce_node_cap(AttackGraph graph, const CapRange& cap);

/// Queries the inference interface, parses the response as an annotation
/// document, validates it and enforces the cap. Cyclic or unparsable
/// responses are re-asked up to max_retries times, then an
/// "extraction_failed" DomainError is thrown.
AttackGraph extract_graph(const SessionLog& log, InferenceClient& inference,
                          const ExtractionConfig& config);

/// Case-insensitive keyword rule for the offline extractor.
struct ExtractionRule {
  std::string pattern;  // substring matched against the message text
  bool vulnerable = false;
  std::string tag;  // node-name prefix
};

std::vector<ExtractionRule> default_extraction_rules();

/// Deterministic offline extractor: one node per message matching a
/// rule, chained in message order, message 1 always the entry. A pure
/// function of the log, exposed through the inference interface so the
/// whole pipeline runs with zero network dependencies.
class RuleBasedExtractor : public InferenceClient {
 public:
  explicit RuleBasedExtractor(SessionLog log,
                              std::vector<ExtractionRule> rules =
                                  default_extraction_rules());
  InferenceResult complete(const InferenceRequest& request) override;

 private:
  SessionLog log_;
  std::vector<ExtractionRule> rules_;
};

}  // namespace gctr

#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "gctr/equilibrium.hpp"
#include "gctr/inference.hpp"
#include "gctr/normalize.hpp"

namespace gctr {

enum class DigestMode { algorithmic, llm };
enum class DigestRole { attacker, defender, merged };

std::string to_string(DigestMode mode);
std::string to_string(DigestRole role);
DigestMode parse_digest_mode(const std::string& text);
DigestRole parse_digest_role(const std::string& text);

/// Bottlenecks are transitions below the bottleneck threshold (weak
/// attack steps); high-risk transitions sit above the high-risk
/// threshold. The bands overlap by design.
struct ClassificationThresholds {
  double bottleneck = 0.95;
  double high_risk = 0.90;
};

struct ScoredTransition {
  NodeId source = 0;
  NodeId target = 0;
  double probability = 0.0;
};

struct TransitionClassification {
  std::vector<ScoredTransition> bottlenecks;  // p < bottleneck threshold
  std::vector<ScoredTransition> high_risk;    // p > high-risk threshold
  std::vector<NodeId> critical_nodes;  // defender support, probability desc
};

struct Digest {
  std::string text;
  DigestMode mode = DigestMode::algorithmic;
  DigestRole role = DigestRole::merged;
  bool fallback_used = false;
  double temperature = 0.0;  // llm request temperature, 0 when algorithmic
  EquilibriumSolution source_solution;
};

struct DigestOptions {
  ClassificationThresholds thresholds;
  std::chrono::milliseconds timeout{50000};
  std::string model_hint;
};

/// Partitions the real edges of positive-probability attack paths by
/// score thresholds and lists defender-support nodes by probability.
TransitionClassification classify_transitions(
    const EquilibriumSolution& solution, const NormalizedGraph& scored,
    const ClassificationThresholds& thresholds = {});

/// Deterministic rule-based rendering. The merged role contains the
/// attacker and defender bodies verbatim.
Digest render_algorithmic_digest(const EquilibriumSolution& solution,
                                 const TransitionClassification& classification,
                                 DigestRole role,
                                 const NormalizedGraph& scored);

/// Fixed instruction template for the llm mode; kept between 300 and 400
/// words so request bodies stay compact.
extern const char* const kGuidancePromptTemplate;

/// Template plus the equilibrium tables and edge scores; requests the
/// five sections at temperature 0.3.
InferenceRequest build_llm_prompt(const NormalizedGraph& scored,
                                  const EquilibriumSolution& solution,
                                  const std::string& model_hint = "");

/// Total digest generation: algorithmic mode never touches the client;
/// llm mode calls it once and any failure (error, timeout, empty reply)
/// downgrades to the algorithmic rendering with fallback_used set.
Digest generate_digest(const NormalizedGraph& scored,
                       const EquilibriumSolution& solution, DigestMode mode,
                       DigestRole role, InferenceClient* inference,
                       const DigestOptions& options = {});

}  // namespace gctr

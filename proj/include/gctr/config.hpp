#pragma once

#include <optional>
#include <string>

#include "gctr/digest.hpp"
#include "gctr/effort.hpp"
#include "gctr/equilibrium.hpp"
#include "gctr/extraction.hpp"
#include "gctr/inference.hpp"
#include "gctr/loop.hpp"

namespace gctr {

/// Full tool configuration. Defaults mirror the reference setup:
/// lambda 2, trigger cadence 5, temperature 0.3, uniform effort weights,
/// thresholds 0.95/0.90, node cap clamp [4, 25].
struct CliConfig {
  EffortWeights weights;
  SolverConfig solver;
  LoopConfig loop;
  ExtractionConfig extraction;
  ClassificationThresholds thresholds;
  InferenceEndpoint endpoint;  // url empty -> offline, llm mode falls back
  long long seed = 0;          // recorded for reproducibility

  std::string to_json() const;
  static CliConfig from_json(const std::string& text);
  static CliConfig load(const std::optional<std::string>& path);

  /// GCTR_INFERENCE_URL / GCTR_INFERENCE_KEY / GCTR_INFERENCE_MODEL.
  /// The key is never serialized or written to run records.
  void apply_env_overrides();
};

}  // namespace gctr

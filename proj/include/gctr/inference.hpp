#pragma once

#include <chrono>
#include <string>

namespace gctr {

/// Request for a single text completion. The temperature is recorded
/// verbatim in run records.
struct InferenceRequest {
  std::string prompt;
  double temperature = 0.3;
  std::string model_hint;
};

struct InferenceResult {
  bool ok = false;
  std::string text;
  std::string error;

  static InferenceResult success(std::string text) {
    return {true, std::move(text), {}};
  }
  static InferenceResult failure(std::string error) {
    return {false, {}, std::move(error)};
  }
};

/// Single-call text-in/text-out contract. Implementations must tolerate
/// concurrent calls.
class InferenceClient {
 public:
  virtual ~InferenceClient() = default;
  virtual InferenceResult complete(const InferenceRequest& request) = 0;
};

struct InferenceEndpoint {
  std::string url;    // e.g. http://host:port/v1/completions
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{50000};
};

/// Posts {model, prompt, temperature} as JSON to the endpoint and reads
/// the completion from `text`, `completion` or OpenAI-style
/// `choices[0].text`; a non-JSON body is taken verbatim.
class HttpInferenceClient : public InferenceClient {
 public:
  explicit HttpInferenceClient(InferenceEndpoint endpoint);
  InferenceResult complete(const InferenceRequest& request) override;

 private:
  InferenceEndpoint endpoint_;
};

/// Always fails with "no inference endpoint configured"; keeps llm-mode
/// call sites total when no endpoint exists (they fall back).
class NullInferenceClient : public InferenceClient {
 public:
  InferenceResult complete(const InferenceRequest& request) override;
};

/// Runs the call on a helper thread and abandons it after `timeout`,
/// reporting a timeout failure.
InferenceResult complete_with_timeout(InferenceClient& client,
                                      const InferenceRequest& request,
                                      std::chrono::milliseconds timeout);

}  // namespace gctr

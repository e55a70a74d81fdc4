#include "gctr/inference.hpp"

#include <future>
#include <memory>
#include <mutex>
#include <vector>

#include "gctr/graph.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gctr {

using nlohmann::json;

HttpInferenceClient::HttpInferenceClient(InferenceEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  if (endpoint_.url.empty()) {
    throw DomainError("inference endpoint URL is empty");
  }
}

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t path_start = url.find('/', scheme_end == std::string::npos
                                             ? 0
                                             : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

InferenceResult HttpInferenceClient::complete(const InferenceRequest& request) {
  SplitUrl url = split_url(endpoint_.url);
  httplib::Client client(url.base);
  int seconds =
      static_cast<int>(std::max<long long>(1, endpoint_.timeout.count() / 1000));
  client.set_connection_timeout(seconds, 0);
  client.set_read_timeout(seconds, 0);
  client.set_write_timeout(seconds, 0);

  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  }

  json body;
  body["model"] = request.model_hint.empty() ? endpoint_.model
                                             : request.model_hint;
  body["prompt"] = request.prompt;
  body["temperature"] = request.temperature;

  httplib::Result response =
      client.Post(url.path, headers, body.dump(), "application/json");
  if (!response) {
    return InferenceResult::failure("transport error: " +
                                    httplib::to_string(response.error()));
  }
  if (response->status < 200 || response->status >= 300) {
    return InferenceResult::failure("endpoint returned status " +
                                    std::to_string(response->status));
  }

  try {
    json parsed = json::parse(response->body);
    if (parsed.contains("text") && parsed["text"].is_string()) {
      return InferenceResult::success(parsed["text"].get<std::string>());
    }
    if (parsed.contains("completion") && parsed["completion"].is_string()) {
      return InferenceResult::success(parsed["completion"].get<std::string>());
    }
    if (parsed.contains("choices") && parsed["choices"].is_array() &&
        !parsed["choices"].empty()) {
      const json& choice = parsed["choices"][0];
      if (choice.contains("text") && choice["text"].is_string()) {
        return InferenceResult::success(choice["text"].get<std::string>());
      }
      if (choice.contains("message") && choice["message"].is_object() &&
          choice["message"].contains("content")) {
        return InferenceResult::success(
            choice["message"]["content"].get<std::string>());
      }
    }
  } catch (const json::parse_error&) {
    // non-JSON body below
  }
  return InferenceResult::success(response->body);
}

InferenceResult NullInferenceClient::complete(const InferenceRequest&) {
  return InferenceResult::failure("no inference endpoint configured");
}

InferenceResult complete_with_timeout(InferenceClient& client,
                                      const InferenceRequest& request,
                                      std::chrono::milliseconds timeout) {
  auto future = std::async(std::launch::async, [&client, request]() {
    return client.complete(request);
  });
  if (future.wait_for(timeout) != std::future_status::ready) {
    // The worker thread is abandoned to its shared state; the caller
    // moves on with the timeout failure.
    static std::vector<std::shared_future<InferenceResult>> orphans;
    static std::mutex orphans_mutex;
    std::lock_guard<std::mutex> lock(orphans_mutex);
    orphans.emplace_back(future.share());
    return InferenceResult::failure("inference timed out after " +
                                    std::to_string(timeout.count()) + " ms");
  }
  return future.get();
}

}  // namespace gctr

#include "gctr/session_log.hpp"

#include <sstream>

#include "gctr/graph.hpp"
#include "json.hpp"

namespace gctr {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(MessageRole role) {
  switch (role) {
    case MessageRole::user: return "user";
    case MessageRole::assistant: return "assistant";
    case MessageRole::tool: return "tool";
  }
  return "user";
}

MessageRole parse_role(std::string_view text) {
  if (text == "user") return MessageRole::user;
  if (text == "assistant") return MessageRole::assistant;
  if (text == "tool") return MessageRole::tool;
  throw DomainError("unknown message role '" + std::string(text) + "'");
}

long long approximate_tokens(std::string_view text) {
  return (static_cast<long long>(text.size()) + 3) / 4;
}

void SessionLog::recompute_totals() {
  total_tokens = 0;
  total_cost = 0.0;
  for (const MessageRecord& message : messages) {
    total_tokens += message.tokens;
    if (message.cost) total_cost += *message.cost;
  }
}

SessionLog parse_session_log(const std::string& text,
                             const TokenCounter& counter) {
  SessionLog log;
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
      throw DomainError("session log line " + std::to_string(line_no) +
                        ": invalid JSON: " + std::string(e.what()));
    }
    if (!record.is_object()) {
      throw DomainError("session log line " + std::to_string(line_no) +
                        ": record is not an object");
    }
    MessageRecord message;
    if (!record.contains("index") || !record["index"].is_number_integer()) {
      throw DomainError("session log line " + std::to_string(line_no) +
                        ": missing integer 'index'");
    }
    message.index = record["index"].get<int>();
    int expected = log.message_count() + 1;
    if (message.index != expected) {
      throw DomainError("session log line " + std::to_string(line_no) +
                        ": index " + std::to_string(message.index) +
                        " breaks contiguous numbering (expected " +
                        std::to_string(expected) + ")");
    }
    if (!record.contains("role") || !record["role"].is_string()) {
      throw DomainError("session log line " + std::to_string(line_no) +
                        ": missing 'role'");
    }
    try {
      message.role = parse_role(record["role"].get<std::string>());
    } catch (const DomainError& e) {
      throw DomainError("session log line " + std::to_string(line_no) + ": " +
                        e.what());
    }
    message.text = record.value("text", std::string{});
    if (record.contains("tokens") && !record["tokens"].is_null()) {
      if (!record["tokens"].is_number_integer()) {
        throw DomainError("session log line " + std::to_string(line_no) +
                          ": 'tokens' must be an integer");
      }
      message.tokens = record["tokens"].get<long long>();
      if (message.tokens < 0) {
        throw DomainError("session log line " + std::to_string(line_no) +
                          ": negative token count");
      }
    } else {
      message.tokens = counter(message.text);
    }
    if (record.contains("cost") && !record["cost"].is_null()) {
      if (!record["cost"].is_number()) {
        throw DomainError("session log line " + std::to_string(line_no) +
                          ": 'cost' must be a number");
      }
      double cost = record["cost"].get<double>();
      if (cost < 0.0) {
        throw DomainError("session log line " + std::to_string(line_no) +
                          ": negative cost");
      }
      message.cost = cost;
    }
    log.messages.push_back(std::move(message));
  }
  if (log.messages.empty()) throw DomainError("session log has no messages");
  log.recompute_totals();
  return log;
}

std::string serialize_session_log(const SessionLog& log) {
  std::string out;
  for (const MessageRecord& message : log.messages) {
    ordered_json record;
    record["index"] = message.index;
    record["role"] = to_string(message.role);
    record["text"] = message.text;
    record["tokens"] = message.tokens;
    if (message.cost) record["cost"] = *message.cost;
    out += record.dump();
    out += '\n';
  }
  return out;
}

}  // namespace gctr

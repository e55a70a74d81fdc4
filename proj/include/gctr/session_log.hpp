#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gctr {

enum class MessageRole { user, assistant, tool };

std::string to_string(MessageRole role);
MessageRole parse_role(std::string_view text);  // throws DomainError

struct MessageRecord {
  int index = 0;  // 1-based, contiguous
  MessageRole role = MessageRole::user;
  std::string text;
  long long tokens = 0;
  std::optional<double> cost;  // absent -> estimated from totals downstream
};

/// Pluggable token counter; the default is a deterministic approximation
/// so the core carries no model dependency.
using TokenCounter = std::function<long long(std::string_view)>;

/// ceil(byte length / 4).
long long approximate_tokens(std::string_view text);

struct SessionLog {
  std::vector<MessageRecord> messages;
  long long total_tokens = 0;  // sum of per-message tokens
  double total_cost = 0.0;     // sum of known per-message costs

  int message_count() const { return static_cast<int>(messages.size()); }
  void recompute_totals();
};

/// Parses line-delimited records {index, role, text, tokens?, cost?}.
/// Indices must be contiguous from 1; missing `tokens` fall back to the
/// counter. Throws DomainError with the offending line number.
SessionLog parse_session_log(const std::string& text,
                             const TokenCounter& counter = approximate_tokens);

std::string serialize_session_log(const SessionLog& log);

}  // namespace gctr

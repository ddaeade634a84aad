#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace typescore::chat {

struct ContentPart {
  enum class Kind { Text, ImageUrl };
  Kind kind = Kind::Text;
  std::string value;  // text, or a URL (usually a base64 data URL)

  static ContentPart text(std::string t) { return {Kind::Text, std::move(t)}; }
  static ContentPart image(std::string url) { return {Kind::ImageUrl, std::move(url)}; }
};

struct Message {
  std::string role;
  std::vector<ContentPart> content;
};

struct ChatRequest {
  std::vector<Message> messages;
};

struct ChatReply {
  std::string content;
  int retries_used = 0;
};

// Anything that can answer a chat-completion request. Implementations must be
// safe to call from several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatReply complete(const ChatRequest& request) = 0;
};

// Replies with the text of the last user message. Handy for dry runs.
class EchoChatBackend final : public ChatBackend {
 public:
  ChatReply complete(const ChatRequest& request) override;
};

struct HttpChatOptions {
  std::string endpoint;  // full URL, e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key_env = "TYPESCORE_API_KEY";
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};  // doubles on every retry
  std::chrono::milliseconds timeout{60000};
  int max_concurrency = 4;
  double requests_per_minute = 0;  // 0 disables rate limiting
  std::optional<double> temperature = 0.0;
};

// Chat-completion client over HTTP(S).
//
// Retries 429, 5xx and transport failures with exponential backoff; 401/403
// raise AuthError at once. At most `max_concurrency` requests are in flight
// per instance and, when `requests_per_minute` is set, starts are spaced by a
// token bucket.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpChatOptions options);
  ~HttpChatBackend() override;

  ChatReply complete(const ChatRequest& request) override;
  const HttpChatOptions& options() const noexcept { return options_; }

 private:
  void wait_for_rate_slot();

  HttpChatOptions options_;
  std::string base_url_;
  std::string path_;
  std::counting_semaphore<> slots_;
  std::mutex bucket_mutex_;
  double tokens_;
  std::chrono::steady_clock::time_point last_refill_;
};

nlohmann::ordered_json build_request_body(const ChatRequest& request, std::string_view model,
                                          std::optional<double> temperature);

// Extracts choices[0].message.content; throws EmptyResponse when absent/empty.
std::string parse_reply_content(std::string_view body);

std::string base64_encode(std::string_view bytes);
std::string data_url(std::string_view bytes, std::string_view media_type);

}  // namespace typescore::chat

#include "typescore/chat.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "typescore/errors.hpp"

namespace typescore::chat {
namespace {

using Json = nlohmann::ordered_json;

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw PreconditionError("endpoint must be an absolute http(s) URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(int status) { return status == 429 || status == 408 || status >= 500; }

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

ChatReply EchoChatBackend::complete(const ChatRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role != "user") continue;
    std::string text;
    for (const auto& part : it->content) {
      if (part.kind == ContentPart::Kind::Text) text += part.value;
    }
    return {text, 0};
  }
  return {};
}

Json build_request_body(const ChatRequest& request, std::string_view model,
                        std::optional<double> temperature) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    Json content = Json::array();
    for (const auto& part : m.content) {
      if (part.kind == ContentPart::Kind::Text) {
        content.push_back({{"type", "text"}, {"text", part.value}});
      } else {
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", part.value}}}});
      }
    }
    messages.push_back({{"role", m.role}, {"content", std::move(content)}});
  }
  Json body = Json::object();
  body["model"] = model;
  body["messages"] = std::move(messages);
  if (temperature) body["temperature"] = *temperature;
  return body;
}

std::string parse_reply_content(std::string_view body) {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error&) {
    throw EmptyResponse("chat endpoint returned a body that is not JSON");
  }
  const Json* content = nullptr;
  if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
    const auto& choice = doc["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) {
      content = &choice["message"]["content"];
    }
  }
  if (content == nullptr || !content->is_string() || content->get<std::string>().empty()) {
    throw EmptyResponse("chat endpoint returned no message content");
  }
  return content->get<std::string>();
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string data_url(std::string_view bytes, std::string_view media_type) {
  return "data:" + std::string(media_type) + ";base64," + base64_encode(bytes);
}

HttpChatBackend::HttpChatBackend(HttpChatOptions options)
    : options_(std::move(options)),
      slots_(std::max(1, options_.max_concurrency)),
      tokens_(1.0),
      last_refill_(std::chrono::steady_clock::now()) {
  if (options_.endpoint.empty()) throw PreconditionError("chat backend needs an endpoint");
  if (options_.model.empty()) throw PreconditionError("chat backend needs a model name");
  if (options_.max_concurrency < 1) throw PreconditionError("max_concurrency must be >= 1");
  if (options_.max_retries < 0) throw PreconditionError("max_retries must be >= 0");
  auto parts = split_url(options_.endpoint);
  base_url_ = std::move(parts.base);
  path_ = std::move(parts.path);
}

HttpChatBackend::~HttpChatBackend() = default;

void HttpChatBackend::wait_for_rate_slot() {
  const double rpm = options_.requests_per_minute;
  if (rpm <= 0) return;
  // One-token bucket: starts are spaced evenly, no bursts.
  const double capacity = 1.0;
  const double per_second = rpm / 60.0;
  while (true) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(bucket_mutex_);
      const auto now = std::chrono::steady_clock::now();
      const std::chrono::duration<double> elapsed = now - last_refill_;
      tokens_ = std::min(capacity, tokens_ + elapsed.count() * per_second);
      last_refill_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / per_second);
    }
    std::this_thread::sleep_for(wait);
  }
}

ChatReply HttpChatBackend::complete(const ChatRequest& request) {
  const char* key = std::getenv(options_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw AuthError("API key environment variable " + options_.api_key_env + " is not set");
  }
  const std::string body = build_request_body(request, options_.model, options_.temperature).dump();

  httplib::Client client(base_url_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
    wait_for_rate_slot();

    httplib::Result result = [&] {
      SlotGuard slot(slots_);
      return client.Post(path_, headers, body, "application/json");
    }();

    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status == 401 || status == 403) {
      throw AuthError("chat endpoint rejected the API key (HTTP " + std::to_string(status) + ")");
    }
    if (retryable(status)) {
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    if (status < 200 || status >= 300) {
      throw BackendError("chat endpoint returned HTTP " + std::to_string(status) + ": " +
                         result->body.substr(0, 200));
    }
    return {parse_reply_content(result->body), attempt};
  }
  throw TransportError("chat request failed after " + std::to_string(options_.max_retries) +
                       " retries: " + last_error);
}

}  // namespace typescore::chat

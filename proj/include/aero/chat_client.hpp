#pragma once

// Chat-completions wire client: bounded retries with exponential backoff,
// an in-flight request cap, and optional raw request/response audit logging.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "aero/core.hpp"
#include "aero/errors.hpp"

namespace aero {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  int n = 1;
  int max_tokens = 0;  // 0 = omit from the wire payload
};

struct ChatResponse {
  std::vector<std::string> texts;  // choices[i].message.content
};

class ChatClient {
public:
  ChatClient(const EndpointSettings& settings, const RetryPolicy& retry)
      : settings_(settings), retry_(retry), in_flight_slots_(settings.max_in_flight) {
    split_url(settings.base_url);
    if (const char* key = std::getenv(settings.api_key_env.c_str()); key && *key)
      api_key_ = key;
    if (!settings_.audit_log.empty())
      audit_.open(settings_.audit_log, std::ios::app);
  }

  /// Issues one chat-completions call, retrying transient failures with
  /// exponential backoff. Returns all choice texts; the server must supply
  /// exactly the requested sample count.
  ChatResponse complete(const ChatRequest& request) {
    nlohmann::json payload{{"model", request.model},
                           {"temperature", request.temperature},
                           {"n", request.n}};
    if (request.max_tokens > 0) payload["max_tokens"] = request.max_tokens;
    auto& messages = payload["messages"] = nlohmann::json::array();
    for (const auto& msg : request.messages)
      messages.push_back({{"role", msg.role}, {"content", msg.content}});
    std::string body = payload.dump();

    std::string last_failure = "no attempt made";
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
      if (attempt > 1) back_off(attempt - 1);
      audit("request", body, attempt);
      auto result = post(body);
      if (!result) {
        last_failure = "connection failure: " + httplib::to_string(result.error());
        audit("transport-error", last_failure, attempt);
        continue;
      }
      audit("response", result->body, attempt, result->status);
      if (result->status == 200) {
        ChatResponse response;
        if (parse_choices(result->body, response)) {
          if (static_cast<int>(response.texts.size()) != request.n)
            throw transport_error("chat endpoint returned " +
                                  std::to_string(response.texts.size()) + " choices, expected " +
                                  std::to_string(request.n));
          return response;
        }
        last_failure = "unparseable completion envelope";
        continue;
      }
      if (!retryable(result->status))
        throw transport_error("chat endpoint rejected request: HTTP " +
                              std::to_string(result->status) + " " + result->body);
      last_failure = "HTTP " + std::to_string(result->status);
    }
    throw transport_error("chat endpoint failed after " + std::to_string(retry_.max_attempts) +
                          " attempts; last failure: " + last_failure);
  }

  const std::string& model() const { return settings_.model; }

private:
  static bool retryable(int status) {
    return status == 408 || status == 429 || status >= 500;
  }

  void back_off(int retries_so_far) {
    double delay = retry_.base_delay_ms;
    for (int i = 1; i < retries_so_far; ++i) delay *= retry_.multiplier;
    delay = std::min(delay, static_cast<double>(retry_.max_delay_ms));
    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(delay)));
  }

  httplib::Result post(const std::string& body) {
    in_flight_slots_.acquire();
    struct Release {
      std::counting_semaphore<4096>& slots;
      ~Release() { slots.release(); }
    } release{in_flight_slots_};

    httplib::Client client(host_);
    client.set_connection_timeout(std::chrono::milliseconds(settings_.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(settings_.timeout_ms));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    return client.Post(path_ + "/chat/completions", headers, body, "application/json");
  }

  static bool parse_choices(const std::string& body, ChatResponse& out) {
    auto parsed = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_object() || !parsed.contains("choices") || !parsed["choices"].is_array())
      return false;
    std::vector<std::string> texts;
    for (const auto& choice : parsed["choices"]) {
      if (!choice.contains("message") || !choice["message"].contains("content") ||
          !choice["message"]["content"].is_string())
        return false;
      texts.push_back(choice["message"]["content"].get<std::string>());
    }
    out.texts = std::move(texts);
    return true;
  }

  void split_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    std::size_t authority_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_begin = base_url.find('/', authority_begin);
    if (path_begin == std::string::npos) {
      host_ = base_url;
      path_.clear();
    } else {
      host_ = base_url.substr(0, path_begin);
      path_ = base_url.substr(path_begin);
      while (!path_.empty() && path_.back() == '/') path_.pop_back();
    }
  }

  void audit(const char* event, const std::string& body, int attempt, int status = 0) {
    if (!audit_.is_open()) return;
    nlohmann::json line{{"event", event}, {"attempt", attempt}, {"body", body}};
    if (status != 0) line["status"] = status;
    std::lock_guard lock(audit_mutex_);
    audit_ << line.dump() << '\n';
    audit_.flush();
  }

  EndpointSettings settings_;
  RetryPolicy retry_;
  std::string host_;
  std::string path_;
  std::string api_key_;
  std::counting_semaphore<4096> in_flight_slots_;
  std::ofstream audit_;
  std::mutex audit_mutex_;
};

}  // namespace aero

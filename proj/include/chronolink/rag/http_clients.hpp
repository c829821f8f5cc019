// Copyright 2026 The Chronolink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// OpenAI-style HTTP clients for completions and embeddings.

#ifndef CHRONOLINK_RAG_HTTP_CLIENTS_HPP_
#define CHRONOLINK_RAG_HTTP_CLIENTS_HPP_

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <chrono>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/rag/clients.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/strings.hpp"
#include "httplib.h"

namespace chronolink {

struct ClientConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/completions
  std::string model;
  double temperature = kAnswerTemperature;
  int max_new_tokens = kAnswerMaxTokens;
  int timeout_ms = 30000;
  int retries = 2;
  std::string api_key_env = "OPENAI_API_KEY";

  absl::Status Validate() const {
    if (endpoint.empty()) return absl::InvalidArgumentError("empty endpoint");
    if (timeout_ms <= 0) {
      return absl::InvalidArgumentError("timeout_ms must be positive");
    }
    if (retries < 0) return absl::InvalidArgumentError("retries is negative");
    if (max_new_tokens <= 0) {
      return absl::InvalidArgumentError("max_new_tokens must be positive");
    }
    return absl::OkStatus();
  }
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline absl::StatusOr<ParsedUrl> ParseUrl(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    return absl::InvalidArgumentError(StrCat("url without scheme: ", url));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    return absl::InvalidArgumentError(StrCat("unsupported scheme ", scheme));
  }
  const std::size_t slash = url.find('/', scheme_end + 3);
  if (slash == std::string_view::npos) {
    return ParsedUrl{std::string(url), "/"};
  }
  if (slash == scheme_end + 3) {
    return absl::InvalidArgumentError(StrCat("url without host: ", url));
  }
  return ParsedUrl{std::string(url.substr(0, slash)),
                   std::string(url.substr(slash))};
}

namespace internal {

// POSTs JSON; retries transport errors, 429 and 5xx.
inline absl::StatusOr<Json> PostJson(const ClientConfig& config,
                                     const Json& body) {
  RETURN_IF_ERROR(config.Validate());
  ASSIGN_OR_RETURN(ParsedUrl url, ParseUrl(config.endpoint));
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(config.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str())) {
      headers.emplace("Authorization", StrCat("Bearer ", key));
    }
  }
  const std::string payload = body.dump();
  absl::Status last = absl::UnknownError("no attempt made");
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
    }
    httplib::Result res =
        client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last = absl::UnavailableError(StrCat(
          "request to ", config.endpoint, " failed: ",
          httplib::to_string(res.error())));
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last = absl::UnavailableError(
          StrCat("HTTP ", res->status, " from ", config.endpoint));
      continue;
    }
    if (res->status != 200) {
      return absl::FailedPreconditionError(
          StrCat("HTTP ", res->status, " from ", config.endpoint, ": ",
                 res->body.substr(0, 200)));
    }
    Json parsed = Json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
      return absl::DataLossError(
          StrCat("malformed JSON from ", config.endpoint));
    }
    return parsed;
  }
  return last;
}

}  // namespace internal

// Body {"model","prompt","temperature","max_tokens"}; reads choices[0].text.
class HttpGenerationClient : public GenerationClient {
 public:
  explicit HttpGenerationClient(ClientConfig config)
      : config_(std::move(config)) {}

  absl::StatusOr<std::string> Generate(
      const GenerationRequest& request) const override {
    const Json body = {{"model", config_.model},
                       {"prompt", request.prompt},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_new_tokens}};
    ASSIGN_OR_RETURN(Json reply, internal::PostJson(config_, body));
    const Json* text = nullptr;
    if (reply.contains("choices") && reply["choices"].is_array() &&
        !reply["choices"].empty() && reply["choices"][0].contains("text")) {
      text = &reply["choices"][0]["text"];
    }
    if (text == nullptr || !text->is_string()) {
      return absl::DataLossError("completion reply lacks choices[0].text");
    }
    return text->get<std::string>();
  }

  const ClientConfig& config() const { return config_; }

 private:
  ClientConfig config_;
};

// Body {"model","input"}; reads data[0].embedding.
class HttpEmbeddingClient : public EmbeddingClient {
 public:
  explicit HttpEmbeddingClient(ClientConfig config)
      : config_(std::move(config)) {}

  absl::StatusOr<EmbeddingVector> Embed(std::string_view text) const override {
    const Json body = {{"model", config_.model}, {"input", std::string(text)}};
    ASSIGN_OR_RETURN(Json reply, internal::PostJson(config_, body));
    if (!reply.contains("data") || !reply["data"].is_array() ||
        reply["data"].empty() || !reply["data"][0].contains("embedding") ||
        !reply["data"][0]["embedding"].is_array()) {
      return absl::DataLossError("embedding reply lacks data[0].embedding");
    }
    std::vector<double> values;
    for (const Json& x : reply["data"][0]["embedding"]) {
      if (!x.is_number()) {
        return absl::DataLossError("non-numeric embedding component");
      }
      values.push_back(x.get<double>());
    }
    EmbeddingVector v(std::move(values));
    if (v.dim() == 0 || !v.AllFinite()) {
      return absl::DataLossError("empty or non-finite embedding");
    }
    return v;
  }

 private:
  ClientConfig config_;
};

}  // namespace chronolink

#endif  // CHRONOLINK_RAG_HTTP_CLIENTS_HPP_

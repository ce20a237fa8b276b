#include "eipl/http_client.hpp"

#include <cstdlib>

#include <httplib.h>

#include "eipl/errors.hpp"

namespace eipl {

ChatCompletionsClient::ChatCompletionsClient(HttpClientConfig config) : config_(std::move(config)) {
  const std::string& url = config_.base_url;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgumentError("base_url must include a scheme: " + url);
  const std::size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

Json ChatCompletionsClient::request_body(const ChatRequest& request) {
  return Json{{"model", request.model_id},
              {"messages", Json::array({Json{{"role", "user"}, {"content", request.prompt}}})},
              {"temperature", request.temperature},
              {"n", 1}};
}

std::string ChatCompletionsClient::parse_response(const std::string& body) {
  const Json doc = Json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw TransportError("completion response is not JSON");
  try {
    const Json& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const Json::exception& e) {
    throw TransportError(std::string("unexpected completion response shape: ") + e.what());
  }
}

std::string ChatCompletionsClient::complete(const ChatRequest& request) {
  httplib::Client http(scheme_host_port_);
  http.set_connection_timeout(std::chrono::seconds(10));
  http.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto result = http.Post(path_prefix_ + "/chat/completions", headers, request_body(request).dump(),
                          "application/json");
  if (!result) {
    throw RetryableTransportError("HTTP request failed: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 429) throw RateLimitError("HTTP 429 from completion endpoint");
  if (status >= 500) throw RetryableTransportError("HTTP " + std::to_string(status) + " from completion endpoint");
  if (status != 200) {
    throw TransportError("HTTP " + std::to_string(status) + " from completion endpoint: " + result->body);
  }
  return parse_response(result->body);
}

std::string api_key_from_environment() {
  const char* key = std::getenv("EIPL_API_KEY");
  return key ? std::string(key) : std::string();
}

}  // namespace eipl

#pragma once

#include <chrono>
#include <string>

#include "eipl/codegen.hpp"

namespace eipl {

struct HttpClientConfig {
  /// e.g. "https://api.openai.com/v1"; "/chat/completions" is appended.
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::seconds timeout{120};
};

/// Chat-completions client speaking the de-facto JSON wire format:
/// POST {model, messages:[{role, content}], temperature, n}. Stateless
/// between calls, so safe to share between threads.
class ChatCompletionsClient final : public GenerationClient {
 public:
  explicit ChatCompletionsClient(HttpClientConfig config);

  std::string complete(const ChatRequest& request) override;

  /// Request body sent for `request` (n is always 1).
  static Json request_body(const ChatRequest& request);
  /// Content of choices[0].message.content; throws TransportError when the
  /// document has no such member.
  static std::string parse_response(const std::string& body);

 private:
  HttpClientConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

/// Reads the API key from EIPL_API_KEY (empty when unset).
std::string api_key_from_environment();

}  // namespace eipl

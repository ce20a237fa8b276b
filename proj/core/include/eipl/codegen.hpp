#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eipl/domain.hpp"

namespace eipl {

class CompletionCache;

// ---------------------------------------------------------------------------
// Prompt

struct PromptTemplate {
  std::string version;
  /// Placeholders: {{language}} {{function_name}} {{signature}}
  /// {{parameters}} {{assumptions}}.
  std::string text;
};

/// The versioned template shipped with the library.
const PromptTemplate& default_prompt_template();

/// Prompt asking for a single function named `function_name` with the
/// question's parameters and assumptions. The question's code and reference
/// solution are never part of the prompt.
std::string build_prompt(const Question& question, std::string_view function_name,
                         const PromptTemplate& tmpl = default_prompt_template());

// ---------------------------------------------------------------------------
// Clients

/// One chat-completion call. `question_id`, `function_name` and
/// `seed_index` are routing metadata for offline clients and are not sent
/// over the wire.
struct ChatRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.0;
  int seed_index = 0;
  std::string question_id;
  std::string function_name;
};

/// Source of completions. Implementations must be safe to call from several
/// threads. Failures are reported by throwing RetryableTransportError,
/// RateLimitError, or TransportError (not retried).
class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// Offline client answering from scripted completions keyed by function
/// name. Variant `seed_index` receives completion `seed_index % size`, so a
/// single scripted completion serves every variant.
class ScriptedClient final : public GenerationClient {
 public:
  using Script = std::map<std::string, std::vector<std::string>, std::less<>>;

  explicit ScriptedClient(Script script);

  std::string complete(const ChatRequest& request) override;

  /// Total number of complete() calls served.
  std::size_t calls() const { return calls_.load(); }

 private:
  Script script_;
  std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Variant generation

struct GenerationRequest {
  std::string question_id;
  std::string function_name;
  std::string prompt;
  std::string prompt_version;
  int n_variants = 1;
  double temperature = 0.0;
  std::string model_id;
  /// Ordinal of the first variant; variant i uses seed_index + i.
  int seed_index = 0;
};

struct GeneratedVariant {
  int index = 0;
  std::string raw_output;
  /// Extracted function source; empty when extraction failed.
  std::string code;
  bool cache_hit = false;
  /// Why extraction failed, empty on success.
  std::string extraction_error;

  friend bool operator==(const GeneratedVariant&, const GeneratedVariant&) = default;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_delay{500};
  double backoff_factor = 2.0;

  /// Delay before retry number `retry` (1-based): 0.5s, 1s, 2s, ...
  std::chrono::milliseconds delay_before(int retry) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Calls `fn` under `policy`, sleeping between attempts. Exhausted rate
/// limits become QuotaError; other retryable failures are rethrown as
/// TransportError.
std::string call_with_retry(const RetryPolicy& policy, const Sleeper& sleep,
                            const std::function<std::string()>& fn);

struct GenerationOptions {
  RetryPolicy retry;
  /// Defaults to std::this_thread::sleep_for.
  Sleeper sleep;
};

/// Produces exactly request.n_variants variants in index order. Cached
/// completions are reused; new completions are appended to `cache` when it
/// is not null. Throws TransportError, QuotaError, EmptyCompletionError.
std::vector<GeneratedVariant> generate_variants(const GenerationRequest& request, GenerationClient& client,
                                                CompletionCache* cache, const GenerationOptions& options = {});

// ---------------------------------------------------------------------------
// Extraction

/// Source of the first fenced code block of `raw_output` (or the whole text
/// when there is no fence), with leading blank lines and trailing whitespace
/// removed. Throws NoCodeError when no `def` is present and NameMismatchError
/// when no defined function is named `function_name`.
std::string extract_code(std::string_view raw_output, std::string_view function_name);

/// Names of all `def` statements in `code`, in order of appearance.
std::vector<std::string> defined_functions(std::string_view code);

void to_json(Json& j, const GeneratedVariant& value);
void from_json(const Json& j, GeneratedVariant& value);

}  // namespace eipl

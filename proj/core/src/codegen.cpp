#include "eipl/codegen.hpp"

#include <cmath>
#include <thread>

#include "eipl/completion_cache.hpp"
#include "eipl/errors.hpp"
#include "eipl/hashing.hpp"
#include "embedded_data.hpp"

namespace eipl {

namespace {

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_blank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

std::string_view skip_blanks(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool consume_word(std::string_view& s, std::string_view word) {
  if (s.substr(0, word.size()) != word) return false;
  std::string_view rest = s.substr(word.size());
  if (rest.empty() || (rest.front() != ' ' && rest.front() != '\t')) return false;
  s = skip_blanks(rest);
  return true;
}

// Leading blank lines and trailing whitespace removed; indentation of the
// first code line is preserved.
std::string tidy_block(std::string_view block) {
  while (!block.empty()) {
    const std::size_t eol = block.find('\n');
    const std::string_view line = block.substr(0, eol);
    if (!is_blank(line)) break;
    block.remove_prefix(eol == std::string_view::npos ? block.size() : eol + 1);
  }
  const std::size_t last = block.find_last_not_of(" \t\r\n\f\v");
  return last == std::string_view::npos ? std::string() : std::string(block.substr(0, last + 1));
}

}  // namespace

// ---------------------------------------------------------------------------

const PromptTemplate& default_prompt_template() {
  static const PromptTemplate tmpl{std::string(embedded::kPromptVersion), std::string(embedded::kPromptTemplateV1)};
  return tmpl;
}

std::string build_prompt(const Question& question, std::string_view function_name, const PromptTemplate& tmpl) {
  std::string signature;
  std::string parameters;
  for (const Parameter& p : question.params) {
    if (!signature.empty()) signature += ", ";
    signature += p.name;
    if (!p.type_annotation.empty()) signature += ": " + p.type_annotation;
    parameters += "- " + p.name;
    if (!p.type_annotation.empty()) parameters += ": " + p.type_annotation;
    parameters += '\n';
  }
  if (parameters.empty()) parameters = "(none)\n";
  parameters.pop_back();

  std::string prompt = tmpl.text;
  replace_all(prompt, "{{language}}", question.subject_language);
  replace_all(prompt, "{{function_name}}", function_name);
  replace_all(prompt, "{{signature}}", signature);
  replace_all(prompt, "{{parameters}}", parameters);
  replace_all(prompt, "{{assumptions}}", question.assumptions.empty() ? "None." : question.assumptions);
  return prompt;
}

// ---------------------------------------------------------------------------

ScriptedClient::ScriptedClient(Script script) : script_(std::move(script)) {}

std::string ScriptedClient::complete(const ChatRequest& request) {
  ++calls_;
  auto it = script_.find(request.function_name);
  if (it == script_.end() || it->second.empty()) {
    throw TransportError("scripted client has no completion for '" + request.function_name + "'");
  }
  const auto& completions = it->second;
  return completions[static_cast<std::size_t>(request.seed_index) % completions.size()];
}

// ---------------------------------------------------------------------------

std::chrono::milliseconds RetryPolicy::delay_before(int retry) const {
  const double scale = std::pow(backoff_factor, std::max(0, retry - 1));
  return std::chrono::milliseconds(static_cast<long long>(std::llround(initial_delay.count() * scale)));
}

std::string call_with_retry(const RetryPolicy& policy, const Sleeper& sleep, const std::function<std::string()>& fn) {
  const int attempts = std::max(1, policy.max_attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const RateLimitError& e) {
      if (attempt >= attempts) {
        throw QuotaError("rate limit persisted after " + std::to_string(attempts) + " attempts: " + e.what());
      }
    } catch (const RetryableTransportError& e) {
      if (attempt >= attempts) {
        throw TransportError("request failed after " + std::to_string(attempts) + " attempts: " + e.what());
      }
    }
    const auto delay = policy.delay_before(attempt);
    if (sleep) {
      sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
  }
}

std::vector<GeneratedVariant> generate_variants(const GenerationRequest& request, GenerationClient& client,
                                                CompletionCache* cache, const GenerationOptions& options) {
  if (request.n_variants < 1) throw InvalidArgumentError("n_variants must be >= 1");
  if (!std::isfinite(request.temperature) || request.temperature < 0) {
    throw InvalidArgumentError("temperature must be finite and >= 0");
  }
  const std::string prompt_hash = sha256_hex(request.prompt);

  std::vector<GeneratedVariant> variants;
  variants.reserve(static_cast<std::size_t>(request.n_variants));
  for (int i = 0; i < request.n_variants; ++i) {
    const int seed = request.seed_index + i;
    const CacheKey key{request.model_id, prompt_hash, request.temperature, seed, request.prompt_version};

    GeneratedVariant variant;
    variant.index = i;
    if (auto hit = cache ? cache->find(key) : std::nullopt) {
      variant.raw_output = std::move(*hit);
      variant.cache_hit = true;
    } else {
      const ChatRequest chat{request.model_id, request.prompt, request.temperature, seed, request.question_id,
                             request.function_name};
      variant.raw_output = call_with_retry(options.retry, options.sleep, [&] { return client.complete(chat); });
      if (is_blank(variant.raw_output)) {
        throw EmptyCompletionError("blank completion for '" + request.function_name + "' variant " +
                                   std::to_string(i));
      }
      if (cache) cache->put(key, variant.raw_output);
    }

    try {
      variant.code = extract_code(variant.raw_output, request.function_name);
    } catch (const ExtractionError& e) {
      variant.extraction_error = e.what();
    }
    variants.push_back(std::move(variant));
  }
  return variants;
}

// ---------------------------------------------------------------------------

std::vector<std::string> defined_functions(std::string_view code) {
  std::vector<std::string> names;
  while (!code.empty()) {
    const std::size_t eol = code.find('\n');
    std::string_view line = skip_blanks(code.substr(0, eol));
    code.remove_prefix(eol == std::string_view::npos ? code.size() : eol + 1);

    consume_word(line, "async");
    if (!consume_word(line, "def")) continue;
    if (line.empty() || !is_ident_start(line.front())) continue;
    std::size_t len = 1;
    while (len < line.size() && is_ident_char(line[len])) ++len;
    if (skip_blanks(line.substr(len)).substr(0, 1) != "(") continue;
    names.emplace_back(line.substr(0, len));
  }
  return names;
}

std::string extract_code(std::string_view raw_output, std::string_view function_name) {
  std::string_view body = raw_output;
  if (const std::size_t open = raw_output.find("```"); open != std::string_view::npos) {
    const std::size_t eol = raw_output.find('\n', open);
    if (eol == std::string_view::npos) {
      body = {};
    } else {
      body = raw_output.substr(eol + 1);
      std::size_t close = body.find("\n```");
      if (body.substr(0, 3) == "```") close = 0;
      if (close != std::string_view::npos) body = body.substr(0, close);
    }
  }
  std::string code = tidy_block(body);
  const auto names = defined_functions(code);
  if (names.empty()) throw NoCodeError("completion contains no function definition");
  for (const auto& name : names) {
    if (name == function_name) return code;
  }
  throw NameMismatchError("completion defines '" + names.front() + "' but '" + std::string(function_name) +
                          "' was requested");
}

void to_json(Json& j, const GeneratedVariant& value) {
  j = Json{{"index", value.index},
           {"raw_output", value.raw_output},
           {"code", value.code},
           {"cache_hit", value.cache_hit},
           {"extraction_error", value.extraction_error}};
}

void from_json(const Json& j, GeneratedVariant& value) {
  value.index = j.at("index").get<int>();
  value.raw_output = j.at("raw_output").get<std::string>();
  value.code = j.at("code").get<std::string>();
  value.cache_hit = j.value("cache_hit", false);
  value.extraction_error = j.value("extraction_error", std::string());
}

}  // namespace eipl

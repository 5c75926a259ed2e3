#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/facts.hpp"
#include "vlaforge/lexicon.hpp"
#include "vlaforge/scene.hpp"
#include "vlaforge/template_engine.hpp"

namespace vlaforge {

// ---------------------------------------------------------------- prompts

struct PromptSettings {
  std::string rubric;
  std::map<QACategory, std::string> task_requirements;
  std::size_t token_budget = 2048;  // whitespace-separated words of user_text

  // {"rubric": str, "task_requirements": {category: str}, "token_budget"?: int}
  static PromptSettings from_json(const nlohmann::json& j);
  static PromptSettings load(const std::filesystem::path& path);
};

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  std::vector<std::string> media_refs;  // W frames x V views, frame-major
  QACategory task = QACategory::kEnvironment;
  std::string window_key;  // "<scene>/wNNN/<task>"

  nlohmann::json to_json() const;
  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

std::size_t count_tokens(std::string_view text);

// Facts are serialized sorted by fact_id. When user_text would exceed the
// budget, far-band object fact groups are dropped, farthest object first.
// Throws BudgetError when the remaining content still does not fit.
PromptBundle build_prompt(const SceneWindow& window, const std::vector<GroundedFact>& facts,
                          const std::vector<GroundedCaption>& captions, const PriorLibrary& priors,
                          QACategory task, const PromptSettings& settings);

// -------------------------------------------------------------- transport

struct HttpRequest {
  std::string path;
  std::string body;
  std::map<std::string, std::string> headers;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

// One network attempt. Implementations throw TransportError when no
// response was received at all.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

class HttpTransport : public Transport {
 public:
  HttpTransport(std::string base_url, double timeout_s);
  HttpResponse post(const HttpRequest& request) override;

 private:
  std::string base_url_;
  double timeout_s_;
};

// Replays a fixed list of responses; an entry without a status simulates a
// connection failure. Records every request it sees.
class ScriptedTransport : public Transport {
 public:
  struct Step {
    std::optional<HttpResponse> response;
  };
  explicit ScriptedTransport(std::vector<Step> steps) : steps_(std::move(steps)) {}
  static ScriptedTransport repeating(HttpResponse response, std::size_t times);

  HttpResponse post(const HttpRequest& request) override;
  const std::vector<HttpRequest>& requests() const { return requests_; }

 private:
  std::vector<Step> steps_;
  std::size_t next_ = 0;
  std::vector<HttpRequest> requests_;
  std::mutex mu_;
};

HttpResponse chat_response(const std::string& content, int status = 200);

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model = "qwen2.5-vl";
  std::string token_env = "VLAFORGE_API_TOKEN";  // name of the env var, never the token
  double timeout_s = 60.0;
  int max_attempts = 4;
  std::size_t max_inflight = 4;
  double backoff_initial_s = 1.0;
  double backoff_max_s = 30.0;
  double temperature = 0.0;

  void validate() const;
  static EndpointConfig from_json(const nlohmann::json& block);
};

using Sleeper = std::function<void(double seconds)>;
Sleeper real_sleeper();

struct RawCompletion {
  std::string text;
  nlohmann::json usage = nlohmann::json::object();
  int attempts = 0;
  std::string request_hash;
};

// Chat-completions request body for a bundle.
nlohmann::json request_body(const PromptBundle& bundle, const EndpointConfig& endpoint);
std::string request_hash(const nlohmann::json& body);

// Append-only JSONL log of endpoint traffic:
// {window_key, request_hash, attempts, status, text}.
class AuditLog {
 public:
  struct Entry {
    std::string window_key;
    std::string request_hash;
    int attempts = 0;
    std::string status;  // "ok" or an error kind name
    std::string text;
  };

  explicit AuditLog(std::filesystem::path path);
  void append(const Entry& entry);
  const std::filesystem::path& path() const { return path_; }

  static nlohmann::json entry_to_json(const Entry& entry);
  // Last successful entry for (window_key, request_hash). Throws
  // MissingInputError naming the log when it is absent or has no such entry.
  static Entry replay(const std::filesystem::path& path, const std::string& window_key,
                      const std::string& hash);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mu_;
};

// Retries 429, 5xx and connection failures with exponential backoff (a
// Retry-After header raises the delay), at most max_attempts network calls.
// Throws AuthError (401/403), RateLimitError, TransportError,
// MalformedResponseError.
RawCompletion request_completion(const PromptBundle& bundle, const EndpointConfig& endpoint,
                                 Transport& transport, AuditLog* audit = nullptr,
                                 const Sleeper& sleep = real_sleeper());

// Offline counterpart: answers from the audit log only.
RawCompletion replay_completion(const PromptBundle& bundle, const EndpointConfig& endpoint,
                                const std::filesystem::path& audit_path);

// ------------------------------------------------------------- grounding

enum class Verdict { kPass, kRepairable, kReject };
std::string_view to_string(Verdict v);

struct MentionCheck {
  std::string lexeme;
  ObjectCategory category = ObjectCategory::kOther;
  std::optional<std::string> resolved_fact_id;
  std::size_t sentence = 0;
};

struct CountCheck {
  ObjectCategory category = ObjectCategory::kOther;
  int stated = 0;
  std::int64_t truth = 0;
  bool ok = false;
  std::size_t sentence = 0;
};

struct SideCheck {
  std::string object_id;  // empty when no object of the category exists
  ObjectCategory category = ObjectCategory::kOther;
  Side stated_side = Side::kFront;
  std::optional<Side> truth_side;
  bool ok = false;
  std::size_t sentence = 0;
};

struct ValidationReport {
  std::vector<std::string> sentences;
  std::vector<MentionCheck> mentions;
  std::vector<CountCheck> count_checks;
  std::vector<SideCheck> side_checks;
  std::vector<std::size_t> failing_sentences;
  Verdict verdict = Verdict::kReject;

  nlohmann::json to_json() const;
};

// Splits after '.', '!' or '?' followed by whitespace or the end of text.
std::vector<std::string> split_sentences(std::string_view text);

// Sentence-local lexicon matching. A failure is removable unless its
// sentence carries a decision word; text that is empty or fails in every
// sentence is rejected.
ValidationReport validate_grounding(std::string_view completion_text,
                                    const std::vector<GroundedFact>& facts, const Lexicon& lexicon);

enum class RejectPolicy { kDrop, kFallback };
std::optional<RejectPolicy> parse_reject_policy(std::string_view s);

struct FinalAnnotation {
  std::optional<GroundedCaption> caption;  // absent when dropped
  Provenance validation = Provenance::kTemplate;
  Verdict verdict = Verdict::kReject;  // verdict of the original completion
  bool dropped() const { return !caption.has_value(); }
};

// At most one repair round: failing sentences are removed and the rest
// re-validated.
FinalAnnotation repair_or_finalize(const std::string& completion, const ValidationReport& report,
                                   const std::vector<GroundedFact>& facts, const Lexicon& lexicon,
                                   const GroundedCaption& template_caption, RejectPolicy policy);

}  // namespace vlaforge

#include "vlaforge/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "vlaforge/errors.hpp"
#include "vlaforge/util.hpp"

namespace vlaforge {

// ---------------------------------------------------------------- prompts

PromptSettings PromptSettings::from_json(const nlohmann::json& j) {
  PromptSettings s;
  try {
    s.rubric = j.at("rubric").get<std::string>();
    const auto requirements = j.value("task_requirements", nlohmann::json::object());
    for (const auto& [name, text] : requirements.items()) {
      const auto cat = parse_qa_category(name);
      if (!cat) throw ConfigError("rubric: unknown task '" + name + "'");
      s.task_requirements[*cat] = text.get<std::string>();
    }
    s.token_budget = j.value("token_budget", s.token_budget);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("rubric: ") + e.what());
  }
  if (s.token_budget == 0) throw ConfigError("[orchestrator] token_budget must be positive");
  return s;
}

PromptSettings PromptSettings::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open rubric '" + path.string() + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

nlohmann::json PromptBundle::to_json() const {
  return {{"window_key", window_key},
          {"task", std::string(to_string(task))},
          {"system_text", system_text},
          {"user_text", user_text},
          {"media_refs", media_refs}};
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

namespace {

std::string compose_user_text(const std::string& requirement,
                              const std::vector<const GroundedFact*>& facts,
                              const std::vector<GroundedCaption>& captions) {
  std::ostringstream out;
  out << "Task: " << requirement << "\n";
  out << "Ground-truth facts (id | predicate | subjects | value):\n";
  for (const auto* f : facts) out << "- " << serialize_fact(*f) << "\n";
  if (!captions.empty()) {
    out << "Template captions:\n";
    for (const auto& c : captions) out << "- [" << to_string(c.category) << "] " << c.text << "\n";
  }
  return out.str();
}

}  // namespace

PromptBundle build_prompt(const SceneWindow& window, const std::vector<GroundedFact>& facts,
                          const std::vector<GroundedCaption>& captions, const PriorLibrary& priors,
                          QACategory task, const PromptSettings& settings) {
  PromptBundle bundle;
  bundle.task = task;
  bundle.window_key = window.key() + "/" + std::string(to_string(task));
  for (const auto& frame : window.frames) {
    bundle.media_refs.insert(bundle.media_refs.end(), frame.media_refs.begin(),
                             frame.media_refs.end());
  }

  bundle.system_text = settings.rubric;
  const auto rows = priors.matching(prior_triggers(facts));
  if (!rows.empty()) {
    bundle.system_text += "\n\nHuman priors:";
    for (const auto* r : rows) bundle.system_text += "\n- " + r->constraint_text;
  }

  std::vector<const GroundedFact*> sorted;
  for (const auto& f : facts) sorted.push_back(&f);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto* a, const auto* b) { return a->fact_id < b->fact_id; });

  // Far-band objects, farthest first, are the only droppable content.
  std::vector<std::pair<double, std::string>> far;
  for (const auto& f : facts) {
    if (f.predicate == Predicate::kDistanceBand && f.value_text() == "far") {
      far.emplace_back(f.measure.value_or(0.0), f.subject());
    }
  }
  std::stable_sort(far.begin(), far.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  auto it = settings.task_requirements.find(task);
  const std::string requirement = it == settings.task_requirements.end()
                                      ? "Describe the " + std::string(to_string(task)) +
                                            " aspects of the scene using only the facts below."
                                      : it->second;

  std::set<std::string> dropped;
  for (std::size_t k = 0;; ++k) {
    std::vector<const GroundedFact*> kept;
    for (const auto* f : sorted) {
      const bool object_fact = f->fact_id.rfind("obj/", 0) == 0;
      if (object_fact && dropped.contains(f->subject())) continue;
      kept.push_back(f);
    }
    bundle.user_text = compose_user_text(requirement, kept, captions);
    if (count_tokens(bundle.user_text) <= settings.token_budget) return bundle;
    if (k >= far.size()) break;
    dropped.insert(far[k].second);
  }
  throw BudgetError("window '" + bundle.window_key + "': mandatory prompt content needs " +
                    std::to_string(count_tokens(bundle.user_text)) + " tokens, budget is " +
                    std::to_string(settings.token_budget));
}

// -------------------------------------------------------------- transport

HttpTransport::HttpTransport(std::string base_url, double timeout_s)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s) {}

HttpResponse HttpTransport::post(const HttpRequest& request) {
  httplib::Client client(base_url_);
  const auto timeout = std::chrono::duration<double>(timeout_s_);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  auto result = client.Post(request.path, headers, request.body, "application/json");
  if (!result) {
    throw TransportError("POST " + base_url_ + request.path + " failed: " +
                         httplib::to_string(result.error()));
  }
  HttpResponse response;
  response.status = result->status;
  response.body = result->body;
  for (const auto& [k, v] : result->headers) response.headers[k] = v;
  return response;
}

ScriptedTransport ScriptedTransport::repeating(HttpResponse response, std::size_t times) {
  return ScriptedTransport(std::vector<Step>(times, Step{std::move(response)}));
}

HttpResponse ScriptedTransport::post(const HttpRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  requests_.push_back(request);
  if (next_ >= steps_.size()) throw TransportError("scripted transport exhausted");
  const Step& step = steps_[next_++];
  if (!step.response) throw TransportError("scripted connection failure");
  return *step.response;
}

HttpResponse chat_response(const std::string& content, int status) {
  nlohmann::json body = {
      {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}},
      {"usage", {{"prompt_tokens", 0}, {"completion_tokens", count_tokens(content)}}}};
  return HttpResponse{status, body.dump(), {{"Content-Type", "application/json"}}};
}

void EndpointConfig::validate() const {
  if (base_url.empty()) throw ConfigError("[orchestrator] base_url is empty");
  if (model.empty()) throw ConfigError("[orchestrator] model is empty");
  if (max_attempts < 1) throw ConfigError("[orchestrator] max_attempts must be >= 1");
  if (max_inflight < 1) throw ConfigError("[orchestrator] max_inflight must be >= 1");
  if (!(timeout_s > 0.0)) throw ConfigError("[orchestrator] timeout_s must be positive");
  if (backoff_initial_s < 0.0 || backoff_max_s < backoff_initial_s) {
    throw ConfigError("[orchestrator] need 0 <= backoff_initial_s <= backoff_max_s");
  }
}

EndpointConfig EndpointConfig::from_json(const nlohmann::json& block) {
  EndpointConfig c;
  if (!block.is_object()) return c;
  try {
    c.base_url = block.value("base_url", c.base_url);
    c.model = block.value("model", c.model);
    c.token_env = block.value("token_env", c.token_env);
    c.timeout_s = block.value("timeout_s", c.timeout_s);
    c.max_attempts = block.value("max_attempts", c.max_attempts);
    c.max_inflight = block.value("max_inflight", c.max_inflight);
    c.backoff_initial_s = block.value("backoff_initial_s", c.backoff_initial_s);
    c.backoff_max_s = block.value("backoff_max_s", c.backoff_max_s);
    c.temperature = block.value("temperature", c.temperature);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("[orchestrator] ") + e.what());
  }
  if (block.contains("token")) {
    throw ConfigError("[orchestrator] tokens must not be stored in config; set token_env");
  }
  c.validate();
  return c;
}

Sleeper real_sleeper() {
  return [](double s) {
    if (s > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
  };
}

nlohmann::json request_body(const PromptBundle& bundle, const EndpointConfig& endpoint) {
  nlohmann::json content = nlohmann::json::array();
  content.push_back({{"type", "text"}, {"text", bundle.user_text}});
  for (const auto& ref : bundle.media_refs) {
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", ref}}}});
  }
  return {{"model", endpoint.model},
          {"temperature", endpoint.temperature},
          {"messages",
           {{{"role", "system"}, {"content", bundle.system_text}},
            {{"role", "user"}, {"content", content}}}}};
}

std::string request_hash(const nlohmann::json& body) { return to_hex64(fnv1a64(body.dump())); }

AuditLog::AuditLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::app);
  if (!out_) throw IOError("cannot open audit log '" + path_.string() + "'");
}

nlohmann::json AuditLog::entry_to_json(const Entry& e) {
  return {{"window_key", e.window_key},
          {"request_hash", e.request_hash},
          {"attempts", e.attempts},
          {"status", e.status},
          {"text", e.text}};
}

void AuditLog::append(const Entry& entry) {
  const std::string line = entry_to_json(entry).dump();
  std::lock_guard<std::mutex> lock(mu_);
  out_ << line << '\n';
  out_.flush();
}

AuditLog::Entry AuditLog::replay(const std::filesystem::path& path, const std::string& window_key,
                                 const std::string& hash) {
  std::ifstream in(path);
  if (!in) {
    throw MissingInputError("offline mode: audit log '" + path.string() + "' does not exist");
  }
  std::optional<Entry> found;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw SchemaError("audit log '" + path.string() + "' has a malformed line");
    }
    if (j.value("window_key", "") != window_key || j.value("request_hash", "") != hash ||
        j.value("status", "") != "ok") {
      continue;
    }
    found = Entry{window_key, hash, j.value("attempts", 0), "ok", j.value("text", "")};
  }
  if (!found) {
    throw MissingInputError("offline mode: audit log '" + path.string() + "' has no entry for '" +
                            window_key + "' (request " + hash + ")");
  }
  return *found;
}

namespace {

std::optional<double> retry_after(const HttpResponse& r) {
  for (const auto& [k, v] : r.headers) {
    if (to_lower(k) != "retry-after") continue;
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

RawCompletion parse_completion(const HttpResponse& r) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(r.body);
  } catch (const nlohmann::json::parse_error&) {
    throw MalformedResponseError("endpoint returned a non-JSON body");
  }
  try {
    RawCompletion c;
    c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (auto it = j.find("usage"); it != j.end() && it->is_object()) c.usage = *it;
    return c;
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponseError("response lacks choices[0].message.content");
  }
}

}  // namespace

RawCompletion request_completion(const PromptBundle& bundle, const EndpointConfig& endpoint,
                                 Transport& transport, AuditLog* audit, const Sleeper& sleep) {
  const nlohmann::json body = request_body(bundle, endpoint);
  HttpRequest request;
  request.path = "/v1/chat/completions";
  request.body = body.dump();
  request.headers["Accept"] = "application/json";
  if (const char* token = std::getenv(endpoint.token_env.c_str()); token != nullptr && *token) {
    request.headers["Authorization"] = std::string("Bearer ") + token;
  }
  const std::string hash = request_hash(body);

  auto log = [&](int attempts, std::string_view status, const std::string& text) {
    if (audit != nullptr) {
      audit->append({bundle.window_key, hash, attempts, std::string(status), text});
    }
  };

  double delay = endpoint.backoff_initial_s;
  for (int attempt = 1;; ++attempt) {
    const bool last = attempt >= endpoint.max_attempts;
    std::optional<HttpResponse> response;
    try {
      response = transport.post(request);
    } catch (const TransportError& e) {
      // no response at all
      if (last) {
        log(attempt, error_kind_name(ErrorKind::kTransport), "");
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt) +
                             " attempts)");
      }
    }
    std::optional<double> wait_hint;
    if (response) {
      const HttpResponse& r = *response;
      if (r.status == 401 || r.status == 403) {
        log(attempt, error_kind_name(ErrorKind::kAuth), "");
        throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(r.status) +
                        "); check $" + endpoint.token_env);
      }
      if (r.status == 429) {
        wait_hint = retry_after(r);
        if (last) {
          log(attempt, error_kind_name(ErrorKind::kRateLimit), "");
          throw RateLimitError("rate limited after " + std::to_string(attempt) + " attempts",
                               wait_hint);
        }
      } else if (r.status >= 500) {
        if (last) {
          log(attempt, error_kind_name(ErrorKind::kTransport), "");
          throw TransportError("HTTP " + std::to_string(r.status) + " after " +
                               std::to_string(attempt) + " attempts");
        }
      } else if (r.status < 200 || r.status >= 300) {
        log(attempt, error_kind_name(ErrorKind::kTransport), "");
        throw TransportError("HTTP " + std::to_string(r.status) + " is not retryable");
      } else {
        RawCompletion c;
        try {
          c = parse_completion(r);
        } catch (const MalformedResponseError&) {
          log(attempt, error_kind_name(ErrorKind::kMalformedResponse), "");
          throw;
        }
        c.attempts = attempt;
        c.request_hash = hash;
        log(attempt, "ok", c.text);
        return c;
      }
    }
    sleep(std::max(delay, wait_hint.value_or(0.0)));
    delay = std::min(delay * 2.0, endpoint.backoff_max_s);
  }
}

RawCompletion replay_completion(const PromptBundle& bundle, const EndpointConfig& endpoint,
                                const std::filesystem::path& audit_path) {
  const std::string hash = request_hash(request_body(bundle, endpoint));
  const auto entry = AuditLog::replay(audit_path, bundle.window_key, hash);
  RawCompletion c;
  c.text = entry.text;
  c.attempts = 0;
  c.request_hash = hash;
  return c;
}

// ------------------------------------------------------------- grounding

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kRepairable: return "repairable";
    case Verdict::kReject: return "reject";
  }
  return "reject";
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json mentions_j = nlohmann::json::array();
  for (const auto& m : mentions) {
    mentions_j.push_back({{"lexeme", m.lexeme},
                          {"category", std::string(to_string(m.category))},
                          {"resolved_fact_id", m.resolved_fact_id
                                                   ? nlohmann::json(*m.resolved_fact_id)
                                                   : nlohmann::json(nullptr)},
                          {"sentence", m.sentence}});
  }
  nlohmann::json counts_j = nlohmann::json::array();
  for (const auto& c : count_checks) {
    counts_j.push_back({{"category", std::string(to_string(c.category))},
                        {"stated", c.stated},
                        {"truth", c.truth},
                        {"ok", c.ok},
                        {"sentence", c.sentence}});
  }
  nlohmann::json sides_j = nlohmann::json::array();
  for (const auto& s : side_checks) {
    sides_j.push_back({{"object_id", s.object_id},
                       {"stated_side", std::string(to_string(s.stated_side))},
                       {"truth_side", s.truth_side ? nlohmann::json(std::string(to_string(*s.truth_side)))
                                                   : nlohmann::json(nullptr)},
                       {"ok", s.ok},
                       {"sentence", s.sentence}});
  }
  return {{"mentions", mentions_j},
          {"count_checks", counts_j},
          {"side_checks", sides_j},
          {"failing_sentences", failing_sentences},
          {"verdict", std::string(to_string(verdict))}};
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool end = i + 1 == text.size() ||
                     std::isspace(static_cast<unsigned char>(text[i + 1])) != 0;
    if (!end) continue;
    std::string s = trim(text.substr(start, i + 1 - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = i + 1;
  }
  std::string tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

ValidationReport validate_grounding(std::string_view completion_text,
                                    const std::vector<GroundedFact>& facts, const Lexicon& lexicon) {
  ValidationReport report;
  report.sentences = split_sentences(completion_text);
  if (report.sentences.empty()) {
    report.verdict = Verdict::kReject;
    return report;
  }

  std::set<std::size_t> failing;
  std::vector<bool> decisive(report.sentences.size(), false);
  for (std::size_t si = 0; si < report.sentences.size(); ++si) {
    const auto tokens = word_tokens(report.sentences[si]);
    decisive[si] = lexicon.has_decision_word(tokens);
    const auto mentions = lexicon.find_mentions(tokens);
    for (const auto& m : mentions) {
      MentionCheck mc;
      std::vector<std::string> words(tokens.begin() + m.token_index,
                                     tokens.begin() + m.token_index + m.length);
      mc.lexeme = join(words, " ");
      mc.category = m.category;
      mc.sentence = si;
      const std::int64_t truth = category_count(facts, m.category);
      if (truth > 0) {
        const GroundedFact* cf = find_fact(facts, "count/" + std::string(to_string(m.category)));
        if (cf != nullptr) {
          mc.resolved_fact_id = cf->fact_id;
        } else {
          const auto subjects = subjects_of_category(facts, m.category);
          if (const auto* e = subject_fact(facts, subjects.front(), Predicate::kExists)) {
            mc.resolved_fact_id = e->fact_id;
          }
        }
      }
      if (!mc.resolved_fact_id) failing.insert(si);
      report.mentions.push_back(mc);

      if (m.stated_count) {
        CountCheck cc{m.category, *m.stated_count, truth, *m.stated_count == truth, si};
        if (!cc.ok) failing.insert(si);
        report.count_checks.push_back(cc);
      }
    }

    if (mentions.empty()) continue;
    for (const auto& sm : lexicon.find_sides(tokens)) {
      // attach to the closest category mention in the sentence
      const Lexicon::Mention* owner = &mentions.front();
      std::size_t best = static_cast<std::size_t>(-1);
      for (const auto& m : mentions) {
        const std::size_t d = m.token_index > sm.token_index ? m.token_index - sm.token_index
                                                             : sm.token_index - m.token_index;
        if (d < best) {
          best = d;
          owner = &m;
        }
      }
      SideCheck sc;
      sc.category = owner->category;
      sc.stated_side = sm.side;
      sc.sentence = si;
      for (const auto& id : subjects_of_category(facts, owner->category)) {
        const GroundedFact* sf = subject_fact(facts, id, Predicate::kPositionSide);
        if (sf == nullptr) continue;
        const auto side = parse_side(sf->value_text());
        if (sc.object_id.empty() || (side && *side == sm.side)) {
          sc.object_id = id;
          sc.truth_side = side;
        }
        if (side && *side == sm.side) {
          sc.ok = true;
          break;
        }
      }
      if (!sc.ok) failing.insert(si);
      report.side_checks.push_back(sc);
    }
  }

  report.failing_sentences.assign(failing.begin(), failing.end());
  if (failing.empty()) {
    report.verdict = Verdict::kPass;
  } else if (failing.size() == report.sentences.size() ||
             std::any_of(failing.begin(), failing.end(),
                         [&](std::size_t i) { return decisive[i]; })) {
    report.verdict = Verdict::kReject;
  } else {
    report.verdict = Verdict::kRepairable;
  }
  return report;
}

std::optional<RejectPolicy> parse_reject_policy(std::string_view s) {
  if (s == "drop") return RejectPolicy::kDrop;
  if (s == "fallback") return RejectPolicy::kFallback;
  return std::nullopt;
}

namespace {

std::vector<std::string> resolved_facts(const ValidationReport& report,
                                        const std::vector<GroundedFact>& facts) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& id) {
    if (seen.insert(id).second) out.push_back(id);
  };
  for (const auto& m : report.mentions) {
    if (m.resolved_fact_id) add(*m.resolved_fact_id);
  }
  for (const auto& s : report.side_checks) {
    if (!s.ok || s.object_id.empty()) continue;
    if (const auto* f = subject_fact(facts, s.object_id, Predicate::kPositionSide)) add(f->fact_id);
  }
  return out;
}

GroundedCaption finalize_caption(const std::string& text, const ValidationReport& report,
                                 const std::vector<GroundedFact>& facts,
                                 const GroundedCaption& template_caption) {
  GroundedCaption c;
  c.text = text;
  c.category = template_caption.category;
  c.facts_used = resolved_facts(report, facts);
  if (c.facts_used.empty()) c.facts_used = template_caption.facts_used;
  return c;
}

}  // namespace

FinalAnnotation repair_or_finalize(const std::string& completion, const ValidationReport& report,
                                   const std::vector<GroundedFact>& facts, const Lexicon& lexicon,
                                   const GroundedCaption& template_caption, RejectPolicy policy) {
  FinalAnnotation out;
  out.verdict = report.verdict;
  if (report.verdict == Verdict::kPass) {
    out.caption = finalize_caption(completion, report, facts, template_caption);
    out.validation = Provenance::kMllmValidated;
    return out;
  }
  if (report.verdict == Verdict::kRepairable) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < report.sentences.size(); ++i) {
      if (!std::binary_search(report.failing_sentences.begin(), report.failing_sentences.end(), i)) {
        kept.push_back(report.sentences[i]);
      }
    }
    const std::string repaired = join(kept, " ");
    const ValidationReport again = validate_grounding(repaired, facts, lexicon);
    if (again.verdict == Verdict::kPass) {
      out.caption = finalize_caption(repaired, again, facts, template_caption);
      out.validation = Provenance::kMllmRepaired;
      return out;
    }
  }
  if (policy == RejectPolicy::kFallback) out.caption = template_caption;
  out.validation = Provenance::kTemplate;
  return out;
}

}  // namespace vlaforge

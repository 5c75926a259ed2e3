#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "vlaforge/errors.hpp"
#include "vlaforge/orchestrator.hpp"

// after Eigen: <resolv.h> defines a _res macro that collides with Eigen internals
#include <httplib.h>

using namespace vlaforge;
using nlohmann::json;
using test::frame_at;
using test::object_at;

namespace fs = std::filesystem;

namespace {

SceneWindow window_with(std::vector<ObjectAnnotation> objects) {
  SceneWindow w;
  w.scene_id = "scene-x";
  w.window_index = 3;
  w.frames = {frame_at("a", 0, 0, 0, 0, 5.0), frame_at("b", 500000, 2.5, 0, 0, 5.0, objects)};
  return w;
}

std::vector<GroundedFact> facts_of(const SceneWindow& w) { return extract_facts(w); }

PromptSettings settings(std::size_t budget = 2048) {
  PromptSettings s;
  s.rubric = "Use only the listed facts.";
  s.task_requirements[QACategory::kDynamic] = "Describe the moving agents.";
  s.token_budget = budget;
  return s;
}

PromptBundle bundle() {
  const auto w = window_with({object_at("ped-1", ObjectCategory::kPedestrian, 5, 1)});
  return build_prompt(w, facts_of(w), {}, PriorLibrary(), QACategory::kDynamic, settings());
}

EndpointConfig fast_endpoint(int attempts = 4) {
  EndpointConfig e;
  e.max_attempts = attempts;
  e.backoff_initial_s = 1.0;
  e.backoff_max_s = 4.0;
  e.token_env = "VLAFORGE_TEST_TOKEN_UNSET";
  return e;
}

struct SleepLog {
  std::vector<double> waits;
  Sleeper sleeper() {
    return [this](double s) { waits.push_back(s); };
  }
};

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vlaforge_orchestrator_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST(BuildPrompt, DeterministicAndSorted) {
  const auto w = window_with({object_at("veh-2", ObjectCategory::kVehicle, 20, 0),
                              object_at("ped-1", ObjectCategory::kPedestrian, 5, 1)});
  const auto facts = facts_of(w);
  PriorLibrary priors({{"pedestrian_near", "Yield to pedestrians."}, {"default", "Drive."}});
  const auto a = build_prompt(w, facts, {}, priors, QACategory::kDynamic, settings());
  const auto b = build_prompt(w, facts, {}, priors, QACategory::kDynamic, settings());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.window_key, "scene-x/w003/dynamic");
  EXPECT_EQ(a.media_refs, (std::vector<std::string>{"cam://a/front", "cam://b/front"}));
  EXPECT_NE(a.system_text.find("- Yield to pedestrians."), std::string::npos);
  EXPECT_EQ(a.system_text.find("Drive."), std::string::npos);
  EXPECT_EQ(a.user_text.rfind("Task: Describe the moving agents.\n", 0), 0u);

  // fact lines appear in fact_id order
  std::vector<std::string> ids;
  std::istringstream lines(a.user_text);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("- ", 0) == 0) ids.push_back(line.substr(2, line.find(" |") - 2));
  }
  ASSERT_EQ(ids.size(), facts.size());
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
}

TEST(BuildPrompt, BudgetDropsFarObjectsFirst) {
  const auto w = window_with({object_at("near", ObjectCategory::kVehicle, 5, 0),
                              object_at("far1", ObjectCategory::kVehicle, 40, 0),
                              object_at("far2", ObjectCategory::kVehicle, 60, 0)});
  const auto facts = facts_of(w);
  const auto full = build_prompt(w, facts, {}, PriorLibrary(), QACategory::kDynamic, settings());
  const std::size_t n = count_tokens(full.user_text);
  // one object group is worth 3 lines; trim just enough to lose the farthest
  const auto trimmed =
      build_prompt(w, facts, {}, PriorLibrary(), QACategory::kDynamic, settings(n - 1));
  EXPECT_EQ(trimmed.user_text.find("obj/far2/"), std::string::npos);
  EXPECT_NE(trimmed.user_text.find("obj/far1/"), std::string::npos);
  EXPECT_LE(count_tokens(trimmed.user_text), n - 1);
  EXPECT_THROW(build_prompt(w, facts, {}, PriorLibrary(), QACategory::kDynamic, settings(10)),
               BudgetError);
}

TEST(CountTokens, Whitespace) {
  EXPECT_EQ(count_tokens(""), 0u);
  EXPECT_EQ(count_tokens("  a  b\nc\t"), 3u);
}

TEST(RequestCompletion, SuccessOnFirstAttempt) {
  auto t = ScriptedTransport::repeating(chat_response("There is a pedestrian."), 1);
  SleepLog sl;
  const auto c = request_completion(bundle(), fast_endpoint(), t, nullptr, sl.sleeper());
  EXPECT_EQ(c.text, "There is a pedestrian.");
  EXPECT_EQ(c.attempts, 1);
  EXPECT_TRUE(sl.waits.empty());
  ASSERT_EQ(t.requests().size(), 1u);
  EXPECT_EQ(t.requests()[0].path, "/v1/chat/completions");
  EXPECT_FALSE(t.requests()[0].headers.contains("Authorization"));
  const auto body = json::parse(t.requests()[0].body);
  EXPECT_EQ(body["messages"][1]["content"][1]["image_url"]["url"], "cam://a/front");
}

TEST(RequestCompletion, BackoffOnServerErrorsAndDrops) {
  ScriptedTransport t({{HttpResponse{503, "", {}}},
                       {std::nullopt},
                       {HttpResponse{500, "", {}}},
                       {chat_response("ok.")}});
  SleepLog sl;
  const auto c = request_completion(bundle(), fast_endpoint(), t, nullptr, sl.sleeper());
  EXPECT_EQ(c.attempts, 4);
  EXPECT_EQ(sl.waits, (std::vector<double>{1.0, 2.0, 4.0}));
}

TEST(RequestCompletion, RetryAfterRaisesDelay) {
  ScriptedTransport t({{HttpResponse{429, "", {{"Retry-After", "7"}}}}, {chat_response("ok.")}});
  SleepLog sl;
  request_completion(bundle(), fast_endpoint(), t, nullptr, sl.sleeper());
  EXPECT_EQ(sl.waits, (std::vector<double>{7.0}));
}

TEST(RequestCompletion, TerminalErrors) {
  SleepLog sl;
  {
    auto t = ScriptedTransport::repeating(HttpResponse{401, "", {}}, 4);
    EXPECT_THROW(request_completion(bundle(), fast_endpoint(), t, nullptr, sl.sleeper()),
                 AuthError);
    EXPECT_EQ(t.requests().size(), 1u);
  }
  {
    auto t = ScriptedTransport::repeating(HttpResponse{429, "", {{"retry-after", "2"}}}, 3);
    try {
      request_completion(bundle(), fast_endpoint(3), t, nullptr, sl.sleeper());
      FAIL();
    } catch (const RateLimitError& e) {
      EXPECT_EQ(e.retry_after_s(), 2.0);
      EXPECT_EQ(exit_code_for(e.kind()), 3);
    }
    EXPECT_EQ(t.requests().size(), 3u);
  }
  {
    ScriptedTransport t({{std::nullopt}, {std::nullopt}});
    EXPECT_THROW(request_completion(bundle(), fast_endpoint(2), t, nullptr, sl.sleeper()),
                 TransportError);
  }
  {
    auto t = ScriptedTransport::repeating(HttpResponse{200, "not json", {}}, 1);
    EXPECT_THROW(request_completion(bundle(), fast_endpoint(), t, nullptr, sl.sleeper()),
                 MalformedResponseError);
  }
  {
    auto t = ScriptedTransport::repeating(HttpResponse{200, R"({"choices": []})", {}}, 1);
    EXPECT_THROW(request_completion(bundle(), fast_endpoint(), t, nullptr, sl.sleeper()),
                 MalformedResponseError);
  }
  {
    auto t = ScriptedTransport::repeating(HttpResponse{404, "", {}}, 4);
    EXPECT_THROW(request_completion(bundle(), fast_endpoint(), t, nullptr, sl.sleeper()),
                 TransportError);
    EXPECT_EQ(t.requests().size(), 1u);
  }
}

TEST(RequestCompletion, BearerTokenFromEnvironment) {
  ::setenv("VLAFORGE_TEST_TOKEN_SET", "s3cret", 1);
  auto e = fast_endpoint();
  e.token_env = "VLAFORGE_TEST_TOKEN_SET";
  auto t = ScriptedTransport::repeating(chat_response("ok."), 1);
  request_completion(bundle(), e, t);
  EXPECT_EQ(t.requests()[0].headers.at("Authorization"), "Bearer s3cret");
  // the token never reaches the body
  EXPECT_EQ(t.requests()[0].body.find("s3cret"), std::string::npos);
  ::unsetenv("VLAFORGE_TEST_TOKEN_SET");
}

TEST(AuditLog, RecordsAndReplays) {
  const auto path = temp_file("audit.jsonl");
  const auto b = bundle();
  const auto endpoint = fast_endpoint();
  {
    AuditLog log(path);
    ScriptedTransport t({{HttpResponse{500, "", {}}}, {chat_response("First.")}});
    SleepLog sl;
    request_completion(b, endpoint, t, &log, sl.sleeper());
    auto t2 = ScriptedTransport::repeating(chat_response("Second."), 1);
    request_completion(b, endpoint, t2, &log, sl.sleeper());
  }
  // last successful entry wins
  const auto c = replay_completion(b, endpoint, path);
  EXPECT_EQ(c.text, "Second.");

  PromptBundle other = b;
  other.window_key = "elsewhere";
  EXPECT_THROW(replay_completion(other, endpoint, path), MissingInputError);
  EXPECT_THROW(replay_completion(b, endpoint, temp_file("absent.jsonl")), MissingInputError);

  // changing the request changes the hash
  auto e2 = endpoint;
  e2.model = "another-model";
  EXPECT_NE(request_hash(request_body(b, endpoint)), request_hash(request_body(b, e2)));
  EXPECT_THROW(replay_completion(b, e2, path), MissingInputError);
}

TEST(EndpointConfig, Validation) {
  EXPECT_THROW(EndpointConfig::from_json({{"max_attempts", 0}}), ConfigError);
  EXPECT_THROW(EndpointConfig::from_json({{"token", "abc"}}), ConfigError);
  EXPECT_THROW(EndpointConfig::from_json({{"backoff_initial_s", 5.0}, {"backoff_max_s", 1.0}}),
               ConfigError);
  EXPECT_EQ(EndpointConfig::from_json({{"model", "m"}}).model, "m");
}

TEST(SplitSentences, Terminators) {
  EXPECT_EQ(split_sentences("A car. Speed 2.5 m/s! Why? tail"),
            (std::vector<std::string>{"A car.", "Speed 2.5 m/s!", "Why?", "tail"}));
  EXPECT_TRUE(split_sentences("   ").empty());
}

TEST(ValidateGrounding, PassRepairableReject) {
  const auto w = window_with({object_at("veh-1", ObjectCategory::kVehicle, 20, 0),
                              object_at("veh-2", ObjectCategory::kVehicle, 25, -2),
                              object_at("ped-1", ObjectCategory::kPedestrian, 5, 4)});
  const auto facts = facts_of(w);
  const auto lex = Lexicon::defaults();

  const auto pass = validate_grounding(
      "There are two vehicles in front. A pedestrian stands on the front left.", facts, lex);
  EXPECT_EQ(pass.verdict, Verdict::kPass) << pass.to_json().dump();
  EXPECT_EQ(pass.count_checks.size(), 1u);
  EXPECT_EQ(pass.side_checks.size(), 2u);

  const auto repairable = validate_grounding(
      "There are two vehicles in front. A cyclist rides nearby. Three pedestrians wait.", facts,
      lex);
  EXPECT_EQ(repairable.verdict, Verdict::kRepairable);
  EXPECT_EQ(repairable.failing_sentences, (std::vector<std::size_t>{1, 2}));

  const auto wrong_side = validate_grounding("There are two vehicles behind. Fine.", facts, lex);
  EXPECT_EQ(wrong_side.failing_sentences, (std::vector<std::size_t>{0}));

  // a failing sentence carrying the decision is not removable
  const auto decisive = validate_grounding(
      "There are two vehicles in front. The ego vehicle should yield to the cyclist.", facts, lex);
  EXPECT_EQ(decisive.verdict, Verdict::kReject);

  EXPECT_EQ(validate_grounding("", facts, lex).verdict, Verdict::kReject);
  EXPECT_EQ(validate_grounding("A bus is behind.", facts, lex).verdict, Verdict::kReject);
  // ego self-references are not scene mentions
  EXPECT_EQ(validate_grounding("Our car keeps going.", facts, lex).verdict, Verdict::kPass);
}

TEST(RepairOrFinalize, Outcomes) {
  const auto w = window_with({object_at("veh-1", ObjectCategory::kVehicle, 20, 0)});
  const auto facts = facts_of(w);
  const auto lex = Lexicon::defaults();
  const GroundedCaption tmpl{"There is a vehicle at mid range in front.",
                             {"obj/veh-1/exists"}, QACategory::kDynamic};

  const std::string ok = "One vehicle is ahead.";
  auto r = repair_or_finalize(ok, validate_grounding(ok, facts, lex), facts, lex, tmpl,
                              RejectPolicy::kDrop);
  EXPECT_EQ(r.validation, Provenance::kMllmValidated);
  EXPECT_EQ(r.caption->text, ok);
  EXPECT_EQ(r.caption->facts_used,
            (std::vector<std::string>{"count/vehicle", "obj/veh-1/side"}));

  const std::string fixable = "One vehicle is ahead. A cyclist follows.";
  r = repair_or_finalize(fixable, validate_grounding(fixable, facts, lex), facts, lex, tmpl,
                         RejectPolicy::kDrop);
  EXPECT_EQ(r.verdict, Verdict::kRepairable);
  EXPECT_EQ(r.validation, Provenance::kMllmRepaired);
  EXPECT_EQ(r.caption->text, "One vehicle is ahead.");

  const std::string bad = "A cyclist follows.";
  const auto report = validate_grounding(bad, facts, lex);
  r = repair_or_finalize(bad, report, facts, lex, tmpl, RejectPolicy::kDrop);
  EXPECT_TRUE(r.dropped());
  r = repair_or_finalize(bad, report, facts, lex, tmpl, RejectPolicy::kFallback);
  EXPECT_EQ(r.validation, Provenance::kTemplate);
  EXPECT_EQ(*r.caption, tmpl);
}

TEST(HttpTransport, TalksToLocalServer) {
  httplib::Server server;
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    const auto body = json::parse(req.body);
    const auto reply = chat_response("Model " + body["model"].get<std::string>() + ".");
    res.set_content(reply.body, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpTransport transport("http://127.0.0.1:" + std::to_string(port), 5.0);
  const auto c = request_completion(bundle(), fast_endpoint(), transport);
  EXPECT_EQ(c.text, "Model qwen2.5-vl.");
  EXPECT_TRUE(seen_auth.empty());
  server.stop();
  th.join();

  HttpTransport dead("http://127.0.0.1:" + std::to_string(port), 0.5);
  SleepLog sl;
  EXPECT_THROW(request_completion(bundle(), fast_endpoint(2), dead, nullptr, sl.sleeper()),
               TransportError);
}

#include <set>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "vlaforge/errors.hpp"
#include "vlaforge/template_engine.hpp"
#include "vlaforge/util.hpp"

using namespace vlaforge;
using nlohmann::json;
using test::frame_at;
using test::object_at;

namespace {

const std::string kData = VLAFORGE_DATA_DIR;

TemplateSet data_templates() {
  auto set = TemplateSet::load(kData + "/templates.json");
  set.set_priors(PriorLibrary::load(kData + "/priors.json"));
  return set;
}

FrameRecord scene_frame() {
  auto light = object_at("tl-1", ObjectCategory::kTrafficLight, 20.0, 0.0);
  light.attributes["color"] = "red";
  auto f = frame_at("f0", 0, 0, 0, 0, 4.0,
                    {object_at("ped-1", ObjectCategory::kPedestrian, 5.0, 4.0),
                     object_at("veh-1", ObjectCategory::kVehicle, 15.0, -12.0),
                     object_at("veh-2", ObjectCategory::kVehicle, 50.0, 0.0), light});
  f.weather = Weather::kFog;
  return f;
}

const ActionLabel kLabel{SpeedState::kModerateSpeed, Longitudinal::kDecelerate,
                         Maneuver::kGoStraight, Command::kForward};

std::vector<GroundedFact> all_facts() {
  auto facts = extract_frame_facts(scene_frame());
  for (auto& f : action_facts(kLabel, "f0")) facts.push_back(f);
  return facts;
}

TemplateSpec spec(std::string id, std::string pattern, std::vector<Predicate> req = {}) {
  return TemplateSpec{std::move(id), std::move(pattern), std::move(req), std::nullopt};
}

}  // namespace

TEST(RenderTemplate, EnvironmentSlots) {
  const auto c = render_template(all_facts(),
                                 spec("e", "It is {weather} on {road} with {lanes} and {cross_lanes}."),
                                 QACategory::kEnvironment, Lexicon::defaults());
  EXPECT_EQ(c.text,
            "It is fog on a city road with two same-direction lanes and one opposite-direction "
            "lane and no crossing lanes.");
  EXPECT_EQ(c.facts_used, (std::vector<std::string>{"env/weather", "env/road", "env/lanes"}));
}

TEST(RenderTemplate, ObjectSlots) {
  const auto facts = all_facts();
  const auto dyn = render_template(facts, spec("d", "{dynamic_objects}"), QACategory::kDynamic,
                                   Lexicon::defaults());
  EXPECT_EQ(dyn.text,
            "There are two vehicles, the nearest at mid range on the front right. "
            "There is a pedestrian at near range on the front left.");
  EXPECT_EQ(dyn.facts_used,
            (std::vector<std::string>{"count/vehicle", "obj/veh-1/exists", "obj/veh-1/side",
                                      "obj/veh-1/band", "count/pedestrian", "obj/ped-1/exists",
                                      "obj/ped-1/side", "obj/ped-1/band"}));

  const auto st = render_template(facts, spec("s", "{static_objects} Signal: {signal}."),
                                  QACategory::kStatic, Lexicon::defaults());
  EXPECT_EQ(st.text,
            "There is a traffic light at mid range in front. Signal: the nearest traffic light in "
            "front shows red.");

  const auto near = render_template(facts, spec("n", "{nearest_dynamic}"), QACategory::kDynamic,
                                    Lexicon::defaults());
  EXPECT_EQ(near.text, "a pedestrian at near range on the front left");
}

TEST(RenderTemplate, ActionSlots) {
  const auto c = render_template(
      all_facts(), spec("a", "{speed_state}; {longitudinal}; {maneuver}; {command}; {decision}"),
      QACategory::kAction, Lexicon::defaults());
  EXPECT_EQ(c.text,
            "moving at a moderate speed; slow down; continue straight; go forward; the ego vehicle "
            "should slow down and continue straight");
}

TEST(RenderTemplate, MissingPredicateOrSlotThrows) {
  const auto facts = extract_frame_facts(frame_at("q", 0, 0, 0, 0, 1.0));
  try {
    render_template(facts, spec("needs_signal", "x", {Predicate::kSignalState}),
                    QACategory::kStatic, Lexicon::defaults());
    FAIL();
  } catch (const MissingSlotError& e) {
    EXPECT_EQ(e.template_id(), "needs_signal");
  }
  EXPECT_THROW(render_template(facts, spec("d", "{dynamic_objects}"), QACategory::kDynamic,
                               Lexicon::defaults()),
               MissingSlotError);
}

TEST(TemplateSet, ConfigErrors) {
  auto one = [](json row) { return json{{"categories", {{"static", json::array({row})}}}}; };
  EXPECT_THROW(TemplateSet::from_json(json::object()), ConfigError);
  EXPECT_THROW(TemplateSet::from_json({{"categories", {{"weather", json::array()}}}}), ConfigError);
  EXPECT_THROW(TemplateSet::from_json(one({{"id", "a"}, {"pattern", "{nope}"}})), ConfigError);
  EXPECT_THROW(TemplateSet::from_json(one({{"id", "a"}, {"pattern", "{road"}})), ConfigError);
  EXPECT_THROW(TemplateSet::from_json(one({{"id", "a"}, {"pattern", "x"}, {"fallback_id", "b"}})),
               ConfigError);
  EXPECT_THROW(TemplateSet::from_json(one({{"id", "a"}, {"pattern", "x"},
                                           {"required_predicates", {"is_happy"}}})),
               ConfigError);
  const json cyclic = {{"categories",
                        {{"static",
                          {{{"id", "a"}, {"pattern", "x"}, {"fallback_id", "b"}},
                           {{"id", "b"}, {"pattern", "y"}, {"fallback_id", "a"}}}}}}};
  EXPECT_THROW(TemplateSet::from_json(cyclic), ConfigError);
  const json dup = {{"categories",
                     {{"static", {{{"id", "a"}, {"pattern", "x"}}, {{"id", "a"}, {"pattern", "y"}}}}}}};
  EXPECT_THROW(TemplateSet::from_json(dup), ConfigError);
  EXPECT_THROW(TemplateSet::load(kData + "/no_such_file.json"), MissingInputError);
}

TEST(RenderCaption, EmptySetAndFallbackChain) {
  TemplateSet empty;
  EXPECT_THROW(render_caption(all_facts(), QACategory::kStatic, empty, 1), EmptyTemplateSetError);

  const auto set = data_templates();
  const auto quiet = extract_frame_facts(frame_at("q", 0, 0, 0, 0, 1.0));
  // no objects at all: static_signal -> static_list -> fixed sentence
  const auto c = render_with_fallback(quiet, QACategory::kStatic, set, 3);
  EXPECT_EQ(c.text, empty_scene_sentence(QACategory::kStatic));
  EXPECT_TRUE(c.facts_used.empty());

  // a sign but no light: the signal template falls back to the list
  auto f = frame_at("s", 0, 0, 0, 0, 1.0, {object_at("sg", ObjectCategory::kTrafficSign, 8, 0)});
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto s = render_with_fallback(extract_frame_facts(f), QACategory::kStatic, set, seed);
    EXPECT_EQ(s.text, "There is a traffic sign at near range in front.");
  }
}

TEST(ComposeReasoning, ObservationConstraintDecision) {
  const auto set = data_templates();
  const auto facts = extract_frame_facts(scene_frame());
  const auto c = compose_reasoning(facts, kLabel, set, 11);
  EXPECT_NE(c.text.find("Observation: a pedestrian is at near range on the front left."),
            std::string::npos);
  EXPECT_NE(c.text.find("Constraint: "), std::string::npos);
  for (const auto& lexeme : decision_lexemes(kLabel.longitudinal)) {
    EXPECT_NE(c.text.find(lexeme), std::string::npos) << lexeme;
  }
  // every cited fact exists
  std::set<std::string> ids;
  for (const auto& f : facts) ids.insert(f.fact_id);
  for (const auto& f : action_facts(kLabel, "f0")) ids.insert(f.fact_id);
  for (const auto& id : c.facts_used) EXPECT_TRUE(ids.contains(id)) << id;
  EXPECT_NE(std::find(c.facts_used.begin(), c.facts_used.end(), "action/longitudinal"),
            c.facts_used.end());
}

TEST(ComposeReasoning, ClearRoadUsesDefaultPrior) {
  const auto set = data_templates();
  const auto facts = extract_frame_facts(frame_at("q", 0, 0, 0, 0, 6.0));
  const ActionLabel l{SpeedState::kModerateSpeed, Longitudinal::kMaintainSpeed,
                      Maneuver::kGoStraight, Command::kForward};
  const auto c = compose_reasoning(facts, l, set, 0);
  EXPECT_NE(c.text.find("no hazards are close"), std::string::npos);
  EXPECT_NE(c.text.find("Constraint: " + set.priors().default_row()->constraint_text),
            std::string::npos);
}

TEST(GenerateQA, DeterministicPerSeed) {
  const auto set = data_templates();
  SceneWindow w;
  w.scene_id = "s";
  w.window_index = 4;
  w.frames = {scene_frame()};
  const auto a = generate_qa(w, kLabel, set, 99);
  const auto b = generate_qa(w, kLabel, set, 99);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].category, kAllQACategories[i]);
    EXPECT_EQ(a[i].validation, Provenance::kTemplate);
    EXPECT_EQ(a[i].window_index, 4u);
    EXPECT_EQ(qa_from_json(qa_to_json(a[i])), a[i]);
  }
  // different seeds eventually pick different templates
  std::set<std::string> texts;
  for (std::uint64_t s = 0; s < 20; ++s) {
    texts.insert(generate_qa(w, kLabel, set, s, {QACategory::kEnvironment})[0].answer.text);
  }
  EXPECT_GT(texts.size(), 1u);

  const auto only = generate_qa(w, kLabel, set, 1, {QACategory::kAction});
  ASSERT_EQ(only.size(), 1u);
  EXPECT_EQ(only[0].category, QACategory::kAction);
}

TEST(PriorLibrary, MatchingKeepsLibraryOrder) {
  PriorLibrary lib({{"b", "B."}, {"a", "A."}, {"default", "D."}});
  const auto m = lib.matching({"a", "b"});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0]->trigger, "b");
  EXPECT_EQ(lib.default_row()->constraint_text, "D.");
  EXPECT_THROW(PriorLibrary::from_json(json::object()), ConfigError);
}

TEST(Lexicon, MentionsSidesAndRoundTrip) {
  const auto lex = Lexicon::defaults();
  const auto tokens = word_tokens("Two traffic lights and three cars on the front left.");
  const auto mentions = lex.find_mentions(tokens);
  ASSERT_EQ(mentions.size(), 2u);
  EXPECT_EQ(mentions[0].category, ObjectCategory::kTrafficLight);
  EXPECT_EQ(mentions[0].stated_count, 2);
  EXPECT_EQ(mentions[1].category, ObjectCategory::kVehicle);
  EXPECT_EQ(mentions[1].stated_count, 3);
  const auto sides = lex.find_sides(tokens);
  ASSERT_EQ(sides.size(), 1u);
  EXPECT_EQ(sides[0].side, Side::kFrontLeft);
  EXPECT_EQ(lex.indefinite(ObjectCategory::kOther), "an obstacle");
  EXPECT_EQ(lex.count_word(7), "seven");
  EXPECT_EQ(lex.count_word(42), "42");

  const auto again = Lexicon::from_json(lex.to_json());
  EXPECT_EQ(again.to_json(), lex.to_json());
  EXPECT_EQ(Lexicon::from_json(json::object()).to_json(), lex.to_json());
}

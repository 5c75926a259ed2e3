#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/action_labeler.hpp"
#include "vlaforge/facts.hpp"
#include "vlaforge/lexicon.hpp"
#include "vlaforge/scene.hpp"

namespace vlaforge {

enum class QACategory { kEnvironment, kStatic, kDynamic, kReasoning, kAction };
enum class Provenance { kTemplate, kMllmValidated, kMllmRepaired };

inline constexpr QACategory kAllQACategories[] = {QACategory::kEnvironment, QACategory::kStatic,
                                                  QACategory::kDynamic, QACategory::kReasoning,
                                                  QACategory::kAction};

std::string_view to_string(QACategory c);
std::string_view to_string(Provenance p);
std::optional<QACategory> parse_qa_category(std::string_view s);
std::optional<Provenance> parse_provenance(std::string_view s);

// Fixed sentence used when a category has nothing to describe.
std::string_view empty_scene_sentence(QACategory category);

struct GroundedCaption {
  std::string text;
  std::vector<std::string> facts_used;
  QACategory category = QACategory::kEnvironment;

  friend bool operator==(const GroundedCaption&, const GroundedCaption&) = default;
};

struct QAPair {
  std::string question;
  GroundedCaption answer;
  QACategory category = QACategory::kEnvironment;
  std::string scene_id;
  std::size_t window_index = 0;
  Provenance validation = Provenance::kTemplate;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

nlohmann::json caption_to_json(const GroundedCaption& caption);
GroundedCaption caption_from_json(const nlohmann::json& j);
nlohmann::json qa_to_json(const QAPair& qa);
QAPair qa_from_json(const nlohmann::json& j);

struct TemplateSpec {
  std::string id;
  std::string pattern;  // flat "{slot}" placeholders
  std::vector<Predicate> required_predicates;
  std::optional<std::string> fallback_id;
};

// One row of the human-prior library: a trigger name (see prior_triggers)
// and the constraint sentence it contributes. The row with trigger
// "default" is used when nothing else fires.
struct PriorRow {
  std::string trigger;
  std::string constraint_text;
};

class PriorLibrary {
 public:
  PriorLibrary() = default;
  explicit PriorLibrary(std::vector<PriorRow> rows);

  static PriorLibrary from_json(const nlohmann::json& rows);
  static PriorLibrary load(const std::filesystem::path& path);

  const std::vector<PriorRow>& rows() const { return rows_; }
  // Rows whose trigger is in `triggers`, in library order.
  std::vector<const PriorRow*> matching(const std::vector<std::string>& triggers) const;
  const PriorRow* default_row() const;

 private:
  std::vector<PriorRow> rows_;
};

// Slots understood by the renderer.
const std::vector<std::string>& known_slots();

class TemplateSet {
 public:
  TemplateSet() = default;

  // {"categories": {cat: [{id, pattern, required_predicates[], fallback_id?}]},
  //  "questions": {cat: [string]}}
  // Throws ConfigError for unknown slots or categories, dangling or cyclic
  // fallbacks, and duplicate ids.
  static TemplateSet from_json(const nlohmann::json& j);
  static TemplateSet load(const std::filesystem::path& path);

  const std::vector<TemplateSpec>& templates(QACategory category) const;
  const std::vector<std::string>& questions(QACategory category) const;
  const TemplateSpec* find(QACategory category, std::string_view id) const;

  const PriorLibrary& priors() const { return priors_; }
  void set_priors(PriorLibrary priors) { priors_ = std::move(priors); }
  const Lexicon& lexicon() const { return lexicon_; }
  void set_lexicon(Lexicon lexicon) { lexicon_ = std::move(lexicon); }

 private:
  std::map<QACategory, std::vector<TemplateSpec>> templates_;
  std::map<QACategory, std::vector<std::string>> questions_;
  PriorLibrary priors_;
  Lexicon lexicon_ = Lexicon::defaults();
};

// Renders one specific template. Throws MissingSlotError when a required
// predicate or slot cannot be filled from `facts`.
GroundedCaption render_template(const std::vector<GroundedFact>& facts, const TemplateSpec& spec,
                                QACategory category, const Lexicon& lexicon);

// Seeded pick among the category's templates, then render_template.
// Throws EmptyTemplateSetError when the category has no templates.
GroundedCaption render_caption(const std::vector<GroundedFact>& facts, QACategory category,
                               const TemplateSet& templates, std::uint64_t seed);

// Seeded pick, then the fallback chain; ends in the fixed empty-scene
// sentence when no template in the chain can be filled.
GroundedCaption render_with_fallback(const std::vector<GroundedFact>& facts, QACategory category,
                                     const TemplateSet& templates, std::uint64_t seed);

// Observation -> constraint -> decision chain. Observations cover every
// hazard-class fact (or a clear-road sentence), constraints come from the
// prior library, the decision restates `label`. `facts` may already
// contain action facts; missing ones are derived from `label`.
GroundedCaption compose_reasoning(const std::vector<GroundedFact>& facts,
                                  const ActionLabel& label, const TemplateSet& templates,
                                  std::uint64_t seed);

// Lexemes the decision sentence must contain for a longitudinal action.
std::vector<std::string> decision_lexemes(Longitudinal longitudinal);

std::string pick_question(QACategory category, const TemplateSet& templates, std::uint64_t seed);

// One template-provenance QA pair per enabled category, in the order given.
std::vector<QAPair> generate_qa(const SceneWindow& window, const ActionLabel& label,
                                const TemplateSet& templates, std::uint64_t seed,
                                const std::vector<QACategory>& categories =
                                    {std::begin(kAllQACategories), std::end(kAllQACategories)},
                                const FactThresholds& thresholds = {});

}  // namespace vlaforge

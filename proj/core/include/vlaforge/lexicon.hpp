#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/facts.hpp"
#include "vlaforge/scene.hpp"

namespace vlaforge {

// Word lists shared by caption rendering and grounding validation. Matching
// works on word_tokens() output, so phrases are token sequences.
class Lexicon {
 public:
  struct CategoryLexeme {
    std::vector<std::string> tokens;
    ObjectCategory category;
  };
  struct SideLexeme {
    std::vector<std::string> tokens;
    Side side;
  };
  struct Mention {
    std::size_t token_index;
    std::size_t length;
    ObjectCategory category;
    std::optional<int> stated_count;
  };
  struct SideMention {
    std::size_t token_index;
    Side side;
  };

  static Lexicon defaults();
  // Missing sections fall back to defaults.
  static Lexicon from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  std::vector<Mention> find_mentions(const std::vector<std::string>& tokens) const;
  std::vector<SideMention> find_sides(const std::vector<std::string>& tokens) const;
  std::optional<int> parse_number(const std::string& token) const;
  bool has_decision_word(const std::vector<std::string>& tokens) const;

  // Rendering.
  std::string noun(ObjectCategory category, std::int64_t count) const;
  std::string count_word(std::int64_t n) const;
  std::string indefinite(ObjectCategory category) const;  // "a pedestrian", "an obstacle"
  static std::string side_phrase(Side side);               // "on the front left", "behind"
  static std::string band_phrase(DistanceBand band);       // "near range"

  const std::set<std::string>& decision_words() const { return decision_words_; }

 private:
  std::vector<CategoryLexeme> categories_;  // longest first
  std::vector<SideLexeme> sides_;           // longest first
  std::map<std::string, int> numbers_;
  std::set<std::string> ego_markers_;
  std::set<std::string> maneuver_words_;
  std::set<std::string> decision_words_;
  std::set<std::string> count_modifiers_;
  std::map<ObjectCategory, std::pair<std::string, std::string>> nouns_;  // singular, plural

  void sort_phrases();
};

}  // namespace vlaforge

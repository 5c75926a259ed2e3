#include "vlaforge/lexicon.hpp"

#include <algorithm>
#include <cctype>

#include "vlaforge/errors.hpp"
#include "vlaforge/util.hpp"

namespace vlaforge {

namespace {

std::vector<std::string> split_phrase(const std::string& phrase) { return word_tokens(phrase); }

bool matches_at(const std::vector<std::string>& tokens, std::size_t i,
                const std::vector<std::string>& phrase) {
  if (phrase.empty() || i + phrase.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < phrase.size(); ++k) {
    if (tokens[i + k] != phrase[k]) return false;
  }
  return true;
}

std::set<std::string> string_set(const nlohmann::json& j) {
  std::set<std::string> out;
  for (const auto& v : j) out.insert(to_lower(v.get<std::string>()));
  return out;
}

}  // namespace

Lexicon Lexicon::defaults() {
  Lexicon lex;
  const std::vector<std::pair<ObjectCategory, std::vector<std::string>>> categories = {
      {ObjectCategory::kVehicle,
       {"vehicle", "vehicles", "car", "cars", "truck", "trucks", "bus", "buses", "van", "vans"}},
      {ObjectCategory::kPedestrian,
       {"pedestrian", "pedestrians", "person", "people", "walker", "walkers"}},
      {ObjectCategory::kCyclist,
       {"cyclist", "cyclists", "bicyclist", "bicyclists", "bicycle", "bicycles", "bike", "bikes"}},
      {ObjectCategory::kTrafficLight,
       {"traffic light", "traffic lights", "traffic signal", "traffic signals", "signal light",
        "signal lights"}},
      {ObjectCategory::kTrafficSign, {"traffic sign", "traffic signs", "road sign", "road signs"}},
      {ObjectCategory::kOther, {"obstacle", "obstacles", "barrier", "barriers", "cone", "cones"}},
  };
  for (const auto& [cat, phrases] : categories) {
    for (const auto& p : phrases) lex.categories_.push_back({split_phrase(p), cat});
  }
  const std::vector<std::pair<std::string, Side>> sides = {
      {"front left", Side::kFrontLeft},   {"front-left", Side::kFrontLeft},
      {"front right", Side::kFrontRight}, {"front-right", Side::kFrontRight},
      {"in front", Side::kFront},         {"ahead", Side::kFront},
      {"front", Side::kFront},            {"left", Side::kLeft},
      {"right", Side::kRight},            {"behind", Side::kRear},
      {"rear", Side::kRear},
  };
  for (const auto& [p, s] : sides) lex.sides_.push_back({split_phrase(p), s});
  const char* words[] = {"zero",    "one",     "two",       "three",    "four",
                         "five",    "six",     "seven",     "eight",    "nine",
                         "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
                         "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
                         "twenty"};
  for (int i = 0; i <= 20; ++i) lex.numbers_[words[i]] = i;
  lex.ego_markers_ = {"ego", "our", "my"};
  lex.maneuver_words_ = {"turn",   "turns",   "turning", "steer",    "steers", "steering",
                         "merge",  "merges",  "merging", "change",   "changes", "changing",
                         "lane",   "lanes",   "swerve",  "swerving"};
  lex.decision_words_ = {"therefore", "decision", "should", "must",  "will",
                         "decides",   "plans",    "plan",   "hence"};
  lex.count_modifiers_ = {"other",    "more",   "parked", "moving",     "oncoming", "nearby",
                          "stationary", "additional", "large", "small", "crossing", "waiting"};
  lex.nouns_ = {
      {ObjectCategory::kVehicle, {"vehicle", "vehicles"}},
      {ObjectCategory::kPedestrian, {"pedestrian", "pedestrians"}},
      {ObjectCategory::kCyclist, {"cyclist", "cyclists"}},
      {ObjectCategory::kTrafficLight, {"traffic light", "traffic lights"}},
      {ObjectCategory::kTrafficSign, {"traffic sign", "traffic signs"}},
      {ObjectCategory::kOther, {"obstacle", "obstacles"}},
  };
  lex.sort_phrases();
  return lex;
}

void Lexicon::sort_phrases() {
  std::stable_sort(categories_.begin(), categories_.end(),
                   [](const auto& a, const auto& b) { return a.tokens.size() > b.tokens.size(); });
  std::stable_sort(sides_.begin(), sides_.end(),
                   [](const auto& a, const auto& b) { return a.tokens.size() > b.tokens.size(); });
}

Lexicon Lexicon::from_json(const nlohmann::json& j) {
  Lexicon lex = defaults();
  if (!j.is_object()) throw ConfigError("lexicon must be a JSON object");
  try {
    if (auto it = j.find("categories"); it != j.end()) {
      lex.categories_.clear();
      for (const auto& [name, phrases] : it->items()) {
        const auto cat = parse_category(name);
        if (!cat) throw ConfigError("lexicon: unknown category '" + name + "'");
        for (const auto& p : phrases) {
          lex.categories_.push_back({split_phrase(p.get<std::string>()), *cat});
        }
      }
    }
    if (auto it = j.find("sides"); it != j.end()) {
      lex.sides_.clear();
      for (const auto& [phrase, side_name] : it->items()) {
        const auto side = parse_side(side_name.get<std::string>());
        if (!side) throw ConfigError("lexicon: unknown side '" + side_name.get<std::string>() + "'");
        lex.sides_.push_back({split_phrase(phrase), *side});
      }
    }
    if (auto it = j.find("numbers"); it != j.end()) {
      lex.numbers_.clear();
      for (const auto& [word, value] : it->items()) lex.numbers_[to_lower(word)] = value.get<int>();
    }
    if (auto it = j.find("ego_markers"); it != j.end()) lex.ego_markers_ = string_set(*it);
    if (auto it = j.find("maneuver_words"); it != j.end()) lex.maneuver_words_ = string_set(*it);
    if (auto it = j.find("decision_words"); it != j.end()) lex.decision_words_ = string_set(*it);
    if (auto it = j.find("count_modifiers"); it != j.end()) lex.count_modifiers_ = string_set(*it);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("lexicon: ") + e.what());
  }
  lex.sort_phrases();
  return lex;
}

nlohmann::json Lexicon::to_json() const {
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& c : categories_) {
    cats[std::string(to_string(c.category))].push_back(join(c.tokens, " "));
  }
  nlohmann::json sides = nlohmann::json::object();
  for (const auto& s : sides_) sides[join(s.tokens, " ")] = std::string(to_string(s.side));
  return {{"categories", cats},
          {"sides", sides},
          {"numbers", numbers_},
          {"ego_markers", ego_markers_},
          {"maneuver_words", maneuver_words_},
          {"decision_words", decision_words_},
          {"count_modifiers", count_modifiers_}};
}

std::optional<int> Lexicon::parse_number(const std::string& token) const {
  if (!token.empty() && std::all_of(token.begin(), token.end(),
                                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    if (token.size() > 6) return std::nullopt;
    return std::stoi(token);
  }
  auto it = numbers_.find(token);
  if (it == numbers_.end()) return std::nullopt;
  return it->second;
}

std::vector<Lexicon::Mention> Lexicon::find_mentions(const std::vector<std::string>& tokens) const {
  std::vector<Mention> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const CategoryLexeme* hit = nullptr;
    for (const auto& lex : categories_) {
      if (matches_at(tokens, i, lex.tokens)) {
        hit = &lex;
        break;
      }
    }
    if (hit == nullptr) {
      ++i;
      continue;
    }
    const bool ego = i > 0 && ego_markers_.contains(tokens[i - 1]);
    if (!ego) {
      Mention m{i, hit->tokens.size(), hit->category, std::nullopt};
      // Look back over at most one modifier for a stated number.
      std::size_t back = i;
      for (int step = 0; step < 2 && back > 0; ++step) {
        const std::string& prev = tokens[back - 1];
        if (auto n = parse_number(prev)) {
          m.stated_count = *n;
          break;
        }
        if (!count_modifiers_.contains(prev)) break;
        --back;
      }
      out.push_back(m);
    }
    i += hit->tokens.size();
  }
  return out;
}

std::vector<Lexicon::SideMention> Lexicon::find_sides(const std::vector<std::string>& tokens) const {
  std::vector<SideMention> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const SideLexeme* hit = nullptr;
    for (const auto& lex : sides_) {
      if (matches_at(tokens, i, lex.tokens)) {
        hit = &lex;
        break;
      }
    }
    if (hit == nullptr) {
      ++i;
      continue;
    }
    bool maneuver = false;
    for (std::size_t k = 1; k <= 3 && k <= i; ++k) {
      if (maneuver_words_.contains(tokens[i - k])) maneuver = true;
    }
    // "right of way"
    const bool idiom = i + 2 < tokens.size() && tokens[i + 1] == "of" && tokens[i + 2] == "way";
    if (!maneuver && !idiom) out.push_back({i, hit->side});
    i += hit->tokens.size();
  }
  return out;
}

bool Lexicon::has_decision_word(const std::vector<std::string>& tokens) const {
  return std::any_of(tokens.begin(), tokens.end(),
                     [&](const std::string& t) { return decision_words_.contains(t); });
}

std::string Lexicon::noun(ObjectCategory category, std::int64_t count) const {
  auto it = nouns_.find(category);
  if (it == nouns_.end()) return "object";
  return count == 1 ? it->second.first : it->second.second;
}

std::string Lexicon::count_word(std::int64_t n) const {
  for (const auto& [word, value] : numbers_) {
    if (value == n) return word;
  }
  return std::to_string(n);
}

std::string Lexicon::indefinite(ObjectCategory category) const {
  const std::string n = noun(category, 1);
  const bool vowel = !n.empty() && std::string_view("aeiou").find(n.front()) != std::string_view::npos;
  return (vowel ? "an " : "a ") + n;
}

std::string Lexicon::side_phrase(Side side) {
  switch (side) {
    case Side::kFront: return "in front";
    case Side::kFrontLeft: return "on the front left";
    case Side::kFrontRight: return "on the front right";
    case Side::kLeft: return "on the left";
    case Side::kRight: return "on the right";
    case Side::kRear: return "behind";
  }
  return "nearby";
}

std::string Lexicon::band_phrase(DistanceBand band) {
  switch (band) {
    case DistanceBand::kNear: return "near range";
    case DistanceBand::kMid: return "mid range";
    case DistanceBand::kFar: return "far range";
  }
  return "unknown range";
}

}  // namespace vlaforge

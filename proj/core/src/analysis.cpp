#include "vlaforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vlaforge/errors.hpp"
#include "vlaforge/scene_store.hpp"
#include "vlaforge/util.hpp"

namespace vlaforge {

namespace {

constexpr ObjectCategory kProximityCategories[] = {
    ObjectCategory::kVehicle, ObjectCategory::kPedestrian, ObjectCategory::kCyclist};

ActionMatrix empty_matrix(bool maneuver) {
  ActionMatrix m;
  for (SpeedState s : kAllSpeedStates) m.rows.emplace_back(to_string(s));
  if (maneuver) {
    for (Maneuver x : kAllManeuvers) m.cols.emplace_back(to_string(x));
  } else {
    for (Longitudinal x : kAllLongitudinal) m.cols.emplace_back(to_string(x));
  }
  m.counts.assign(m.rows.size(), std::vector<std::size_t>(m.cols.size(), 0));
  return m;
}

template <typename E, std::size_t N>
std::size_t index_of(const E (&all)[N], E value) {
  for (std::size_t i = 0; i < N; ++i) {
    if (all[i] == value) return i;
  }
  return 0;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IOError("failed writing '" + path.string() + "'");
}

}  // namespace

int StatsOptions::distance_bins() const {
  return static_cast<int>(std::ceil(max_distance_m / bin_width_m - 1e-9));
}

std::set<std::string> StatsOptions::load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open stopword list '" + path.string() + "'");
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string w = to_lower(trim(line));
    if (!w.empty() && w.front() != '#') out.insert(w);
  }
  return out;
}

std::size_t ActionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& r : counts) {
    for (auto c : r) n += c;
  }
  return n;
}

std::vector<std::vector<double>> ActionMatrix::row_normalized() const {
  std::vector<std::vector<double>> out;
  for (const auto& r : counts) {
    std::size_t sum = 0;
    for (auto c : r) sum += c;
    std::vector<double> row(r.size(), 0.0);
    if (sum > 0) {
      for (std::size_t j = 0; j < r.size(); ++j) {
        row[j] = static_cast<double>(r[j]) / static_cast<double>(sum);
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

double StatsBundle::share_has_cross() const {
  return frames ? static_cast<double>(frames_with_cross) / static_cast<double>(frames) : 0.0;
}
double StatsBundle::share_right_to_left() const {
  return frames ? static_cast<double>(frames_right_to_left) / static_cast<double>(frames) : 0.0;
}
double StatsBundle::share_left_to_right() const {
  return frames ? static_cast<double>(frames_left_to_right) / static_cast<double>(frames) : 0.0;
}

std::vector<std::pair<std::string, std::size_t>> StatsBundle::sorted_words() const {
  std::vector<std::pair<std::string, std::size_t>> out(word_freq.begin(), word_freq.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

nlohmann::json StatsBundle::to_json() const {
  auto hist = [](const std::map<int, std::size_t>& h) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : h) j[std::to_string(k)] = v;
    return j;
  };
  auto matrix = [](const ActionMatrix& m) {
    return nlohmann::json{{"rows", m.rows},
                          {"cols", m.cols},
                          {"counts", m.counts},
                          {"row_normalized", m.row_normalized()}};
  };
  nlohmann::json prox = nlohmann::json::object();
  for (const auto& [cat, h] : proximity) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [key, n] : h) {
      cells.push_back({{"count_bin", key.first},
                       {"distance_bin", key.second == kAbsentColumn ? nlohmann::json("absent")
                                                                    : nlohmann::json(key.second)},
                       {"frames", n}});
    }
    prox[std::string(to_string(cat))] = cells;
  }
  nlohmann::json words = nlohmann::json::array();
  for (const auto& [w, n] : sorted_words()) words.push_back({w, n});
  return {{"frames", frames},
          {"lanes", {{"same", hist(lanes_same)},
                     {"opposite", hist(lanes_opposite)},
                     {"total", hist(lanes_total)}}},
          {"cross_lane_shares", {{"has", share_has_cross()},
                                 {"right_to_left", share_right_to_left()},
                                 {"left_to_right", share_left_to_right()}}},
          {"proximity", prox},
          {"action_matrix", {{"speed_by_longitudinal", matrix(speed_by_longitudinal)},
                             {"speed_by_maneuver", matrix(speed_by_maneuver)}}},
          {"word_freq", words}};
}

StatsAccumulator::StatsAccumulator(StatsOptions options) : options_(std::move(options)) {
  if (!(options_.bin_width_m > 0.0) || !(options_.max_distance_m > 0.0) ||
      options_.max_count_bin < 1) {
    throw ConfigError("stats binning must be positive");
  }
  bundle_.speed_by_longitudinal = empty_matrix(false);
  bundle_.speed_by_maneuver = empty_matrix(true);
  for (ObjectCategory c : kProximityCategories) bundle_.proximity[c];
}

void StatsAccumulator::add(const FrameRecord& frame, const ActionLabel& label,
                           const std::string& reasoning) {
  auto& b = bundle_;
  ++b.frames;
  ++b.lanes_same[frame.lanes.same_direction_lanes];
  ++b.lanes_opposite[frame.lanes.opposite_direction_lanes];
  ++b.lanes_total[frame.lanes.total_lanes()];

  bool rtl = false;
  bool ltr = false;
  for (const auto& cl : frame.lanes.cross_lanes) {
    (cl.direction == CrossDirection::kRightToLeft ? rtl : ltr) = true;
  }
  if (!frame.lanes.cross_lanes.empty()) ++b.frames_with_cross;
  if (rtl) ++b.frames_right_to_left;
  if (ltr) ++b.frames_left_to_right;

  const int bins = options_.distance_bins();
  for (ObjectCategory c : kProximityCategories) {
    const ProximitySummary s = min_distances(frame, c);
    const int count_bin = std::min(static_cast<int>(s.count), options_.max_count_bin);
    int dist_bin = kAbsentColumn;
    if (s.min_distance) {
      dist_bin = std::min(bins, static_cast<int>(std::floor(*s.min_distance / options_.bin_width_m)));
    }
    ++b.proximity[c][{count_bin, dist_bin}];
  }

  const std::size_t row = index_of(kAllSpeedStates, label.speed_state);
  ++b.speed_by_longitudinal.counts[row][index_of(kAllLongitudinal, label.longitudinal)];
  ++b.speed_by_maneuver.counts[row][index_of(kAllManeuvers, label.maneuver)];

  for (const auto& w : tokenize(reasoning)) {
    if (!options_.stopwords.contains(w)) ++b.word_freq[w];
  }
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  auto& b = bundle_;
  const auto& o = other.bundle_;
  b.frames += o.frames;
  for (const auto& [k, v] : o.lanes_same) b.lanes_same[k] += v;
  for (const auto& [k, v] : o.lanes_opposite) b.lanes_opposite[k] += v;
  for (const auto& [k, v] : o.lanes_total) b.lanes_total[k] += v;
  b.frames_with_cross += o.frames_with_cross;
  b.frames_right_to_left += o.frames_right_to_left;
  b.frames_left_to_right += o.frames_left_to_right;
  for (const auto& [cat, h] : o.proximity) {
    for (const auto& [key, n] : h) b.proximity[cat][key] += n;
  }
  for (std::size_t i = 0; i < b.speed_by_longitudinal.counts.size(); ++i) {
    for (std::size_t j = 0; j < b.speed_by_longitudinal.counts[i].size(); ++j) {
      b.speed_by_longitudinal.counts[i][j] += o.speed_by_longitudinal.counts[i][j];
    }
    for (std::size_t j = 0; j < b.speed_by_maneuver.counts[i].size(); ++j) {
      b.speed_by_maneuver.counts[i][j] += o.speed_by_maneuver.counts[i][j];
    }
  }
  for (const auto& [w, n] : o.word_freq) b.word_freq[w] += n;
}

StatsBundle StatsAccumulator::finish() const {
  if (bundle_.frames == 0) throw EmptyCorpusError("statistics need at least one frame");
  return bundle_;
}

StatsBundle compute_stats(const std::vector<StatsRecord>& corpus, const StatsOptions& options) {
  StatsAccumulator acc(options);
  for (const auto& r : corpus) acc.add(*r.frame, r.label, r.reasoning);
  return acc.finish();
}

std::string word_freq_csv(const StatsBundle& bundle) {
  std::string out = "word,count\n";
  for (const auto& [w, n] : bundle.sorted_words()) out += w + "," + std::to_string(n) + "\n";
  return out;
}

void export_stats(const StatsBundle& bundle, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IOError("cannot create '" + out_dir.string() + "': " + ec.message());

  std::string lanes = "kind,lanes,frames\n";
  const std::pair<const char*, const std::map<int, std::size_t>*> kinds[] = {
      {"same", &bundle.lanes_same}, {"opposite", &bundle.lanes_opposite},
      {"total", &bundle.lanes_total}};
  for (const auto& [name, h] : kinds) {
    for (const auto& [k, v] : *h) {
      lanes += std::string(name) + "," + std::to_string(k) + "," + std::to_string(v) + "\n";
    }
  }
  write_file(out_dir / "lanes.csv", lanes);

  write_file(out_dir / "cross_lanes.csv",
             "share,value\nhas," + fmt(bundle.share_has_cross()) + "\nright_to_left," +
                 fmt(bundle.share_right_to_left()) + "\nleft_to_right," +
                 fmt(bundle.share_left_to_right()) + "\n");

  for (const auto& [cat, h] : bundle.proximity) {
    std::string csv = "count_bin,distance_bin,frames\n";
    for (const auto& [key, n] : h) {
      csv += std::to_string(key.first) + "," +
             (key.second == kAbsentColumn ? std::string("absent") : std::to_string(key.second)) +
             "," + std::to_string(n) + "\n";
    }
    write_file(out_dir / ("proximity_" + std::string(to_string(cat)) + ".csv"), csv);
  }

  auto matrix_csv = [](const ActionMatrix& m) {
    std::string csv = "speed_state";
    for (const auto& c : m.cols) csv += "," + c;
    csv += "\n";
    const auto norm = m.row_normalized();
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      csv += m.rows[i];
      for (double v : norm[i]) csv += "," + fmt(v);
      csv += "\n";
    }
    return csv;
  };
  write_file(out_dir / "action_speed_longitudinal.csv", matrix_csv(bundle.speed_by_longitudinal));
  write_file(out_dir / "action_speed_maneuver.csv", matrix_csv(bundle.speed_by_maneuver));
  write_file(out_dir / "word_freq.csv", word_freq_csv(bundle));
  write_file(out_dir / "stats.json", bundle.to_json().dump(2) + "\n");
}

}  // namespace vlaforge

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/action_labeler.hpp"
#include "vlaforge/scene.hpp"

namespace vlaforge {

struct StatsOptions {
  double bin_width_m = 5.0;
  double max_distance_m = 50.0;  // beyond this: overflow bin
  int max_count_bin = 10;        // counts >= this share the last row
  std::set<std::string> stopwords;

  int distance_bins() const;  // regular bins, overflow excluded
  static std::set<std::string> load_stopwords(const std::filesystem::path& path);
};

inline constexpr int kAbsentColumn = -1;

// count bin x distance bin of the nearest object; frames without the
// category land in (0, kAbsentColumn). The overflow column equals
// distance_bins().
using Hist2D = std::map<std::pair<int, int>, std::size_t>;

struct ActionMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  // Rows divided by their sums; empty rows stay zero.
  std::vector<std::vector<double>> row_normalized() const;
};

struct StatsBundle {
  std::size_t frames = 0;
  std::map<int, std::size_t> lanes_same;
  std::map<int, std::size_t> lanes_opposite;
  std::map<int, std::size_t> lanes_total;
  std::size_t frames_with_cross = 0;
  std::size_t frames_right_to_left = 0;
  std::size_t frames_left_to_right = 0;
  std::map<ObjectCategory, Hist2D> proximity;  // vehicle, pedestrian, cyclist
  ActionMatrix speed_by_longitudinal;
  ActionMatrix speed_by_maneuver;
  std::map<std::string, std::size_t> word_freq;

  double share_has_cross() const;
  double share_right_to_left() const;
  double share_left_to_right() const;

  // word_freq sorted by count descending, ties alphabetical.
  std::vector<std::pair<std::string, std::size_t>> sorted_words() const;

  nlohmann::json to_json() const;
};

// Map-reduce friendly accumulator: partial accumulators merge by addition.
class StatsAccumulator {
 public:
  explicit StatsAccumulator(StatsOptions options = {});

  void add(const FrameRecord& frame, const ActionLabel& label, const std::string& reasoning);
  void merge(const StatsAccumulator& other);
  // Throws EmptyCorpusError when nothing was added.
  StatsBundle finish() const;

 private:
  StatsOptions options_;
  StatsBundle bundle_;
};

struct StatsRecord {
  const FrameRecord* frame;
  ActionLabel label;
  std::string reasoning;
};

StatsBundle compute_stats(const std::vector<StatsRecord>& corpus, const StatsOptions& options = {});

// Writes lanes.csv, cross_lanes.csv, proximity_<category>.csv,
// action_speed_longitudinal.csv, action_speed_maneuver.csv, word_freq.csv
// and stats.json. Throws IOError.
void export_stats(const StatsBundle& bundle, const std::filesystem::path& out_dir);

std::string word_freq_csv(const StatsBundle& bundle);

}  // namespace vlaforge

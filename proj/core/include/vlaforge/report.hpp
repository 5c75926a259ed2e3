#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vlaforge/plan_metrics.hpp"

namespace vlaforge {

struct PlanRow {
  std::string method;
  HorizonValues l2;  // metres
  HorizonValues cr;  // percent
  HorizonValues ir;  // percent, drivable-area violation
};

struct MetricReport {
  std::optional<PlanRow> plan;
  std::size_t plan_samples = 0;
  std::map<std::string, double> nlg;  // see text_scores()
  std::size_t nlg_samples = 0;

  nlohmann::json to_json() const;
  // Flat "metric,horizon,value" lines.
  std::string to_csv() const;
  // Table-2-shaped grid with values rounded to two decimals.
  std::string to_table() const;
};

// Display label of an NLG metric key ("bleu1" -> "BLEU-1 (sentence mean)").
std::string nlg_label(const std::string& key);

}  // namespace vlaforge

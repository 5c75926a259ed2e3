#include "vlaforge/report.hpp"

#include <cstdio>
#include <sstream>

namespace vlaforge {

namespace {

nlohmann::json horizon_json(const HorizonValues& v) {
  return {{"1s", v.at[0]}, {"2s", v.at[1]}, {"3s", v.at[2]}, {"avg", v.avg()}};
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string nlg_label(const std::string& key) {
  if (key == "bleu1") return "BLEU-1 (sentence mean)";
  if (key == "bleu4") return "BLEU-4 (sentence mean)";
  if (key == "rouge_l") return "ROUGE-L";
  if (key == "cider") return "CIDEr (plain)";
  if (key == "meteor_s") return "METEOR-s";
  return key;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  if (plan) {
    j["plan"] = {{"method", plan->method},
                 {"samples", plan_samples},
                 {"l2_m", horizon_json(plan->l2)},
                 {"cr_pct", horizon_json(plan->cr)},
                 {"ir_pct", horizon_json(plan->ir)},
                 {"notes",
                  {"IR is the drivable-area violation rate",
                   "CR uses the configured ego footprint"}}};
  }
  if (!nlg.empty()) {
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [k, v] : nlg) scores[k] = v;
    j["nlg"] = {{"samples", nlg_samples},
                {"scores", scores},
                {"notes",
                 {"BLEU is the mean of sentence-level scores",
                  "METEOR-s uses exact and stem matches only", "CIDEr is plain (not CIDEr-D)"}}};
  }
  return j;
}

std::string MetricReport::to_csv() const {
  std::ostringstream out;
  out << "metric,horizon,value\n";
  if (plan) {
    const std::pair<const char*, const HorizonValues*> rows[] = {
        {"l2_m", &plan->l2}, {"cr_pct", &plan->cr}, {"ir_pct", &plan->ir}};
    for (const auto& [name, v] : rows) {
      out << name << ",1s," << full(v->at[0]) << "\n";
      out << name << ",2s," << full(v->at[1]) << "\n";
      out << name << ",3s," << full(v->at[2]) << "\n";
      out << name << ",avg," << full(v->avg()) << "\n";
    }
  }
  for (const auto& [k, v] : nlg) out << k << ",," << full(v) << "\n";
  return out.str();
}

std::string MetricReport::to_table() const {
  std::ostringstream out;
  if (plan) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-16s | %-27s | %-27s | %-27s\n", "Method",
                  "L2 (m) 1s/2s/3s/Avg", "CR (%) 1s/2s/3s/Avg", "IR (%) 1s/2s/3s/Avg");
    out << line;
    auto cell = [](const HorizonValues& v) {
      return fixed2(v.at[0]) + " " + fixed2(v.at[1]) + " " + fixed2(v.at[2]) + " " +
             fixed2(v.avg());
    };
    std::snprintf(line, sizeof(line), "%-16s | %-27s | %-27s | %-27s\n", plan->method.c_str(),
                  cell(plan->l2).c_str(), cell(plan->cr).c_str(), cell(plan->ir).c_str());
    out << line;
    out << "(IR = drivable-area violation rate; " << plan_samples << " samples)\n";
  }
  if (!nlg.empty()) {
    for (const auto& [k, v] : nlg) {
      char line[128];
      std::snprintf(line, sizeof(line), "%-24s %.4f\n", nlg_label(k).c_str(), v);
      out << line;
    }
    out << "(" << nlg_samples << " samples)\n";
  }
  return out.str();
}

}  // namespace vlaforge

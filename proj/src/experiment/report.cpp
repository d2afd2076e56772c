#include "pfuse/experiment/report.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pfuse/common/error.hpp"

namespace pfuse::experiment {

using nlohmann::ordered_json;

std::vector<double> EvaluationTable::improvement() const {
  std::vector<double> out(objectives.size());
  for (std::size_t o = 0; o < objectives.size(); ++o) out[o] = pantheon.at(o) - formula.at(o);
  return out;
}

double EvaluationTable::average_improvement() const {
  const auto d = improvement();
  if (d.empty()) return 0.0;
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

std::size_t EvaluationTable::strictly_improved() const {
  std::size_t n = 0;
  for (double d : improvement()) n += d > 0.0 ? 1 : 0;
  return n;
}

namespace {

ordered_json by_objective(const std::vector<std::string>& objectives,
                          const std::vector<double>& values) {
  ordered_json j = ordered_json::object();
  for (std::size_t o = 0; o < objectives.size(); ++o) j[objectives[o]] = values.at(o);
  return j;
}

std::vector<double> from_objective_map(const ordered_json& j,
                                       const std::vector<std::string>& objectives) {
  std::vector<double> out;
  for (const auto& name : objectives) out.push_back(j.at(name).get<double>());
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ordered_json to_json(const EvaluationTable& t) {
  ordered_json j;
  j["window"] = t.window_id;
  j["rows"] = t.rows;
  j["objectives"] = t.objectives;
  ordered_json gauc = ordered_json::array();
  auto row = [&](const char* method, const std::vector<double>& values) {
    gauc.push_back(
        {{"method", method}, {"gauc", by_objective(t.objectives, values)}, {"average", mean(values)}});
  };
  row("ranking", t.ranking);
  row("formula", t.formula);
  row("pantheon", t.pantheon);
  row("improvement", t.improvement());
  j["gauc"] = gauc;
  j["strictly_improved"] = t.strictly_improved();
  j["kendall"] = {{"formula", by_objective(t.objectives, t.kendall_formula)},
                  {"pantheon", by_objective(t.objectives, t.kendall_pantheon)}};
  return j;
}

EvaluationTable evaluation_from_json(const ordered_json& j) {
  try {
    EvaluationTable t;
    t.window_id = j.at("window").get<std::string>();
    t.rows = j.at("rows").get<std::size_t>();
    t.objectives = j.at("objectives").get<std::vector<std::string>>();
    for (const auto& row : j.at("gauc")) {
      const auto method = row.at("method").get<std::string>();
      auto values = from_objective_map(row.at("gauc"), t.objectives);
      if (method == "ranking") t.ranking = std::move(values);
      if (method == "formula") t.formula = std::move(values);
      if (method == "pantheon") t.pantheon = std::move(values);
    }
    t.kendall_formula = from_objective_map(j.at("kendall").at("formula"), t.objectives);
    t.kendall_pantheon = from_objective_map(j.at("kendall").at("pantheon"), t.objectives);
    if (t.ranking.size() != t.objectives.size() || t.formula.size() != t.objectives.size() ||
        t.pantheon.size() != t.objectives.size()) {
      throw ConfigError("evaluation table is missing a method row");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("evaluation table: ") + e.what());
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

ordered_json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string gauc_table_csv(const EvaluationTable& t) {
  std::ostringstream out;
  out << "method";
  for (const auto& name : t.objectives) out << ',' << name;
  out << ",average\n";
  auto row = [&](const char* method, const std::vector<double>& values) {
    out << method;
    for (double v : values) out << ',' << format_double(v);
    out << ',' << format_double(mean(values)) << '\n';
  };
  row("ranking", t.ranking);
  row("formula", t.formula);
  row("pantheon", t.pantheon);
  row("improvement", t.improvement());
  return out.str();
}

std::string kendall_table_csv(const EvaluationTable& t) {
  std::ostringstream out;
  out << "pxtr,formula,pantheon\n";
  for (std::size_t o = 0; o < t.objectives.size(); ++o) {
    out << t.objectives[o] << ',' << format_double(t.kendall_formula.at(o)) << ','
        << format_double(t.kendall_pantheon.at(o)) << '\n';
  }
  return out.str();
}

std::string rounds_csv(const std::vector<std::string>& objectives,
                       const std::vector<ordered_json>& trail) {
  std::ostringstream out;
  out << "round,reward,action,target";
  for (const auto& name : objectives) out << ",w_" << name;
  for (const auto& name : objectives) out << ",base_" << name;
  for (const auto& name : objectives) out << ",reference_" << name;
  out << '\n';
  for (const auto& r : trail) {
    out << r.at("round").get<std::size_t>() << ',' << r.at("reward").get<int>() << ','
        << r.at("action").get<std::string>() << ','
        << (r.contains("target") ? r.at("target").get<std::string>() : std::string());
    for (const char* key : {"weights", "base_gauc", "reference_gauc"}) {
      for (const auto& name : objectives) {
        out << ',' << format_double(r.at(key).at(name).get<double>());
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pfuse::experiment

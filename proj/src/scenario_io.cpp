#include "qlim/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qlim {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
}

double number(const json& obj, const std::string& key, const std::string& where, double fallback, bool required) {
  if (!obj.contains(key)) {
    if (required) throw ValidationError("missing key '" + key + "' in " + where);
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError("key '" + key + "' in " + where + " must be a number");
  return v.get<double>();
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::Exact ? "exact" : "paraxial"; }

Scenario scenario_from_json(const json& doc) {
  reject_unknown(doc, {"mode", "k", "z0", "sources", "collectors"}, "scenario");
  Scenario sc;
  if (!doc.contains("mode") || !doc.at("mode").is_string()) throw ValidationError("missing key 'mode' in scenario");
  const auto mode = doc.at("mode").get<std::string>();
  if (mode == "exact") {
    sc.mode = Mode::Exact;
  } else if (mode == "paraxial") {
    sc.mode = Mode::Paraxial;
  } else {
    throw ValidationError("mode must be 'exact' or 'paraxial', got '" + mode + "'");
  }
  sc.k = number(doc, "k", "scenario", 0.0, true);
  sc.z0 = number(doc, "z0", "scenario", 0.0, true);

  if (!doc.contains("sources") || !doc.at("sources").is_array()) throw ValidationError("missing list 'sources'");
  if (!doc.contains("collectors") || !doc.at("collectors").is_array())
    throw ValidationError("missing list 'collectors'");
  const auto& sources = doc.at("sources");
  bool any_weight = false, all_weight = true;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string where = "sources[" + std::to_string(i) + "]";
    reject_unknown(sources[i], {"x", "y", "z", "weight"}, where);
    SourcePoint p;
    p.x = number(sources[i], "x", where, 0.0, false);
    p.y = number(sources[i], "y", where, 0.0, false);
    p.z = number(sources[i], "z", where, 0.0, false);
    const bool has = sources[i].contains("weight");
    any_weight = any_weight || has;
    all_weight = all_weight && has;
    p.weight = number(sources[i], "weight", where, 1.0, false);
    sc.sources.push_back(p);
  }
  if (any_weight && !all_weight) throw ValidationError("weights must be given for all sources or none");
  const auto& collectors = doc.at("collectors");
  for (std::size_t j = 0; j < collectors.size(); ++j) {
    const std::string where = "collectors[" + std::to_string(j) + "]";
    reject_unknown(collectors[j], {"u", "v"}, where);
    sc.collectors.push_back({number(collectors[j], "u", where, 0.0, true), number(collectors[j], "v", where, 0.0, false)});
  }
  validate(sc);
  return normalize_weights(sc);
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

json to_json(const Scenario& sc) {
  json sources = json::array();
  for (const auto& p : sc.sources) sources.push_back({{"x", p.x}, {"y", p.y}, {"z", p.z}, {"weight", p.weight}});
  json collectors = json::array();
  for (const auto& c : sc.collectors) collectors.push_back({{"u", c.u}, {"v", c.v}});
  return {{"mode", to_string(sc.mode)}, {"k", sc.k}, {"z0", sc.z0}, {"sources", sources}, {"collectors", collectors}};
}

std::string scenario_digest(const Scenario& sc) {
  const std::string text = to_json(sc).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<Collector> disc_aperture(double radius, double spacing) {
  if (!(radius > 0.0) || !(spacing > 0.0)) throw ValidationError("disc radius and spacing must be positive");
  std::vector<Collector> out;
  const int n = static_cast<int>(std::ceil(radius / spacing));
  const double r2 = radius * radius * (1.0 + 1e-12);
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const double u = i * spacing, v = j * spacing;
      if (u * u + v * v <= r2) out.push_back({u, v});
    }
  return out;
}

std::vector<NamedScenario> bundled_scenarios() {
  auto two_sources = [](double dx) {
    return std::vector<SourcePoint>{{dx / 2, 0.0, 0.0, 0.5}, {-dx / 2, 0.0, 0.0, 0.5}};
  };
  std::vector<NamedScenario> out;
  out.push_back({"two_collector.scn", Scenario{two_sources(0.2), {{5.0, 0.0}, {-5.0, 0.0}}, 1.0, 100.0, Mode::Paraxial}});
  out.push_back({"four_collector.scn",
                 Scenario{two_sources(0.2), {{3.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {-3.0, 0.0}}, 1.0, 100.0, Mode::Paraxial}});
  out.push_back({"four_collector_qft.scn",
                 Scenario{two_sources(0.1), {{3.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {-3.0, 0.0}}, 1.0, 100.0, Mode::Paraxial}});
  out.push_back({"disc_aperture_r1.scn", Scenario{two_sources(0.2), disc_aperture(1.0, 0.1), 1.0, 100.0, Mode::Paraxial}});
  return out;
}

}  // namespace qlim

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlim/geometry.hpp"

namespace qlim {

// Scenario files are JSON objects (comments allowed):
//   {"mode": "paraxial"|"exact", "k": 1, "z0": 100,
//    "sources": [{"x": 0.1, "y": 0, "z": 0, "weight": 0.5}, ...],
//    "collectors": [{"u": 5, "v": 0}, ...]}
// Missing weights default to 1/N_S; weights are normalized to sum to one.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);

// "fnv1a64:<hex>" of the canonical JSON form.
std::string scenario_digest(const Scenario& scenario);

std::string to_string(Mode mode);

// Square lattice (i h, j h) clipped to the disc of the given radius, rim included.
std::vector<Collector> disc_aperture(double radius, double spacing);

struct NamedScenario {
  std::string file_name;
  Scenario scenario;
};

std::vector<NamedScenario> bundled_scenarios();

}  // namespace qlim

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tacnog/core_model.hpp"

namespace tacnog {

/// Scenario file schema (angles in degrees, a_max in g, defaulting to unbounded):
///   {"pursuer": {"x_m", "y_m", "theta_deg"}, "target": {"x_m", "y_m"},
///    "speed_mps", "impact_time_s", "impact_angle_deg", "a_max_g"?}
DimensionalScenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const DimensionalScenario& sc);

DimensionalScenario load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const DimensionalScenario& sc);

}  // namespace tacnog

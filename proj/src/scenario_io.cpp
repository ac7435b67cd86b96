#include "tacnog/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "tacnog/errors.hpp"

namespace tacnog {

using nlohmann::json;

DimensionalScenario scenario_from_json(const json& j) {
    DimensionalScenario sc;
    try {
        const auto& p = j.at("pursuer");
        const auto& t = j.at("target");
        sc.pursuer0 = EngagementState::make(p.at("x_m").get<double>(), p.at("y_m").get<double>(),
                                            p.at("theta_deg").get<double>() * kDegToRad);
        sc.target = {t.at("x_m").get<double>(), t.at("y_m").get<double>()};
        sc.speed = j.at("speed_mps").get<double>();
        sc.impact_time = j.at("impact_time_s").get<double>();
        sc.impact_angle = j.at("impact_angle_deg").get<double>() * kDegToRad;
        if (j.contains("a_max_g") && !j.at("a_max_g").is_null())
            sc.a_max = j.at("a_max_g").get<double>() * kGravity;
    } catch (const json::exception& e) {
        throw InvalidScenario(std::string("scenario json: ") + e.what());
    }
    sc.validate();
    return sc;
}

json scenario_to_json(const DimensionalScenario& sc) {
    json j;
    j["pursuer"] = {{"x_m", sc.pursuer0.x}, {"y_m", sc.pursuer0.y}, {"theta_deg", sc.pursuer0.theta / kDegToRad}};
    j["target"] = {{"x_m", sc.target.x}, {"y_m", sc.target.y}};
    j["speed_mps"] = sc.speed;
    j["impact_time_s"] = sc.impact_time;
    j["impact_angle_deg"] = sc.impact_angle / kDegToRad;
    if (std::isfinite(sc.a_max)) j["a_max_g"] = sc.a_max / kGravity;
    return j;
}

DimensionalScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidScenario(path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

void save_scenario(const std::filesystem::path& path, const DimensionalScenario& sc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scenario " + path.string());
    out << scenario_to_json(sc).dump(2) << '\n';
}

}  // namespace tacnog

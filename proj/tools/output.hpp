#pragma once

// CSV and JSON writers for the CLI. CSV doubles use 17 significant digits.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

#include "cartimpact/experiments.hpp"
#include "cartimpact/floquet.hpp"
#include "cartimpact/integrate.hpp"
#include "cartimpact/orbit.hpp"

namespace cartimpact::app {

std::string fmt17(double v);

/// t,theta,x,p_theta,p_x,arc_index; one row per recorded sample.
std::string trajectory_csv(const HybridTrajectory& traj);
std::string impacts_csv(const HybridTrajectory& traj);
std::string sweep_csv(const SweepResult& res);
std::string basin_csv(const BasinResult& res);

nlohmann::json to_json(const ResetLaw& law);
ResetLaw reset_law_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Params& p);
nlohmann::json to_json(const OrbitSpec& orbit, const Params& p);
/// Throws std::runtime_error (via nlohmann) on missing fields.
OrbitSpec orbit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MonodromyReport& rep);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace cartimpact::app

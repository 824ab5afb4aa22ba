#pragma once

// Run configuration: YAML loading with field/line context, defaults, and the
// resolved echo written next to every output.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cartimpact/experiments.hpp"
#include "cartimpact/hybrid.hpp"
#include "cartimpact/integrate.hpp"
#include "cartimpact/model.hpp"
#include "cartimpact/orbit.hpp"

namespace cartimpact::app {

/// Malformed or incomplete configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateSection {
  std::optional<State> initial_state;
  /// Empty means: use the orbit walls.
  std::vector<GuardedReset> guards;
  std::size_t sample_stride = 1;
  /// Horizon for simulate only; defaults to integrator.t_max.
  std::optional<double> t_max;
};

struct OrbitSection {
  WallSystem walls = nominal_walls(0.5, -4.0);
  SectionState guess{-0.48353900527, 0.087981632116, 2.9298307138};
  NewtonOptions newton;
  /// OrbitSpec JSON to use instead of searching (floquet, sweep, basin).
  std::optional<std::filesystem::path> file;
};

struct FloquetSection {
  MonodromyOptions monodromy;
  double fd_step = 1e-6;
  double fd_rel_tol = 1e-4;
};

struct RunConfig {
  Params params{1.0, 1.0, 1.0, 9.81, 1.0};
  IntegratorConfig integrator;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 12345;
  SimulateSection simulate;
  OrbitSection orbit;
  FloquetSection floquet;
  SweepConfig sweep;
  BasinConfig basin;
  FeedbackGains basin_gains{-5.0, 5.0, 0.0};
};

/// Parse a YAML document. Unknown keys and type mismatches throw
/// ConfigError naming the field and its line.
RunConfig parse_config(const std::string& yaml_text, const std::string& source_name = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// YAML with every field resolved, doubles printed with 17 significant digits.
std::string dump_config(const RunConfig& cfg);

}  // namespace cartimpact::app

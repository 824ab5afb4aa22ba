#include "output.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iterator>
#include <stdexcept>

namespace cartimpact::app {

using nlohmann::json;

std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

namespace {

void append_state(std::string& out, const State& s) {
  fmt::format_to(std::back_inserter(out), ",{:.17g},{:.17g},{:.17g},{:.17g}", s.theta, s.x, s.p_theta, s.p_x);
}

std::string reset_kind_name(ResetKind k) {
  switch (k) {
    case ResetKind::InteriorElastic:
      return "interior_elastic";
    case ResetKind::ExteriorElastic:
      return "exterior_elastic";
    case ResetKind::ControlledWall:
      return "controlled";
    case ResetKind::FeedbackWall:
      return "feedback";
  }
  return "unknown";
}

}  // namespace

std::string trajectory_csv(const HybridTrajectory& traj) {
  std::string out = "t,theta,x,p_theta,p_x,arc_index\n";
  for (std::size_t a = 0; a < traj.arcs.size(); ++a) {
    for (const Sample& s : traj.arcs[a].samples) {
      out += fmt17(s.t);
      append_state(out, s.state);
      fmt::format_to(std::back_inserter(out), ",{}\n", a);
    }
  }
  return out;
}

std::string impacts_csv(const HybridTrajectory& traj) {
  std::string out =
      "t,guard_index,pre_theta,pre_x,pre_p_theta,pre_p_x,post_theta,post_x,post_p_theta,post_p_x,"
      "impulse,energy_jump\n";
  for (const ImpactRecord& imp : traj.impacts) {
    fmt::format_to(std::back_inserter(out), "{:.17g},{}", imp.time, imp.guard_index);
    append_state(out, imp.pre);
    append_state(out, imp.post);
    fmt::format_to(std::back_inserter(out), ",{:.17g},{:.17g}\n", imp.impulse, imp.energy_jump);
  }
  return out;
}

std::string sweep_csv(const SweepResult& res) {
  std::string out = "kappa_theta,kappa_ptheta,rho_max,rho_max_raw,stable,status\n";
  for (const SweepCell& c : res.cells)
    fmt::format_to(std::back_inserter(out), "{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", c.kappa_theta,
                   c.kappa_p_theta, c.rho_max, c.rho_max_raw, c.stable ? 1 : 0, c.status);
  return out;
}

std::string basin_csv(const BasinResult& res) {
  std::string out = "coord1,coord2,laps,status\n";
  for (const BasinCell& c : res.cells)
    fmt::format_to(std::back_inserter(out), "{:.17g},{:.17g},{},{}\n", c.coord1, c.coord2, c.laps, c.status);
  return out;
}

json to_json(const ResetLaw& law) {
  json j{{"kind", reset_kind_name(law.kind)}};
  if (law.kind == ResetKind::ControlledWall) j["wall_velocity"] = law.wall_velocity;
  if (law.kind == ResetKind::FeedbackWall) {
    j["nominal_p_x"] = law.nominal_p_x;
    j["gains"] = {{"kappa_theta", law.gains.kappa_theta},
                  {"kappa_ptheta", law.gains.kappa_p_theta},
                  {"kappa_px", law.gains.kappa_p_x}};
    j["reference"] = {{"theta", law.reference.theta},
                      {"p_theta", law.reference.p_theta},
                      {"p_x", law.reference.p_x}};
  }
  return j;
}

ResetLaw reset_law_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "interior_elastic") return ResetLaw::interior_elastic();
  if (kind == "exterior_elastic") return ResetLaw::exterior_elastic();
  if (kind == "controlled") return ResetLaw::controlled(j.at("wall_velocity").get<double>());
  if (kind == "feedback") {
    const json& g = j.at("gains");
    const json& r = j.at("reference");
    return ResetLaw::feedback(
        {g.at("kappa_theta").get<double>(), g.at("kappa_ptheta").get<double>(), g.at("kappa_px").get<double>()},
        {r.at("theta").get<double>(), r.at("p_theta").get<double>(), r.at("p_x").get<double>()},
        j.at("nominal_p_x").get<double>());
  }
  throw std::runtime_error("unknown reset kind '" + kind + "'");
}

json to_json(const Params& p) {
  return {{"M", p.M}, {"m", p.m}, {"ell", p.ell}, {"g", p.g}, {"alpha", p.alpha}};
}

json to_json(const OrbitSpec& orbit, const Params& p) {
  return {
      {"x_star", orbit.walls.x_star},
      {"period_impacts", orbit.walls.period_impacts},
      {"right_reset", to_json(orbit.walls.right)},
      {"left_reset", to_json(orbit.walls.left)},
      {"fixed_point",
       {{"theta", orbit.fixed_point.theta}, {"p_theta", orbit.fixed_point.p_theta}, {"p_x", orbit.fixed_point.p_x}}},
      {"period", orbit.period},
      {"newton_iterations", orbit.newton_iterations},
      {"residual", orbit.residual},
      {"params", to_json(p)},
  };
}

OrbitSpec orbit_from_json(const json& j) {
  OrbitSpec o;
  o.walls.x_star = j.at("x_star").get<double>();
  o.walls.period_impacts = j.at("period_impacts").get<std::size_t>();
  o.walls.right = reset_law_from_json(j.at("right_reset"));
  o.walls.left = reset_law_from_json(j.at("left_reset"));
  const json& fp = j.at("fixed_point");
  o.fixed_point = {fp.at("theta").get<double>(), fp.at("p_theta").get<double>(), fp.at("p_x").get<double>()};
  o.period = j.at("period").get<double>();
  o.newton_iterations = j.value("newton_iterations", std::size_t{0});
  o.residual = j.value("residual", 0.0);
  return o;
}

json to_json(const MonodromyReport& rep) {
  json mults = json::array();
  for (const ComplexEig& e : rep.multipliers) mults.push_back({{"re", e.re}, {"im", e.im}, {"modulus", e.modulus}});
  json rows = json::array();
  for (std::size_t r = 0; r < 4; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < 4; ++c) row.push_back(rep.monodromy(r, c));
    rows.push_back(row);
  }
  return {
      {"multipliers", mults},
      {"spectral_radius", rep.spectral_radius_excl_trivial},
      {"spectral_radius_raw", rep.spectral_radius},
      {"trivial_index", rep.trivial_index},
      {"stable", rep.stable},
      {"determinant", rep.determinant},
      {"closure_error", rep.closure_error},
      {"period", rep.period},
      {"monodromy", rows},
  };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return json::parse(in);
}

}  // namespace cartimpact::app

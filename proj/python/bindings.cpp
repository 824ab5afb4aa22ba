#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <string>
#include <vector>

#include "cartimpact/error.hpp"
#include "cartimpact/experiments.hpp"

namespace py = pybind11;
using namespace cartimpact;

namespace {

std::vector<std::vector<double>> to_rows(const Mat4& m) {
  std::vector<std::vector<double>> rows(4, std::vector<double>(4));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) rows[i][j] = m(i, j);
  return rows;
}

std::vector<std::complex<double>> to_complex(const std::array<ComplexEig, 4>& e) {
  std::vector<std::complex<double>> out;
  for (const auto& v : e) out.emplace_back(v.re, v.im);
  return out;
}

}  // namespace

PYBIND11_MODULE(_cartimpact, mod) {
  mod.doc() = "Impacting pendulum on a cart: hybrid simulation and Floquet analysis";

  // Released on purpose: the handle must outlive module teardown.
  static py::handle error_type = py::exception<Error>(mod, "CartImpactError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Params>(mod, "Params")
      .def(py::init([](double M, double m, double ell, double g, double alpha) {
             return Params{M, m, ell, g, alpha};
           }),
           py::arg("M") = 1.0, py::arg("m") = 1.0, py::arg("ell") = 1.0, py::arg("g") = 9.81, py::arg("alpha") = 0.0)
      .def_readwrite("M", &Params::M)
      .def_readwrite("m", &Params::m)
      .def_readwrite("ell", &Params::ell)
      .def_readwrite("g", &Params::g)
      .def_readwrite("alpha", &Params::alpha)
      .def("validate", &Params::validate);

  py::class_<State>(mod, "State")
      .def(py::init([](double theta, double x, double p_theta, double p_x) {
             return State{theta, x, p_theta, p_x};
           }),
           py::arg("theta") = 0.0, py::arg("x") = 0.0, py::arg("p_theta") = 0.0, py::arg("p_x") = 0.0)
      .def_readwrite("theta", &State::theta)
      .def_readwrite("x", &State::x)
      .def_readwrite("p_theta", &State::p_theta)
      .def_readwrite("p_x", &State::p_x)
      .def("as_tuple", [](const State& s) { return py::make_tuple(s.theta, s.x, s.p_theta, s.p_x); })
      .def(py::self == py::self)
      .def("__repr__", [](const State& s) {
        return "State(theta=" + py::repr(py::float_(s.theta)).cast<std::string>() +
               ", x=" + py::repr(py::float_(s.x)).cast<std::string>() +
               ", p_theta=" + py::repr(py::float_(s.p_theta)).cast<std::string>() +
               ", p_x=" + py::repr(py::float_(s.p_x)).cast<std::string>() + ")";
      });

  mod.def("hamiltonian", &hamiltonian, py::arg("state"), py::arg("params"));
  mod.def("connection", &connection, py::arg("state"), py::arg("params"));
  mod.def("vector_field", &vector_field, py::arg("state"), py::arg("params"));
  mod.def("flow_jacobian", [](const State& s, const Params& p) { return to_rows(flow_jacobian(s, p)); },
          py::arg("state"), py::arg("params"));

  py::enum_<GuardKind>(mod, "GuardKind")
      .value("InteriorAngle", GuardKind::InteriorAngle)
      .value("ExteriorWall", GuardKind::ExteriorWall);
  py::enum_<CrossingDirection>(mod, "CrossingDirection")
      .value("Increasing", CrossingDirection::Increasing)
      .value("Decreasing", CrossingDirection::Decreasing)
      .value("Either", CrossingDirection::Either);
  py::enum_<ResetKind>(mod, "ResetKind")
      .value("InteriorElastic", ResetKind::InteriorElastic)
      .value("ExteriorElastic", ResetKind::ExteriorElastic)
      .value("ControlledWall", ResetKind::ControlledWall)
      .value("FeedbackWall", ResetKind::FeedbackWall);

  py::class_<Guard>(mod, "Guard")
      .def(py::init([](GuardKind k, double level, CrossingDirection d) { return Guard{k, level, d}; }),
           py::arg("kind"), py::arg("level"), py::arg("direction") = CrossingDirection::Either)
      .def_readwrite("kind", &Guard::kind)
      .def_readwrite("level", &Guard::level)
      .def_readwrite("direction", &Guard::direction);

  py::class_<FeedbackGains>(mod, "FeedbackGains")
      .def(py::init([](double kt, double kpt, double kpx) { return FeedbackGains{kt, kpt, kpx}; }),
           py::arg("kappa_theta") = 0.0, py::arg("kappa_p_theta") = 0.0, py::arg("kappa_p_x") = 0.0)
      .def_readwrite("kappa_theta", &FeedbackGains::kappa_theta)
      .def_readwrite("kappa_p_theta", &FeedbackGains::kappa_p_theta)
      .def_readwrite("kappa_p_x", &FeedbackGains::kappa_p_x);

  py::class_<ReferencePoint>(mod, "ReferencePoint")
      .def(py::init([](double t, double pt, double px) { return ReferencePoint{t, pt, px}; }),
           py::arg("theta") = 0.0, py::arg("p_theta") = 0.0, py::arg("p_x") = 0.0);

  py::class_<ResetLaw>(mod, "ResetLaw")
      .def_static("interior_elastic", &ResetLaw::interior_elastic)
      .def_static("exterior_elastic", &ResetLaw::exterior_elastic)
      .def_static("controlled", &ResetLaw::controlled, py::arg("v"))
      .def_static("feedback", &ResetLaw::feedback, py::arg("gains"), py::arg("reference"), py::arg("nominal_p_x"))
      .def_readonly("kind", &ResetLaw::kind)
      .def_readonly("wall_velocity", &ResetLaw::wall_velocity)
      .def_readonly("nominal_p_x", &ResetLaw::nominal_p_x);

  mod.def("apply_reset", &apply_reset, py::arg("law"), py::arg("pre"), py::arg("params"));
  mod.def("reset_jacobian", [](const ResetLaw& l, const State& s, const Params& p) {
    return to_rows(reset_jacobian(l, s, p));
  });
  mod.def("symmetry_assignment_velocity", &symmetry_assignment_velocity, py::arg("pre"), py::arg("target"),
          py::arg("params"));

  py::class_<GuardedReset>(mod, "GuardedReset")
      .def(py::init([](const Guard& g, const ResetLaw& l) { return GuardedReset{g, l}; }), py::arg("guard"),
           py::arg("law"))
      .def_readwrite("guard", &GuardedReset::guard)
      .def_readwrite("law", &GuardedReset::law);

  py::class_<IntegratorConfig>(mod, "IntegratorConfig")
      .def(py::init<>())
      .def_readwrite("dt", &IntegratorConfig::dt)
      .def_readwrite("event_tol", &IntegratorConfig::event_tol)
      .def_readwrite("max_impacts", &IntegratorConfig::max_impacts)
      .def_readwrite("t_max", &IntegratorConfig::t_max)
      .def_readwrite("min_separation", &IntegratorConfig::min_separation);

  py::class_<ImpactRecord>(mod, "ImpactRecord")
      .def_readonly("time", &ImpactRecord::time)
      .def_readonly("pre", &ImpactRecord::pre)
      .def_readonly("post", &ImpactRecord::post)
      .def_readonly("impulse", &ImpactRecord::impulse)
      .def_readonly("energy_jump", &ImpactRecord::energy_jump)
      .def_readonly("guard_index", &ImpactRecord::guard_index);

  py::class_<HybridTrajectory>(mod, "HybridTrajectory")
      .def_readonly("t0", &HybridTrajectory::t0)
      .def_readonly("t_final", &HybridTrajectory::t_final)
      .def_readonly("initial", &HybridTrajectory::initial)
      .def_readonly("final_state", &HybridTrajectory::final_state)
      .def_readonly("impacts", &HybridTrajectory::impacts)
      .def_property_readonly("termination",
                             [](const HybridTrajectory& t) { return std::string(to_string(t.termination)); })
      .def_readonly("message", &HybridTrajectory::message)
      .def("samples", [](const HybridTrajectory& t) {
        std::vector<std::array<double, 6>> rows;
        for (std::size_t a = 0; a < t.arcs.size(); ++a)
          for (const Sample& s : t.arcs[a].samples)
            rows.push_back({s.t, s.state.theta, s.state.x, s.state.p_theta, s.state.p_x, double(a)});
        return rows;
      });

  mod.def(
      "run_hybrid",
      [](const State& s0, const std::vector<GuardedReset>& guards, const IntegratorConfig& cfg, const Params& p,
         bool record_samples) {
        RunOptions opts;
        opts.record_samples = record_samples;
        py::gil_scoped_release release;
        return run_hybrid(s0, guards, cfg, p, opts);
      },
      py::arg("initial"), py::arg("guards"), py::arg("config"), py::arg("params"), py::arg("record_samples") = true);

  py::class_<SectionState>(mod, "SectionState")
      .def(py::init([](double t, double pt, double px) { return SectionState{t, pt, px}; }), py::arg("theta"),
           py::arg("p_theta"), py::arg("p_x"))
      .def_readwrite("theta", &SectionState::theta)
      .def_readwrite("p_theta", &SectionState::p_theta)
      .def_readwrite("p_x", &SectionState::p_x);

  py::class_<WallSystem>(mod, "WallSystem")
      .def(py::init([](double x_star, const ResetLaw& right, const ResetLaw& left, std::size_t n) {
             return WallSystem{x_star, right, left, n};
           }),
           py::arg("x_star") = 0.5, py::arg("right") = ResetLaw::exterior_elastic(),
           py::arg("left") = ResetLaw::exterior_elastic(), py::arg("period_impacts") = 2)
      .def_readwrite("x_star", &WallSystem::x_star)
      .def_readwrite("right", &WallSystem::right)
      .def_readwrite("left", &WallSystem::left)
      .def("guards", &WallSystem::guards);
  mod.def("nominal_walls", &nominal_walls, py::arg("x_star"), py::arg("right_post_p_x"));

  py::class_<NewtonOptions>(mod, "NewtonOptions")
      .def(py::init<>())
      .def_readwrite("tol", &NewtonOptions::tol)
      .def_readwrite("max_iterations", &NewtonOptions::max_iterations)
      .def_readwrite("fd_step", &NewtonOptions::fd_step);

  py::class_<OrbitSpec>(mod, "OrbitSpec")
      .def_readonly("walls", &OrbitSpec::walls)
      .def_readonly("fixed_point", &OrbitSpec::fixed_point)
      .def_readonly("period", &OrbitSpec::period)
      .def_readonly("newton_iterations", &OrbitSpec::newton_iterations)
      .def_readonly("residual", &OrbitSpec::residual);

  mod.def("find_periodic_orbit", &find_periodic_orbit, py::arg("guess"), py::arg("walls"), py::arg("config"),
          py::arg("params"), py::arg("newton") = NewtonOptions{}, py::call_guard<py::gil_scoped_release>());
  mod.def("orbit_impacts", &orbit_impacts, py::arg("orbit"), py::arg("config"), py::arg("params"));
  mod.def("feedback_walls", &feedback_walls, py::arg("orbit"), py::arg("gains"), py::arg("config"),
          py::arg("params"));

  py::class_<MonodromyReport>(mod, "MonodromyReport")
      .def_property_readonly("monodromy", [](const MonodromyReport& r) { return to_rows(r.monodromy); })
      .def_property_readonly("multipliers", [](const MonodromyReport& r) { return to_complex(r.multipliers); })
      .def_readonly("spectral_radius", &MonodromyReport::spectral_radius)
      .def_readonly("spectral_radius_excl_trivial", &MonodromyReport::spectral_radius_excl_trivial)
      .def_readonly("trivial_index", &MonodromyReport::trivial_index)
      .def_readonly("determinant", &MonodromyReport::determinant)
      .def_readonly("closure_error", &MonodromyReport::closure_error)
      .def_readonly("period", &MonodromyReport::period)
      .def_readonly("stable", &MonodromyReport::stable);

  mod.def(
      "analyze_orbit",
      [](const OrbitSpec& o, const IntegratorConfig& cfg, const Params& p) { return analyze_orbit(o, cfg, p); },
      py::arg("orbit"), py::arg("config"), py::arg("params"), py::call_guard<py::gil_scoped_release>());

  py::class_<Range>(mod, "Range")
      .def(py::init([](double lo, double hi, std::size_t n) { return Range{lo, hi, n}; }), py::arg("min"),
           py::arg("max"), py::arg("n"))
      .def_readwrite("min", &Range::min)
      .def_readwrite("max", &Range::max)
      .def_readwrite("n", &Range::n)
      .def("at", &Range::at);

  py::class_<SweepConfig>(mod, "SweepConfig")
      .def(py::init<>())
      .def_readwrite("kappa_theta", &SweepConfig::kappa_theta)
      .def_readwrite("kappa_p_theta", &SweepConfig::kappa_p_theta)
      .def_readwrite("kappa_p_x", &SweepConfig::kappa_p_x)
      .def_readwrite("alpha", &SweepConfig::alpha)
      .def_readwrite("orbit", &SweepConfig::orbit)
      .def_readwrite("workers", &SweepConfig::workers);

  py::class_<SweepCell>(mod, "SweepCell")
      .def_readonly("kappa_theta", &SweepCell::kappa_theta)
      .def_readonly("kappa_p_theta", &SweepCell::kappa_p_theta)
      .def_readonly("rho_max", &SweepCell::rho_max)
      .def_readonly("rho_max_raw", &SweepCell::rho_max_raw)
      .def_readonly("stable", &SweepCell::stable)
      .def_readonly("status", &SweepCell::status);

  py::class_<SweepResult>(mod, "SweepResult")
      .def_readonly("open_loop", &SweepResult::open_loop)
      .def_readonly("cells", &SweepResult::cells)
      .def_readonly("n_rows", &SweepResult::n_rows)
      .def_readonly("n_cols", &SweepResult::n_cols)
      .def("count_stable", &SweepResult::count_stable)
      .def("count_failed", &SweepResult::count_failed);

  mod.def(
      "gain_sweep",
      [](const SweepConfig& cfg, const Params& p, const IntegratorConfig& integ) { return gain_sweep(cfg, p, integ); },
      py::arg("sweep"), py::arg("params"), py::arg("config"), py::call_guard<py::gil_scoped_release>());

  py::enum_<SectionCoord>(mod, "SectionCoord")
      .value("Theta", SectionCoord::Theta)
      .value("PTheta", SectionCoord::PTheta)
      .value("PX", SectionCoord::PX);

  py::class_<BasinConfig>(mod, "BasinConfig")
      .def(py::init<>())
      .def_readwrite("coord1", &BasinConfig::coord1)
      .def_readwrite("coord2", &BasinConfig::coord2)
      .def_readwrite("range1", &BasinConfig::range1)
      .def_readwrite("range2", &BasinConfig::range2)
      .def_readwrite("max_laps", &BasinConfig::max_laps)
      .def_readwrite("theta_bound", &BasinConfig::theta_bound)
      .def_readwrite("workers", &BasinConfig::workers);

  py::class_<BasinCell>(mod, "BasinCell")
      .def_readonly("coord1", &BasinCell::coord1)
      .def_readonly("coord2", &BasinCell::coord2)
      .def_readonly("laps", &BasinCell::laps)
      .def_readonly("status", &BasinCell::status);

  py::class_<BasinResult>(mod, "BasinResult")
      .def_readonly("cells", &BasinResult::cells)
      .def_readonly("n_rows", &BasinResult::n_rows)
      .def_readonly("n_cols", &BasinResult::n_cols)
      .def("count_converged", &BasinResult::count_converged)
      .def("converged_fraction", &BasinResult::converged_fraction);

  mod.def(
      "basin_map",
      [](const BasinConfig& cfg, const OrbitSpec& o, const FeedbackGains& k, const IntegratorConfig& integ,
         const Params& p) { return basin_map(cfg, o, k, integ, p); },
      py::arg("basin"), py::arg("orbit"), py::arg("gains"), py::arg("config"), py::arg("params"),
      py::call_guard<py::gil_scoped_release>());
}

#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "cartimpact/error.hpp"

namespace cartimpact::app {

namespace {

std::string where(const std::string& source, const YAML::Mark& mark) {
  if (mark.is_null()) return source;
  return source + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
}

// Strict view of one YAML mapping: every key must be consumed.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, "expected a mapping");
  }

  bool has(const std::string& key) const { return present() && at(key) && !at(key).IsNull(); }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) {
      mark_used(key);
      return;
    }
    mark_used(key);
    out = convert<T>(at(key), key);
  }

  template <class T>
  void read(const std::string& key, std::optional<T>& out) {
    mark_used(key);
    if (!has(key)) return;
    out = convert<T>(at(key), key);
  }

  Section child(const std::string& key) {
    mark_used(key);
    return Section(has(key) ? at(key) : YAML::Node(), field(key), source_);
  }

  std::vector<Section> list(const std::string& key) {
    mark_used(key);
    std::vector<Section> out;
    if (!has(key)) return out;
    const YAML::Node n = at(key);
    if (!n.IsSequence()) fail(n, field(key) + ": expected a list");
    for (std::size_t i = 0; i < n.size(); ++i)
      out.emplace_back(n[i], field(key) + "[" + std::to_string(i) + "]", source_);
    return out;
  }

  bool present() const { return node_ && !node_.IsNull(); }

  /// Reject keys nobody asked for.
  void finish() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key)) fail(kv.first, "unknown field '" + field(key) + "'");
    }
  }

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    throw ConfigError(where(source_, n.Mark()) + ": " + msg);
  }

  [[noreturn]] void fail_here(const std::string& msg) const {
    if (present()) fail(node_, (path_.empty() ? "" : path_ + ": ") + msg);
    throw ConfigError(source_ + ": " + (path_.empty() ? "" : path_ + ": ") + msg);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  YAML::Node at(const std::string& key) const {
    const YAML::Node& c = node_;
    return c[key];
  }

  void mark_used(const std::string& key) { used_.insert(key); }

  template <class T>
  T convert(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, field(key) + ": expected a scalar");
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        const long long v = n.as<long long>();
        if (v < 0) fail(n, field(key) + ": must be non-negative");
        return static_cast<T>(v);
      } else {
        return n.as<T>();
      }
    } catch (const YAML::BadConversion&) {
      fail(n, field(key) + ": cannot parse '" + n.Scalar() + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> used_;
};

GuardKind parse_guard_kind(const std::string& s, Section& sec) {
  if (s == "interior_angle") return GuardKind::InteriorAngle;
  if (s == "exterior_wall") return GuardKind::ExteriorWall;
  sec.fail_here("unknown guard kind '" + s + "' (interior_angle | exterior_wall)");
}

CrossingDirection parse_direction(const std::string& s, Section& sec) {
  if (s == "increasing") return CrossingDirection::Increasing;
  if (s == "decreasing") return CrossingDirection::Decreasing;
  if (s == "either") return CrossingDirection::Either;
  sec.fail_here("unknown direction '" + s + "' (increasing | decreasing | either)");
}

ResetKind parse_reset_kind(const std::string& s, Section& sec) {
  if (s == "interior_elastic") return ResetKind::InteriorElastic;
  if (s == "exterior_elastic") return ResetKind::ExteriorElastic;
  if (s == "controlled") return ResetKind::ControlledWall;
  if (s == "feedback") return ResetKind::FeedbackWall;
  sec.fail_here("unknown reset kind '" + s +
                "' (interior_elastic | exterior_elastic | controlled | feedback)");
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

void read_gains(Section sec, FeedbackGains& g) {
  sec.read("kappa_theta", g.kappa_theta);
  sec.read("kappa_ptheta", g.kappa_p_theta);
  sec.read("kappa_px", g.kappa_p_x);
  sec.finish();
}

void read_reset(Section sec, ResetLaw& law) {
  if (!sec.present()) return;
  std::string kind = reset_kind_name(law.kind);
  sec.read("kind", kind);
  law.kind = parse_reset_kind(kind, sec);
  sec.read("wall_velocity", law.wall_velocity);
  sec.read("nominal_p_x", law.nominal_p_x);
  read_gains(sec.child("gains"), law.gains);
  Section ref = sec.child("reference");
  ref.read("theta", law.reference.theta);
  ref.read("p_theta", law.reference.p_theta);
  ref.read("p_x", law.reference.p_x);
  ref.finish();
  sec.finish();
}

void read_range(Section sec, Range& r) {
  sec.read("min", r.min);
  sec.read("max", r.max);
  sec.read("n", r.n);
  sec.finish();
}

template <class F>
void checked(const std::string& what, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(where(source, e.mark) + ": " + e.msg);
  }
  RunConfig cfg;
  Section top(root, "", source);

  Section params = top.child("params");
  params.read("M", cfg.params.M);
  params.read("m", cfg.params.m);
  params.read("ell", cfg.params.ell);
  params.read("g", cfg.params.g);
  params.read("alpha", cfg.params.alpha);
  params.finish();

  Section integ = top.child("integrator");
  integ.read("dt", cfg.integrator.dt);
  integ.read("event_tol", cfg.integrator.event_tol);
  integ.read("max_impacts", cfg.integrator.max_impacts);
  integ.read("t_max", cfg.integrator.t_max);
  integ.read("min_separation", cfg.integrator.min_separation);
  integ.finish();

  std::string out_dir = cfg.output_dir.string();
  top.read("output_dir", out_dir);
  cfg.output_dir = out_dir;
  top.read("seed", cfg.seed);

  Section sim = top.child("simulate");
  if (sim.has("initial_state")) {
    State s;
    Section st = sim.child("initial_state");
    for (const char* k : {"theta", "x", "p_theta", "p_x"})
      if (!st.has(k)) st.fail_here(std::string("missing field '") + k + "'");
    st.read("theta", s.theta);
    st.read("x", s.x);
    st.read("p_theta", s.p_theta);
    st.read("p_x", s.p_x);
    st.finish();
    cfg.simulate.initial_state = s;
  } else {
    sim.child("initial_state");
  }
  for (Section g : sim.list("guards")) {
    GuardedReset gr{};
    std::string kind = "exterior_wall";
    std::string dir = "either";
    g.read("kind", kind);
    g.read("direction", dir);
    if (!g.has("level")) g.fail_here("missing field 'level'");
    g.read("level", gr.guard.level);
    gr.guard.kind = parse_guard_kind(kind, g);
    gr.guard.direction = parse_direction(dir, g);
    gr.law = gr.guard.kind == GuardKind::InteriorAngle ? ResetLaw::interior_elastic()
                                                      : ResetLaw::exterior_elastic();
    read_reset(g.child("reset"), gr.law);
    g.finish();
    cfg.simulate.guards.push_back(gr);
  }
  sim.read("sample_stride", cfg.simulate.sample_stride);
  sim.read("t_max", cfg.simulate.t_max);
  sim.finish();

  Section orb = top.child("orbit");
  orb.read("x_star", cfg.orbit.walls.x_star);
  orb.read("period_impacts", cfg.orbit.walls.period_impacts);
  read_reset(orb.child("right_reset"), cfg.orbit.walls.right);
  read_reset(orb.child("left_reset"), cfg.orbit.walls.left);
  Section guess = orb.child("guess");
  guess.read("theta", cfg.orbit.guess.theta);
  guess.read("p_theta", cfg.orbit.guess.p_theta);
  guess.read("p_x", cfg.orbit.guess.p_x);
  guess.finish();
  Section newton = orb.child("newton");
  newton.read("tol", cfg.orbit.newton.tol);
  newton.read("max_iterations", cfg.orbit.newton.max_iterations);
  newton.read("fd_step", cfg.orbit.newton.fd_step);
  newton.read("max_halvings", cfg.orbit.newton.max_halvings);
  newton.read("condition_limit", cfg.orbit.newton.condition_limit);
  newton.finish();
  std::optional<std::string> orbit_file;
  orb.read("file", orbit_file);
  if (orbit_file) cfg.orbit.file = *orbit_file;
  orb.finish();

  Section flo = top.child("floquet");
  flo.read("closure_tol", cfg.floquet.monodromy.closure_tol);
  flo.read("margin", cfg.floquet.monodromy.margin);
  flo.read("fd_step", cfg.floquet.fd_step);
  flo.read("fd_rel_tol", cfg.floquet.fd_rel_tol);
  flo.finish();

  Section sw = top.child("sweep");
  read_range(sw.child("kappa_theta"), cfg.sweep.kappa_theta);
  read_range(sw.child("kappa_ptheta"), cfg.sweep.kappa_p_theta);
  sw.read("kappa_px", cfg.sweep.kappa_p_x);
  sw.read("alpha", cfg.sweep.alpha);
  sw.read("workers", cfg.sweep.workers);
  sw.finish();
  cfg.sweep.newton = cfg.orbit.newton;
  cfg.sweep.monodromy = cfg.floquet.monodromy;

  Section ba = top.child("basin");
  std::string c1(to_string(cfg.basin.coord1));
  std::string c2(to_string(cfg.basin.coord2));
  ba.read("coord1", c1);
  ba.read("coord2", c2);
  checked("basin", [&] {
    cfg.basin.coord1 = section_coord_from_string(c1);
    cfg.basin.coord2 = section_coord_from_string(c2);
  });
  read_range(ba.child("range1"), cfg.basin.range1);
  read_range(ba.child("range2"), cfg.basin.range2);
  ba.read("max_laps", cfg.basin.max_laps);
  ba.read("theta_bound", cfg.basin.theta_bound);
  ba.read("state_distance_bound", cfg.basin.state_distance_bound);
  ba.read("no_impact_timeout", cfg.basin.no_impact_timeout);
  ba.read("workers", cfg.basin.workers);
  read_gains(ba.child("gains"), cfg.basin_gains);
  ba.finish();

  top.finish();

  checked("params", [&] { cfg.params.validate(); });
  checked("integrator", [&] { cfg.integrator.validate(); });
  checked("orbit", [&] { cfg.orbit.walls.validate(); });
  checked("sweep", [&] {
    cfg.sweep.kappa_theta.validate("sweep.kappa_theta");
    cfg.sweep.kappa_p_theta.validate("sweep.kappa_ptheta");
    if (!std::isfinite(cfg.sweep.kappa_p_x)) throw Error(ErrorCode::InvalidArgument, "kappa_px must be finite");
    if (!(cfg.sweep.alpha >= 0.0) || !std::isfinite(cfg.sweep.alpha))
      throw Error(ErrorCode::InvalidArgument, "alpha must be finite and non-negative");
  });
  checked("basin", [&] { cfg.basin.validate(); });
  for (const auto& g : cfg.simulate.guards) checked("simulate.guards", [&] { g.law.validate(); });
  if (cfg.simulate.t_max && !(*cfg.simulate.t_max >= 0.0))
    throw ConfigError(source + ": simulate.t_max must be non-negative");
  if (cfg.simulate.sample_stride < 1) throw ConfigError(source + ": simulate.sample_stride must be >= 1");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

namespace {

void emit_reset(YAML::Emitter& out, const ResetLaw& law) {
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << reset_kind_name(law.kind);
  if (law.kind == ResetKind::ControlledWall) out << YAML::Key << "wall_velocity" << YAML::Value << law.wall_velocity;
  if (law.kind == ResetKind::FeedbackWall) {
    out << YAML::Key << "nominal_p_x" << YAML::Value << law.nominal_p_x;
    out << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kappa_theta" << YAML::Value << law.gains.kappa_theta;
    out << YAML::Key << "kappa_ptheta" << YAML::Value << law.gains.kappa_p_theta;
    out << YAML::Key << "kappa_px" << YAML::Value << law.gains.kappa_p_x;
    out << YAML::EndMap;
    out << YAML::Key << "reference" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "theta" << YAML::Value << law.reference.theta;
    out << YAML::Key << "p_theta" << YAML::Value << law.reference.p_theta;
    out << YAML::Key << "p_x" << YAML::Value << law.reference.p_x;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
}

void emit_range(YAML::Emitter& out, const char* key, const Range& r) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "min" << YAML::Value << r.min;
  out << YAML::Key << "max" << YAML::Value << r.max;
  out << YAML::Key << "n" << YAML::Value << r.n;
  out << YAML::EndMap;
}

const char* direction_name(CrossingDirection d) {
  switch (d) {
    case CrossingDirection::Increasing:
      return "increasing";
    case CrossingDirection::Decreasing:
      return "decreasing";
    case CrossingDirection::Either:
      return "either";
  }
  return "either";
}

}  // namespace

std::string dump_config(const RunConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "M" << YAML::Value << cfg.params.M;
  out << YAML::Key << "m" << YAML::Value << cfg.params.m;
  out << YAML::Key << "ell" << YAML::Value << cfg.params.ell;
  out << YAML::Key << "g" << YAML::Value << cfg.params.g;
  out << YAML::Key << "alpha" << YAML::Value << cfg.params.alpha;
  out << YAML::EndMap;

  out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << cfg.integrator.dt;
  out << YAML::Key << "event_tol" << YAML::Value << cfg.integrator.event_tol;
  out << YAML::Key << "max_impacts" << YAML::Value << cfg.integrator.max_impacts;
  out << YAML::Key << "t_max" << YAML::Value << cfg.integrator.t_max;
  out << YAML::Key << "min_separation" << YAML::Value << cfg.integrator.min_separation_or_default();
  out << YAML::EndMap;

  out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir.string();
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;

  out << YAML::Key << "simulate" << YAML::Value << YAML::BeginMap;
  if (cfg.simulate.initial_state) {
    const State& s = *cfg.simulate.initial_state;
    out << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "theta" << YAML::Value << s.theta;
    out << YAML::Key << "x" << YAML::Value << s.x;
    out << YAML::Key << "p_theta" << YAML::Value << s.p_theta;
    out << YAML::Key << "p_x" << YAML::Value << s.p_x;
    out << YAML::EndMap;
  }
  out << YAML::Key << "guards" << YAML::Value << YAML::BeginSeq;
  for (const GuardedReset& g : cfg.simulate.guards) {
    out << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value
        << (g.guard.kind == GuardKind::InteriorAngle ? "interior_angle" : "exterior_wall");
    out << YAML::Key << "level" << YAML::Value << g.guard.level;
    out << YAML::Key << "direction" << YAML::Value << direction_name(g.guard.direction);
    out << YAML::Key << "reset" << YAML::Value;
    emit_reset(out, g.law);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "sample_stride" << YAML::Value << cfg.simulate.sample_stride;
  out << YAML::Key << "t_max" << YAML::Value << cfg.simulate.t_max.value_or(cfg.integrator.t_max);
  out << YAML::EndMap;

  out << YAML::Key << "orbit" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "x_star" << YAML::Value << cfg.orbit.walls.x_star;
  out << YAML::Key << "period_impacts" << YAML::Value << cfg.orbit.walls.period_impacts;
  out << YAML::Key << "right_reset" << YAML::Value;
  emit_reset(out, cfg.orbit.walls.right);
  out << YAML::Key << "left_reset" << YAML::Value;
  emit_reset(out, cfg.orbit.walls.left);
  out << YAML::Key << "guess" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "theta" << YAML::Value << cfg.orbit.guess.theta;
  out << YAML::Key << "p_theta" << YAML::Value << cfg.orbit.guess.p_theta;
  out << YAML::Key << "p_x" << YAML::Value << cfg.orbit.guess.p_x;
  out << YAML::EndMap;
  out << YAML::Key << "newton" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tol" << YAML::Value << cfg.orbit.newton.tol;
  out << YAML::Key << "max_iterations" << YAML::Value << cfg.orbit.newton.max_iterations;
  out << YAML::Key << "fd_step" << YAML::Value << cfg.orbit.newton.fd_step;
  out << YAML::Key << "max_halvings" << YAML::Value << cfg.orbit.newton.max_halvings;
  out << YAML::Key << "condition_limit" << YAML::Value << cfg.orbit.newton.condition_limit;
  out << YAML::EndMap;
  if (cfg.orbit.file) out << YAML::Key << "file" << YAML::Value << cfg.orbit.file->string();
  out << YAML::EndMap;

  out << YAML::Key << "floquet" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "closure_tol" << YAML::Value << cfg.floquet.monodromy.closure_tol;
  out << YAML::Key << "margin" << YAML::Value << cfg.floquet.monodromy.margin;
  out << YAML::Key << "fd_step" << YAML::Value << cfg.floquet.fd_step;
  out << YAML::Key << "fd_rel_tol" << YAML::Value << cfg.floquet.fd_rel_tol;
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  emit_range(out, "kappa_theta", cfg.sweep.kappa_theta);
  emit_range(out, "kappa_ptheta", cfg.sweep.kappa_p_theta);
  out << YAML::Key << "kappa_px" << YAML::Value << cfg.sweep.kappa_p_x;
  out << YAML::Key << "alpha" << YAML::Value << cfg.sweep.alpha;
  out << YAML::Key << "workers" << YAML::Value << cfg.sweep.workers;
  out << YAML::EndMap;

  out << YAML::Key << "basin" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "coord1" << YAML::Value << std::string(to_string(cfg.basin.coord1));
  out << YAML::Key << "coord2" << YAML::Value << std::string(to_string(cfg.basin.coord2));
  emit_range(out, "range1", cfg.basin.range1);
  emit_range(out, "range2", cfg.basin.range2);
  out << YAML::Key << "max_laps" << YAML::Value << cfg.basin.max_laps;
  out << YAML::Key << "theta_bound" << YAML::Value << cfg.basin.theta_bound;
  out << YAML::Key << "state_distance_bound" << YAML::Value << cfg.basin.resolved_distance_bound();
  if (cfg.basin.no_impact_timeout)
    out << YAML::Key << "no_impact_timeout" << YAML::Value << *cfg.basin.no_impact_timeout;
  out << YAML::Key << "workers" << YAML::Value << cfg.basin.workers;
  out << YAML::Key << "gains" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "kappa_theta" << YAML::Value << cfg.basin_gains.kappa_theta;
  out << YAML::Key << "kappa_ptheta" << YAML::Value << cfg.basin_gains.kappa_p_theta;
  out << YAML::Key << "kappa_px" << YAML::Value << cfg.basin_gains.kappa_p_x;
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace cartimpact::app

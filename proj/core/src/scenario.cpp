#include "cyclic/scenario.hpp"

#include "cyclic/errors.hpp"
#include "cyclic/expression.hpp"
#include "cyclic/plots.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <limits>
#include <set>

namespace cyclic {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
}

/// Numbers may be given as JSON numbers or constant expressions such as "32*pi".
double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    Expression e = Expression::parse(j.get<std::string>(), {});
    return e.evaluate({});
  }
  throw ValidationError(where + ": expected a number");
}

Vector vector_of(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

std::vector<std::string> strings_of(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (e.is_string()) out.push_back(e.get<std::string>());
    else if (e.is_number()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.get<double>());
      out.emplace_back(buf);
    } else {
      throw ValidationError(where + ": entries must be strings or numbers");
    }
  }
  return out;
}

std::vector<std::vector<std::string>> string_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of rows");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < j.size(); ++i)
    rows.push_back(strings_of(j[i], where + "[" + std::to_string(i) + "]"));
  return rows;
}

ModelConfig parse_model(const json& j) {
  check_keys(j, {"builtin", "params", "generic"}, "model");
  ModelConfig m;
  if (j.contains("builtin") == j.contains("generic"))
    throw ValidationError("model: give exactly one of 'builtin' or 'generic'");
  if (j.contains("builtin")) {
    m.builtin = j.at("builtin").get<std::string>();
    if (j.contains("params")) m.params = j.at("params");
    if (!m.params.is_object()) throw ValidationError("model.params: expected an object");
    return m;
  }
  if (j.contains("params")) throw ValidationError("model.params only applies to builtin models");
  const json& g = j.at("generic");
  check_keys(g, {"name", "cyclic", "shape", "mass", "potential"}, "model.generic");
  GenericModelSpec spec;
  if (g.contains("name")) spec.name = g.at("name").get<std::string>();
  spec.cyclic_names = strings_of(g.at("cyclic"), "model.generic.cyclic");
  spec.shape_names = strings_of(g.at("shape"), "model.generic.shape");
  spec.mass = string_matrix(g.at("mass"), "model.generic.mass");
  if (g.contains("potential")) spec.potential = g.at("potential").get<std::string>();
  m.generic = std::move(spec);
  return m;
}

DampingConfig parse_damping(const json& j) {
  check_keys(j, {"type", "matrix", "functions"}, "damping");
  DampingConfig d;
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") {
    d.kind = DampingConfig::Kind::Zero;
  } else if (type == "constant") {
    d.kind = DampingConfig::Kind::Constant;
    const json& m = j.at("matrix");
    if (!m.is_array() || m.empty()) throw ValidationError("damping.matrix: expected rows");
    d.constant.resize(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
      Vector row = vector_of(m[i], "damping.matrix");
      if (row.size() != d.constant.cols()) throw ValidationError("damping.matrix must be square");
      d.constant.row(static_cast<Eigen::Index>(i)) = row;
    }
  } else if (type == "diagonal") {
    d.kind = DampingConfig::Kind::Diagonal;
    d.axis_functions = strings_of(j.at("functions"), "damping.functions");
  } else if (type == "expression") {
    d.kind = DampingConfig::Kind::Expression;
    d.entries = string_matrix(j.at("matrix"), "damping.matrix");
  } else if (type == "cosine_coupled") {
    d.kind = DampingConfig::Kind::CosineCoupled;
  } else {
    throw ValidationError("damping.type: unknown type '" + type +
                          "' (zero, constant, diagonal, expression, cosine_coupled)");
  }
  return d;
}

ReferenceConfig parse_reference(const json& j) {
  check_keys(j, {"type", "start", "goal", "t_move", "t_blend", "amplitude", "frequency", "axis"},
             "controller.reference");
  ReferenceConfig r;
  const std::string type = j.at("type").get<std::string>();
  if (j.contains("start")) r.start = vector_of(j.at("start"), "controller.reference.start");
  if (type == "hold") {
    r.kind = ReferenceConfig::Kind::Hold;
  } else if (type == "rest_to_rest" || type == "blended_ramp") {
    r.kind = type == "rest_to_rest" ? ReferenceConfig::Kind::RestToRest
                                    : ReferenceConfig::Kind::BlendedRamp;
    r.goal = vector_of(j.at("goal"), "controller.reference.goal");
    r.t_move = number(j.at("t_move"), "controller.reference.t_move");
    if (j.contains("t_blend")) r.t_blend = number(j.at("t_blend"), "controller.reference.t_blend");
  } else if (type == "sinusoid") {
    r.kind = ReferenceConfig::Kind::Sinusoid;
    r.amplitude = number(j.at("amplitude"), "controller.reference.amplitude");
    r.frequency = number(j.at("frequency"), "controller.reference.frequency");
    if (j.contains("axis")) r.axis = j.at("axis").get<int>();
  } else {
    throw ValidationError("controller.reference.type: unknown type '" + type +
                          "' (hold, rest_to_rest, blended_ramp, sinusoid)");
  }
  return r;
}

}  // namespace

ScenarioConfig parse_scenario_config(const json& j) {
  try {
    check_keys(j, {"schema", "name", "comment", "model", "damping", "initial_state", "controller",
                   "integrator", "metrics", "output"},
               "scenario");
    if (!j.contains("schema") || j.at("schema").get<int>() != kScenarioSchemaVersion)
      throw ValidationError("scenario: 'schema' must be " + std::to_string(kScenarioSchemaVersion));

    ScenarioConfig c;
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    if (j.contains("comment")) c.comment = j.at("comment").get<std::string>();
    c.model = parse_model(j.at("model"));
    if (j.contains("damping")) c.damping = parse_damping(j.at("damping"));

    if (j.contains("initial_state")) {
      const json& s = j.at("initial_state");
      check_keys(s, {"x", "y", "xdot", "ydot"}, "initial_state");
      GeneralizedState st;
      // Missing parts are filled with zeros once the dimensions are known.
      if (s.contains("x")) st.x = vector_of(s.at("x"), "initial_state.x");
      if (s.contains("y")) st.y = vector_of(s.at("y"), "initial_state.y");
      if (s.contains("xdot")) st.xdot = vector_of(s.at("xdot"), "initial_state.xdot");
      if (s.contains("ydot")) st.ydot = vector_of(s.at("ydot"), "initial_state.ydot");
      c.initial = std::move(st);
    }

    if (j.contains("controller")) {
      const json& ctl = j.at("controller");
      check_keys(ctl, {"type", "gains", "reference"}, "controller");
      const std::string type = ctl.at("type").get<std::string>();
      if (type == "none") c.controller.kind = ControllerConfig::Kind::None;
      else if (type == "pfl_pd") c.controller.kind = ControllerConfig::Kind::PflPd;
      else if (type == "plain_pd") c.controller.kind = ControllerConfig::Kind::PlainPd;
      else throw ValidationError("controller.type: unknown type '" + type + "' (none, pfl_pd, plain_pd)");
      if (ctl.contains("gains")) {
        const json& g = ctl.at("gains");
        check_keys(g, {"c1", "c0"}, "controller.gains");
        // Dimension is resolved against the model later; keep raw values for now.
        PdGains gains;
        gains.c1 = g.at("c1").is_array() ? vector_of(g.at("c1"), "controller.gains.c1")
                                         : Vector::Constant(1, number(g.at("c1"), "controller.gains.c1"));
        gains.c0 = g.at("c0").is_array() ? vector_of(g.at("c0"), "controller.gains.c0")
                                         : Vector::Constant(1, number(g.at("c0"), "controller.gains.c0"));
        c.controller.gains = std::move(gains);
      }
      if (ctl.contains("reference")) c.controller.reference = parse_reference(ctl.at("reference"));
      if (c.controller.kind != ControllerConfig::Kind::None && !ctl.contains("reference"))
        throw ValidationError("controller: a reference is required for " + type);
    }

    if (j.contains("integrator")) {
      const json& in = j.at("integrator");
      check_keys(in, {"scheme", "dt", "t_final", "record_every"}, "integrator");
      if (in.contains("scheme") && in.at("scheme").get<std::string>() != "rk4")
        throw ValidationError("integrator.scheme: only 'rk4' is supported");
      if (in.contains("dt")) c.integrator.dt = number(in.at("dt"), "integrator.dt");
      if (in.contains("t_final")) c.integrator.t_final = number(in.at("t_final"), "integrator.t_final");
      if (in.contains("record_every")) c.integrator.record_every = in.at("record_every").get<int>();
      c.integrator.validate();
    }

    if (j.contains("metrics")) {
      const json& m = j.at("metrics");
      check_keys(m, {"recovery_tolerance", "settle_tolerance", "box", "verify_grid",
                     "critical_point_grid"},
                 "metrics");
      if (m.contains("recovery_tolerance"))
        c.metrics.recovery_tolerance = number(m.at("recovery_tolerance"), "metrics.recovery_tolerance");
      if (m.contains("settle_tolerance"))
        c.metrics.settle_tolerance = number(m.at("settle_tolerance"), "metrics.settle_tolerance");
      if (m.contains("box")) {
        const json& b = m.at("box");
        check_keys(b, {"lower", "upper"}, "metrics.box");
        Box box{vector_of(b.at("lower"), "metrics.box.lower"), vector_of(b.at("upper"), "metrics.box.upper")};
        box.validate();
        c.metrics.box = std::move(box);
      }
      if (m.contains("verify_grid")) c.metrics.verify_grid = m.at("verify_grid").get<int>();
      if (m.contains("critical_point_grid"))
        c.metrics.critical_point_grid = m.at("critical_point_grid").get<int>();
      if (c.metrics.verify_grid < 5) throw ValidationError("metrics.verify_grid must be >= 5");
      if (c.metrics.critical_point_grid != 0 && c.metrics.critical_point_grid < 5)
        throw ValidationError("metrics.critical_point_grid must be 0 or >= 5");
    }

    if (j.contains("output")) {
      const json& o = j.at("output");
      check_keys(o, {"dir", "prefix", "csv", "plots", "metrics"}, "output");
      if (o.contains("dir")) c.output.dir = o.at("dir").get<std::string>();
      if (o.contains("prefix")) c.output.prefix = o.at("prefix").get<std::string>();
      if (o.contains("csv")) c.output.csv = o.at("csv").get<bool>();
      if (o.contains("plots")) c.output.plots = o.at("plots").get<bool>();
      if (o.contains("metrics")) c.output.metrics_json = o.at("metrics").get<bool>();
    }
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario config: ") + e.what());
  }
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ValidationError("malformed scenario config " + path.string() + ": " + e.what());
  }
  return parse_scenario_config(j);
}

// -- building ---------------------------------------------------------------

DampingField build_damping(const DampingConfig& config, const std::vector<std::string>& cyclic_names,
                           int r) {
  switch (config.kind) {
    case DampingConfig::Kind::Zero:
      return zero_damping(r);
    case DampingConfig::Kind::Constant:
      if (config.constant.rows() != r)
        throw ValidationError("damping.matrix must be " + std::to_string(r) + "x" + std::to_string(r));
      return constant_damping(config.constant);
    case DampingConfig::Kind::Diagonal: {
      if (static_cast<int>(config.axis_functions.size()) != r)
        throw ValidationError("damping.functions needs one expression of 's' per cyclic axis");
      std::vector<DampingField::AxisFunction> fns;
      for (const auto& text : config.axis_functions) {
        Expression e = Expression::parse(text, {"s"});
        fns.emplace_back([e](double s) { return e.evaluate(std::span<const double>(&s, 1)); });
      }
      return diagonal_damping(std::move(fns));
    }
    case DampingConfig::Kind::Expression:
      return expression_damping(config.entries, cyclic_names);
    case DampingConfig::Kind::CosineCoupled:
      if (r != 2) throw ValidationError("cosine_coupled damping needs r = 2");
      return cosine_coupled_damping();
  }
  throw ValidationError("unsupported damping kind");
}

namespace {

MechanicalSystem builtin_system(const ModelConfig& m) {
  auto param = [&m](const char* key, double fallback) {
    return m.params.contains(key) ? number(m.params.at(key), std::string("model.params.") + key)
                                  : fallback;
  };
  if (m.builtin == "planar_pendulum") {
    for (const auto& [key, _] : m.params.items())
      if (key != "slider_mass" && key != "gantry_mass" && key != "ball_mass" &&
          key != "rod_length" && key != "gravity")
        throw ValidationError("model.params: unknown key '" + key + "'");
    PlanarPendulumParams p;
    p.slider_mass = param("slider_mass", p.slider_mass);
    p.gantry_mass = param("gantry_mass", p.gantry_mass);
    p.ball_mass = param("ball_mass", p.ball_mass);
    p.rod_length = param("rod_length", p.rod_length);
    p.gravity = param("gravity", p.gravity);
    return planar_pendulum(p);
  }
  if (m.builtin == "three_link") {
    static const std::set<std::string> keys{"l1", "l2", "r1", "r2", "I1", "I2", "I3", "m1", "m2", "m3"};
    for (const auto& [key, _] : m.params.items())
      if (!keys.count(key)) throw ValidationError("model.params: unknown key '" + key + "'");
    ThreeLinkParams p;
    p.l1 = param("l1", p.l1);
    p.l2 = param("l2", p.l2);
    p.r1 = param("r1", p.r1);
    p.r2 = param("r2", p.r2);
    p.I1 = param("I1", p.I1);
    p.I2 = param("I2", p.I2);
    p.I3 = param("I3", p.I3);
    p.m1 = param("m1", p.m1);
    p.m2 = param("m2", p.m2);
    p.m3 = param("m3", p.m3);
    return three_link(p);
  }
  throw ValidationError("model.builtin: unknown model '" + m.builtin + "'");
}

}  // namespace

MechanicalSystem build_system(const ScenarioConfig& config) {
  MechanicalSystem base = config.model.generic ? generic_system(*config.model.generic)
                                               : builtin_system(config.model);
  return base.with_damping(build_damping(config.damping, base.cyclic_names, base.dims.r));
}

GeneralizedState initial_state(const ScenarioConfig& config, const DimensionSplit& dims) {
  GeneralizedState s = GeneralizedState::at_rest(dims);
  if (config.initial) {
    const GeneralizedState& c = *config.initial;
    if (c.x.size()) s.x = c.x;
    if (c.y.size()) s.y = c.y;
    if (c.xdot.size()) s.xdot = c.xdot;
    if (c.ydot.size()) s.ydot = c.ydot;
  }
  s.check_dims(dims);
  return s;
}

Box working_box(const ScenarioConfig& config, int r) {
  Box box = config.metrics.box.value_or(Box::cube(r, 5.0));
  if (box.dim() != r) throw ValidationError("metrics.box must have r entries per bound");
  return box;
}

std::optional<ReferenceTrajectory> build_reference(const ScenarioConfig& config,
                                                   const GeneralizedState& initial) {
  const ReferenceConfig& rc = config.controller.reference;
  const Vector start = rc.start.value_or(initial.y);
  if (start.size() != initial.y.size())
    throw ValidationError("controller.reference.start must have n - r entries");
  switch (rc.kind) {
    case ReferenceConfig::Kind::Hold:
      return rest_to_rest_reference(start, start, 1.0);
    case ReferenceConfig::Kind::RestToRest:
      if (rc.goal.size() != start.size())
        throw ValidationError("controller.reference.goal must have n - r entries");
      return rest_to_rest_reference(start, rc.goal, rc.t_move);
    case ReferenceConfig::Kind::BlendedRamp:
      if (rc.goal.size() != start.size())
        throw ValidationError("controller.reference.goal must have n - r entries");
      return blended_ramp_reference(start, rc.goal, rc.t_move, rc.t_blend);
    case ReferenceConfig::Kind::Sinusoid:
      return sinusoid_reference(rc.amplitude, rc.frequency, rc.axis, start);
  }
  return std::nullopt;
}

Controller build_controller(const ScenarioConfig& config, const MechanicalSystem& system,
                            const GeneralizedState& initial) {
  const int m = system.dims.shape();
  if (config.controller.kind == ControllerConfig::Kind::None) return zero_controller(system.dims);

  PdGains gains = PdGains::uniform(m, kDefaultRateGain, kDefaultPositionGain);
  if (config.controller.gains) {
    const PdGains& g = *config.controller.gains;
    gains.c1 = g.c1.size() == 1 ? Vector::Constant(m, g.c1[0]) : g.c1;
    gains.c0 = g.c0.size() == 1 ? Vector::Constant(m, g.c0[0]) : g.c0;
  }
  gains.validate(m);
  ReferenceTrajectory ref = *build_reference(config, initial);
  if (config.controller.kind == ControllerConfig::Kind::PflPd)
    return pfl_pd_controller(system, std::move(ref), std::move(gains));
  return plain_pd_controller(std::move(ref), std::move(gains));
}

// -- metrics ----------------------------------------------------------------

MetricsReport compute_metrics(const MechanicalSystem& system, const Trajectory& traj,
                              const std::optional<Vector>& equilibrium, double recovery_tolerance,
                              double settle_tolerance) {
  if (traj.empty()) throw ValidationError("cannot compute metrics of an empty trajectory");
  MetricsReport m;
  const GeneralizedState& first = traj.states.front();
  const GeneralizedState& last = traj.final_state();
  m.recovery_per_axis = (last.x - first.x).cwiseAbs();
  m.recovery_error = (last.x - first.x).norm();
  m.recovered = m.recovery_error <= recovery_tolerance;
  m.max_residual = traj.max_residual;
  m.final_cyclic_speed = last.xdot.norm();
  m.mu = traj.mu;
  m.equilibrium = equilibrium;

  const Vector p0 = ordinary_momentum(system, first);
  const int r = system.dims.r;
  const double inf = std::numeric_limits<double>::infinity();
  m.excursion_min = Vector::Constant(r, inf);
  m.excursion_max = Vector::Constant(r, -inf);
  Vector early_min = m.excursion_min, early_max = m.excursion_max;
  Vector late_min = m.excursion_min, late_max = m.excursion_max;
  const double t_mid = 0.5 * (traj.times.front() + traj.times.back());
  bool finite = true;

  for (std::size_t i = 0; i < traj.size(); ++i) {
    const GeneralizedState& s = traj.states[i];
    finite = finite && s.finite();
    m.excursion_min = m.excursion_min.cwiseMin(s.x);
    m.excursion_max = m.excursion_max.cwiseMax(s.x);
    if (traj.times[i] <= t_mid) {
      early_min = early_min.cwiseMin(s.x);
      early_max = early_max.cwiseMax(s.x);
    }
    if (traj.times[i] >= t_mid) {
      late_min = late_min.cwiseMin(s.x);
      late_max = late_max.cwiseMax(s.x);
    }
    m.max_ordinary_momentum_drift =
        std::max(m.max_ordinary_momentum_drift,
                 (ordinary_momentum(system, s) - p0).cwiseAbs().maxCoeff());
  }
  m.early_band = early_max - early_min;
  m.late_band = late_max - late_min;
  m.bounded = finite && m.excursion_min.allFinite() && m.excursion_max.allFinite() &&
              (m.late_band.array() <= m.early_band.array()).all();

  if (equilibrium) {
    std::optional<double> settle;
    for (std::size_t i = traj.size(); i-- > 0;) {
      if ((traj.states[i].x - *equilibrium).norm() >= settle_tolerance) break;
      settle = traj.times[i];
    }
    m.settle_time = settle;
  }
  m.hypotheses = check_recovery_hypotheses(system, traj);
  return m;
}

nlohmann::json to_json(const MetricsReport& m) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j;
  j["recovery_error"] = m.recovery_error;
  j["recovery_per_axis"] = vec(m.recovery_per_axis);
  j["recovered"] = m.recovered;
  j["settle_time"] = m.settle_time ? json(*m.settle_time) : json(nullptr);
  j["max_residual"] = m.max_residual;
  j["max_ordinary_momentum_drift"] = m.max_ordinary_momentum_drift;
  j["excursion"] = {{"min", vec(m.excursion_min)}, {"max", vec(m.excursion_max)}};
  j["band"] = {{"first_half", vec(m.early_band)}, {"second_half", vec(m.late_band)}};
  j["bounded"] = m.bounded;
  j["final_cyclic_speed"] = m.final_cyclic_speed;
  j["mu"] = vec(m.mu);
  j["equilibrium"] = m.equilibrium ? json(vec(*m.equilibrium)) : json(nullptr);
  j["hypotheses"] = {{"c1", m.hypotheses.c1},
                     {"c2", m.hypotheses.c2},
                     {"c3", m.hypotheses.c3},
                     {"tail_ydot_mean", m.hypotheses.tail_ydot_mean},
                     {"tail_settled", m.hypotheses.tail_settled},
                     {"pass", m.hypotheses.pass}};
  return j;
}

// -- running ----------------------------------------------------------------

namespace {

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const IntegrationError& e) {
    throw IntegrationError(std::string(name) + ": " + e.message(), e.time());
  } catch (const SolverError& e) {
    throw SolverError(std::string(name) + ": " + e.what(), e.trace());
  } catch (const DomainError& e) {
    throw DomainError(std::string(name) + ": " + e.what());
  }
}

std::optional<ShiftedPotential> try_shift(const DampingPotential& potential, const Vector& mu,
                                          const Vector& guess, std::string* error) {
  try {
    return build_shifted_potential(potential, mu, guess);
  } catch (const SolverError& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
}

}  // namespace

std::filesystem::path output_directory(const OutputConfig& output) {
  if (!output.dir.empty()) return output.dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return kDefaultOutputDir;
}

VerifyResult verify_scenario(const ScenarioConfig& config) {
  return stage("validation", [&] {
    MechanicalSystem system = build_system(config);
    const Box box = working_box(config, system.dims.r);
    VerifyResult out;
    out.damping = verify_damping_conditions(system.damping, box, config.metrics.verify_grid);
    if (!out.pass() || config.metrics.critical_point_grid == 0) return out;
    try {
      DampingPotential potential = construct_potential(system.damping, box, config.metrics.verify_grid);
      const GeneralizedState s0 = initial_state(config, system.dims);
      const Vector mu = damping_added_momentum(system, potential, s0);
      auto shifted = try_shift(potential, mu, s0.x, &out.critical_point_error);
      if (shifted) {
        if (box.contains(shifted->equilibrium()))
          out.critical_point = check_critical_point(*shifted, box, config.metrics.critical_point_grid);
        else
          out.critical_point_error = "equilibrium lies outside metrics.box";
      }
    } catch (const std::exception& e) {
      out.critical_point_error = e.what();
    }
    return out;
  });
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  MechanicalSystem system = stage("validation", [&] { return build_system(config); });
  const GeneralizedState s0 = stage("validation", [&] { return initial_state(config, system.dims); });
  const Box box = stage("validation", [&] { return working_box(config, system.dims.r); });

  ConditionReport conditions = stage("validation", [&] {
    ConditionReport rep = verify_damping_conditions(system.damping, box, config.metrics.verify_grid);
    if (!rep.symmetry.pass) throw ValidationError("damping is not symmetric: " + rep.symmetry.detail);
    if (!rep.integrability.pass)
      throw ValidationError("damping fails integrability: " + rep.integrability.detail);
    return rep;
  });

  DampingPotential potential = stage("construction", [&] {
    return construct_potential(system.damping, box, config.metrics.verify_grid);
  });
  const Vector mu = damping_added_momentum(system, potential, s0);
  std::optional<ShiftedPotential> shifted = try_shift(potential, mu, s0.x, nullptr);

  std::optional<ConditionReport> critical;
  if (shifted && config.metrics.critical_point_grid > 0 && box.contains(shifted->equilibrium()))
    critical = stage("construction", [&] {
      return check_critical_point(*shifted, box, config.metrics.critical_point_grid);
    });

  Controller controller = stage("validation", [&] { return build_controller(config, system, s0); });
  Trajectory traj = stage("integration", [&] {
    return integrate(system, potential, s0, controller, config.integrator);
  });

  std::optional<Vector> x_e;
  if (shifted) x_e = shifted->equilibrium();
  MetricsReport metrics = compute_metrics(system, traj, x_e, config.metrics.recovery_tolerance,
                                          config.metrics.settle_tolerance);

  ScenarioResult result{std::move(system), std::move(traj), std::move(metrics),
                        std::move(conditions), std::move(critical), {}};

  const OutputConfig& out = config.output;
  if (out.csv || out.plots || out.metrics_json) {
    const std::filesystem::path dir = output_directory(out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("output: cannot create directory " + dir.string());
    if (out.csv) {
      auto path = dir / (out.prefix + "trajectory.csv");
      write_trajectory_csv(result.trajectory, path);
      result.files.push_back(path);
    }
    if (out.metrics_json) {
      auto path = dir / (out.prefix + "metrics.json");
      json j;
      j["scenario"] = config.name;
      j["metrics"] = to_json(result.metrics);
      j["damping_conditions"] = to_json(result.damping_conditions);
      if (result.critical_point_conditions)
        j["critical_point_conditions"] = to_json(*result.critical_point_conditions);
      std::ofstream f(path);
      if (!f) throw std::runtime_error("output: cannot write " + path.string());
      f << j.dump(2) << "\n";
      result.files.push_back(path);
    }
    if (out.plots) {
      PlotSet plots = emit_plots(result.system, result.trajectory, dir, out.prefix);
      result.files.insert(result.files.end(), plots.files.begin(), plots.files.end());
    }
  }
  return result;
}

ZeroDampingComparison compare_zero_damping(const ScenarioConfig& config) {
  ScenarioConfig undamped = config;
  undamped.damping = DampingConfig{};
  undamped.output.prefix = "k0_" + config.output.prefix;
  // The critical-point surrogate is meaningless for k = 0.
  undamped.metrics.critical_point_grid = 0;

  auto damped_run = std::async(std::launch::async, [&config] { return run_scenario(config); });
  ScenarioResult zero = run_scenario(undamped);
  return ZeroDampingComparison{damped_run.get(), std::move(zero)};
}

// -- CSV --------------------------------------------------------------------

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  if (traj.empty()) return;
  const auto r = traj.states.front().x.size();
  const auto m = traj.states.front().y.size();
  auto header = [&out](const char* stem, Eigen::Index count) {
    for (Eigen::Index i = 1; i <= count; ++i) out << ',' << stem << i;
  };
  out << 't';
  header("x", r);
  header("y", m);
  header("xdot", r);
  header("ydot", m);
  header("u", m);
  header("p", r);
  header("res", r);
  out << '\n';

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  auto put_vec = [&](const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out << ',';
      put(v[i]);
    }
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const GeneralizedState& s = traj.states[k];
    put(traj.times[k]);
    put_vec(s.x);
    put_vec(s.y);
    put_vec(s.xdot);
    put_vec(s.ydot);
    put_vec(traj.controls[k]);
    put_vec(traj.momenta[k]);
    put_vec(traj.residuals[k]);
    out << '\n';
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  write_trajectory_csv(traj, f);
  if (!f) throw std::runtime_error("error while writing " + path.string());
}

}  // namespace cyclic

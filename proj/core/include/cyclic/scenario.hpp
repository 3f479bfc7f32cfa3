#pragma once

#include "cyclic/control.hpp"
#include "cyclic/damping_potential.hpp"
#include "cyclic/dynamics.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cyclic {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr const char* kOutputDirEnv = "CYCLIC_RECOVERY_OUT";
inline constexpr const char* kDefaultOutputDir = "cyclic_out";

struct ModelConfig {
  std::string builtin;  ///< "planar_pendulum" | "three_link"; empty when generic
  nlohmann::json params = nlohmann::json::object();
  std::optional<GenericModelSpec> generic;
};

struct DampingConfig {
  enum class Kind { Zero, Constant, Diagonal, Expression, CosineCoupled };
  Kind kind = Kind::Zero;
  Matrix constant;
  std::vector<std::string> axis_functions;  ///< expressions of `s`
  std::vector<std::vector<std::string>> entries;
};

struct ReferenceConfig {
  enum class Kind { Hold, RestToRest, BlendedRamp, Sinusoid };
  Kind kind = Kind::Hold;
  std::optional<Vector> start;  ///< defaults to the initial shape configuration
  Vector goal;
  double t_move = 1.0;
  double t_blend = 0.5;
  double amplitude = 0.0;
  double frequency = 1.0;
  int axis = 0;
};

struct ControllerConfig {
  enum class Kind { None, PflPd, PlainPd };
  Kind kind = Kind::None;
  std::optional<PdGains> gains;  ///< defaults to c1 = 6, c0 = 9 per axis
  ReferenceConfig reference;
};

struct MetricsConfig {
  double recovery_tolerance = 1e-3;
  double settle_tolerance = 1e-3;
  std::optional<Box> box;  ///< defaults to [-5, 5]^r
  int verify_grid = 21;
  int critical_point_grid = 201;  ///< 0 disables the critical-point surrogate
};

struct OutputConfig {
  std::string dir;  ///< empty: $CYCLIC_RECOVERY_OUT, then "cyclic_out"
  std::string prefix;
  bool csv = true;
  bool plots = false;
  bool metrics_json = true;
};

/// Typed form of a scenario file (JSON, `"schema": 1`, unknown keys rejected).
struct ScenarioConfig {
  std::string name = "scenario";
  std::string comment;
  ModelConfig model;
  DampingConfig damping;
  std::optional<GeneralizedState> initial;  ///< defaults to rest at the origin
  ControllerConfig controller;
  IntegratorSpec integrator;
  MetricsConfig metrics;
  OutputConfig output;
};

/// Throws ValidationError on schema violations.
ScenarioConfig parse_scenario_config(const nlohmann::json& j);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

MechanicalSystem build_system(const ScenarioConfig& config);
DampingField build_damping(const DampingConfig& config, const std::vector<std::string>& cyclic_names,
                           int r);
GeneralizedState initial_state(const ScenarioConfig& config, const DimensionSplit& dims);
Box working_box(const ScenarioConfig& config, int r);
/// Controller plus its reference (if any) for the configured system.
Controller build_controller(const ScenarioConfig& config, const MechanicalSystem& system,
                            const GeneralizedState& initial);
std::optional<ReferenceTrajectory> build_reference(const ScenarioConfig& config,
                                                   const GeneralizedState& initial);

/// Quantitative summary of one run.
struct MetricsReport {
  double recovery_error = 0.0;  ///< |x(T) - x(0)|
  Vector recovery_per_axis;
  bool recovered = false;  ///< recovery_error <= recovery_tolerance
  std::optional<double> settle_time;  ///< first t after which |x - x_e| < tol until the end
  double max_residual = 0.0;
  double max_ordinary_momentum_drift = 0.0;
  Vector excursion_min;
  Vector excursion_max;
  Vector early_band;  ///< per-axis max - min over the first half of the horizon
  Vector late_band;   ///< same over the second half
  bool bounded = false;  ///< finite and late_band <= early_band on every axis
  double final_cyclic_speed = 0.0;
  Vector mu;
  std::optional<Vector> equilibrium;
  HypothesisReport hypotheses;
};

MetricsReport compute_metrics(const MechanicalSystem& system, const Trajectory& trajectory,
                              const std::optional<Vector>& equilibrium, double recovery_tolerance,
                              double settle_tolerance);

nlohmann::json to_json(const MetricsReport& report);

struct ScenarioResult {
  MechanicalSystem system;
  Trajectory trajectory;
  MetricsReport metrics;
  ConditionReport damping_conditions;
  std::optional<ConditionReport> critical_point_conditions;
  std::vector<std::filesystem::path> files;
};

/// Verifies damping conditions, builds h/U, takes mu from the initial state,
/// integrates, computes metrics and writes requested outputs. Errors keep
/// their type and name the failing stage in the message.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// Damping condition report only (plus the critical-point surrogate when it can be built).
struct VerifyResult {
  ConditionReport damping;
  std::optional<ConditionReport> critical_point;
  std::string critical_point_error;
  bool pass() const { return damping.damping_conditions_pass(); }
};
VerifyResult verify_scenario(const ScenarioConfig& config);

struct ZeroDampingComparison {
  ScenarioResult damped;
  ScenarioResult undamped;
};

/// Runs the scenario with its damping and with k = 0, concurrently. Undamped
/// outputs use the prefix "k0_".
ZeroDampingComparison compare_zero_damping(const ScenarioConfig& config);

/// Resolved output directory (config, then $CYCLIC_RECOVERY_OUT, then the default).
std::filesystem::path output_directory(const OutputConfig& output);

/// Header `t,x1..xr,y1..,xdot1..,ydot1..,u1..,p1..pr,res1..resr`, 17 significant digits.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path);

}  // namespace cyclic

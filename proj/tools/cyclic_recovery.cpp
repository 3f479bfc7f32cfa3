#include "cyclic/errors.hpp"
#include "cyclic/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace cyclic;
using nlohmann::json;

struct Overrides {
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<std::string> out_dir;
  bool csv = false;
  bool plots = false;
};

ScenarioConfig load(const std::string& path, const Overrides& o) {
  ScenarioConfig c = load_scenario_config(path);
  if (o.dt) c.integrator.dt = *o.dt;
  if (o.t_final) c.integrator.t_final = *o.t_final;
  c.integrator.validate();
  if (o.out_dir) c.output.dir = *o.out_dir;
  if (o.csv) c.output.csv = true;
  if (o.plots) c.output.plots = true;
  return c;
}

json summary(const ScenarioResult& r) {
  json files = json::array();
  for (const auto& f : r.files) files.push_back(f.string());
  return {{"system", r.system.name},
          {"samples", r.trajectory.size()},
          {"final_time", r.trajectory.times.back()},
          {"metrics", to_json(r.metrics)},
          {"files", files}};
}

void print_witness(const char* name, const ConditionCheck& c) {
  if (!c.pass) std::cerr << name << " check failed: " << c.detail << "\n";
}

int cmd_run(const std::string& path, const Overrides& o) {
  ScenarioResult r = run_scenario(load(path, o));
  std::cout << summary(r).dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::string& path, const Overrides& o) {
  VerifyResult v = verify_scenario(load(path, o));
  json j{{"damping_conditions", to_json(v.damping)}, {"pass", v.pass()}};
  if (v.critical_point) j["critical_point_conditions"] = to_json(*v.critical_point);
  if (!v.critical_point_error.empty()) j["critical_point_error"] = v.critical_point_error;
  std::cout << j.dump(2) << "\n";
  if (!v.pass()) {
    print_witness("symmetry", v.damping.symmetry);
    print_witness("integrability", v.damping.integrability);
    return 1;
  }
  return 0;
}

int cmd_compare(const std::string& path, const Overrides& o) {
  ZeroDampingComparison c = compare_zero_damping(load(path, o));
  json j{{"damped", summary(c.damped)}, {"undamped", summary(c.undamped)}};
  std::cout << j.dump(2) << "\n";
  std::printf("recovery_error damped=%.6e undamped=%.6e\n", c.damped.metrics.recovery_error,
              c.undamped.metrics.recovery_error);
  return 0;
}

int cmd_list() {
  for (const auto& m : builtin_models()) std::cout << m.name << "\t" << m.summary << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate damped mechanical systems with cyclic coordinates"};
  app.require_subcommand(1);
  Overrides o;
  std::string config;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "Scenario file (JSON)")->required();
    sub->add_option("--dt", o.dt, "Integrator step size");
    sub->add_option("--t-final", o.t_final, "Simulation horizon");
    sub->add_option("--out-dir", o.out_dir, "Output directory");
    sub->add_flag("--csv", o.csv, "Write the trajectory CSV");
    sub->add_flag("--plots", o.plots, "Write SVG plots");
  };
  auto* run = app.add_subcommand("run", "Run a scenario and report metrics");
  add_common(run);
  auto* verify = app.add_subcommand("verify", "Check the damping conditions of a scenario");
  add_common(verify);
  auto* compare = app.add_subcommand("compare-zero-damping", "Run with the given damping and with K = 0");
  add_common(compare);
  auto* list = app.add_subcommand("list-models", "List built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config, o);
    if (*verify) return cmd_verify(config, o);
    if (*compare) return cmd_compare(config, o);
    if (*list) return cmd_list();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

#include "cyclic/control.hpp"
#include "cyclic/damping_potential.hpp"
#include "cyclic/dynamics.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace cyclic;

GeneralizedState pendulum_state(const MechanicalSystem& sys) {
  GeneralizedState s = GeneralizedState::at_rest(sys.dims);
  s.y << 0.4, -0.3;
  s.xdot << 0.2, -0.1;
  s.ydot << 0.5, 0.7;
  return s;
}

void BM_ForcedAccelerations(benchmark::State& state) {
  const auto sys = planar_pendulum({}, constant_damping(Matrix::Identity(2, 2) * 3.0));
  const auto s = pendulum_state(sys);
  const Vector u = Vector::Constant(2, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(forced_accelerations(sys, s, u));
}
BENCHMARK(BM_ForcedAccelerations);

void BM_PflControl(benchmark::State& state) {
  const auto sys = planar_pendulum({}, cosine_coupled_damping());
  const auto s = pendulum_state(sys);
  const Vector tau = Vector::Constant(2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(pfl_control(sys, s, tau));
}
BENCHMARK(BM_PflControl);

void BM_IntegrateThreeLink(benchmark::State& state) {
  const auto sys = three_link({}, constant_damping((Matrix(2, 2) << 6, 0, 0, 3).finished()));
  const auto pot = construct_potential(sys.damping, Box::cube(2, 5.0), 9);
  const auto ref = blended_ramp_reference(Vector::Constant(1, M_PI / 3),
                                          Vector::Constant(1, M_PI / 3 + 32 * M_PI), 8.0, 0.5);
  const auto ctl = pfl_pd_controller(sys, ref, PdGains::uniform(1, 6, 9));
  GeneralizedState s0 = GeneralizedState::at_rest(sys.dims);
  s0.y[0] = M_PI / 3;
  IntegratorSpec spec;
  spec.dt = 1e-3;
  spec.t_final = static_cast<double>(state.range(0));
  spec.record_every = 100;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, pot, s0, ctl, spec));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(spec.t_final / spec.dt));
}
BENCHMARK(BM_IntegrateThreeLink)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ConstructHByQuadrature(benchmark::State& state) {
  // Strip the closed form so construction falls back to path quadrature.
  const DampingField closed = cosine_coupled_damping();
  const DampingField k(2, [closed](const Vector& x) { return closed(x); });
  const auto pot = construct_h(k, Box::cube(2, 5.0), 9);
  Vector x(2);
  x << 1.3, -0.7;
  for (auto _ : state) benchmark::DoNotOptimize(pot.h(x));
}
BENCHMARK(BM_ConstructHByQuadrature);

}  // namespace

BENCHMARK_MAIN();

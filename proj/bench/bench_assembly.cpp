// Serial reference vs OpenMP assembly and the energy/force post-processing.
#include "mixfrac/config.hpp"
#include "mixfrac/qoi.hpp"
#include "mixfrac/solver.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

using namespace mixfrac;

namespace {

/// Strip with the 6 mm notch at a given target h, loaded to a small stretch.
struct Fixture {
  std::unique_ptr<Discretization> disc;
  Vector x, lag;
};

Fixture& fixture(double h) {
  static std::map<double, Fixture> cache;
  auto it = cache.find(h);
  if (it != cache.end()) return it->second;
  RunSettings s = resolve_preset("strip_notch6_neohooke").run;
  s.mesh.target_h = h;
  Fixture f;
  f.disc = std::make_unique<Discretization>(generate_mesh(s.mesh), s.material, s.model);
  const DofMap& d = f.disc->dofs();
  f.x = intact_state(d);
  for (int n = 0; n < d.n_u_nodes(); ++n) f.x(d.u_dof(n, 1)) = 0.01 * d.u_point(n).y();
  f.lag = Vector::Ones(d.n_phi());
  return cache.emplace(h, std::move(f)).first->second;
}

void assemble(benchmark::State& state, ExecutionMode mode) {
  Fixture& f = fixture(static_cast<double>(state.range(0)) / 100.0);
  Assembler& a = f.disc->assembler();
  a.set_mode(mode);
  AssembledSystem sys;
  for (auto _ : state) {
    a.assemble(f.x, f.lag, sys);
    benchmark::DoNotOptimize(sys.residual.data());
  }
  state.counters["cells"] = f.disc->mesh().n_active();
  state.counters["dofs"] = f.disc->dofs().n_total();
}

void BM_AssembleSerial(benchmark::State& state) { assemble(state, ExecutionMode::serial); }
void BM_AssembleParallel(benchmark::State& state) { assemble(state, ExecutionMode::parallel); }

void BM_Energies(benchmark::State& state) {
  Fixture& f = fixture(static_cast<double>(state.range(0)) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(energies(f.disc->assembler(), f.x).elastic);
}

void BM_BoundaryForce(benchmark::State& state) {
  Fixture& f = fixture(static_cast<double>(state.range(0)) / 100.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(boundary_force(f.disc->assembler(), f.x, BoundaryTag::top, StressEval::degraded).integral);
}

}  // namespace

// Argument: target h in hundredths of a millimetre.
BENCHMARK(BM_AssembleSerial)->Arg(60)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallel)->Arg(60)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Energies)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoundaryForce)->Arg(60)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

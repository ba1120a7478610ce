// Serial vs OpenMP paths of the parallel kernels. Each benchmark takes the
// execution mode as its argument (0 = serial, 1 = OpenMP); results of both
// paths are bit-identical, so only the timings differ.

#include <benchmark/benchmark.h>

#include "eqlab/functionals.hpp"
#include "eqlab/identities.hpp"
#include "eqlab/levelset.hpp"
#include "eqlab/mfs.hpp"
#include "eqlab/planar.hpp"

using namespace eqlab;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

const Field& dipole() {
  static const Field f = AxialDipoleField(1.0, 0.2);
  return f;
}

GridSpec grid(int nt, int np) {
  GridSpec g;
  g.n_theta = nt;
  g.n_phi = np;
  g.r_min = 0.5;
  g.r_max = 1e4;
  return g;
}

void BM_SampleSurface(benchmark::State& state) {
  const GridSpec g = grid(48, 96);
  for (auto _ : state) benchmark::DoNotOptimize(sample_surface(dipole(), 0.05, g, mode(state)));
  state.SetItemsProcessed(state.iterations() * g.n_theta * g.n_phi);
}

void BM_LevelReport(benchmark::State& state) {
  const auto s = sample_surface(dipole(), 0.05, grid(48, 96));
  for (auto _ : state) benchmark::DoNotOptimize(level_report(s, mode(state)));
}

void BM_AssembleCollocation(benchmark::State& state) {
  const auto shape = ConvexShape::ellipsoid(Vec3(1.0, 0.8, 0.7));
  const auto x = shape.fibonacci_points(1600);
  const auto y = shape.fibonacci_points(400, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_collocation(x, y, mode(state)));
}

void BM_PointIdentitySuite(benchmark::State& state) {
  const auto pts = sample_shell_points(1, 1000, Vec3::Zero(), 1.0, 3.0);
  IdentityOptions o;
  o.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(point_identity_suite(dipole(), pts, o));
}

void BM_GridIdentitySuite(benchmark::State& state) {
  const auto s = sample_surface(dipole(), 0.05, grid(24, 48));
  IdentityOptions o;
  o.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(grid_identity_suite(dipole(), s, o));
}

void BM_PlanarCurve(benchmark::State& state) {
  const PlanarField f(EllipseExterior{1.0, 0.3, 6.283185307179586});
  CurveSpec cs;
  cs.n_nodes = 4096;
  for (auto _ : state) benchmark::DoNotOptimize(sample_curve(f, -0.5, cs, mode(state)));
}

}  // namespace

BENCHMARK(BM_SampleSurface)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LevelReport)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleCollocation)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PointIdentitySuite)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridIdentitySuite)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlanarCurve)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "tdoacal/bench.hpp"
#include "tdoacal/homotopy.hpp"
#include "tdoacal/solvers.hpp"
#include "tdoacal/tdoa.hpp"

namespace {

using namespace tdoacal;

PseudorangeMatrix instance_6r3s(std::uint64_t seed) {
  InstanceSpec spec;
  spec.m = 6;
  spec.n = 3;
  spec.seed = seed;
  return generate_instance(spec).second;
}

void BM_BuildDualSystem6r3s(benchmark::State& state) {
  const PseudorangeMatrix pr = instance_6r3s(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_dual_system(pr, DualSystemKind::k6r3s));
  }
}
BENCHMARK(BM_BuildDualSystem6r3s);

void BM_DualSystemEval(benchmark::State& state) {
  const PseudorangeMatrix pr = instance_6r3s(7);
  const PolySystem sys = build_dual_system(pr, DualSystemKind::k6r3s);
  CVector x(8);
  for (int i = 0; i < 8; ++i) x[i] = Complex{0.3 + 0.1 * i, -0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sys.eval(x));
  }
}
BENCHMARK(BM_DualSystemEval);

void BM_TrackSinglePath(benchmark::State& state) {
  const PseudorangeMatrix pr = instance_6r3s(7);
  const PolySystem sys = build_dual_system(pr, DualSystemKind::k6r3s);
  std::vector<int> degrees;
  for (const Poly& p : sys.polys) degrees.push_back(p.total_degree());
  auto [start, roots] = start_system(degrees, 11);
  Homotopy h(sys, start, Complex{0.6, 0.8});
  TrackOptions opts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(track_path(h, roots[5], opts));
  }
}
BENCHMARK(BM_TrackSinglePath);

void BM_SolveSmallSystem(benchmark::State& state) {
  // Two conics in two variables: 4 paths.
  Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
  PolySystem f({x * x + y * y - Poly::constant(2, 1.0),
                x * x - y + Poly::constant(2, {0.25, 0.0})});
  TrackOptions opts;
  opts.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_system(f, opts, 1));
  }
}
BENCHMARK(BM_SolveSmallSystem);

void BM_Trilaterate(benchmark::State& state) {
  Eigen::MatrixX2d anchors(4, 2);
  anchors << 0, 0, 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd d(4);
  const Vec2 p(0.3, 0.4);
  for (int i = 0; i < 4; ++i) d[i] = (p.transpose() - anchors.row(i)).norm();
  for (auto _ : state) {
    benchmark::DoNotOptimize(trilaterate_point(anchors, d));
  }
}
BENCHMARK(BM_Trilaterate);

void BM_Solve6r3sFull(benchmark::State& state) {
  const PseudorangeMatrix pr = instance_6r3s(42);
  SolverConfig cfg;
  cfg.track_options.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_6r3s(pr, cfg));
  }
}
BENCHMARK(BM_Solve6r3sFull)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();

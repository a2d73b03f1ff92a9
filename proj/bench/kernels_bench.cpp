// Compares the serial and OpenMP kernel variants and the two Riccati
// solver paths. Build and run:
//   cmake --build build --target kernels_bench && ./build/kernels_bench

#include <chrono>
#include <cstdio>
#include <vector>

#include "qlqg/graphon.hpp"
#include "qlqg/grid.hpp"
#include "qlqg/kernels.hpp"
#include "qlqg/qnoise.hpp"
#include "qlqg/riccati.hpp"
#include "qlqg/rng.hpp"

using namespace qlqg;

namespace {

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now();
    fn();
    best = std::min(best, now() - t0);
  }
  return best;
}

std::vector<double> random_matrix(int n, std::uint64_t seed) {
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  rng::NormalSampler rng(seed);
  rng.fill_normal(m);
  return m;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", kernels::max_threads());

  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial", "parallel", "speedup");
  for (int n : {64, 128, 200, 400}) {
    const auto a = random_matrix(n, 11);
    const auto b = random_matrix(n, 22);
    std::vector<double> c(a.size());
    const double ts = time_best_of(5, [&] {
      kernels::matmul_scaled_serial(a.data(), b.data(), c.data(), n, 1.0 / n);
    });
    const double tp = time_best_of(5, [&] {
      kernels::matmul_scaled_parallel(a.data(), b.data(), c.data(), n, 1.0 / n);
    });
    std::printf("matmul_scaled n=%-11d %9.3fms %9.3fms %7.2fx\n", n, ts * 1e3,
                tp * 1e3, ts / tp);
  }
  for (int n : {200, 400, 1000}) {
    const auto k = random_matrix(n, 33);
    std::vector<double> x(n, 1.0), y(n);
    const double ts = time_best_of(20, [&] {
      kernels::matvec_scaled_serial(k.data(), x.data(), y.data(), n, 1.0 / n);
    });
    const double tp = time_best_of(20, [&] {
      kernels::matvec_scaled_parallel(k.data(), x.data(), y.data(), n, 1.0 / n);
    });
    std::printf("matvec_scaled n=%-11d %9.3fms %9.3fms %7.2fx\n", n, ts * 1e3,
                tp * 1e3, ts / tp);
  }

  // Riccati: dense operator RK4 vs the per-eigenchannel path on the same
  // problem (scalar costs, so both apply).
  std::printf("\n%-28s %10s %10s %8s\n", "riccati solve", "dense", "spectral",
              "speedup");
  for (int n : {32, 64, 128}) {
    const Grid grid = make_grid(n);
    const OperatorKPS a_op =
        add(discretize(GraphonKernel::constant(0.5), grid),
            OperatorKPS::scaled_identity(grid, 0.1));
    const OperatorKPS b_op = OperatorKPS::scaled_identity(grid, 0.1);
    const CostOperators costs = CostOperators::validate(
        OperatorKPS::identity(grid), OperatorKPS::zero(grid),
        OperatorKPS::identity(grid));
    const TimeGrid tg = TimeGrid::make(1.0, 0.01);
    RiccatiOptions dense{RiccatiPath::Dense, false};
    RiccatiOptions spectral{RiccatiPath::Spectral, false};
    const double td = time_best_of(3, [&] {
      solve_differential_riccati(a_op, b_op, costs, tg, dense);
    });
    const double tsp = time_best_of(3, [&] {
      solve_differential_riccati(a_op, b_op, costs, tg, spectral);
    });
    std::printf("n=%-4d T=1 dt=0.01          %9.3fms %9.3fms %7.2fx\n", n,
                td * 1e3, tsp * 1e3, td / tsp);
  }

  // Monte Carlo path sampling fan-out.
  {
    const Grid grid = make_grid(50);
    const QCovariance q = QCovariance::validate(
        discretize(GraphonKernel::uniform_attachment(), grid));
    const TimeGrid tg = TimeGrid::make(1.0, 0.01);
    const int paths = 2000;
    const double ts = time_best_of(3, [&] {
      kernels::set_execution(kernels::Execution::Serial);
      for (int p = 0; p < paths; ++p) sample_path(q, tg, 1000 + p);
    });
    kernels::set_execution(kernels::Execution::Auto);
    const double tp = time_best_of(3, [&] {
      std::vector<QNoisePath> out(paths);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (int p = 0; p < paths; ++p) out[p] = sample_path(q, tg, 1000 + p);
    });
    std::printf("\nsample_path x%d (n=50)      %9.3fms %9.3fms %7.2fx\n", paths,
                ts * 1e3, tp * 1e3, ts / tp);
  }
  return 0;
}

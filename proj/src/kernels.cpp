#include "qlqg/kernels.hpp"

#include <atomic>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlqg::kernels {

namespace {

std::atomic<Execution> g_mode{Execution::Auto};

constexpr std::size_t kChunk = 4096;
constexpr int kMatmulParallelMin = 64;   // n below this: serial is faster
constexpr int kMatvecParallelMin = 512;
constexpr std::size_t kDotParallelMin = 1 << 16;

bool run_parallel(bool big_enough) {
#ifdef _OPENMP
  switch (g_mode.load(std::memory_order_relaxed)) {
    case Execution::Serial:
      return false;
    case Execution::Parallel:
      return true;
    case Execution::Auto:
      return big_enough && omp_get_max_threads() > 1;
  }
#endif
  (void)big_enough;
  return false;
}

// One output row of C = scale * A * B, ikj order so the inner loop is a
// contiguous fused multiply-add over B's rows.
inline void matmul_row(const double* a, const double* b, double* c, int n,
                       double scale, int i) {
  double* ci = c + static_cast<std::size_t>(i) * n;
  std::memset(ci, 0, sizeof(double) * n);
  const double* ai = a + static_cast<std::size_t>(i) * n;
  for (int k = 0; k < n; ++k) {
    const double aik = ai[k];
    if (aik == 0.0) continue;
    const double* bk = b + static_cast<std::size_t>(k) * n;
    for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
  }
  for (int j = 0; j < n; ++j) ci[j] *= scale;
}

inline double row_dot(const double* x, const double* y, int n) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += x[j] * y[j];
  return acc;
}

}  // namespace

void set_execution(Execution mode) {
  g_mode.store(mode, std::memory_order_relaxed);
}

Execution execution() noexcept { return g_mode.load(std::memory_order_relaxed); }

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void matmul_scaled_serial(const double* a, const double* b, double* c, int n,
                          double scale) {
  for (int i = 0; i < n; ++i) matmul_row(a, b, c, n, scale, i);
}

void matmul_scaled_parallel(const double* a, const double* b, double* c, int n,
                            double scale) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) matmul_row(a, b, c, n, scale, i);
#else
  matmul_scaled_serial(a, b, c, n, scale);
#endif
}

void matmul_scaled(const double* a, const double* b, double* c, int n,
                   double scale) {
  if (run_parallel(n >= kMatmulParallelMin)) {
    matmul_scaled_parallel(a, b, c, n, scale);
  } else {
    matmul_scaled_serial(a, b, c, n, scale);
  }
}

void matvec_scaled_serial(const double* k, const double* x, double* y, int n,
                          double scale) {
  for (int i = 0; i < n; ++i) {
    y[i] = scale * row_dot(k + static_cast<std::size_t>(i) * n, x, n);
  }
}

void matvec_scaled_parallel(const double* k, const double* x, double* y, int n,
                            double scale) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    y[i] = scale * row_dot(k + static_cast<std::size_t>(i) * n, x, n);
  }
#else
  matvec_scaled_serial(k, x, y, n, scale);
#endif
}

void matvec_scaled(const double* k, const double* x, double* y, int n,
                   double scale) {
  if (run_parallel(n >= kMatvecParallelMin)) {
    matvec_scaled_parallel(k, x, y, n, scale);
  } else {
    matvec_scaled_serial(k, x, y, n, scale);
  }
}

double dot_serial(const double* x, const double* y, std::size_t len) {
  double total = 0.0;
  for (std::size_t base = 0; base < len; base += kChunk) {
    const std::size_t end = base + kChunk < len ? base + kChunk : len;
    double part = 0.0;
    for (std::size_t i = base; i < end; ++i) part += x[i] * y[i];
    total += part;
  }
  return total;
}

double dot_parallel(const double* x, const double* y, std::size_t len) {
#ifdef _OPENMP
  const std::size_t nchunks = (len + kChunk - 1) / kChunk;
  std::vector<double> parts(nchunks, 0.0);
#pragma omp parallel for schedule(static)
  for (long long ci = 0; ci < static_cast<long long>(nchunks); ++ci) {
    const std::size_t base = static_cast<std::size_t>(ci) * kChunk;
    const std::size_t end = base + kChunk < len ? base + kChunk : len;
    double part = 0.0;
    for (std::size_t i = base; i < end; ++i) part += x[i] * y[i];
    parts[ci] = part;
  }
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
#else
  return dot_serial(x, y, len);
#endif
}

double dot(const double* x, const double* y, std::size_t len) {
  if (run_parallel(len >= kDotParallelMin)) return dot_parallel(x, y, len);
  return dot_serial(x, y, len);
}

void axpy(double alpha, const double* x, double* y, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

}  // namespace qlqg::kernels

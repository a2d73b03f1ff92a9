#pragma once

#include <cstddef>

// Low-level dense kernels behind the operator algebra. Every kernel has a
// serial and an OpenMP variant producing bitwise-identical results: parallel
// loops split work per output element (or per fixed-size chunk for
// reductions), so the floating-point evaluation order never depends on the
// schedule. The dispatching wrappers pick a variant from the execution mode
// and the problem size.
namespace qlqg::kernels {

enum class Execution { Auto, Serial, Parallel };

void set_execution(Execution mode);
Execution execution() noexcept;
int max_threads() noexcept;

// C = scale * A * B. All matrices n x n row-major; C must not alias A or B.
void matmul_scaled(const double* a, const double* b, double* c, int n,
                   double scale);
void matmul_scaled_serial(const double* a, const double* b, double* c, int n,
                          double scale);
void matmul_scaled_parallel(const double* a, const double* b, double* c, int n,
                            double scale);

// y = scale * K * x with K n x n row-major; y must not alias x.
void matvec_scaled(const double* k, const double* x, double* y, int n,
                   double scale);
void matvec_scaled_serial(const double* k, const double* x, double* y, int n,
                          double scale);
void matvec_scaled_parallel(const double* k, const double* x, double* y, int n,
                            double scale);

// Chunked dot product: both variants accumulate fixed 4096-element chunks
// and combine the partials in index order, so the result is execution-mode
// independent.
double dot(const double* x, const double* y, std::size_t len);
double dot_serial(const double* x, const double* y, std::size_t len);
double dot_parallel(const double* x, const double* y, std::size_t len);

// y += alpha * x over len elements.
void axpy(double alpha, const double* x, double* y, std::size_t len);

}  // namespace qlqg::kernels

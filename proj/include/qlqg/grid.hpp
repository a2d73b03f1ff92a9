#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qlqg/errors.hpp"

// Discretized operator algebra on the uniform partition of [0,1].
//
// Quadrature convention: every L2 integral uses the midpoint rule with
// weight 1/n. The inner product is (1/n) * sum(u_i v_i) and kernel
// application carries one factor 1/n, so a step-embedded adjacency matrix
// acts as A/n and stays consistent under grid refinement.
namespace qlqg {

struct Grid {
  int n = 0;

  double cell_width() const { return 1.0 / n; }
  // Midpoint of cell i (0-indexed): (i + 1/2) / n.
  double midpoint(int i) const { return (i + 0.5) / n; }
  bool operator==(const Grid&) const = default;
};

inline Grid make_grid(int n) {
  if (n < 1) throw dimension_error("grid size must be >= 1");
  return Grid{n};
}

// Piecewise-constant function on the grid cells.
struct GridField {
  Grid grid;
  std::vector<double> values;

  GridField() = default;
  GridField(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n)
      throw dimension_error("field length does not match grid");
  }
  static GridField zeros(Grid g) {
    return GridField(g, std::vector<double>(g.n, 0.0));
  }
  static GridField constant(Grid g, double v) {
    return GridField(g, std::vector<double>(g.n, v));
  }
  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
};

// Dense symmetric-or-not kernel sampled at cell-midpoint pairs. An empty
// entry vector denotes the zero kernel (used heavily for pure-scalar
// operators).
struct KernelMatrix {
  Grid grid;
  std::vector<double> entries;  // row-major n*n, or empty for zero

  KernelMatrix() = default;
  explicit KernelMatrix(Grid g) : grid(g) {}
  KernelMatrix(Grid g, std::vector<double> e) : grid(g), entries(std::move(e)) {
    if (!entries.empty() &&
        entries.size() != static_cast<std::size_t>(g.n) * g.n)
      throw dimension_error("kernel size does not match grid");
  }
  bool is_zero() const { return entries.empty(); }
  void materialize() {
    if (entries.empty()) entries.assign(static_cast<std::size_t>(grid.n) * grid.n, 0.0);
  }
  double at(int i, int j) const {
    return entries.empty() ? 0.0 : entries[static_cast<std::size_t>(i) * grid.n + j];
  }
  double& at_mut(int i, int j) {
    materialize();
    return entries[static_cast<std::size_t>(i) * grid.n + j];
  }
  // Largest |K_ij - K_ji|.
  double asymmetry() const;
};

// Kernel-plus-scalar-identity operator K + c*I. Closed under addition,
// composition and (for positive symmetric operators) square roots; the
// identity part is tracked symbolically and never folded into the kernel.
struct OperatorKPS {
  KernelMatrix kernel;
  double scalar = 0.0;

  OperatorKPS() = default;
  OperatorKPS(KernelMatrix k, double c) : kernel(std::move(k)), scalar(c) {}

  const Grid& grid() const { return kernel.grid; }
  bool pure_scalar() const { return kernel.is_zero(); }

  static OperatorKPS zero(Grid g) { return {KernelMatrix(g), 0.0}; }
  static OperatorKPS identity(Grid g) { return {KernelMatrix(g), 1.0}; }
  static OperatorKPS scaled_identity(Grid g, double c) { return {KernelMatrix(g), c}; }
  static OperatorKPS from_kernel(KernelMatrix k, double c = 0.0) {
    return {std::move(k), c};
  }
};

// Eigen-decomposition of the kernel part under the quadrature convention:
// eigenvalues are operator eigenvalues of K/n, eigenfunctions have unit
// quadrature norm and are stored as rows of `basis`. Sorted descending;
// each eigenfunction's first component above 1e-12 is forced positive.
struct SpectralDecomposition {
  Grid grid;
  std::vector<double> eigenvalues;
  std::vector<double> basis;  // row k = eigenfunction k over cells
  double residual_scalar = 0.0;

  const double* eigenfunction_data(int k) const {
    return basis.data() + static_cast<std::size_t>(k) * grid.n;
  }
  GridField eigenfunction(int k) const {
    return GridField(grid, std::vector<double>(
                               eigenfunction_data(k),
                               eigenfunction_data(k) + grid.n));
  }
  int size() const { return static_cast<int>(eigenvalues.size()); }

  // coords_k = <x, phi_k> for all modes.
  std::vector<double> project(const GridField& x) const;
  // sum_k coeffs_k phi_k.
  GridField reconstruct(const std::vector<double>& coeffs) const;
};

// --- field arithmetic -------------------------------------------------

double inner_product(const GridField& u, const GridField& v);
inline double l2_norm(const GridField& u) {
  double s = inner_product(u, u);
  return s > 0 ? std::sqrt(s) : 0.0;
}
GridField add(const GridField& u, const GridField& v);
GridField subtract(const GridField& u, const GridField& v);
GridField scale(const GridField& u, double c);

// Move a field between nested grids: prolong replicates each cell value
// onto the finer grid (exact as an L2 function), restrict takes cell means.
GridField prolong(const GridField& coarse, Grid fine);
GridField restrict_field(const GridField& fine, Grid coarse);
KernelMatrix restrict_kernel(const KernelMatrix& fine, Grid coarse);

// --- operator algebra -------------------------------------------------

GridField apply(const OperatorKPS& op, const GridField& f);
OperatorKPS compose(const OperatorKPS& a, const OperatorKPS& b);
OperatorKPS add(const OperatorKPS& a, const OperatorKPS& b);
OperatorKPS subtract(const OperatorKPS& a, const OperatorKPS& b);
OperatorKPS scale(const OperatorKPS& a, double c);

SpectralDecomposition spectral_decompose(const OperatorKPS& op);

// Positive square root via the spectral form: scalar part sqrt(c), kernel
// part sum_k (sqrt(lambda_k + c) - sqrt(c)) phi_k phi_k*.
OperatorKPS operator_sqrt(const OperatorKPS& op);

// Per-mode inverse: 1/(lambda_k + c) on the spectrum, 1/c on the
// complement. Requires spectrum bounded away from zero.
OperatorKPS spectral_inverse(const OperatorKPS& op, double min_eigenvalue = 1e-8);

// Kernel trace (1/n) * sum K_ii. With trace_class_only (the default) a
// nonzero identity part is an error, since c*I is not trace-class in the
// limit.
double trace(const OperatorKPS& op, bool trace_class_only = true);

// trace(compose(a, b)); at least one operand must have zero scalar part.
double hs_inner(const OperatorKPS& a, const OperatorKPS& b);

// Hilbert-Schmidt norm of the kernel part; scalar part must be zero.
double hs_norm(const OperatorKPS& op);

// max_k |lambda_k + c| from the spectral decomposition (symmetric kernels).
double op_norm_estimate(const OperatorKPS& op);

// Internal helpers shared by other modules.
namespace detail {
void require_same_grid(const Grid& a, const Grid& b, const char* what);
void require_symmetric(const KernelMatrix& k, const char* what,
                       double tol = 1e-9);
// (1/n^2) * sum_ij a_ij b_ij for same-grid kernels (zero-kernel aware).
double kernel_frobenius_quadrature(const KernelMatrix& a, const KernelMatrix& b);
// sum_k weights_k phi_k phi_k^T as a kernel matrix.
KernelMatrix assemble_modes(const SpectralDecomposition& dec,
                            const std::vector<double>& weights);
}  // namespace detail

}  // namespace qlqg

#include "qlqg/grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "qlqg/kernels.hpp"

namespace qlqg {

namespace detail {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b))
    throw dimension_error(std::string(what) + ": grid mismatch (" +
                          std::to_string(a.n) + " vs " + std::to_string(b.n) + ")");
}

void require_symmetric(const KernelMatrix& k, const char* what, double tol) {
  const double asym = k.asymmetry();
  if (asym > tol)
    throw domain_error(std::string(what) + ": kernel asymmetry " +
                       std::to_string(asym) + " exceeds tolerance");
}

double kernel_frobenius_quadrature(const KernelMatrix& a, const KernelMatrix& b) {
  if (a.is_zero() || b.is_zero()) return 0.0;
  const double n = static_cast<double>(a.grid.n);
  return kernels::dot(a.entries.data(), b.entries.data(), a.entries.size()) /
         (n * n);
}

}  // namespace detail

double KernelMatrix::asymmetry() const {
  if (is_zero()) return 0.0;
  double worst = 0.0;
  for (int i = 0; i < grid.n; ++i)
    for (int j = i + 1; j < grid.n; ++j)
      worst = std::max(worst, std::abs(at(i, j) - at(j, i)));
  return worst;
}

std::vector<double> SpectralDecomposition::project(const GridField& x) const {
  detail::require_same_grid(grid, x.grid, "spectral project");
  std::vector<double> coords(eigenvalues.size());
  kernels::matvec_scaled(basis.data(), x.values.data(), coords.data(), grid.n,
                         1.0 / grid.n);
  return coords;
}

GridField SpectralDecomposition::reconstruct(const std::vector<double>& coeffs) const {
  GridField out = GridField::zeros(grid);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == 0.0) continue;
    kernels::axpy(coeffs[k], eigenfunction_data(static_cast<int>(k)),
                  out.values.data(), grid.n);
  }
  return out;
}

// --- field arithmetic -------------------------------------------------

double inner_product(const GridField& u, const GridField& v) {
  detail::require_same_grid(u.grid, v.grid, "inner_product");
  return kernels::dot(u.values.data(), v.values.data(), u.values.size()) /
         u.grid.n;
}

GridField add(const GridField& u, const GridField& v) {
  detail::require_same_grid(u.grid, v.grid, "field add");
  GridField out = u;
  kernels::axpy(1.0, v.values.data(), out.values.data(), out.values.size());
  return out;
}

GridField subtract(const GridField& u, const GridField& v) {
  detail::require_same_grid(u.grid, v.grid, "field subtract");
  GridField out = u;
  kernels::axpy(-1.0, v.values.data(), out.values.data(), out.values.size());
  return out;
}

GridField scale(const GridField& u, double c) {
  GridField out = u;
  for (double& x : out.values) x *= c;
  return out;
}

GridField prolong(const GridField& coarse, Grid fine) {
  if (fine.n % coarse.grid.n != 0)
    throw dimension_error("prolong: coarse grid does not divide fine grid");
  const int k = fine.n / coarse.grid.n;
  GridField out = GridField::zeros(fine);
  for (int i = 0; i < coarse.grid.n; ++i)
    for (int j = 0; j < k; ++j) out.values[i * k + j] = coarse.values[i];
  return out;
}

GridField restrict_field(const GridField& fine, Grid coarse) {
  if (fine.grid.n % coarse.n != 0)
    throw dimension_error("restrict: coarse grid does not divide fine grid");
  const int k = fine.grid.n / coarse.n;
  GridField out = GridField::zeros(coarse);
  for (int i = 0; i < coarse.n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += fine.values[i * k + j];
    out.values[i] = acc / k;
  }
  return out;
}

KernelMatrix restrict_kernel(const KernelMatrix& fine, Grid coarse) {
  if (fine.grid.n % coarse.n != 0)
    throw dimension_error("restrict: coarse grid does not divide fine grid");
  if (fine.is_zero()) return KernelMatrix(coarse);
  const int k = fine.grid.n / coarse.n;
  KernelMatrix out(coarse);
  out.materialize();
  for (int i = 0; i < coarse.n; ++i)
    for (int j = 0; j < coarse.n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p)
        for (int q = 0; q < k; ++q) acc += fine.at(i * k + p, j * k + q);
      out.at_mut(i, j) = acc / (k * k);
    }
  return out;
}

// --- operator algebra -------------------------------------------------

GridField apply(const OperatorKPS& op, const GridField& f) {
  detail::require_same_grid(op.grid(), f.grid, "apply");
  GridField out = GridField::zeros(f.grid);
  if (!op.kernel.is_zero()) {
    kernels::matvec_scaled(op.kernel.entries.data(), f.values.data(),
                           out.values.data(), f.grid.n, 1.0 / f.grid.n);
  }
  if (op.scalar != 0.0)
    kernels::axpy(op.scalar, f.values.data(), out.values.data(),
                  out.values.size());
  return out;
}

OperatorKPS compose(const OperatorKPS& a, const OperatorKPS& b) {
  detail::require_same_grid(a.grid(), b.grid(), "compose");
  const int n = a.grid().n;
  OperatorKPS out = OperatorKPS::zero(a.grid());
  out.scalar = a.scalar * b.scalar;
  if (!a.kernel.is_zero() && !b.kernel.is_zero()) {
    out.kernel.materialize();
    kernels::matmul_scaled(a.kernel.entries.data(), b.kernel.entries.data(),
                           out.kernel.entries.data(), n, 1.0 / n);
  }
  if (!b.kernel.is_zero() && a.scalar != 0.0) {
    out.kernel.materialize();
    kernels::axpy(a.scalar, b.kernel.entries.data(), out.kernel.entries.data(),
                  out.kernel.entries.size());
  }
  if (!a.kernel.is_zero() && b.scalar != 0.0) {
    out.kernel.materialize();
    kernels::axpy(b.scalar, a.kernel.entries.data(), out.kernel.entries.data(),
                  out.kernel.entries.size());
  }
  return out;
}

OperatorKPS add(const OperatorKPS& a, const OperatorKPS& b) {
  detail::require_same_grid(a.grid(), b.grid(), "operator add");
  OperatorKPS out = a;
  out.scalar += b.scalar;
  if (!b.kernel.is_zero()) {
    out.kernel.materialize();
    kernels::axpy(1.0, b.kernel.entries.data(), out.kernel.entries.data(),
                  out.kernel.entries.size());
  }
  return out;
}

OperatorKPS subtract(const OperatorKPS& a, const OperatorKPS& b) {
  detail::require_same_grid(a.grid(), b.grid(), "operator subtract");
  OperatorKPS out = a;
  out.scalar -= b.scalar;
  if (!b.kernel.is_zero()) {
    out.kernel.materialize();
    kernels::axpy(-1.0, b.kernel.entries.data(), out.kernel.entries.data(),
                  out.kernel.entries.size());
  }
  return out;
}

OperatorKPS scale(const OperatorKPS& a, double c) {
  OperatorKPS out = a;
  out.scalar *= c;
  for (double& x : out.kernel.entries) x *= c;
  return out;
}

SpectralDecomposition spectral_decompose(const OperatorKPS& op) {
  detail::require_symmetric(op.kernel, "spectral_decompose");
  const int n = op.grid().n;
  SpectralDecomposition dec;
  dec.grid = op.grid();
  dec.residual_scalar = op.scalar;
  dec.eigenvalues.assign(n, 0.0);
  dec.basis.assign(static_cast<std::size_t>(n) * n, 0.0);

  if (op.kernel.is_zero()) {
    // Zero kernel: canonical basis of scaled indicators.
    const double s = std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k)
      dec.basis[static_cast<std::size_t>(k) * n + k] = s;
    return dec;
  }

  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> kmat(op.kernel.entries.data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kmat / n);
  if (solver.info() != Eigen::Success)
    throw domain_error("spectral_decompose: eigensolver failed");

  // Eigen returns ascending order and euclidean-orthonormal vectors; we
  // want descending operator eigenvalues and quadrature-orthonormal rows.
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  const double s = std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    const int src = n - 1 - k;
    dec.eigenvalues[k] = vals(src);
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(vecs(i, src)) > 1e-12) {
        sign = vecs(i, src) > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < n; ++i)
      dec.basis[static_cast<std::size_t>(k) * n + i] = sign * s * vecs(i, src);
  }
  return dec;
}

namespace detail {

KernelMatrix assemble_modes(const SpectralDecomposition& dec,
                            const std::vector<double>& weights) {
  const int n = dec.grid.n;
  KernelMatrix out(dec.grid);
  bool all_zero = true;
  for (double w : weights)
    if (w != 0.0) all_zero = false;
  if (all_zero) return out;
  out.materialize();
  // K = B^T diag(w) B with B rows = eigenfunctions: accumulate scaled rows.
  std::vector<double> scaled(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    const double* row = dec.eigenfunction_data(k);
    for (int i = 0; i < n; ++i)
      scaled[static_cast<std::size_t>(k) * n + i] = weights[k] * row[i];
  }
  // out_ij = sum_k scaled_ki * basis_kj  -> (scaled^T * basis)
  for (int k = 0; k < n; ++k) {
    const double* srow = scaled.data() + static_cast<std::size_t>(k) * n;
    const double* brow = dec.eigenfunction_data(k);
    for (int i = 0; i < n; ++i) {
      if (srow[i] == 0.0) continue;
      kernels::axpy(srow[i], brow,
                    out.entries.data() + static_cast<std::size_t>(i) * n, n);
    }
  }
  return out;
}

}  // namespace detail

OperatorKPS operator_sqrt(const OperatorKPS& op) {
  if (op.pure_scalar()) {
    if (op.scalar < -1e-10)
      throw domain_error("operator_sqrt: negative scalar " +
                         std::to_string(op.scalar));
    return OperatorKPS::scaled_identity(op.grid(),
                                        std::sqrt(std::max(0.0, op.scalar)));
  }
  SpectralDecomposition dec = spectral_decompose(op);
  const double c = op.scalar;
  if (c < -1e-10)
    throw domain_error("operator_sqrt: negative scalar part " + std::to_string(c));
  const double root_c = std::sqrt(std::max(0.0, c));
  std::vector<double> weights(dec.eigenvalues.size());
  for (std::size_t k = 0; k < dec.eigenvalues.size(); ++k) {
    double total = dec.eigenvalues[k] + c;
    if (total < -1e-10)
      throw domain_error("operator_sqrt: eigenvalue " + std::to_string(total) +
                         " below tolerance at mode " + std::to_string(k));
    total = std::max(0.0, total);
    weights[k] = std::sqrt(total) - root_c;
  }
  return OperatorKPS::from_kernel(detail::assemble_modes(dec, weights), root_c);
}

OperatorKPS spectral_inverse(const OperatorKPS& op, double min_eigenvalue) {
  if (op.pure_scalar()) {
    if (op.scalar < min_eigenvalue)
      throw domain_error("spectral_inverse: scalar " + std::to_string(op.scalar) +
                         " below invertibility threshold");
    return OperatorKPS::scaled_identity(op.grid(), 1.0 / op.scalar);
  }
  SpectralDecomposition dec = spectral_decompose(op);
  const double c = op.scalar;
  if (c < min_eigenvalue)
    throw domain_error("spectral_inverse: complement eigenvalue " +
                       std::to_string(c) + " below invertibility threshold");
  std::vector<double> weights(dec.eigenvalues.size());
  for (std::size_t k = 0; k < dec.eigenvalues.size(); ++k) {
    const double total = dec.eigenvalues[k] + c;
    if (total < min_eigenvalue)
      throw domain_error("spectral_inverse: eigenvalue " + std::to_string(total) +
                         " below invertibility threshold at mode " +
                         std::to_string(k));
    weights[k] = 1.0 / total - 1.0 / c;
  }
  return OperatorKPS::from_kernel(detail::assemble_modes(dec, weights), 1.0 / c);
}

double trace(const OperatorKPS& op, bool trace_class_only) {
  if (trace_class_only && op.scalar != 0.0)
    throw domain_error("trace: identity part is not trace-class");
  if (op.kernel.is_zero()) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < op.grid().n; ++i) acc += op.kernel.at(i, i);
  return acc / op.grid().n;
}

double hs_inner(const OperatorKPS& a, const OperatorKPS& b) {
  detail::require_same_grid(a.grid(), b.grid(), "hs_inner");
  if (a.scalar != 0.0 && b.scalar != 0.0)
    throw domain_error("hs_inner: both operands carry an identity part");
  double total = detail::kernel_frobenius_quadrature(a.kernel, b.kernel);
  if (a.scalar != 0.0)
    total += a.scalar * trace(OperatorKPS::from_kernel(b.kernel), true);
  if (b.scalar != 0.0)
    total += b.scalar * trace(OperatorKPS::from_kernel(a.kernel), true);
  return total;
}

double hs_norm(const OperatorKPS& op) {
  if (op.scalar != 0.0)
    throw domain_error("hs_norm: identity part is not Hilbert-Schmidt");
  const double sq = detail::kernel_frobenius_quadrature(op.kernel, op.kernel);
  return sq > 0 ? std::sqrt(sq) : 0.0;
}

double op_norm_estimate(const OperatorKPS& op) {
  if (op.pure_scalar()) return std::abs(op.scalar);
  SpectralDecomposition dec = spectral_decompose(op);
  double worst = 0.0;
  for (double lam : dec.eigenvalues)
    worst = std::max(worst, std::abs(lam + op.scalar));
  return worst;
}

}  // namespace qlqg

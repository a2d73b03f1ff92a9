#pragma once

#include <span>
#include <vector>

#include "qlqg/dynamics.hpp"
#include "qlqg/grid.hpp"
#include "qlqg/qnoise.hpp"
#include "qlqg/riccati.hpp"

// Finite-rank invariant-subspace decomposition: projection of a grid LQG
// problem onto an orthonormal basis span plus a scalar complement problem,
// and lifting of the projected solution back to the full grid.
namespace qlqg {

class OrthonormalBasis {
 public:
  // Gram-Schmidt under the quadrature inner product; throws if the inputs
  // are linearly dependent beyond tolerance.
  static OrthonormalBasis orthonormalize(const std::vector<GridField>& fields);

  const Grid& grid() const { return grid_; }
  int size() const { return size_; }
  double gram_tolerance() const { return gram_tolerance_; }
  const double* function_data(int k) const {
    return funcs_.data() + static_cast<std::size_t>(k) * grid_.n;
  }
  GridField function(int k) const;

  // coords_k = <x, f_k>.
  std::vector<double> project(const GridField& x) const;
  GridField reconstruct(std::span<const double> coords) const;

  void write_csv(const std::string& path) const;

 private:
  Grid grid_;
  int size_ = 0;
  std::vector<double> funcs_;  // row k = f_k
  double gram_tolerance_ = 0.0;
};

// Small dense symmetric matrix for the projected problem.
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;  // row-major
  static DenseMatrix zeros(int n) {
    return DenseMatrix{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  }
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

// Projection of the kernel part: matrix_ij = <K f_i, f_j>; the scalar part
// passes through unchanged.
std::pair<DenseMatrix, double> project_operator(const OperatorKPS& op,
                                                const OrthonormalBasis& basis);

// HS norm of the kernel action outside the basis span: ||K - P K P||_HS
// with P the orthogonal projection. Zero means exactly low rank.
double check_low_rank(const OperatorKPS& op, const OrthonormalBasis& basis);

struct FieldDecomposition {
  std::vector<double> coords;
  GridField complement;
};
FieldDecomposition decompose_field(const GridField& x,
                                   const OrthonormalBasis& basis);

GridField lift_control(std::span<const double> coords,
                       const GridField& complement,
                       const OrthonormalBasis& basis);

// Matrices and identity parts of the projected LQG problem. q_matrix is the
// projected noise covariance <Q f_i, f_j>; q_diag holds its KL eigenvalues
// (equal to the diagonal when the noise modes align with the basis).
struct ProjectedSystem {
  int dims = 0;
  DenseMatrix A, B, M, M_T, R;
  double a = 0, b = 0, m = 0, m_t = 0, r = 0;
  DenseMatrix q_matrix;
  std::vector<double> q_diag;
  bool q_aligned = false;  // q_matrix is diagonal within tolerance
};

// Builds the projected problem. Refuses (domain_error carrying the
// residual) when the noise covariance is not low rank with respect to the
// basis: silently projecting the noise would change the problem.
ProjectedSystem project_system(const OperatorKPS& a_op, const OperatorKPS& b_op,
                               const CostOperators& costs, const QCovariance& q,
                               const OrthonormalBasis& basis,
                               double lowrank_tol = 1e-8);

// Scalar complement Riccati: -p' = 2 a p - (b^2/r) p^2 + m, p(T) = m_T.
// Control is u = -(b/r) p x, so the closed-loop drift correction is
// (b^2/r) p.
struct ComplementSolution {
  TimeGrid timegrid;
  std::vector<double> p;  // steps+1 values, index 0 = t = 0
  double b = 0, r = 0, a = 0;
  double control_gain(int idx) const { return (b / r) * p[idx]; }
  double feedback_coefficient(int idx) const { return (b * b / r) * p[idx]; }
};

struct LowRankSolution {
  TimeGrid timegrid;
  std::vector<DenseMatrix> P;  // steps+1 matrices
  ComplementSolution complement;
};

LowRankSolution solve_lowrank_lqg(const ProjectedSystem& proj,
                                  const TimeGrid& tg);

// Projected increments <dw_s, f_k> of a full-grid noise path, steps x dims.
std::vector<double> project_noise(const QNoisePath& path,
                                  const OrthonormalBasis& basis);

struct ProjectedTrajectory {
  TimeGrid timegrid;
  int dims = 0;
  std::vector<double> coords;      // (steps+1) x dims
  std::vector<double> u_coords;    // steps x dims
  std::vector<double> complement;  // (steps+1) x n complement states
  Trajectory lifted;               // coords recombined with the complement
};

// Simulates the projected system under its optimal gains together with the
// diagonal complement flow, from the decomposition of x0, driven by
// projected noise increments.
ProjectedTrajectory simulate_projected(const ProjectedSystem& proj,
                                       const LowRankSolution& sol,
                                       const OrthonormalBasis& basis,
                                       const GridField& x0, const TimeGrid& tg,
                                       std::span<const double> noise_coords);

// Realized cost of a projected trajectory, split into the subspace part
// (matrix cost data) and the complement part (identity cost parts).
struct ProjectedCost {
  double subspace = 0.0;
  double complement = 0.0;
  double total() const { return subspace + complement; }
};
ProjectedCost projected_cost(const ProjectedSystem& proj,
                             const ProjectedTrajectory& traj,
                             const LowRankSolution& sol);

void write_matrix_csv(const DenseMatrix& m, const std::string& path);

}  // namespace qlqg

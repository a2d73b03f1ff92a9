#include "qlqg/lowrank.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "qlqg/kernels.hpp"

namespace qlqg {

namespace {
constexpr double kGramTol = 1e-10;
}

OrthonormalBasis OrthonormalBasis::orthonormalize(
    const std::vector<GridField>& fields) {
  if (fields.empty()) throw dimension_error("orthonormal basis: no fields");
  OrthonormalBasis basis;
  basis.grid_ = fields[0].grid;
  basis.size_ = static_cast<int>(fields.size());
  const int n = basis.grid_.n;
  basis.funcs_.assign(static_cast<std::size_t>(basis.size_) * n, 0.0);

  for (int k = 0; k < basis.size_; ++k) {
    detail::require_same_grid(basis.grid_, fields[k].grid, "orthonormal basis");
    GridField f = fields[k];
    // Two Gram-Schmidt passes to push the Gram residual to rounding level.
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) {
        const GridField prev(basis.grid_,
                             std::vector<double>(basis.function_data(j),
                                                 basis.function_data(j) + n));
        const double c = inner_product(f, prev);
        kernels::axpy(-c, prev.values.data(), f.values.data(), n);
      }
    }
    const double norm = l2_norm(f);
    if (norm < 1e-12)
      throw domain_error("orthonormal basis: field " + std::to_string(k) +
                         " is linearly dependent on its predecessors");
    for (int i = 0; i < n; ++i)
      basis.funcs_[static_cast<std::size_t>(k) * n + i] = f.values[i] / norm;
  }

  double worst = 0.0;
  for (int i = 0; i < basis.size_; ++i)
    for (int j = 0; j <= i; ++j) {
      const double g = kernels::dot(basis.function_data(i),
                                    basis.function_data(j), n) /
                       n;
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  basis.gram_tolerance_ = worst;
  if (worst > kGramTol)
    throw domain_error("orthonormal basis: Gram residual " +
                       std::to_string(worst) + " above tolerance");
  return basis;
}

GridField OrthonormalBasis::function(int k) const {
  return GridField(grid_, std::vector<double>(function_data(k),
                                              function_data(k) + grid_.n));
}

std::vector<double> OrthonormalBasis::project(const GridField& x) const {
  detail::require_same_grid(grid_, x.grid, "basis project");
  std::vector<double> coords(size_);
  for (int k = 0; k < size_; ++k)
    coords[k] = kernels::dot(function_data(k), x.values.data(), grid_.n) / grid_.n;
  return coords;
}

GridField OrthonormalBasis::reconstruct(std::span<const double> coords) const {
  GridField out = GridField::zeros(grid_);
  for (int k = 0; k < size_ && k < static_cast<int>(coords.size()); ++k)
    kernels::axpy(coords[k], function_data(k), out.values.data(), grid_.n);
  return out;
}

void OrthonormalBasis::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  out << "alpha";
  for (int k = 0; k < size_; ++k) out << ",f" << k;
  out << "\n";
  char buf[40];
  for (int i = 0; i < grid_.n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", grid_.midpoint(i));
    out << buf;
    for (int k = 0; k < size_; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", function_data(k)[i]);
      out << "," << buf;
    }
    out << "\n";
  }
}

std::pair<DenseMatrix, double> project_operator(const OperatorKPS& op,
                                                const OrthonormalBasis& basis) {
  detail::require_same_grid(op.grid(), basis.grid(), "project_operator");
  const int nf = basis.size();
  DenseMatrix mat = DenseMatrix::zeros(nf);
  if (!op.kernel.is_zero()) {
    const OperatorKPS kernel_only = OperatorKPS::from_kernel(op.kernel);
    for (int i = 0; i < nf; ++i) {
      const GridField kfi = apply(kernel_only, basis.function(i));
      for (int j = 0; j < nf; ++j)
        mat.at(i, j) =
            kernels::dot(kfi.values.data(), basis.function_data(j), basis.grid().n) /
            basis.grid().n;
    }
  }
  return {std::move(mat), op.scalar};
}

double check_low_rank(const OperatorKPS& op, const OrthonormalBasis& basis) {
  detail::require_same_grid(op.grid(), basis.grid(), "check_low_rank");
  if (op.kernel.is_zero()) return 0.0;
  const int n = basis.grid().n;
  // P as a rank-N_f kernel: sum_k f_k f_k^T.
  KernelMatrix p(basis.grid());
  p.materialize();
  for (int k = 0; k < basis.size(); ++k) {
    const double* f = basis.function_data(k);
    for (int i = 0; i < n; ++i)
      kernels::axpy(f[i], f, p.entries.data() + static_cast<std::size_t>(i) * n, n);
  }
  const OperatorKPS proj = OperatorKPS::from_kernel(std::move(p));
  const OperatorKPS kernel_only = OperatorKPS::from_kernel(op.kernel);
  const OperatorKPS pkp = compose(proj, compose(kernel_only, proj));
  const OperatorKPS diff = subtract(kernel_only, pkp);
  return hs_norm(diff);
}

FieldDecomposition decompose_field(const GridField& x,
                                   const OrthonormalBasis& basis) {
  FieldDecomposition dec;
  dec.coords = basis.project(x);
  dec.complement = subtract(x, basis.reconstruct(dec.coords));
  return dec;
}

GridField lift_control(std::span<const double> coords,
                       const GridField& complement,
                       const OrthonormalBasis& basis) {
  detail::require_same_grid(complement.grid, basis.grid(), "lift_control");
  GridField out = basis.reconstruct(coords);
  kernels::axpy(1.0, complement.values.data(), out.values.data(),
                out.values.size());
  return out;
}

ProjectedSystem project_system(const OperatorKPS& a_op, const OperatorKPS& b_op,
                               const CostOperators& costs, const QCovariance& q,
                               const OrthonormalBasis& basis,
                               double lowrank_tol) {
  const double q_residual = check_low_rank(q.op(), basis);
  if (q_residual > lowrank_tol)
    throw domain_error(
        "project_system: noise covariance is not low rank with respect to the "
        "basis (residual " +
        std::to_string(q_residual) + "); projecting it would change the problem");

  ProjectedSystem proj;
  proj.dims = basis.size();
  std::tie(proj.A, proj.a) = project_operator(a_op, basis);
  std::tie(proj.B, proj.b) = project_operator(b_op, basis);
  std::tie(proj.M, proj.m) = project_operator(costs.state_cost, basis);
  std::tie(proj.M_T, proj.m_t) = project_operator(costs.terminal_cost, basis);
  std::tie(proj.R, proj.r) = project_operator(costs.control_cost, basis);
  if (proj.r < 1e-8)
    throw domain_error(
        "project_system: control cost identity part must be strictly positive "
        "for the complement problem");
  std::tie(proj.q_matrix, std::ignore) = project_operator(q.op(), basis);

  proj.q_aligned = true;
  for (int i = 0; i < proj.dims && proj.q_aligned; ++i)
    for (int j = 0; j < proj.dims; ++j)
      if (i != j && std::abs(proj.q_matrix.at(i, j)) > 1e-10) {
        proj.q_aligned = false;
        break;
      }
  if (proj.q_aligned) {
    proj.q_diag.resize(proj.dims);
    for (int i = 0; i < proj.dims; ++i) proj.q_diag[i] = proj.q_matrix.at(i, i);
  } else {
    Eigen::MatrixXd qm(proj.dims, proj.dims);
    for (int i = 0; i < proj.dims; ++i)
      for (int j = 0; j < proj.dims; ++j) qm(i, j) = proj.q_matrix.at(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qm);
    proj.q_diag.assign(es.eigenvalues().data(),
                       es.eigenvalues().data() + proj.dims);
    std::reverse(proj.q_diag.begin(), proj.q_diag.end());
  }
  return proj;
}

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd out(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out(i, j) = m.at(i, j);
  return out;
}

DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
  DenseMatrix out = DenseMatrix::zeros(static_cast<int>(m.rows()));
  for (int i = 0; i < out.n; ++i)
    for (int j = 0; j < out.n; ++j) out.at(i, j) = m(i, j);
  return out;
}

}  // namespace

LowRankSolution solve_lowrank_lqg(const ProjectedSystem& proj,
                                  const TimeGrid& tg) {
  const int nf = proj.dims;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nf, nf);
  const Eigen::MatrixXd Abar = to_eigen(proj.A) + proj.a * I;
  const Eigen::MatrixXd Bbar = to_eigen(proj.B) + proj.b * I;
  const Eigen::MatrixXd Mbar = to_eigen(proj.M) + proj.m * I;
  const Eigen::MatrixXd MTbar = to_eigen(proj.M_T) + proj.m_t * I;
  const Eigen::MatrixXd Rbar = to_eigen(proj.R) + proj.r * I;
  Eigen::LLT<Eigen::MatrixXd> rchol(Rbar);
  if (rchol.info() != Eigen::Success)
    throw domain_error("solve_lowrank_lqg: projected control cost is not PD");
  const Eigen::MatrixXd G = Bbar * rchol.solve(Bbar.transpose());

  LowRankSolution sol;
  sol.timegrid = tg;
  sol.P.assign(tg.steps + 1, DenseMatrix::zeros(nf));
  Eigen::MatrixXd P = MTbar;
  sol.P[tg.steps] = from_eigen(P);
  auto rhs = [&](const Eigen::MatrixXd& p) -> Eigen::MatrixXd {
    return Abar.transpose() * p + p * Abar - p * G * p + Mbar;
  };
  for (int idx = tg.steps; idx > 0; --idx) {
    const Eigen::MatrixXd k1 = rhs(P);
    const Eigen::MatrixXd k2 = rhs(P + 0.5 * tg.dt * k1);
    const Eigen::MatrixXd k3 = rhs(P + 0.5 * tg.dt * k2);
    const Eigen::MatrixXd k4 = rhs(P + tg.dt * k3);
    P += tg.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    P = 0.5 * (P + P.transpose()).eval();
    if (!P.allFinite())
      throw instability_error("projected Riccati solve blew up", idx - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
      throw instability_error("projected Riccati solution lost positivity",
                              idx - 1);
    sol.P[idx - 1] = from_eigen(P);
  }

  // Scalar complement channel.
  sol.complement.timegrid = tg;
  sol.complement.a = proj.a;
  sol.complement.b = proj.b;
  sol.complement.r = proj.r;
  sol.complement.p.assign(tg.steps + 1, 0.0);
  double p = proj.m_t;
  sol.complement.p[tg.steps] = p;
  const double g = proj.b * proj.b / proj.r;
  auto prhs = [&](double v) { return 2.0 * proj.a * v - g * v * v + proj.m; };
  for (int idx = tg.steps; idx > 0; --idx) {
    const double k1 = prhs(p);
    const double k2 = prhs(p + 0.5 * tg.dt * k1);
    const double k3 = prhs(p + 0.5 * tg.dt * k2);
    const double k4 = prhs(p + tg.dt * k3);
    p += tg.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(p) || p < -1e-8)
      throw instability_error("complement Riccati solve left [0, inf)", idx - 1);
    sol.complement.p[idx - 1] = p;
  }
  return sol;
}

std::vector<double> project_noise(const QNoisePath& path,
                                  const OrthonormalBasis& basis) {
  detail::require_same_grid(path.grid, basis.grid(), "project_noise");
  const int nf = basis.size();
  const int n = path.grid.n;
  std::vector<double> out(static_cast<std::size_t>(path.timegrid.steps) * nf);
  for (int s = 0; s < path.timegrid.steps; ++s) {
    const double* row = path.increments.data() + static_cast<std::size_t>(s) * n;
    for (int k = 0; k < nf; ++k)
      out[static_cast<std::size_t>(s) * nf + k] =
          kernels::dot(row, basis.function_data(k), n) / n;
  }
  return out;
}

ProjectedTrajectory simulate_projected(const ProjectedSystem& proj,
                                       const LowRankSolution& sol,
                                       const OrthonormalBasis& basis,
                                       const GridField& x0, const TimeGrid& tg,
                                       std::span<const double> noise_coords) {
  const int nf = proj.dims;
  const int n = basis.grid().n;
  if (noise_coords.size() < static_cast<std::size_t>(tg.steps) * nf)
    throw dimension_error("simulate_projected: noise coordinate matrix too small");

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nf, nf);
  const Eigen::MatrixXd Abar = to_eigen(proj.A) + proj.a * I;
  const Eigen::MatrixXd Bbar = to_eigen(proj.B) + proj.b * I;
  const Eigen::MatrixXd Rbar = to_eigen(proj.R) + proj.r * I;
  Eigen::LLT<Eigen::MatrixXd> rchol(Rbar);

  ProjectedTrajectory out;
  out.timegrid = tg;
  out.dims = nf;
  out.coords.assign(static_cast<std::size_t>(tg.steps + 1) * nf, 0.0);
  out.u_coords.assign(static_cast<std::size_t>(tg.steps) * nf, 0.0);
  out.complement.assign(static_cast<std::size_t>(tg.steps + 1) * n, 0.0);
  out.lifted.timegrid = tg;
  out.lifted.grid = basis.grid();
  out.lifted.states.assign(static_cast<std::size_t>(tg.steps + 1) * n, 0.0);

  const FieldDecomposition dec = decompose_field(x0, basis);
  Eigen::VectorXd xf(nf);
  for (int k = 0; k < nf; ++k) xf(k) = dec.coords[k];
  std::vector<double> xc = dec.complement.values;

  auto store = [&](int idx) {
    for (int k = 0; k < nf; ++k)
      out.coords[static_cast<std::size_t>(idx) * nf + k] = xf(k);
    std::copy(xc.begin(), xc.end(),
              out.complement.begin() + static_cast<std::size_t>(idx) * n);
    GridField lift = basis.reconstruct(
        std::span<const double>(out.coords.data() + static_cast<std::size_t>(idx) * nf,
                                static_cast<std::size_t>(nf)));
    kernels::axpy(1.0, xc.data(), lift.values.data(), n);
    std::copy(lift.values.begin(), lift.values.end(),
              out.lifted.states.begin() + static_cast<std::size_t>(idx) * n);
  };
  store(0);

  for (int s = 0; s < tg.steps; ++s) {
    Eigen::MatrixXd P = to_eigen(sol.P[s]);
    const Eigen::VectorXd u = -rchol.solve(Bbar.transpose() * (P * xf));
    for (int k = 0; k < nf; ++k)
      out.u_coords[static_cast<std::size_t>(s) * nf + k] = u(k);
    Eigen::VectorXd dxf = Abar * xf + Bbar * u;
    for (int k = 0; k < nf; ++k)
      xf(k) += tg.dt * dxf(k) + noise_coords[static_cast<std::size_t>(s) * nf + k];
    const double cgain = sol.complement.control_gain(s);
    for (int i = 0; i < n; ++i) {
      const double uc = -cgain * xc[i];
      xc[i] += tg.dt * (proj.a * xc[i] + proj.b * uc);
    }
    store(s + 1);
  }
  return out;
}

ProjectedCost projected_cost(const ProjectedSystem& proj,
                             const ProjectedTrajectory& traj,
                             const LowRankSolution& sol) {
  const int nf = proj.dims;
  const int n = static_cast<int>(traj.complement.size() /
                                 (traj.timegrid.steps + 1));
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nf, nf);
  const Eigen::MatrixXd Mbar = to_eigen(proj.M) + proj.m * I;
  const Eigen::MatrixXd MTbar = to_eigen(proj.M_T) + proj.m_t * I;
  const Eigen::MatrixXd Rbar = to_eigen(proj.R) + proj.r * I;

  ProjectedCost cost;
  const double dt = traj.timegrid.dt;
  auto coords_at = [&](int idx) {
    Eigen::VectorXd v(nf);
    for (int k = 0; k < nf; ++k)
      v(k) = traj.coords[static_cast<std::size_t>(idx) * nf + k];
    return v;
  };
  for (int s = 0; s < traj.timegrid.steps; ++s) {
    const Eigen::VectorXd x = coords_at(s);
    Eigen::VectorXd u(nf);
    for (int k = 0; k < nf; ++k)
      u(k) = traj.u_coords[static_cast<std::size_t>(s) * nf + k];
    cost.subspace += dt * (x.dot(Mbar * x) + u.dot(Rbar * u));
  }
  const Eigen::VectorXd xT = coords_at(traj.timegrid.steps);
  cost.subspace += xT.dot(MTbar * xT);

  auto comp_sq = [&](int idx) {
    const double* row = traj.complement.data() + static_cast<std::size_t>(idx) * n;
    return kernels::dot(row, row, n) / n;
  };
  for (int s = 0; s < traj.timegrid.steps; ++s) {
    const double xsq = comp_sq(s);
    const double g = sol.complement.control_gain(s);
    cost.complement += dt * (proj.m * xsq + proj.r * g * g * xsq);
  }
  cost.complement += proj.m_t * comp_sq(traj.timegrid.steps);
  return cost;
}

void write_matrix_csv(const DenseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  char buf[40];
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) {
      if (j) out << ",";
      std::snprintf(buf, sizeof buf, "%.17g", m.at(i, j));
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace qlqg

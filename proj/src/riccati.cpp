#include "qlqg/riccati.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "qlqg/kernels.hpp"

namespace qlqg {

namespace {

constexpr double kPositivityTol = 1e-8;
constexpr double kInvertibilityTol = 1e-8;

// Inclusive spectrum bounds of {lambda_k + c} together with the complement
// value c itself.
std::pair<double, double> spectrum_bounds(const OperatorKPS& op) {
  if (op.pure_scalar()) return {op.scalar, op.scalar};
  SpectralDecomposition dec = spectral_decompose(op);
  double lo = op.scalar, hi = op.scalar;
  for (double lam : dec.eigenvalues) {
    lo = std::min(lo, lam + op.scalar);
    hi = std::max(hi, lam + op.scalar);
  }
  return {lo, hi};
}

bool scalar_coefficients(const OperatorKPS& b_op, const CostOperators& costs) {
  return b_op.pure_scalar() && costs.state_cost.pure_scalar() &&
         costs.terminal_cost.pure_scalar() && costs.control_cost.pure_scalar();
}

// PSD certificate for kernel/n + c I with slack: LLT success proves the
// spectrum is above -tol; on failure the caller re-checks exactly.
bool psd_certificate(const std::vector<double>& kernel, double c, int n,
                     double tol) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = kernel.empty()
                    ? 0.0
                    : kernel[static_cast<std::size_t>(i) * n + j] / n;
  for (int i = 0; i < n; ++i) m(i, i) += c + tol;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

double exact_min_eigenvalue(const std::vector<double>& kernel, double c, int n) {
  if (kernel.empty()) return c;
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> k(kernel.data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k / n,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() + c;
}

double exact_op_norm(const std::vector<double>& kernel, double c, int n) {
  if (kernel.empty()) return std::abs(c);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> k(kernel.data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k / n,
                                                    Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues().minCoeff() + c),
                  std::abs(es.eigenvalues().maxCoeff() + c));
}

double kernel_hs(const std::vector<double>& kernel, int n) {
  if (kernel.empty()) return 0.0;
  const double sq =
      kernels::dot(kernel.data(), kernel.data(), kernel.size()) /
      (static_cast<double>(n) * n);
  return sq > 0 ? std::sqrt(sq) : 0.0;
}

// Dense RK4 state: one kernel buffer plus scalar.
struct DenseOp {
  std::vector<double> kernel;  // empty = zero kernel
  double scalar = 0.0;
};

OperatorKPS to_operator(Grid grid, const DenseOp& s) {
  KernelMatrix k(grid);
  if (!s.kernel.empty()) k = KernelMatrix(grid, s.kernel);
  return OperatorKPS::from_kernel(std::move(k), s.scalar);
}

// F(S) = A S + S A - S G S + M on the dense representation.
DenseOp riccati_rhs(const DenseOp& s, const OperatorKPS& a_op,
                    const OperatorKPS& g_op, const OperatorKPS& m_op,
                    Grid grid) {
  const OperatorKPS sop = to_operator(grid, s);
  OperatorKPS acc = add(compose(a_op, sop), compose(sop, a_op));
  acc = subtract(acc, compose(sop, compose(g_op, sop)));
  acc = add(acc, m_op);
  DenseOp out;
  out.scalar = acc.scalar;
  out.kernel = std::move(acc.kernel.entries);
  return out;
}

void dense_axpy(DenseOp& y, double alpha, const DenseOp& x) {
  y.scalar += alpha * x.scalar;
  if (x.kernel.empty()) return;
  if (y.kernel.empty()) y.kernel.assign(x.kernel.size(), 0.0);
  kernels::axpy(alpha, x.kernel.data(), y.kernel.data(), x.kernel.size());
}

void symmetrize(DenseOp& s, int n) {
  if (s.kernel.empty()) return;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (s.kernel[static_cast<std::size_t>(i) * n + j] +
                              s.kernel[static_cast<std::size_t>(j) * n + i]);
      s.kernel[static_cast<std::size_t>(i) * n + j] = v;
      s.kernel[static_cast<std::size_t>(j) * n + i] = v;
    }
}

}  // namespace

CostOperators CostOperators::validate(OperatorKPS m_op, OperatorKPS mt_op,
                                      OperatorKPS r_op) {
  detail::require_same_grid(m_op.grid(), mt_op.grid(), "cost operators");
  detail::require_same_grid(m_op.grid(), r_op.grid(), "cost operators");
  detail::require_symmetric(m_op.kernel, "state cost");
  detail::require_symmetric(mt_op.kernel, "terminal cost");
  detail::require_symmetric(r_op.kernel, "control cost");
  if (spectrum_bounds(m_op).first < -1e-10)
    throw domain_error("state cost is not positive semidefinite");
  if (spectrum_bounds(mt_op).first < -1e-10)
    throw domain_error("terminal cost is not positive semidefinite");
  if (spectrum_bounds(r_op).first < kInvertibilityTol)
    throw domain_error("control cost spectrum below strict-positivity threshold");
  return CostOperators{std::move(m_op), std::move(mt_op), std::move(r_op)};
}

RiccatiNormBound riccati_norm_bound(const OperatorKPS& a_op,
                                    const CostOperators& costs, double T) {
  const double a_norm = op_norm_estimate(a_op);
  const double m_norm = op_norm_estimate(costs.state_cost);
  const double mt_norm = op_norm_estimate(costs.terminal_cost);
  const double gmax =
      (2.0 * mt_norm + 2.0 * T * m_norm) * std::exp(4.0 * T * a_norm);
  RiccatiNormBound b;
  b.mt_norm = mt_norm;
  b.c_bound = 4.0 * a_norm * gmax + 2.0 * m_norm;
  return b;
}

RiccatiSolution solve_differential_riccati(const OperatorKPS& a_op,
                                           const OperatorKPS& b_op,
                                           const CostOperators& costs,
                                           const TimeGrid& tg,
                                           const RiccatiOptions& opts) {
  detail::require_same_grid(a_op.grid(), b_op.grid(), "riccati solve");
  detail::require_same_grid(a_op.grid(), costs.state_cost.grid(), "riccati solve");
  detail::require_symmetric(a_op.kernel, "riccati drift");
  detail::require_symmetric(b_op.kernel, "riccati actuation");

  const Grid grid = a_op.grid();
  const int n = grid.n;
  const double dt = tg.dt;
  RiccatiSolution sol;
  sol.tg_ = tg;
  sol.grid_ = grid;
  const RiccatiNormBound bound = riccati_norm_bound(a_op, costs, tg.T);
  // Rounding slack for the runtime assertions.
  auto limit_at = [&](int idx) {
    return bound.limit(tg.time(idx), tg.T) + 1e-9 * (1.0 + bound.c_bound);
  };

  bool use_spectral;
  switch (opts.path) {
    case RiccatiPath::Dense:
      use_spectral = false;
      break;
    case RiccatiPath::Spectral:
      if (!scalar_coefficients(b_op, costs))
        throw domain_error(
            "spectral Riccati path requires scalar actuation and costs");
      use_spectral = true;
      break;
    case RiccatiPath::Auto:
    default:
      use_spectral = scalar_coefficients(b_op, costs);
      break;
  }

  if (use_spectral) {
    // Each drift eigen-channel (and the identity complement) carries an
    // independent scalar Riccati equation; the RK4 recursion commutes with
    // this change of basis, so the curves are the operator RK4 solution
    // expressed spectrally.
    const double b = b_op.scalar;
    const double r = costs.control_cost.scalar;
    const double g = b * b / r;
    const double m = costs.state_cost.scalar;
    const double mt = costs.terminal_cost.scalar;

    RiccatiSolution::SpectralStorage st;
    st.basis = spectral_decompose(a_op);
    st.channels.assign(static_cast<std::size_t>(tg.steps + 1) * n, 0.0);
    st.complement.assign(tg.steps + 1, 0.0);

    std::vector<double> abar(n + 1);
    for (int k = 0; k < n; ++k) abar[k] = st.basis.eigenvalues[k] + a_op.scalar;
    abar[n] = a_op.scalar;  // complement channel

    std::vector<double> s(n + 1, mt), k1(n + 1), k2(n + 1), k3(n + 1),
        k4(n + 1), tmp(n + 1);
    auto rhs = [&](const std::vector<double>& in, std::vector<double>& out) {
      for (int k = 0; k <= n; ++k)
        out[k] = 2.0 * abar[k] * in[k] - g * in[k] * in[k] + m;
    };
    auto store = [&](int idx) {
      for (int k = 0; k < n; ++k)
        st.channels[static_cast<std::size_t>(idx) * n + k] = s[k];
      st.complement[idx] = s[n];
    };
    store(tg.steps);
    for (int idx = tg.steps; idx > 0; --idx) {
      rhs(s, k1);
      for (int k = 0; k <= n; ++k) tmp[k] = s[k] + 0.5 * dt * k1[k];
      rhs(tmp, k2);
      for (int k = 0; k <= n; ++k) tmp[k] = s[k] + 0.5 * dt * k2[k];
      rhs(tmp, k3);
      for (int k = 0; k <= n; ++k) tmp[k] = s[k] + dt * k3[k];
      rhs(tmp, k4);
      for (int k = 0; k <= n; ++k)
        s[k] += dt * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) / 6.0;
      store(idx - 1);
      if (opts.check_invariants) {
        double lo = s[n], hi = std::abs(s[n]);
        for (int k = 0; k < n; ++k) {
          lo = std::min(lo, s[k]);
          hi = std::max(hi, std::abs(s[k]));
        }
        if (lo < -kPositivityTol)
          throw instability_error("riccati solution lost positivity (" +
                                      std::to_string(lo) + ")",
                                  idx - 1);
        if (hi > limit_at(idx - 1))
          throw instability_error("riccati solution exceeded the norm bound (" +
                                      std::to_string(hi) + " > " +
                                      std::to_string(limit_at(idx - 1)) + ")",
                                  idx - 1);
      }
    }
    sol.spectral_ = std::move(st);
    return sol;
  }

  // Dense reference path.
  const OperatorKPS r_inv = spectral_inverse(costs.control_cost, kInvertibilityTol);
  const OperatorKPS g_op = compose(b_op, compose(r_inv, b_op));

  RiccatiSolution::DenseStorage st;
  st.kernels.assign(tg.steps + 1, {});
  st.scalars.assign(tg.steps + 1, 0.0);

  DenseOp s;
  s.scalar = costs.terminal_cost.scalar;
  if (!costs.terminal_cost.kernel.is_zero())
    s.kernel = costs.terminal_cost.kernel.entries;
  st.kernels[tg.steps] = s.kernel;
  st.scalars[tg.steps] = s.scalar;

  for (int idx = tg.steps; idx > 0; --idx) {
    const DenseOp r1 = riccati_rhs(s, a_op, g_op, costs.state_cost, grid);
    DenseOp t = s;
    dense_axpy(t, 0.5 * dt, r1);
    const DenseOp r2 = riccati_rhs(t, a_op, g_op, costs.state_cost, grid);
    t = s;
    dense_axpy(t, 0.5 * dt, r2);
    const DenseOp r3 = riccati_rhs(t, a_op, g_op, costs.state_cost, grid);
    t = s;
    dense_axpy(t, dt, r3);
    const DenseOp r4 = riccati_rhs(t, a_op, g_op, costs.state_cost, grid);
    dense_axpy(s, dt / 6.0, r1);
    dense_axpy(s, dt / 3.0, r2);
    dense_axpy(s, dt / 3.0, r3);
    dense_axpy(s, dt / 6.0, r4);
    symmetrize(s, n);

    if (opts.check_invariants) {
      if (!psd_certificate(s.kernel, s.scalar, n, kPositivityTol)) {
        const double lo = exact_min_eigenvalue(s.kernel, s.scalar, n);
        if (lo < -kPositivityTol)
          throw instability_error("riccati solution lost positivity (" +
                                      std::to_string(lo) + ")",
                                  idx - 1);
      }
      const double cheap = std::abs(s.scalar) + kernel_hs(s.kernel, n);
      if (cheap > limit_at(idx - 1)) {
        const double exact = exact_op_norm(s.kernel, s.scalar, n);
        if (exact > limit_at(idx - 1))
          throw instability_error("riccati solution exceeded the norm bound (" +
                                      std::to_string(exact) + " > " +
                                      std::to_string(limit_at(idx - 1)) + ")",
                                  idx - 1);
      }
    }
    st.kernels[idx - 1] = s.kernel;
    st.scalars[idx - 1] = s.scalar;
  }
  sol.dense_ = std::move(st);
  return sol;
}

OperatorKPS RiccatiSolution::op_at(int idx) const {
  if (dense_) {
    KernelMatrix k(grid_);
    if (!dense_->kernels.at(idx).empty())
      k = KernelMatrix(grid_, dense_->kernels[idx]);
    return OperatorKPS::from_kernel(std::move(k), dense_->scalars[idx]);
  }
  const auto& st = *spectral_;
  const int n = grid_.n;
  const double sc = st.complement.at(idx);
  std::vector<double> weights(n);
  for (int k = 0; k < n; ++k)
    weights[k] = st.channels[static_cast<std::size_t>(idx) * n + k] - sc;
  return OperatorKPS::from_kernel(detail::assemble_modes(st.basis, weights), sc);
}

GridField RiccatiSolution::apply_at(int idx, const GridField& x) const {
  detail::require_same_grid(grid_, x.grid, "riccati apply");
  if (dense_) return apply(op_at(idx), x);
  const auto& st = *spectral_;
  const int n = grid_.n;
  const double sc = st.complement.at(idx);
  std::vector<double> coords = st.basis.project(x);
  std::vector<double> weighted(coords.size());
  for (int k = 0; k < n; ++k)
    weighted[k] = (st.channels[static_cast<std::size_t>(idx) * n + k] - sc) *
                  coords[k];
  GridField out = st.basis.reconstruct(weighted);
  kernels::axpy(sc, x.values.data(), out.values.data(), out.values.size());
  return out;
}

double RiccatiSolution::scalar_at(int idx) const {
  return dense_ ? dense_->scalars.at(idx) : spectral_->complement.at(idx);
}

double RiccatiSolution::kernel_hs_norm_at(int idx) const {
  if (dense_) return kernel_hs(dense_->kernels.at(idx), grid_.n);
  const auto& st = *spectral_;
  const double sc = st.complement.at(idx);
  double sq = 0.0;
  for (int k = 0; k < grid_.n; ++k) {
    const double w =
        st.channels[static_cast<std::size_t>(idx) * grid_.n + k] - sc;
    sq += w * w;
  }
  return std::sqrt(sq);
}

double RiccatiSolution::op_norm_at(int idx) const {
  if (dense_) return exact_op_norm(dense_->kernels.at(idx), dense_->scalars.at(idx), grid_.n);
  const auto& st = *spectral_;
  double hi = std::abs(st.complement.at(idx));
  for (int k = 0; k < grid_.n; ++k)
    hi = std::max(hi, std::abs(st.channels[static_cast<std::size_t>(idx) * grid_.n + k]));
  return hi;
}

double RiccatiSolution::trace_with(int idx, const QCovariance& q) const {
  detail::require_same_grid(grid_, q.grid(), "riccati trace");
  if (dense_) return hs_inner(op_at(idx), q.op());
  const auto& st = *spectral_;
  const double sc = st.complement.at(idx);
  const double q_trace = trace(q.op(), true);
  double total = sc * q_trace;
  for (int k = 0; k < grid_.n; ++k) {
    const double w =
        st.channels[static_cast<std::size_t>(idx) * grid_.n + k] - sc;
    if (w == 0.0) continue;
    const GridField phi = st.basis.eigenfunction(k);
    total += w * inner_product(apply(q.op(), phi), phi);
  }
  return total;
}

void RiccatiSolution::attach_covariance(const QCovariance& q) {
  detail::require_same_grid(grid_, q.grid(), "riccati attach");
  const int steps = tg_.steps;
  trace_curve_.assign(steps + 1, 0.0);
  if (spectral_) {
    // <Q phi_k, phi_k> once per mode, then O(n) per time index.
    const auto& st = *spectral_;
    const int n = grid_.n;
    std::vector<double> qkk(n);
    for (int k = 0; k < n; ++k) {
      const GridField phi = st.basis.eigenfunction(k);
      qkk[k] = inner_product(apply(q.op(), phi), phi);
    }
    const double q_trace = trace(q.op(), true);
    for (int idx = 0; idx <= steps; ++idx) {
      const double sc = st.complement[idx];
      double total = sc * q_trace;
      for (int k = 0; k < n; ++k)
        total += (st.channels[static_cast<std::size_t>(idx) * n + k] - sc) * qkk[k];
      trace_curve_[idx] = total;
    }
  } else {
    for (int idx = 0; idx <= steps; ++idx)
      trace_curve_[idx] = hs_inner(op_at(idx), q.op());
  }
  trace_integral_.assign(steps + 1, 0.0);
  for (int idx = steps - 1; idx >= 0; --idx)
    trace_integral_[idx] = trace_integral_[idx + 1] +
                           0.5 * tg_.dt * (trace_curve_[idx] + trace_curve_[idx + 1]);
}

void RiccatiSolution::write_summary_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  out << (trace_curve_.empty() ? "t,kernel_hs,scalar\n"
                               : "t,kernel_hs,scalar,trace_sq\n");
  char buf[40];
  for (int idx = 0; idx <= tg_.steps; ++idx) {
    std::snprintf(buf, sizeof buf, "%.17g", tg_.time(idx));
    out << buf;
    std::snprintf(buf, sizeof buf, "%.17g", kernel_hs_norm_at(idx));
    out << "," << buf;
    std::snprintf(buf, sizeof buf, "%.17g", scalar_at(idx));
    out << "," << buf;
    if (!trace_curve_.empty()) {
      std::snprintf(buf, sizeof buf, "%.17g", trace_curve_[idx]);
      out << "," << buf;
    }
    out << "\n";
  }
}

void RiccatiSolution::write_kernel_csv(int idx, const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  char buf[40];
  const OperatorKPS op = op_at(idx);
  std::snprintf(buf, sizeof buf, "%.17g", op.scalar);
  out << "# t=" << tg_.time(idx) << " scalar=" << buf << "\n";
  for (int i = 0; i < grid_.n; ++i) {
    for (int j = 0; j < grid_.n; ++j) {
      if (j) out << ",";
      std::snprintf(buf, sizeof buf, "%.17g", op.kernel.at(i, j));
      out << buf;
    }
    out << "\n";
  }
}

namespace {

// Shared residual assertion for the stationary closed forms.
void check_stationary_residual(const OperatorKPS& a_op, const OperatorKPS& m_op,
                               const OperatorKPS& s, double rho,
                               const char* what) {
  OperatorKPS resid = add(compose(a_op, s), compose(s, a_op));
  resid = subtract(resid, compose(s, s));
  resid = add(resid, m_op);
  if (rho != 0.0) resid = subtract(resid, scale(s, rho));
  // Symmetrized residual magnitude: kernel HS norm plus scalar part.
  OperatorKPS sym = resid;
  if (!sym.kernel.is_zero()) {
    KernelMatrix t = sym.kernel;
    for (int i = 0; i < t.grid.n; ++i)
      for (int j = 0; j < t.grid.n; ++j)
        t.at_mut(i, j) = 0.5 * (resid.kernel.at(i, j) + resid.kernel.at(j, i));
    sym.kernel = std::move(t);
  }
  const double mag =
      std::sqrt(detail::kernel_frobenius_quadrature(sym.kernel, sym.kernel)) +
      std::abs(sym.scalar);
  const double scale_ref = 1.0 + op_norm_estimate(s) * op_norm_estimate(s);
  if (mag > 1e-8 * scale_ref)
    throw domain_error(std::string(what) + ": stationary residual " +
                       std::to_string(mag) + " exceeds tolerance");
}

}  // namespace

OperatorKPS algebraic_riccati_symmetric(const OperatorKPS& a_op,
                                        const OperatorKPS& m_op) {
  detail::require_same_grid(a_op.grid(), m_op.grid(), "algebraic riccati");
  detail::require_symmetric(a_op.kernel, "algebraic riccati drift");
  const OperatorKPS a_sq_plus_m = add(compose(a_op, a_op), m_op);
  OperatorKPS root = operator_sqrt(a_sq_plus_m);  // throws when indefinite
  OperatorKPS s = add(a_op, root);
  check_stationary_residual(a_op, m_op, s, 0.0, "algebraic riccati");
  return s;
}

OperatorKPS solve_stationary_riccati(const OperatorKPS& a_op,
                                     const OperatorKPS& b_op,
                                     const CostOperators& costs, double dt,
                                     double tol, double max_horizon) {
  // Restart the backward flow from the previous endpoint one unit of
  // horizon at a time; stationarity of the well-posed flow is the
  // convergence certificate.
  const double block = 1.0;
  const TimeGrid tg = TimeGrid::make(block, dt);
  CostOperators running = costs;
  OperatorKPS current = costs.terminal_cost;
  for (double horizon = 0.0; horizon < max_horizon; horizon += block) {
    running.terminal_cost = current;
    const RiccatiSolution sol =
        solve_differential_riccati(a_op, b_op, running, tg);
    const OperatorKPS next = sol.op_at(0);
    const OperatorKPS diff = subtract(next, current);
    const double change =
        std::sqrt(detail::kernel_frobenius_quadrature(diff.kernel, diff.kernel)) +
        std::abs(diff.scalar);
    current = next;
    if (change / block < tol) return current;
  }
  throw instability_error(
      "stationary riccati: no convergence within the horizon budget",
      static_cast<int>(max_horizon));
}

OperatorKPS discounted_algebraic_riccati(const OperatorKPS& a_op,
                                         const OperatorKPS& m_op, double rho) {
  if (rho <= 0.0) throw domain_error("discount rate must be > 0");
  detail::require_same_grid(a_op.grid(), m_op.grid(), "discounted riccati");
  detail::require_symmetric(a_op.kernel, "discounted riccati drift");
  OperatorKPS shifted = a_op;
  shifted.scalar -= 0.5 * rho;
  const OperatorKPS sq_plus_m = add(compose(shifted, shifted), m_op);
  OperatorKPS s = add(shifted, operator_sqrt(sq_plus_m));
  check_stationary_residual(a_op, m_op, s, rho, "discounted riccati");
  return s;
}

double value_function(RiccatiSolution& sol, const QCovariance& q,
                      const GridField& x, double t) {
  const int idx = sol.timegrid().index_of(t);
  if (!sol.has_attached_covariance()) sol.attach_covariance(q);
  return inner_product(sol.apply_at(idx, x), x) + sol.trace_integral()[idx];
}

double long_range_average_cost(const OperatorKPS& s_inf, const QCovariance& q) {
  return hs_inner(s_inf, q.op());
}

WorstCaseNoise worst_case_q(const OperatorKPS& a_op, bool infimum) {
  detail::require_symmetric(a_op.kernel, "worst_case_q");
  const SpectralDecomposition dec = spectral_decompose(a_op);
  int pick = 0;
  for (int k = 1; k < dec.size(); ++k) {
    if (infimum ? dec.eigenvalues[k] < dec.eigenvalues[pick]
                : dec.eigenvalues[k] > dec.eigenvalues[pick])
      pick = k;
  }
  const double lam = dec.size() ? dec.eigenvalues[pick] : 0.0;
  const double shifted = lam + a_op.scalar;
  WorstCaseNoise out{
      QCovariance::rank_one(dec.eigenfunction(pick), 1.0),
      shifted + std::sqrt(shifted * shifted + 1.0),
      lam,
  };
  return out;
}

namespace {

class RiccatiGainSchedule : public GainSchedule {
 public:
  RiccatiGainSchedule(std::shared_ptr<const RiccatiSolution> sol,
                      OperatorKPS r_inv_b)
      : sol_(std::move(sol)), r_inv_b_(std::move(r_inv_b)) {}

  GridField apply_gain(int step, const GridField& x) const override {
    return apply(r_inv_b_, sol_->apply_at(step, x));
  }
  OperatorKPS gain_at(int step) const override {
    return compose(r_inv_b_, sol_->op_at(step));
  }
  int steps() const override { return sol_->steps(); }

 private:
  std::shared_ptr<const RiccatiSolution> sol_;
  OperatorKPS r_inv_b_;
};

}  // namespace

FeedbackLaw feedback_gain(std::shared_ptr<const RiccatiSolution> sol,
                          const OperatorKPS& b_op, const OperatorKPS& r_op) {
  detail::require_same_grid(sol->grid(), b_op.grid(), "feedback_gain");
  const OperatorKPS r_inv = spectral_inverse(r_op, kInvertibilityTol);
  return FeedbackLaw::from_schedule(std::make_shared<RiccatiGainSchedule>(
      std::move(sol), compose(r_inv, b_op)));
}

double trajectory_cost(const Trajectory& traj, const CostOperators& costs) {
  detail::require_same_grid(traj.grid, costs.state_cost.grid(), "trajectory_cost");
  double acc = 0.0;
  for (int s = 0; s < traj.timegrid.steps; ++s) {
    const GridField x = traj.state(s);
    acc += traj.timegrid.dt * inner_product(apply(costs.state_cost, x), x);
    if (traj.has_controls()) {
      const GridField u = traj.control(s);
      acc += traj.timegrid.dt * inner_product(apply(costs.control_cost, u), u);
    }
  }
  const GridField xT = traj.state(traj.timegrid.steps);
  acc += inner_product(apply(costs.terminal_cost, xT), xT);
  return acc;
}

}  // namespace qlqg

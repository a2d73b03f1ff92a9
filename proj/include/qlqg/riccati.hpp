#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qlqg/dynamics.hpp"
#include "qlqg/grid.hpp"
#include "qlqg/qnoise.hpp"

// Backward operator differential Riccati integration, closed-form algebraic
// solutions for the long-range-average and discounted problems, value
// functions, worst-case-noise analysis, and feedback-gain extraction.
namespace qlqg {

struct CostOperators {
  OperatorKPS state_cost;     // M, positive
  OperatorKPS terminal_cost;  // M_T, positive
  OperatorKPS control_cost;   // R, spectrum >= r_min > 0

  // Checks symmetry and spectral positivity (M, M_T >= -1e-10; R >= 1e-8).
  static CostOperators validate(OperatorKPS m_op, OperatorKPS mt_op,
                                OperatorKPS r_op);
};

enum class RiccatiPath {
  Auto,      // spectral when every coefficient except the drift kernel is scalar
  Dense,     // RK4 on the materialized operator ODE (reference path)
  Spectral,  // RK4 per drift eigen-channel; identical recursion in the eigenbasis
};

struct RiccatiOptions {
  RiccatiPath path = RiccatiPath::Auto;
  bool check_invariants = true;  // per-step positivity and norm-bound asserts
};

// Backward solution S_t stored at every grid time, indexed forward
// (index 0 = t = 0). Dense storage keeps one kernel per time; spectral
// storage keeps per-eigenchannel curves and materializes operators on
// demand. Both expose the same queries.
class RiccatiSolution {
 public:
  struct DenseStorage {
    std::vector<std::vector<double>> kernels;  // (steps+1) kernels, may be empty
    std::vector<double> scalars;
  };
  struct SpectralStorage {
    SpectralDecomposition basis;     // eigenbasis of the drift kernel
    std::vector<double> channels;    // (steps+1) x n, sigma_k(t) per mode
    std::vector<double> complement;  // (steps+1), the pure-identity channel
  };

  const TimeGrid& timegrid() const { return tg_; }
  const Grid& grid() const { return grid_; }
  int steps() const { return tg_.steps; }
  bool spectral_storage() const { return spectral_.has_value(); }
  const std::optional<SpectralStorage>& spectral_data() const { return spectral_; }
  const std::optional<DenseStorage>& dense_data() const { return dense_; }

  OperatorKPS op_at(int idx) const;
  GridField apply_at(int idx, const GridField& x) const;
  double scalar_at(int idx) const;
  double kernel_hs_norm_at(int idx) const;
  double op_norm_at(int idx) const;
  // trace(S_idx Q) for a trace-class covariance.
  double trace_with(int idx, const QCovariance& q) const;

  // Precompute trace(S_r Q) at every index plus its backward cumulative
  // trapezoidal integral int_t^T trace(S_r Q) dr.
  void attach_covariance(const QCovariance& q);
  bool has_attached_covariance() const { return !trace_curve_.empty(); }
  const std::vector<double>& trace_curve() const { return trace_curve_; }
  const std::vector<double>& trace_integral() const { return trace_integral_; }

  // CSV rows: t, HS norm of the kernel part, scalar part, trace(S_t Q)
  // (last column only with an attached covariance).
  void write_summary_csv(const std::string& path) const;

  // Full kernel of S_t at one time index as a dense CSV matrix; the
  // identity part is written as a one-line header comment.
  void write_kernel_csv(int idx, const std::string& path) const;

 private:
  friend RiccatiSolution solve_differential_riccati(const OperatorKPS&,
                                                    const OperatorKPS&,
                                                    const CostOperators&,
                                                    const TimeGrid&,
                                                    const RiccatiOptions&);
  TimeGrid tg_;
  Grid grid_;
  std::optional<DenseStorage> dense_;
  std::optional<SpectralStorage> spectral_;
  std::vector<double> trace_curve_;
  std::vector<double> trace_integral_;
};

// Classic RK4, backward in time, on -dS/dt = A S + S A - S B R^-1 B S + M,
// S_T = M_T. Throws instability_error when positivity (spectrum >= -1e-8)
// or the Gronwall norm bound fails at any step.
RiccatiSolution solve_differential_riccati(
    const OperatorKPS& a_op, const OperatorKPS& b_op, const CostOperators& costs,
    const TimeGrid& tg, const RiccatiOptions& opts = {});

// Stationary solution S = A + (A^2 + M)^{1/2} for the B = R = I regime with
// symmetric drift; self-checks the stationary residual A S + S A - S^2 + M.
OperatorKPS algebraic_riccati_symmetric(const OperatorKPS& a_op,
                                        const OperatorKPS& m_op);

// General stationary solution for arbitrary positive B, R: integrates the
// backward flow in horizon blocks until the solution's change per unit time
// drops below `tol` in the kernel-HS + scalar metric.
OperatorKPS solve_stationary_riccati(const OperatorKPS& a_op,
                                     const OperatorKPS& b_op,
                                     const CostOperators& costs, double dt,
                                     double tol = 1e-9, double max_horizon = 200.0);

// Discounted stationary solution S = (A - rho/2 I) + ((A - rho/2 I)^2 + M)^{1/2};
// self-checks rho S = A S + S A - S^2 + M.
OperatorKPS discounted_algebraic_riccati(const OperatorKPS& a_op,
                                         const OperatorKPS& m_op, double rho);

// V(x, t) = <S_t x, x> + int_t^T trace(S_r Q) dr.
double value_function(RiccatiSolution& sol, const QCovariance& q,
                      const GridField& x, double t);

// trace(S_inf Q), the long-range average cost rate.
double long_range_average_cost(const OperatorKPS& s_inf, const QCovariance& q);

struct WorstCaseNoise {
  QCovariance q;        // rank-one on the extremal eigenfunction
  double value;         // (lambda + a) + sqrt((lambda + a)^2 + 1)
  double eigenvalue;    // extremal kernel eigenvalue lambda
};

// Extremal unit-HS-norm covariance for trace(S_inf Q) in the M = I,
// B = R = I regime. infimum=false gives the supremum branch.
WorstCaseNoise worst_case_q(const OperatorKPS& a_op, bool infimum = false);

// K_t = R^-1 B S_t per grid time, wrapped as a feedback law.
FeedbackLaw feedback_gain(std::shared_ptr<const RiccatiSolution> sol,
                          const OperatorKPS& b_op, const OperatorKPS& r_op);

// Realized cost of one trajectory: left-rectangle time quadrature of
// <M x, x> + <R u, u> plus the terminal penalty <M_T x_T, x_T>.
double trajectory_cost(const Trajectory& traj, const CostOperators& costs);

// Lemma-style runtime norm bound: ||S_t|| <= 2 ||M_T|| + (T - t) c with the
// Gronwall constant c = 4 ||A|| Gmax + 2 ||M||, Gmax the integral-form
// envelope (2||M_T|| + 2T||M||) exp(4T||A||).
struct RiccatiNormBound {
  double mt_norm;
  double c_bound;
  double limit(double t, double T) const {
    return 2.0 * mt_norm + (T - t) * c_bound;
  }
};
RiccatiNormBound riccati_norm_bound(const OperatorKPS& a_op,
                                    const CostOperators& costs, double T);

}  // namespace qlqg

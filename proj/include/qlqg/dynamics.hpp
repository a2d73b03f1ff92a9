#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qlqg/grid.hpp"
#include "qlqg/qnoise.hpp"

// Euler-Maruyama simulation of the controlled linear Q-noise system
//   dx = (A x + B u) dt + dw,   u = -K_t x,
// plus the matrix-exponential mild-solution oracle and trajectory metrics.
namespace qlqg {

struct LinearSystem {
  OperatorKPS drift;      // A = kernel + a I
  OperatorKPS actuation;  // B = kernel + b I
  QCovariance noise;

  LinearSystem(OperatorKPS a_op, OperatorKPS b_op, QCovariance q);
  const Grid& grid() const { return drift.grid(); }
};

// Time-indexed gain K_t; controls are u = -apply(K_t, x). Implementations
// may hold materialized operators or apply factored forms.
class GainSchedule {
 public:
  virtual ~GainSchedule() = default;
  virtual GridField apply_gain(int step, const GridField& x) const = 0;
  virtual OperatorKPS gain_at(int step) const = 0;
  virtual int steps() const = 0;
};

class FeedbackLaw {
 public:
  static FeedbackLaw zero_control();
  static FeedbackLaw from_gains(std::vector<OperatorKPS> gains);
  static FeedbackLaw constant_gain(OperatorKPS gain, int steps);
  static FeedbackLaw from_schedule(std::shared_ptr<const GainSchedule> schedule);

  bool is_zero() const { return schedule_ == nullptr; }
  // u_s = -apply(K_{t_s}, x); the gain is looked up at the left endpoint of
  // its time grid (piecewise-constant per control step).
  GridField control(int step, const GridField& x) const;
  OperatorKPS gain_at(int step) const;
  int steps() const { return schedule_ ? schedule_->steps() : 0; }

 private:
  std::shared_ptr<const GainSchedule> schedule_;
};

struct Trajectory {
  TimeGrid timegrid;
  Grid grid;
  std::vector<double> states;    // (steps+1) x n row-major
  std::vector<double> controls;  // steps x n, empty under zero control
  std::uint64_t seed = 0;

  GridField state(int s) const;
  GridField control(int s) const;
  bool has_controls() const { return !controls.empty(); }
};

Trajectory simulate(const LinearSystem& sys, const FeedbackLaw& law,
                    const GridField& x0, const TimeGrid& tg,
                    const QNoisePath& noise);

// e^{A t} x0 through the spectral decomposition of the drift; validation
// oracle for the zero-control, zero-noise case.
GridField mild_solution_deterministic(const LinearSystem& sys,
                                      const GridField& x0, double t);

// Root quadrature-L2 distance between two fields.
double rmd(const GridField& x, const GridField& y);

// CSV exports: wide (rows = time, columns = cell midpoints) and long
// format (t, alpha, value) for plotting.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_trajectory_long_csv(const Trajectory& traj, const std::string& path);

}  // namespace qlqg

#include "qlqg/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "qlqg/kernels.hpp"

namespace qlqg {

namespace {
constexpr double kDivergenceGuard = 1e8;

class DenseGainSchedule : public GainSchedule {
 public:
  explicit DenseGainSchedule(std::vector<OperatorKPS> gains)
      : gains_(std::move(gains)) {}
  GridField apply_gain(int step, const GridField& x) const override {
    return apply(gains_.at(step), x);
  }
  OperatorKPS gain_at(int step) const override { return gains_.at(step); }
  int steps() const override { return static_cast<int>(gains_.size()); }

 private:
  std::vector<OperatorKPS> gains_;
};

class ConstantGainSchedule : public GainSchedule {
 public:
  ConstantGainSchedule(OperatorKPS gain, int steps)
      : gain_(std::move(gain)), steps_(steps) {}
  GridField apply_gain(int, const GridField& x) const override {
    return apply(gain_, x);
  }
  OperatorKPS gain_at(int) const override { return gain_; }
  int steps() const override { return steps_; }

 private:
  OperatorKPS gain_;
  int steps_;
};

}  // namespace

LinearSystem::LinearSystem(OperatorKPS a_op, OperatorKPS b_op, QCovariance q)
    : drift(std::move(a_op)), actuation(std::move(b_op)), noise(std::move(q)) {
  detail::require_same_grid(drift.grid(), actuation.grid(), "linear system");
  detail::require_same_grid(drift.grid(), noise.grid(), "linear system");
  detail::require_symmetric(drift.kernel, "linear system drift");
  detail::require_symmetric(actuation.kernel, "linear system actuation");
}

FeedbackLaw FeedbackLaw::zero_control() { return FeedbackLaw{}; }

FeedbackLaw FeedbackLaw::from_gains(std::vector<OperatorKPS> gains) {
  FeedbackLaw law;
  law.schedule_ = std::make_shared<DenseGainSchedule>(std::move(gains));
  return law;
}

FeedbackLaw FeedbackLaw::constant_gain(OperatorKPS gain, int steps) {
  FeedbackLaw law;
  law.schedule_ = std::make_shared<ConstantGainSchedule>(std::move(gain), steps);
  return law;
}

FeedbackLaw FeedbackLaw::from_schedule(
    std::shared_ptr<const GainSchedule> schedule) {
  FeedbackLaw law;
  law.schedule_ = std::move(schedule);
  return law;
}

GridField FeedbackLaw::control(int step, const GridField& x) const {
  if (!schedule_) return GridField::zeros(x.grid);
  GridField u = schedule_->apply_gain(step, x);
  for (double& v : u.values) v = -v;
  return u;
}

OperatorKPS FeedbackLaw::gain_at(int step) const {
  if (!schedule_)
    throw domain_error("zero-control law has no gain operators");
  return schedule_->gain_at(step);
}

GridField Trajectory::state(int s) const {
  return GridField(grid,
                   std::vector<double>(
                       states.begin() + static_cast<std::size_t>(s) * grid.n,
                       states.begin() + static_cast<std::size_t>(s + 1) * grid.n));
}

GridField Trajectory::control(int s) const {
  if (controls.empty()) return GridField::zeros(grid);
  return GridField(grid,
                   std::vector<double>(
                       controls.begin() + static_cast<std::size_t>(s) * grid.n,
                       controls.begin() + static_cast<std::size_t>(s + 1) * grid.n));
}

Trajectory simulate(const LinearSystem& sys, const FeedbackLaw& law,
                    const GridField& x0, const TimeGrid& tg,
                    const QNoisePath& noise) {
  detail::require_same_grid(sys.grid(), x0.grid, "simulate");
  detail::require_same_grid(sys.grid(), noise.grid, "simulate");
  if (!(noise.timegrid == tg))
    throw dimension_error("simulate: noise path time grid mismatch");
  if (!law.is_zero() && law.steps() < tg.steps)
    throw dimension_error("simulate: gain schedule does not cover the horizon");

  const int n = sys.grid().n;
  Trajectory traj;
  traj.timegrid = tg;
  traj.grid = sys.grid();
  traj.seed = noise.seed;
  traj.states.assign(static_cast<std::size_t>(tg.steps + 1) * n, 0.0);
  if (!law.is_zero())
    traj.controls.assign(static_cast<std::size_t>(tg.steps) * n, 0.0);

  GridField x = x0;
  std::copy(x.values.begin(), x.values.end(), traj.states.begin());
  for (int s = 0; s < tg.steps; ++s) {
    GridField dxdt = apply(sys.drift, x);
    if (!law.is_zero()) {
      const GridField u = law.control(s, x);
      std::copy(u.values.begin(), u.values.end(),
                traj.controls.begin() + static_cast<std::size_t>(s) * n);
      const GridField bu = apply(sys.actuation, u);
      kernels::axpy(1.0, bu.values.data(), dxdt.values.data(), n);
    }
    const auto dw = noise.increment(s);
    for (int i = 0; i < n; ++i) {
      x.values[i] += tg.dt * dxdt.values[i] + dw[i];
      if (!std::isfinite(x.values[i]) || std::abs(x.values[i]) > kDivergenceGuard)
        throw instability_error("simulation diverged", s);
    }
    std::copy(x.values.begin(), x.values.end(),
              traj.states.begin() + static_cast<std::size_t>(s + 1) * n);
  }
  return traj;
}

GridField mild_solution_deterministic(const LinearSystem& sys,
                                      const GridField& x0, double t) {
  detail::require_same_grid(sys.grid(), x0.grid, "mild solution");
  const double a = sys.drift.scalar;
  if (sys.drift.pure_scalar()) return scale(x0, std::exp(a * t));
  const SpectralDecomposition dec = spectral_decompose(sys.drift);
  const std::vector<double> coords = dec.project(x0);
  std::vector<double> evolved(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k)
    evolved[k] = std::exp((dec.eigenvalues[k] + a) * t) * coords[k];
  GridField spanned = dec.reconstruct(evolved);
  // Complement of the decomposition evolves by the scalar part alone.
  GridField residual = subtract(x0, dec.reconstruct(coords));
  kernels::axpy(std::exp(a * t), residual.values.data(), spanned.values.data(),
                spanned.values.size());
  return spanned;
}

double rmd(const GridField& x, const GridField& y) {
  const GridField d = subtract(x, y);
  return l2_norm(d);
}

namespace {
void print17(std::ofstream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  out << "t";
  for (int i = 0; i < traj.grid.n; ++i) {
    out << ",";
    print17(out, traj.grid.midpoint(i));
  }
  out << "\n";
  for (int s = 0; s <= traj.timegrid.steps; ++s) {
    print17(out, traj.timegrid.time(s));
    const double* row = traj.states.data() + static_cast<std::size_t>(s) * traj.grid.n;
    for (int i = 0; i < traj.grid.n; ++i) {
      out << ",";
      print17(out, row[i]);
    }
    out << "\n";
  }
}

void write_trajectory_long_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  out << "t,alpha,value\n";
  for (int s = 0; s <= traj.timegrid.steps; ++s) {
    const double* row = traj.states.data() + static_cast<std::size_t>(s) * traj.grid.n;
    for (int i = 0; i < traj.grid.n; ++i) {
      print17(out, traj.timegrid.time(s));
      out << ",";
      print17(out, traj.grid.midpoint(i));
      out << ",";
      print17(out, row[i]);
      out << "\n";
    }
  }
}

}  // namespace qlqg

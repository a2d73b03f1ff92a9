#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qlqg/grid.hpp"

// Covariance validation and Karhunen-Loeve sampling of Q-noise paths.
namespace qlqg {

struct TimeGrid {
  double T = 0.0;
  double dt = 0.0;
  int steps = 0;

  static TimeGrid make(double T, double dt);
  double time(int s) const { return s * dt; }
  // Index of a grid time; throws if t is not on the grid (1e-9 slack).
  int index_of(double t) const;
  bool operator==(const TimeGrid&) const = default;
};

// Validated noise covariance: symmetric, trace-class (zero scalar part),
// spectrum >= 0 after clamping rounding-level negatives.
class QCovariance {
 public:
  static QCovariance validate(OperatorKPS op);
  static QCovariance zero(Grid grid);
  // Rank-one covariance lambda * phi phi* on a unit-quadrature-norm field.
  static QCovariance rank_one(const GridField& phi, double lambda = 1.0);

  const OperatorKPS& op() const { return op_; }
  const SpectralDecomposition& spectral() const { return spectral_; }
  const Grid& grid() const { return op_.grid(); }
  int rank() const { return rank_; }
  // Q(alpha_i, alpha_i) on the diagonal.
  double diagonal(int i) const { return op_.kernel.at(i, i); }

 private:
  QCovariance() = default;
  OperatorKPS op_;
  SpectralDecomposition spectral_;
  int rank_ = 0;
};

// Seeded increments of one Q-noise path: row s holds the field increment
// over [s dt, (s+1) dt]. Increments are stored rather than cumulative sums
// because the Euler-Maruyama stepper consumes increments directly.
struct QNoisePath {
  TimeGrid timegrid;
  Grid grid;
  std::vector<double> increments;  // steps x n row-major
  std::uint64_t seed = 0;

  std::span<const double> increment(int s) const {
    return {increments.data() + static_cast<std::size_t>(s) * grid.n,
            static_cast<std::size_t>(grid.n)};
  }
  // w(t) = sum of increments before index_of(t).
  GridField cumulative_at(double t) const;
};

// Standard-normal KL coefficients xi_{s,r}, drawn step-major mode-minor.
// Exposed so two discretizations of one system can share mode coefficients.
std::vector<double> sample_kl_coefficients(int steps, int modes,
                                           std::uint64_t seed);

// increments(s) = sum_{r < rank} sqrt(lambda_r dt) xi_{s,r} phi_r.
QNoisePath assemble_path(const QCovariance& q, const TimeGrid& tg,
                         std::span<const double> xi, std::uint64_t seed_label);

QNoisePath sample_path(const QCovariance& q, const TimeGrid& tg,
                       std::uint64_t seed);

// Sample covariance (mean subtracted, 1/(M-1)) of cumulative sums at time t,
// divided by t; estimates Q. Requires >= 2 paths on one grid/timegrid.
KernelMatrix empirical_covariance(std::span<const QNoisePath> paths, double t);

// Covariance of M w under a symmetric operator M: validate(M Q M).
QCovariance pushforward_covariance(const OperatorKPS& m, const QCovariance& q);

// CSV export: header "t" then one column per cell midpoint; rows are the
// cumulative path w(t) at each grid time.
void write_path_csv(const QNoisePath& path, const std::string& filename);

}  // namespace qlqg

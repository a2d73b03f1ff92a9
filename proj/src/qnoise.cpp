#include "qlqg/qnoise.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "qlqg/kernels.hpp"
#include "qlqg/rng.hpp"

namespace qlqg {

namespace {
constexpr double kKlTruncation = 1e-12;  // modes below this are dropped
constexpr double kPsdTolerance = 1e-10;  // clamp window for rounding noise
}  // namespace

TimeGrid TimeGrid::make(double T, double dt) {
  if (T <= 0 || dt <= 0) throw domain_error("time grid: T and dt must be > 0");
  TimeGrid tg;
  tg.T = T;
  tg.dt = dt;
  tg.steps = static_cast<int>(std::llround(T / dt));
  if (tg.steps < 1 || std::abs(tg.steps * dt - T) > 1e-12 * std::max(1.0, T))
    throw domain_error("time grid: dt does not divide T");
  return tg;
}

int TimeGrid::index_of(double t) const {
  const double raw = t / dt;
  const int idx = static_cast<int>(std::llround(raw));
  if (idx < 0 || idx > steps || std::abs(raw - idx) > 1e-9)
    throw domain_error("time " + std::to_string(t) + " is not on the time grid");
  return idx;
}

QCovariance QCovariance::validate(OperatorKPS op) {
  if (op.scalar != 0.0)
    throw domain_error(
        "covariance validation: identity part is not trace-class");
  detail::require_symmetric(op.kernel, "covariance validation");
  QCovariance q;
  q.spectral_ = spectral_decompose(op);
  for (std::size_t k = 0; k < q.spectral_.eigenvalues.size(); ++k) {
    double& lam = q.spectral_.eigenvalues[k];
    if (lam < -kPsdTolerance)
      throw domain_error("covariance validation: eigenvalue " +
                         std::to_string(lam) + " is negative");
    if (lam < 0.0) lam = 0.0;
  }
  q.rank_ = 0;
  for (double lam : q.spectral_.eigenvalues)
    if (lam > kKlTruncation) ++q.rank_;
  q.op_ = std::move(op);
  return q;
}

QCovariance QCovariance::zero(Grid grid) {
  return validate(OperatorKPS::zero(grid));
}

QCovariance QCovariance::rank_one(const GridField& phi, double lambda) {
  const int n = phi.grid.n;
  const double norm = l2_norm(phi);
  if (norm <= 0) throw domain_error("rank_one covariance: zero profile");
  KernelMatrix k(phi.grid);
  k.materialize();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      k.at_mut(i, j) = lambda * phi.values[i] * phi.values[j] / (norm * norm);
  return validate(OperatorKPS::from_kernel(std::move(k)));
}

GridField QNoisePath::cumulative_at(double t) const {
  const int idx = timegrid.index_of(t);
  GridField out = GridField::zeros(grid);
  for (int s = 0; s < idx; ++s)
    kernels::axpy(1.0, increments.data() + static_cast<std::size_t>(s) * grid.n,
                  out.values.data(), grid.n);
  return out;
}

std::vector<double> sample_kl_coefficients(int steps, int modes,
                                           std::uint64_t seed) {
  std::vector<double> xi(static_cast<std::size_t>(steps) * modes);
  rng::NormalSampler sampler(seed);
  sampler.fill_normal(xi);  // linear fill = step-major, mode-minor
  return xi;
}

QNoisePath assemble_path(const QCovariance& q, const TimeGrid& tg,
                         std::span<const double> xi, std::uint64_t seed_label) {
  const int n = q.grid().n;
  const int rank = q.rank();
  if (xi.size() < static_cast<std::size_t>(tg.steps) * rank)
    throw dimension_error("assemble_path: coefficient matrix too small");
  QNoisePath path;
  path.timegrid = tg;
  path.grid = q.grid();
  path.seed = seed_label;
  path.increments.assign(static_cast<std::size_t>(tg.steps) * n, 0.0);
  const double root_dt = std::sqrt(tg.dt);
  const auto& dec = q.spectral();
  // The stride of xi rows is the covariance rank; modes are dense in r.
  for (int s = 0; s < tg.steps; ++s) {
    double* row = path.increments.data() + static_cast<std::size_t>(s) * n;
    for (int r = 0; r < rank; ++r) {
      const double amp =
          std::sqrt(dec.eigenvalues[r]) * root_dt * xi[static_cast<std::size_t>(s) * rank + r];
      if (amp == 0.0) continue;
      kernels::axpy(amp, dec.eigenfunction_data(r), row, n);
    }
  }
  return path;
}

QNoisePath sample_path(const QCovariance& q, const TimeGrid& tg,
                       std::uint64_t seed) {
  const auto xi = sample_kl_coefficients(tg.steps, q.rank(), seed);
  return assemble_path(q, tg, xi, seed);
}

KernelMatrix empirical_covariance(std::span<const QNoisePath> paths, double t) {
  if (paths.size() < 2)
    throw domain_error("empirical_covariance: need at least 2 paths");
  const Grid grid = paths[0].grid;
  const TimeGrid tg = paths[0].timegrid;
  for (const auto& p : paths) {
    if (!(p.grid == grid) || !(p.timegrid == tg))
      throw dimension_error("empirical_covariance: paths disagree on grids");
  }
  const int idx = tg.index_of(t);
  if (idx == 0) throw domain_error("empirical_covariance: t must be > 0");
  const int n = grid.n;
  const std::size_t m = paths.size();

  std::vector<double> sums(static_cast<std::size_t>(m) * n);
  for (std::size_t p = 0; p < m; ++p) {
    double* row = sums.data() + p * n;
    for (int s = 0; s < idx; ++s)
      kernels::axpy(1.0,
                    paths[p].increments.data() + static_cast<std::size_t>(s) * n,
                    row, n);
  }
  std::vector<double> mean(n, 0.0);
  for (std::size_t p = 0; p < m; ++p)
    kernels::axpy(1.0 / m, sums.data() + p * n, mean.data(), n);

  KernelMatrix cov(grid);
  cov.materialize();
  const double w = 1.0 / ((m - 1) * t);
  std::vector<double> centered(n);
  for (std::size_t p = 0; p < m; ++p) {
    const double* row = sums.data() + p * n;
    for (int i = 0; i < n; ++i) centered[i] = row[i] - mean[i];
    for (int i = 0; i < n; ++i) {
      if (centered[i] == 0.0) continue;
      kernels::axpy(w * centered[i], centered.data(),
                    cov.entries.data() + static_cast<std::size_t>(i) * n, n);
    }
  }
  return cov;
}

QCovariance pushforward_covariance(const OperatorKPS& m, const QCovariance& q) {
  detail::require_same_grid(m.grid(), q.grid(), "pushforward_covariance");
  detail::require_symmetric(m.kernel, "pushforward_covariance");
  return QCovariance::validate(compose(compose(m, q.op()), m));
}

void write_path_csv(const QNoisePath& path, const std::string& filename) {
  std::ofstream out(filename);
  if (!out) throw config_error("cannot open " + filename + " for writing");
  out << "t";
  char buf[40];
  for (int i = 0; i < path.grid.n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", path.grid.midpoint(i));
    out << "," << buf;
  }
  out << "\n";
  std::vector<double> acc(path.grid.n, 0.0);
  for (int s = 0; s <= path.timegrid.steps; ++s) {
    if (s > 0)
      kernels::axpy(1.0,
                    path.increments.data() +
                        static_cast<std::size_t>(s - 1) * path.grid.n,
                    acc.data(), path.grid.n);
    std::snprintf(buf, sizeof buf, "%.17g", path.timegrid.time(s));
    out << buf;
    for (double v : acc) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace qlqg

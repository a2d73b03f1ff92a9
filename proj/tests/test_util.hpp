#pragma once

#include <cmath>
#include <vector>

#include "qlqg/grid.hpp"
#include "qlqg/rng.hpp"

namespace qlqg::testutil {

inline GridField random_field(Grid grid, std::uint64_t seed) {
  GridField f = GridField::zeros(grid);
  rng::NormalSampler sampler(seed);
  sampler.fill_normal(f.values);
  return f;
}

inline OperatorKPS random_symmetric(Grid grid, std::uint64_t seed,
                                    double scalar = 0.0) {
  KernelMatrix k(grid);
  k.materialize();
  rng::NormalSampler sampler(seed);
  for (int i = 0; i < grid.n; ++i)
    for (int j = i; j < grid.n; ++j) {
      const double v = sampler.normal();
      k.at_mut(i, j) = v;
      k.at_mut(j, i) = v;
    }
  return OperatorKPS::from_kernel(std::move(k), scalar);
}

// PSD under the quadrature convention: square of a random symmetric
// operator, optionally plus a nonnegative identity part.
inline OperatorKPS random_psd(Grid grid, std::uint64_t seed, double scalar = 0.0) {
  const OperatorKPS s = random_symmetric(grid, seed);
  OperatorKPS out = compose(s, s);
  out.scalar = scalar;
  return out;
}

// Field sampled from a callable of the midpoint coordinate.
template <typename F>
GridField sampled_field(Grid grid, F&& fn) {
  GridField f = GridField::zeros(grid);
  for (int i = 0; i < grid.n; ++i) f.values[i] = fn(grid.midpoint(i));
  return f;
}

inline double kernel_hs_distance(const OperatorKPS& a, const OperatorKPS& b) {
  const OperatorKPS d = subtract(a, b);
  return std::sqrt(detail::kernel_frobenius_quadrature(d.kernel, d.kernel));
}

// Solution-space distance: kernel HS norm plus scalar gap.
inline double operator_distance(const OperatorKPS& a, const OperatorKPS& b) {
  return kernel_hs_distance(a, b) + std::abs(a.scalar - b.scalar);
}

}  // namespace qlqg::testutil

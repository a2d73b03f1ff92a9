#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

// Seeded, stream-splittable randomness. The mt19937_64 engine is fully
// specified by the standard, and uniform/normal conversion is done here
// rather than through std::*_distribution (whose algorithms are
// implementation-defined), so a seed reproduces the same draws on any
// platform with IEEE doubles and the same libm rounding.
namespace qlqg::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent substream seed for (seed, stream). Used to fan Monte Carlo
// paths or graph samples out of one named experiment seed.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xd6e8feb86659fd93ULL + 1));
}

class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1]; never returns 0 so log() below is safe.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller pair; callers consume values in linear order.
  void next_pair(double& z0, double& z1) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    z0 = r * std::cos(theta);
    z1 = r * std::sin(theta);
  }

  double normal() {
    double z0, z1;
    next_pair(z0, z1);
    return z0;  // the sibling draw is discarded to keep indexing simple
  }

  void fill_normal(std::span<double> out) {
    std::size_t i = 0;
    while (i + 1 < out.size()) {
      next_pair(out[i], out[i + 1]);
      i += 2;
    }
    if (i < out.size()) out[i] = normal();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qlqg::rng

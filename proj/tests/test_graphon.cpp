#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "qlqg/graphon.hpp"
#include "qlqg/rng.hpp"
#include "test_util.hpp"

using namespace qlqg;
using namespace qlqg::testutil;

TEST_CASE("eval: pointwise values") {
  CHECK(GraphonKernel::uniform_attachment().eval(0.3, 0.7) ==
        doctest::Approx(0.3).epsilon(1e-15));
  // Diagonal of the small-world surface: both shifted bumps contribute
  // exp(-(gamma/sigma)^2/2).
  const GraphonKernel sw = GraphonKernel::small_world(0.1, 0.3);
  CHECK(sw.eval(0.4, 0.4) == doctest::Approx(std::exp(-4.5)).epsilon(1e-12));
  const GraphonKernel r1 = GraphonKernel::separable_rank_one({-1.0, 0.0, 1.0});
  CHECK(r1.eval(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(r1.eval(-0.1, 0.5), domain_error);
  CHECK_THROWS_AS(r1.eval(0.5, 1.5), domain_error);
}

TEST_CASE("eval: symmetry for every variant") {
  const std::vector<GraphonKernel> kernels = {
      GraphonKernel::constant(0.4), GraphonKernel::uniform_attachment(),
      GraphonKernel::small_world(0.15, 0.2), GraphonKernel::cosine(),
      GraphonKernel::separable_rank_one({0.5, -1.0, 2.0})};
  rng::NormalSampler sampler(5);
  for (const auto& g : kernels) {
    for (int trial = 0; trial < 20; ++trial) {
      const double a = sampler.uniform01();
      const double b = sampler.uniform01();
      CHECK(g.eval(a, b) == g.eval(b, a));
    }
  }
}

TEST_CASE("discretize: constant kernel") {
  const OperatorKPS op = discretize(GraphonKernel::constant(0.5), make_grid(4));
  CHECK(op.scalar == 0.0);
  for (double v : op.kernel.entries) CHECK(v == 0.5);
}

TEST_CASE("discretize: small-world operator norm") {
  const OperatorKPS op =
      discretize(GraphonKernel::small_world(0.1, 0.3), make_grid(200));
  CHECK(op_norm_estimate(op) == doctest::Approx(0.183).epsilon(2e-3 / 0.183));
}

TEST_CASE("discretize: UAG leading eigenvalue") {
  const OperatorKPS op =
      discretize(GraphonKernel::uniform_attachment(), make_grid(200));
  CHECK(spectral_decompose(op).eigenvalues[0] ==
        doctest::Approx(0.405).epsilon(1e-3 / 0.405));
}

TEST_CASE("discretize: step kernels round-trip exactly") {
  const Grid g = make_grid(12);
  const OperatorKPS original = random_psd(g, 17);
  const GraphonKernel step = GraphonKernel::step(original.kernel);
  const OperatorKPS back = discretize(step, g);
  for (std::size_t i = 0; i < original.kernel.entries.size(); ++i)
    CHECK(back.kernel.entries[i] == original.kernel.entries[i]);
}

TEST_CASE("W-random sampling: degenerate probabilities") {
  const AdjacencyMatrix empty =
      sample_w_random_graph(GraphonKernel::constant(0.0), 20, 1);
  for (auto v : empty.entries) CHECK(v == 0);
  const AdjacencyMatrix complete =
      sample_w_random_graph(GraphonKernel::constant(1.0), 20, 2);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      CHECK(complete.at(i, j) == (i == j ? 0 : 1));
}

TEST_CASE("W-random sampling: density concentrates") {
  for (std::uint64_t seed : {11ull, 22ull, 33ull, 44ull, 55ull}) {
    const AdjacencyMatrix adj =
        sample_w_random_graph(GraphonKernel::constant(0.5), 500, seed);
    long edges = 0;
    for (int i = 0; i < adj.n; ++i)
      for (int j = i + 1; j < adj.n; ++j) edges += adj.at(i, j);
    const double density = static_cast<double>(edges) / (500.0 * 499.0 / 2.0);
    CHECK(density > 0.47);
    CHECK(density < 0.53);
  }
}

TEST_CASE("W-random sampling: symmetric, hollow, deterministic") {
  const AdjacencyMatrix a =
      sample_w_random_graph(GraphonKernel::uniform_attachment(), 64, 99);
  const AdjacencyMatrix b =
      sample_w_random_graph(GraphonKernel::uniform_attachment(), 64, 99);
  CHECK(a.entries == b.entries);
  for (int i = 0; i < a.n; ++i) {
    CHECK(a.at(i, i) == 0);
    for (int j = 0; j < a.n; ++j) CHECK(a.at(i, j) == a.at(j, i));
  }
}

TEST_CASE("W-random sampling: signed kernels need clip mode") {
  CHECK_THROWS_AS(sample_w_random_graph(GraphonKernel::cosine(), 16, 1),
                  domain_error);
  const AdjacencyMatrix clipped =
      sample_w_random_graph(GraphonKernel::cosine(), 16, 1, /*clip=*/true);
  CHECK(clipped.clipped > 0);
}

TEST_CASE("step_embed: empty and complete graphs") {
  AdjacencyMatrix empty;
  empty.n = 10;
  empty.entries.assign(100, 0);
  CHECK(hs_norm(step_embed(empty)) == 0.0);

  AdjacencyMatrix complete;
  complete.n = 16;
  complete.entries.assign(256, 1);
  for (int i = 0; i < 16; ++i) complete.entries[i * 16 + i] = 0;
  const auto dec = spectral_decompose(step_embed(complete));
  CHECK(dec.eigenvalues[0] == doctest::Approx(15.0 / 16.0).epsilon(1e-12));
}

TEST_CASE("step_embed: sampled UAG spectra approach the limit") {
  // Monte Carlo check against the analytic leading eigenvalue.
  int hits = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const AdjacencyMatrix adj = sample_w_random_graph(
        GraphonKernel::uniform_attachment(), 400, 1000 + t);
    const double top = spectral_decompose(step_embed(adj)).eigenvalues[0];
    if (std::abs(top - 0.405) < 0.05) ++hits;
  }
  CHECK(hits >= static_cast<int>(0.95 * trials));
}

TEST_CASE("step_embed of samples converges to the discretized graphon") {
  // Median operator-norm deviation over seeds must trend down with n.
  const GraphonKernel g = GraphonKernel::uniform_attachment();
  std::vector<double> medians;
  for (int n : {50, 100, 200, 400}) {
    std::vector<double> devs;
    for (int seed = 0; seed < 20; ++seed) {
      const OperatorKPS sampled =
          step_embed(sample_w_random_graph(g, n, 7000 + seed));
      const OperatorKPS limit = discretize(g, make_grid(n));
      devs.push_back(op_norm_estimate(subtract(sampled, limit)));
    }
    std::sort(devs.begin(), devs.end());
    medians.push_back(0.5 * (devs[9] + devs[10]));
  }
  for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] < medians[i - 1]);
}

TEST_CASE("adjacency file round trips") {
  const AdjacencyMatrix a =
      sample_w_random_graph(GraphonKernel::uniform_attachment(), 24, 5);
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "qlqg_graphon_test";
  fs::create_directories(dir);

  const std::string edges = (dir / "graph.edges").string();
  write_edge_list(a, edges);
  const AdjacencyMatrix a2 = read_edge_list(edges);
  CHECK(a2.n == a.n);
  CHECK(a2.entries == a.entries);

  const std::string dense = (dir / "graph.csv").string();
  write_adjacency_csv(a, dense);
  const AdjacencyMatrix a3 = read_adjacency_csv(dense);
  CHECK(a3.entries == a.entries);

  fs::remove_all(dir);
}

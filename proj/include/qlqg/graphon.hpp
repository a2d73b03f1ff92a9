#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlqg/grid.hpp"

// Analytic graphon kernels, W-random graph sampling, and the step-function
// embedding of finite adjacency matrices.
namespace qlqg {

class GraphonKernel {
 public:
  enum class Kind {
    Constant,          // p
    UniformAttachment, // 1 - max(a, b)
    SmallWorld,        // 0.5 G(a-gamma, b) + 0.5 G(a, b-gamma), Gaussian G
    Cosine,            // cos(2 pi (a - b))
    SeparableRankOne,  // g(a) g(b), g polynomial
    Step,              // piecewise-constant kernel matrix
  };

  static GraphonKernel constant(double p);
  static GraphonKernel uniform_attachment();
  static GraphonKernel small_world(double sigma, double gamma);
  static GraphonKernel cosine();
  // g(a) = sum_k coeffs[k] * a^k
  static GraphonKernel separable_rank_one(std::vector<double> coeffs);
  static GraphonKernel step(KernelMatrix values);

  Kind kind() const { return kind_; }
  double eval(double alpha, double beta) const;

  // True when eval is guaranteed to stay inside [0,1], i.e. the kernel can
  // serve directly as an edge probability.
  bool probability_valued() const;

  // Profile g for SeparableRankOne kernels.
  double profile(double alpha) const;
  const std::vector<double>& profile_coefficients() const { return coeffs_; }
  double sigma() const { return sigma_; }
  double gamma() const { return gamma_; }
  const KernelMatrix& step_values() const { return step_; }

  std::string describe() const;

 private:
  GraphonKernel(Kind kind) : kind_(kind) {}
  Kind kind_;
  double p_ = 0.0;
  double sigma_ = 0.0;
  double gamma_ = 0.0;
  std::vector<double> coeffs_;
  KernelMatrix step_;
};

// Simple undirected graph sample: symmetric 0/1 entries, zero diagonal.
struct AdjacencyMatrix {
  int n = 0;
  std::vector<std::uint8_t> entries;  // row-major n*n
  std::uint64_t seed = 0;
  long clipped = 0;  // pairs whose edge probability was clipped into [0,1]

  std::uint8_t at(int i, int j) const {
    return entries[static_cast<std::size_t>(i) * n + j];
  }
};

// Kernel sampled at cell-midpoint pairs; scalar part zero.
OperatorKPS discretize(const GraphonKernel& g, Grid grid);

// W-random graph: one uniform draw per pair (i < j, row-major order),
// edge iff draw < eval(midpoint_i, midpoint_j). Deterministic per seed.
// Out-of-range probabilities throw unless clip=true, which clamps and counts.
AdjacencyMatrix sample_w_random_graph(const GraphonKernel& g, int n,
                                      std::uint64_t seed, bool clip = false);

// Step-function embedding: kernel K_ij = A_ij, so the quadrature apply
// realizes the A/n operator scaling.
OperatorKPS step_embed(const AdjacencyMatrix& a);

// Plain-text exchange formats.
void write_edge_list(const AdjacencyMatrix& a, const std::string& path);
AdjacencyMatrix read_edge_list(const std::string& path);
void write_adjacency_csv(const AdjacencyMatrix& a, const std::string& path);
AdjacencyMatrix read_adjacency_csv(const std::string& path);

}  // namespace qlqg

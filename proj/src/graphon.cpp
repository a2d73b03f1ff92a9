#include "qlqg/graphon.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qlqg/rng.hpp"

namespace qlqg {

namespace {

void require_unit_interval(double alpha, double beta) {
  if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0)
    throw domain_error("graphon eval: arguments outside [0,1]");
}

double gaussian_bump(double x, double y, double sigma) {
  const double d = (x - y) / sigma;
  return std::exp(-0.5 * d * d);
}

}  // namespace

GraphonKernel GraphonKernel::constant(double p) {
  if (p < 0.0 || p > 1.0)
    throw domain_error("constant graphon: p outside [0,1]");
  GraphonKernel g(Kind::Constant);
  g.p_ = p;
  return g;
}

GraphonKernel GraphonKernel::uniform_attachment() {
  return GraphonKernel(Kind::UniformAttachment);
}

GraphonKernel GraphonKernel::small_world(double sigma, double gamma) {
  if (sigma <= 0.0) throw domain_error("small world graphon: sigma must be > 0");
  if (gamma < 0.0 || gamma >= 1.0)
    throw domain_error("small world graphon: gamma outside [0,1)");
  GraphonKernel g(Kind::SmallWorld);
  g.sigma_ = sigma;
  g.gamma_ = gamma;
  return g;
}

GraphonKernel GraphonKernel::cosine() { return GraphonKernel(Kind::Cosine); }

GraphonKernel GraphonKernel::separable_rank_one(std::vector<double> coeffs) {
  GraphonKernel g(Kind::SeparableRankOne);
  g.coeffs_ = std::move(coeffs);
  return g;
}

GraphonKernel GraphonKernel::step(KernelMatrix values) {
  detail::require_symmetric(values, "step graphon");
  GraphonKernel g(Kind::Step);
  g.step_ = std::move(values);
  return g;
}

double GraphonKernel::profile(double alpha) const {
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * alpha + coeffs_[k];
  return acc;
}

double GraphonKernel::eval(double alpha, double beta) const {
  require_unit_interval(alpha, beta);
  switch (kind_) {
    case Kind::Constant:
      return p_;
    case Kind::UniformAttachment:
      return 1.0 - std::max(alpha, beta);
    case Kind::SmallWorld:
      return 0.5 * gaussian_bump(alpha - gamma_, beta, sigma_) +
             0.5 * gaussian_bump(alpha, beta - gamma_, sigma_);
    case Kind::Cosine:
      return std::cos(2.0 * M_PI * (alpha - beta));
    case Kind::SeparableRankOne:
      return profile(alpha) * profile(beta);
    case Kind::Step: {
      const int n = step_.grid.n;
      auto cell = [n](double x) {
        int i = static_cast<int>(x * n);
        return i >= n ? n - 1 : i;
      };
      return step_.at(cell(alpha), cell(beta));
    }
  }
  return 0.0;
}

bool GraphonKernel::probability_valued() const {
  switch (kind_) {
    case Kind::Constant:
    case Kind::UniformAttachment:
    case Kind::SmallWorld:
      return true;
    default:
      return false;
  }
}

std::string GraphonKernel::describe() const {
  switch (kind_) {
    case Kind::Constant:
      return "constant(" + std::to_string(p_) + ")";
    case Kind::UniformAttachment:
      return "uniform_attachment";
    case Kind::SmallWorld:
      return "small_world(sigma=" + std::to_string(sigma_) +
             ",gamma=" + std::to_string(gamma_) + ")";
    case Kind::Cosine:
      return "cosine";
    case Kind::SeparableRankOne: {
      std::string s = "rank_one(";
      for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(coeffs_[k]);
      }
      return s + ")";
    }
    case Kind::Step:
      return "step(n=" + std::to_string(step_.grid.n) + ")";
  }
  return "?";
}

OperatorKPS discretize(const GraphonKernel& g, Grid grid) {
  KernelMatrix k(grid);
  k.materialize();
  for (int i = 0; i < grid.n; ++i) {
    for (int j = i; j < grid.n; ++j) {
      const double v = g.eval(grid.midpoint(i), grid.midpoint(j));
      k.at_mut(i, j) = v;
      k.at_mut(j, i) = v;
    }
  }
  return OperatorKPS::from_kernel(std::move(k));
}

AdjacencyMatrix sample_w_random_graph(const GraphonKernel& g, int n,
                                      std::uint64_t seed, bool clip) {
  if (n < 1) throw dimension_error("sample_w_random_graph: n must be >= 1");
  AdjacencyMatrix adj;
  adj.n = n;
  adj.seed = seed;
  adj.entries.assign(static_cast<std::size_t>(n) * n, 0);
  Grid grid = make_grid(n);
  rng::NormalSampler rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double p = g.eval(grid.midpoint(i), grid.midpoint(j));
      if (p < 0.0 || p > 1.0) {
        if (!clip)
          throw domain_error("sample_w_random_graph: edge probability " +
                             std::to_string(p) + " outside [0,1] at pair (" +
                             std::to_string(i) + "," + std::to_string(j) +
                             "); pass clip=true to clamp");
        p = std::min(1.0, std::max(0.0, p));
        ++adj.clipped;
      }
      const double u = rng.uniform01();
      if (u <= p && p > 0.0) {
        adj.entries[static_cast<std::size_t>(i) * n + j] = 1;
        adj.entries[static_cast<std::size_t>(j) * n + i] = 1;
      }
    }
  }
  return adj;
}

OperatorKPS step_embed(const AdjacencyMatrix& a) {
  Grid grid = make_grid(a.n);
  KernelMatrix k(grid);
  k.materialize();
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      k.at_mut(i, j) = static_cast<double>(a.at(i, j));
  return OperatorKPS::from_kernel(std::move(k));
}

void write_edge_list(const AdjacencyMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  out << "# n " << a.n << "\n";
  for (int i = 0; i < a.n; ++i)
    for (int j = i + 1; j < a.n; ++j)
      if (a.at(i, j)) out << i << " " << j << "\n";
}

AdjacencyMatrix read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path);
  std::string line;
  AdjacencyMatrix a;
  a.n = -1;
  std::vector<std::pair<int, int>> edges;
  int max_node = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tag;
      if (hs >> tag && tag == "n") hs >> a.n;
      continue;
    }
    std::istringstream ls(line);
    int i, j;
    if (!(ls >> i >> j)) throw config_error("malformed edge list line: " + line);
    if (i < 0 || j < 0 || i == j)
      throw config_error("invalid edge: " + line);
    edges.emplace_back(i, j);
    max_node = std::max(max_node, std::max(i, j));
  }
  if (a.n < 0) a.n = max_node + 1;
  if (max_node >= a.n) throw config_error("edge list node index exceeds n");
  a.entries.assign(static_cast<std::size_t>(a.n) * a.n, 0);
  for (auto [i, j] : edges) {
    a.entries[static_cast<std::size_t>(i) * a.n + j] = 1;
    a.entries[static_cast<std::size_t>(j) * a.n + i] = 1;
  }
  return a;
}

void write_adjacency_csv(const AdjacencyMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  for (int i = 0; i < a.n; ++i) {
    for (int j = 0; j < a.n; ++j) {
      if (j) out << ",";
      out << static_cast<int>(a.at(i, j));
    }
    out << "\n";
  }
}

AdjacencyMatrix read_adjacency_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path);
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<int> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stoi(cell));
    rows.push_back(std::move(row));
  }
  AdjacencyMatrix a;
  a.n = static_cast<int>(rows.size());
  a.entries.assign(static_cast<std::size_t>(a.n) * a.n, 0);
  for (int i = 0; i < a.n; ++i) {
    if (static_cast<int>(rows[i].size()) != a.n)
      throw config_error("adjacency CSV is not square");
    for (int j = 0; j < a.n; ++j) {
      if (rows[i][j] != 0 && rows[i][j] != 1)
        throw config_error("adjacency CSV entries must be 0/1");
      a.entries[static_cast<std::size_t>(i) * a.n + j] =
          static_cast<std::uint8_t>(rows[i][j]);
    }
  }
  if (KernelMatrix(make_grid(a.n),
                   std::vector<double>(a.entries.begin(), a.entries.end()))
          .asymmetry() > 0)
    throw config_error("adjacency CSV is not symmetric");
  for (int i = 0; i < a.n; ++i)
    if (a.at(i, i) != 0) throw config_error("adjacency CSV has nonzero diagonal");
  return a;
}

}  // namespace qlqg

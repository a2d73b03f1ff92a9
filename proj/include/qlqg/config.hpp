#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qlqg/graphon.hpp"
#include "qlqg/grid.hpp"
#include "qlqg/qnoise.hpp"
#include "qlqg/riccati.hpp"

// Scenario configuration: a JSON file describing the system, costs, noise,
// discretization and seeds. The schema is strict; unknown keys are
// rejected. Defaults mirror the standard desk-scale setup (n = 50, T = 1,
// dt = 0.001, a = b = 0.1).
namespace qlqg {

struct GraphonSpec {
  std::string variant = "rank_one";  // constant | uniform_attachment |
                                     // small_world | cosine | rank_one |
                                     // step_csv | step_edges
  double p = 0.5;
  double sigma = 0.1;
  double gamma = 0.3;
  std::vector<double> coeffs = {-1.0, 0.0, 1.0};
  std::string path;  // adjacency file for the step variants

  GraphonKernel build() const;
  std::string describe() const;
};

// A cost operator: optional kernel part (a graphon spec) plus identity part.
struct OperatorSpec {
  std::optional<GraphonSpec> kernel;
  double scalar = 0.0;

  OperatorKPS build(Grid grid) const;
};

struct NoiseSpec {
  std::string type = "worst_case";  // worst_case | eigenmode | graphon
  std::optional<GraphonSpec> graphon;
  int mode = 0;         // for eigenmode: index into the drift spectrum
  double lambda = 1.0;  // eigenmode intensity

  // a_kernel is the drift kernel part (no identity), used by the
  // worst_case and eigenmode variants.
  QCovariance build(const OperatorKPS& a_kernel, Grid grid) const;
};

struct ScenarioConfig {
  GraphonSpec graphon;
  double a = 0.1;
  double b = 0.1;
  OperatorSpec state_cost{std::nullopt, 1.0};
  OperatorSpec terminal_cost{std::nullopt, 0.0};
  OperatorSpec control_cost{std::nullopt, 1.0};
  NoiseSpec noise;
  int n = 50;
  double T = 1.0;
  double dt = 0.001;
  double rho = 1.0;
  std::uint64_t seed = 1;
  int seed_count = 20;
  std::vector<int> n_list = {25, 50, 100, 200};
  std::string x0 = "zero";
  int table1_n = 200;
  // Overrides the standard five-row table when present. An explicit empty
  // list is a schema error.
  std::optional<std::vector<GraphonSpec>> table1_graphons;

  static ScenarioConfig defaults() { return {}; }
  static ScenarioConfig from_file(const std::string& path);
  static ScenarioConfig from_json_text(const std::string& text);
};

}  // namespace qlqg

#include "qlqg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qlqg {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object())
    throw config_error(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key))
      throw config_error(where + ": unknown key '" + key + "'");
  }
}

GraphonSpec parse_graphon(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"variant", "p", "sigma", "gamma", "coeffs", "path"},
                      where);
  GraphonSpec g;
  g.variant = j.value("variant", g.variant);
  g.p = j.value("p", g.p);
  g.sigma = j.value("sigma", g.sigma);
  g.gamma = j.value("gamma", g.gamma);
  if (j.contains("coeffs")) g.coeffs = j.at("coeffs").get<std::vector<double>>();
  g.path = j.value("path", g.path);
  const std::set<std::string> variants = {"constant",  "uniform_attachment",
                                          "small_world", "cosine",
                                          "rank_one",  "step_csv",
                                          "step_edges"};
  if (!variants.count(g.variant))
    throw config_error(where + ": unknown graphon variant '" + g.variant + "'");
  if ((g.variant == "step_csv" || g.variant == "step_edges") && g.path.empty())
    throw config_error(where + ": step graphons need a 'path'");
  return g;
}

OperatorSpec parse_operator(const json& j, const std::string& where) {
  OperatorSpec spec;
  if (j.is_number()) {
    spec.scalar = j.get<double>();
    return spec;
  }
  reject_unknown_keys(j, {"kernel", "scalar"}, where);
  if (j.contains("kernel")) spec.kernel = parse_graphon(j.at("kernel"), where + ".kernel");
  spec.scalar = j.value("scalar", 0.0);
  return spec;
}

NoiseSpec parse_noise(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"type", "graphon", "mode", "lambda"}, where);
  NoiseSpec spec;
  spec.type = j.value("type", spec.type);
  if (j.contains("graphon"))
    spec.graphon = parse_graphon(j.at("graphon"), where + ".graphon");
  spec.mode = j.value("mode", spec.mode);
  spec.lambda = j.value("lambda", spec.lambda);
  const std::set<std::string> types = {"worst_case", "eigenmode", "graphon"};
  if (!types.count(spec.type))
    throw config_error(where + ": unknown noise type '" + spec.type + "'");
  if (spec.type == "graphon" && !spec.graphon)
    throw config_error(where + ": graphon noise needs a 'graphon' spec");
  return spec;
}

}  // namespace

GraphonKernel GraphonSpec::build() const {
  if (variant == "constant") return GraphonKernel::constant(p);
  if (variant == "uniform_attachment") return GraphonKernel::uniform_attachment();
  if (variant == "small_world") return GraphonKernel::small_world(sigma, gamma);
  if (variant == "cosine") return GraphonKernel::cosine();
  if (variant == "rank_one") return GraphonKernel::separable_rank_one(coeffs);
  if (variant == "step_csv") {
    const AdjacencyMatrix adj = read_adjacency_csv(path);
    return GraphonKernel::step(step_embed(adj).kernel);
  }
  if (variant == "step_edges") {
    const AdjacencyMatrix adj = read_edge_list(path);
    return GraphonKernel::step(step_embed(adj).kernel);
  }
  throw config_error("unknown graphon variant '" + variant + "'");
}

std::string GraphonSpec::describe() const { return build().describe(); }

OperatorKPS OperatorSpec::build(Grid grid) const {
  if (!kernel) return OperatorKPS::scaled_identity(grid, scalar);
  return add(discretize(kernel->build(), grid),
             OperatorKPS::scaled_identity(grid, scalar));
}

QCovariance NoiseSpec::build(const OperatorKPS& a_kernel, Grid grid) const {
  if (type == "worst_case") return worst_case_q(a_kernel).q;
  if (type == "eigenmode") {
    const SpectralDecomposition dec = spectral_decompose(a_kernel);
    if (mode < 0 || mode >= dec.size())
      throw config_error("noise eigenmode index out of range");
    return QCovariance::rank_one(dec.eigenfunction(mode), lambda);
  }
  if (type == "graphon")
    return QCovariance::validate(discretize(graphon->build(), grid));
  throw config_error("unknown noise type '" + type + "'");
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  reject_unknown_keys(
      j,
      {"graphon", "a", "b", "state_cost", "terminal_cost", "control_cost",
       "noise", "n", "T", "dt", "rho", "seed", "seed_count", "n_list", "x0",
       "table1_n", "table1_graphons"},
      "config");

  ScenarioConfig cfg;
  if (j.contains("graphon")) cfg.graphon = parse_graphon(j.at("graphon"), "graphon");
  cfg.a = j.value("a", cfg.a);
  cfg.b = j.value("b", cfg.b);
  if (j.contains("state_cost"))
    cfg.state_cost = parse_operator(j.at("state_cost"), "state_cost");
  if (j.contains("terminal_cost"))
    cfg.terminal_cost = parse_operator(j.at("terminal_cost"), "terminal_cost");
  if (j.contains("control_cost"))
    cfg.control_cost = parse_operator(j.at("control_cost"), "control_cost");
  if (j.contains("noise")) cfg.noise = parse_noise(j.at("noise"), "noise");
  cfg.n = j.value("n", cfg.n);
  cfg.T = j.value("T", cfg.T);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.rho = j.value("rho", cfg.rho);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.seed_count = j.value("seed_count", cfg.seed_count);
  if (j.contains("n_list")) cfg.n_list = j.at("n_list").get<std::vector<int>>();
  cfg.x0 = j.value("x0", cfg.x0);
  cfg.table1_n = j.value("table1_n", cfg.table1_n);
  if (j.contains("table1_graphons")) {
    const auto& list = j.at("table1_graphons");
    if (!list.is_array())
      throw config_error("config: table1_graphons must be an array");
    if (list.empty())
      throw config_error("config: table1_graphons must not be empty");
    cfg.table1_graphons.emplace();
    for (std::size_t i = 0; i < list.size(); ++i)
      cfg.table1_graphons->push_back(
          parse_graphon(list[i], "table1_graphons[" + std::to_string(i) + "]"));
  }

  if (cfg.n < 1) throw config_error("config: n must be >= 1");
  if (cfg.T <= 0 || cfg.dt <= 0) throw config_error("config: T and dt must be > 0");
  if (cfg.seed_count < 1) throw config_error("config: seed_count must be >= 1");
  if (cfg.x0 != "zero" && cfg.x0 != "one")
    throw config_error("config: x0 must be 'zero' or 'one'");
  return cfg;
}

}  // namespace qlqg

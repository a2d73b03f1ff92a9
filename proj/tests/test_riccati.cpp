#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "qlqg/graphon.hpp"
#include "qlqg/riccati.hpp"
#include "test_util.hpp"

using namespace qlqg;
using namespace qlqg::testutil;

namespace {

// Independent scalar oracle: RK4 at a much finer step on
// -s' = 2 a s - (b^2/r) s^2 + m, s(T) = mT; returns s(0).
double scalar_riccati_oracle(double a, double b, double m, double r, double mT,
                             double T, double dt) {
  const double g = b * b / r;
  auto f = [&](double s) { return 2.0 * a * s - g * s * s + m; };
  double s = mT;
  const long steps = std::lround(T / dt);
  for (long i = 0; i < steps; ++i) {
    const double k1 = f(s);
    const double k2 = f(s + 0.5 * dt * k1);
    const double k3 = f(s + 0.5 * dt * k2);
    const double k4 = f(s + dt * k3);
    s += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  }
  return s;
}

CostOperators unit_costs(Grid g, double m = 1.0, double mt = 0.0, double r = 1.0) {
  return CostOperators::validate(OperatorKPS::scaled_identity(g, m),
                                 OperatorKPS::scaled_identity(g, mt),
                                 OperatorKPS::scaled_identity(g, r));
}

}  // namespace

TEST_CASE("cost operator validation") {
  const Grid g = make_grid(16);
  CHECK_THROWS_AS(CostOperators::validate(OperatorKPS::scaled_identity(g, -0.5),
                                          OperatorKPS::zero(g),
                                          OperatorKPS::identity(g)),
                  domain_error);
  CHECK_THROWS_AS(CostOperators::validate(OperatorKPS::identity(g),
                                          OperatorKPS::zero(g),
                                          OperatorKPS::zero(g)),
                  domain_error);
  const OperatorKPS neg = scale(random_psd(g, 2), -1.0);
  CHECK_THROWS_AS(CostOperators::validate(neg, OperatorKPS::zero(g),
                                          OperatorKPS::identity(g)),
                  domain_error);
}

TEST_CASE("differential riccati: zero costs give the zero solution") {
  const Grid g = make_grid(12);
  const TimeGrid tg = TimeGrid::make(1.0, 0.01);
  const OperatorKPS a_op = add(discretize(GraphonKernel::constant(0.5), g),
                               OperatorKPS::scaled_identity(g, 0.1));
  for (auto path : {RiccatiPath::Dense, RiccatiPath::Spectral}) {
    const RiccatiSolution sol = solve_differential_riccati(
        a_op, OperatorKPS::scaled_identity(g, 0.1), unit_costs(g, 0.0, 0.0), tg,
        {path, true});
    for (int idx : {0, tg.steps / 2, tg.steps}) {
      CHECK(sol.scalar_at(idx) == 0.0);
      CHECK(sol.kernel_hs_norm_at(idx) < 1e-14);
    }
  }
}

TEST_CASE("differential riccati: scalar case matches the fine-step oracle") {
  const Grid g = make_grid(4);
  const TimeGrid tg = TimeGrid::make(1.0, 0.001);
  const double oracle = scalar_riccati_oracle(0.1, 0.1, 1.0, 1.0, 0.0, 1.0, 1e-6);
  for (auto path : {RiccatiPath::Dense, RiccatiPath::Spectral}) {
    const RiccatiSolution sol = solve_differential_riccati(
        OperatorKPS::scaled_identity(g, 0.1), OperatorKPS::scaled_identity(g, 0.1),
        unit_costs(g), tg, {path, true});
    CHECK(std::abs(sol.scalar_at(0) - oracle) < 1e-8);
    CHECK(sol.kernel_hs_norm_at(0) < 1e-12);
  }
}

TEST_CASE("differential riccati: dense and spectral paths coincide") {
  const Grid g = make_grid(16);
  const TimeGrid tg = TimeGrid::make(0.5, 0.005);
  const OperatorKPS a_op = add(discretize(GraphonKernel::uniform_attachment(), g),
                               OperatorKPS::scaled_identity(g, 0.1));
  const OperatorKPS b_op = OperatorKPS::scaled_identity(g, 0.3);
  const CostOperators costs = unit_costs(g, 1.0, 0.5, 2.0);
  const RiccatiSolution dense = solve_differential_riccati(
      a_op, b_op, costs, tg, {RiccatiPath::Dense, true});
  const RiccatiSolution spectral = solve_differential_riccati(
      a_op, b_op, costs, tg, {RiccatiPath::Spectral, true});
  for (int idx : {0, 25, 50, 100}) {
    CHECK(operator_distance(dense.op_at(idx), spectral.op_at(idx)) < 1e-9);
  }
}

TEST_CASE("differential riccati: terminal condition is exact") {
  const Grid g = make_grid(10);
  const TimeGrid tg = TimeGrid::make(0.2, 0.01);
  const OperatorKPS mt = add(random_psd(g, 5), OperatorKPS::scaled_identity(g, 0.2));
  const CostOperators costs = CostOperators::validate(
      OperatorKPS::identity(g), mt, OperatorKPS::identity(g));
  const RiccatiSolution sol = solve_differential_riccati(
      random_psd(g, 6, 0.1), OperatorKPS::identity(g), costs, tg,
      {RiccatiPath::Dense, true});
  CHECK(operator_distance(sol.op_at(tg.steps), mt) < 1e-14);
}

TEST_CASE("differential riccati: residual of the flow shrinks at second order") {
  // Central-difference time derivative against the right-hand side; the
  // defect must scale like dt^2 (the difference quotient dominates the
  // fourth-order integrator error). A kernel-valued state cost forces the
  // dense path.
  const Grid g = make_grid(12);
  const OperatorKPS a_op = add(discretize(GraphonKernel::constant(0.5), g),
                               OperatorKPS::scaled_identity(g, 0.1));
  const OperatorKPS b_op = OperatorKPS::identity(g);
  const OperatorKPS m_op = add(discretize(GraphonKernel::uniform_attachment(), g),
                               OperatorKPS::scaled_identity(g, 1.0));
  const CostOperators costs = CostOperators::validate(
      m_op, OperatorKPS::zero(g), OperatorKPS::identity(g));

  auto residual_at = [&](double dt) {
    const TimeGrid tg = TimeGrid::make(0.4, dt);
    const RiccatiSolution sol =
        solve_differential_riccati(a_op, b_op, costs, tg, {RiccatiPath::Dense, true});
    double worst = 0.0;
    for (int idx = 1; idx < tg.steps; ++idx) {
      const OperatorKPS sm = sol.op_at(idx - 1);
      const OperatorKPS s0 = sol.op_at(idx);
      const OperatorKPS sp = sol.op_at(idx + 1);
      // -dS/dt by central difference (indices run forward in time).
      const OperatorKPS lhs = scale(subtract(sm, sp), 1.0 / (2.0 * dt));
      OperatorKPS rhs = add(compose(a_op, s0), compose(s0, a_op));
      rhs = subtract(rhs, compose(s0, s0));  // B = R = I
      rhs = add(rhs, m_op);
      worst = std::max(worst, operator_distance(lhs, rhs));
    }
    return worst;
  };
  const double r1 = residual_at(0.02);
  const double r2 = residual_at(0.01);
  const double r3 = residual_at(0.005);
  CHECK(r1 / r2 > 3.4);  // ~4 expected for O(dt^2)
  CHECK(r2 / r3 > 3.4);
}

TEST_CASE("differential riccati: oversized steps trip the stability guards") {
  // A stiff quadratic term with dt far outside the RK4 stability region.
  const Grid g = make_grid(6);
  const TimeGrid tg = TimeGrid::make(2.0, 0.2);
  CHECK_THROWS_AS(
      solve_differential_riccati(OperatorKPS::zero(g), OperatorKPS::identity(g),
                                 unit_costs(g, 100.0, 0.5), tg,
                                 {RiccatiPath::Dense, true}),
      instability_error);
}

TEST_CASE("algebraic riccati: closed forms") {
  SUBCASE("zero drift with identity cost") {
    const Grid g = make_grid(8);
    const OperatorKPS s =
        algebraic_riccati_symmetric(OperatorKPS::zero(g), OperatorKPS::identity(g));
    CHECK(s.pure_scalar());
    CHECK(s.scalar == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("mean-field drift acts on constants with the golden ratio") {
    const Grid g = make_grid(200);
    const OperatorKPS s = algebraic_riccati_symmetric(
        discretize(GraphonKernel::constant(0.5), g), OperatorKPS::identity(g));
    const GridField out = apply(s, GridField::constant(g, 1.0));
    for (double v : out.values)
      CHECK(v == doctest::Approx(0.5 + std::sqrt(1.25)).epsilon(1e-6));
  }
  SUBCASE("rank-one drift top eigenvalue") {
    const Grid g = make_grid(200);
    const OperatorKPS s = algebraic_riccati_symmetric(
        discretize(GraphonKernel::separable_rank_one({-1.0, 0.0, 1.0}), g),
        OperatorKPS::identity(g));
    CHECK(op_norm_estimate(s) == doctest::Approx(1.666).epsilon(1e-3));
  }
}

TEST_CASE("discounted algebraic riccati") {
  const Grid g = make_grid(200);
  SUBCASE("mean-field drift at rho = 1") {
    const OperatorKPS s = discounted_algebraic_riccati(
        discretize(GraphonKernel::constant(0.5), g), OperatorKPS::identity(g), 1.0);
    const GridField out = apply(s, GridField::constant(g, 1.0));
    for (double v : out.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("UAG drift at rho = 1") {
    const OperatorKPS a_op = discretize(GraphonKernel::uniform_attachment(), g);
    const OperatorKPS s = discounted_algebraic_riccati(a_op, OperatorKPS::identity(g), 1.0);
    const auto dec = spectral_decompose(a_op);
    const GridField top = dec.eigenfunction(0);
    const GridField out = apply(s, top);
    // Action on the leading eigenfunction: -0.095 + sqrt(0.095^2 + 1).
    const double lam = dec.eigenvalues[0];
    const double want = (lam - 0.5) + std::sqrt((lam - 0.5) * (lam - 0.5) + 1.0);
    CHECK(want == doctest::Approx(0.910).epsilon(1e-3));
    for (int i = 0; i < g.n; ++i)
      CHECK(out.values[i] == doctest::Approx(want * top.values[i]).epsilon(1e-8));
  }
  SUBCASE("vanishing discount recovers the long-range solution") {
    const OperatorKPS a_op = discretize(GraphonKernel::constant(0.5), make_grid(64));
    const OperatorKPS lr =
        algebraic_riccati_symmetric(a_op, OperatorKPS::identity(a_op.grid()));
    const OperatorKPS disc = discounted_algebraic_riccati(
        a_op, OperatorKPS::identity(a_op.grid()), 1e-9);
    CHECK(operator_distance(lr, disc) < 1e-6);
  }
  SUBCASE("rho must be positive") {
    CHECK_THROWS_AS(discounted_algebraic_riccati(OperatorKPS::zero(make_grid(4)),
                                                 OperatorKPS::identity(make_grid(4)),
                                                 0.0),
                    domain_error);
  }
}

TEST_CASE("value function") {
  const Grid g = make_grid(8);
  const TimeGrid tg = TimeGrid::make(1.0, 0.001);
  const OperatorKPS a_op = OperatorKPS::scaled_identity(g, 0.1);
  const OperatorKPS b_op = OperatorKPS::scaled_identity(g, 0.1);
  RiccatiSolution sol =
      solve_differential_riccati(a_op, b_op, unit_costs(g), tg);

  SUBCASE("terminal value vanishes without terminal cost") {
    const QCovariance q = QCovariance::rank_one(GridField::constant(g, 1.0));
    const GridField x = random_field(g, 9);
    CHECK(std::abs(value_function(sol, q, x, 1.0)) < 1e-14);
  }
  SUBCASE("zero covariance reduces to the quadratic form") {
    const QCovariance q = QCovariance::zero(g);
    const GridField x = random_field(g, 10);
    const double direct = inner_product(sol.apply_at(0, x), x);
    CHECK(value_function(sol, q, x, 0.0) == doctest::Approx(direct).epsilon(1e-12));
  }
  SUBCASE("scalar system against the scalar oracle") {
    const QCovariance q = QCovariance::rank_one(GridField::constant(g, 1.0));
    const GridField x = GridField::constant(g, 1.0);
    // Oracle: s(0) |x|^2 + integral of s over [0, T], on a fine grid.
    const double fine_dt = 1e-5;
    double integral = 0.0, s = 0.0;
    {
      const double a = 0.1, b = 0.1, m = 1.0, r = 1.0;
      const double gq = b * b / r;
      auto f = [&](double v) { return 2.0 * a * v - gq * v * v + m; };
      const long steps = std::lround(1.0 / fine_dt);
      std::vector<double> curve(steps + 1);
      curve[steps] = 0.0;
      for (long i = steps; i > 0; --i) {
        const double k1 = f(s), k2 = f(s + 0.5 * fine_dt * k1),
                     k3 = f(s + 0.5 * fine_dt * k2), k4 = f(s + fine_dt * k3);
        s += fine_dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
        curve[i - 1] = s;
      }
      for (long i = 0; i < steps; ++i)
        integral += 0.5 * fine_dt * (curve[i] + curve[i + 1]);
    }
    const double want = s * inner_product(x, x) + integral;
    CHECK(value_function(sol, q, x, 0.0) == doctest::Approx(want).epsilon(1e-6));
  }
  SUBCASE("off-grid time is rejected") {
    const QCovariance q = QCovariance::zero(g);
    CHECK_THROWS_AS(value_function(sol, q, GridField::zeros(g), 0.12345),
                    domain_error);
  }
}

TEST_CASE("long-range average cost") {
  const Grid g = make_grid(100);
  SUBCASE("identity stationary operator with unit-trace covariance") {
    GridField phi = random_field(g, 12);
    phi = scale(phi, 1.0 / l2_norm(phi));
    CHECK(long_range_average_cost(OperatorKPS::identity(g),
                                  QCovariance::rank_one(phi)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("noise on a null mode of the drift still costs one") {
    const OperatorKPS a_op = discretize(GraphonKernel::constant(0.5), g);
    const OperatorKPS s_inf =
        algebraic_riccati_symmetric(a_op, OperatorKPS::identity(g));
    // Any mode orthogonal to constants has drift eigenvalue zero.
    const auto dec = spectral_decompose(a_op);
    const QCovariance q = QCovariance::rank_one(dec.eigenfunction(5));
    CHECK(long_range_average_cost(s_inf, q) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("worst case covariance") {
  const Grid g = make_grid(200);
  SUBCASE("mean-field kernel") {
    const WorstCaseNoise w = worst_case_q(discretize(GraphonKernel::constant(0.5), g));
    CHECK(w.value == doctest::Approx(0.5 + std::sqrt(1.25)).epsilon(1e-9));
    for (int i = 0; i < g.n; ++i)
      CHECK(w.q.op().kernel.at(0, i) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("flat drift degenerates to cost one") {
    const WorstCaseNoise w = worst_case_q(OperatorKPS::zero(g));
    CHECK(w.value == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("UAG: exhaustive search over the leading modes agrees") {
    const OperatorKPS a_op = discretize(GraphonKernel::uniform_attachment(), g);
    const WorstCaseNoise w = worst_case_q(a_op);
    const OperatorKPS s_inf =
        algebraic_riccati_symmetric(a_op, OperatorKPS::identity(g));
    const auto dec = spectral_decompose(a_op);
    double best = -1e30;
    for (int k = 0; k < 50; ++k) {
      const double val =
          long_range_average_cost(s_inf, QCovariance::rank_one(dec.eigenfunction(k)));
      best = std::max(best, val);
    }
    CHECK(best == doctest::Approx(w.value).epsilon(1e-9));
    CHECK(w.value == doctest::Approx(1.484).epsilon(1e-2 / 1.484));
  }
  SUBCASE("infimum branch picks the bottom of the spectrum") {
    const OperatorKPS a_op = discretize(GraphonKernel::small_world(0.1, 0.3), g);
    const WorstCaseNoise lo = worst_case_q(a_op, /*infimum=*/true);
    const WorstCaseNoise hi = worst_case_q(a_op);
    CHECK(lo.eigenvalue < 0.0);
    CHECK(lo.value < hi.value);
  }
}

TEST_CASE("discounting never beats the long-range average") {
  const Grid g = make_grid(100);
  for (const auto& graphon :
       {GraphonKernel::constant(0.5), GraphonKernel::uniform_attachment(),
        GraphonKernel::cosine(), GraphonKernel::small_world(0.1, 0.3),
        GraphonKernel::separable_rank_one({-1.0, 0.0, 1.0})}) {
    const OperatorKPS a_op = discretize(graphon, g);
    const WorstCaseNoise w = worst_case_q(a_op);
    const OperatorKPS s_rho =
        discounted_algebraic_riccati(a_op, OperatorKPS::identity(g), 1.0);
    CHECK(long_range_average_cost(s_rho, w.q) <= w.value + 1e-12);
  }
}

TEST_CASE("feedback gains") {
  const Grid g = make_grid(12);
  const TimeGrid tg = TimeGrid::make(0.5, 0.01);
  SUBCASE("zero solution gives zero gains") {
    auto sol = std::make_shared<RiccatiSolution>(solve_differential_riccati(
        OperatorKPS::scaled_identity(g, 0.1), OperatorKPS::identity(g),
        unit_costs(g, 0.0, 0.0), tg));
    const FeedbackLaw law = feedback_gain(sol, OperatorKPS::identity(g),
                                          OperatorKPS::identity(g));
    const GridField u = law.control(0, random_field(g, 3));
    for (double v : u.values) CHECK(v == 0.0);
  }
  SUBCASE("unit actuation and cost make the gain equal the solution") {
    const OperatorKPS a_op = add(discretize(GraphonKernel::constant(0.5), g),
                                 OperatorKPS::scaled_identity(g, 0.1));
    auto sol = std::make_shared<RiccatiSolution>(solve_differential_riccati(
        a_op, OperatorKPS::identity(g), unit_costs(g), tg));
    const FeedbackLaw law = feedback_gain(sol, OperatorKPS::identity(g),
                                          OperatorKPS::identity(g));
    for (int idx : {0, 25}) {
      CHECK(operator_distance(law.gain_at(idx), sol->op_at(idx)) < 1e-10);
    }
  }
  SUBCASE("scalar gain matches (b/r) s_t") {
    auto sol = std::make_shared<RiccatiSolution>(solve_differential_riccati(
        OperatorKPS::scaled_identity(g, 0.1), OperatorKPS::scaled_identity(g, 0.4),
        unit_costs(g, 1.0, 0.0, 2.0), tg));
    const FeedbackLaw law =
        feedback_gain(sol, OperatorKPS::scaled_identity(g, 0.4),
                      OperatorKPS::scaled_identity(g, 2.0));
    for (int idx : {0, 10, 50}) {
      const double want = 0.4 / 2.0 * sol->scalar_at(idx);
      CHECK(law.gain_at(idx).scalar == doctest::Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("finite-horizon solution approaches the stationary one") {
  const Grid g = make_grid(50);
  const TimeGrid tg = TimeGrid::make(10.0, 0.01);
  const OperatorKPS a_op = add(discretize(GraphonKernel::constant(0.5), g),
                               OperatorKPS::scaled_identity(g, 0.1));
  const RiccatiSolution sol = solve_differential_riccati(
      a_op, OperatorKPS::identity(g), unit_costs(g), tg);
  const OperatorKPS s_inf =
      algebraic_riccati_symmetric(a_op, OperatorKPS::identity(g));
  CHECK(operator_distance(sol.op_at(0), s_inf) < 1e-3);
}

TEST_CASE("stationary solve by flow convergence") {
  const Grid g = make_grid(16);
  SUBCASE("recovers the closed form in the unit-actuation regime") {
    const OperatorKPS a_op = add(discretize(GraphonKernel::constant(0.5), g),
                                 OperatorKPS::scaled_identity(g, 0.1));
    const OperatorKPS s = solve_stationary_riccati(
        a_op, OperatorKPS::identity(g), unit_costs(g), 0.01);
    const OperatorKPS closed =
        algebraic_riccati_symmetric(a_op, OperatorKPS::identity(g));
    CHECK(operator_distance(s, closed) < 1e-7);
  }
  SUBCASE("solves problems with kernel-valued actuation") {
    const OperatorKPS a_op = add(discretize(GraphonKernel::uniform_attachment(), g),
                                 OperatorKPS::scaled_identity(g, 0.1));
    const OperatorKPS b_op = add(discretize(GraphonKernel::constant(0.3), g),
                                 OperatorKPS::scaled_identity(g, 0.5));
    const CostOperators costs = unit_costs(g, 1.0, 0.0, 2.0);
    const OperatorKPS s = solve_stationary_riccati(a_op, b_op, costs, 0.01, 1e-10);
    // Residual of the general stationary equation.
    const OperatorKPS gain_core =
        compose(b_op, compose(spectral_inverse(costs.control_cost), b_op));
    OperatorKPS resid = add(compose(a_op, s), compose(s, a_op));
    resid = subtract(resid, compose(s, compose(gain_core, s)));
    resid = add(resid, costs.state_cost);
    CHECK(kernel_hs_distance(resid, OperatorKPS::zero(g)) +
              std::abs(resid.scalar) <
          1e-7);
  }
}

TEST_CASE("solution CSV exports") {
  const Grid g = make_grid(6);
  const TimeGrid tg = TimeGrid::make(0.2, 0.05);
  const OperatorKPS a_op = add(discretize(GraphonKernel::constant(0.5), g),
                               OperatorKPS::scaled_identity(g, 0.1));
  RiccatiSolution sol = solve_differential_riccati(
      a_op, OperatorKPS::identity(g), unit_costs(g), tg);
  sol.attach_covariance(QCovariance::rank_one(GridField::constant(g, 1.0)));

  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "qlqg_riccati_csv";
  fs::create_directories(dir);

  sol.write_summary_csv((dir / "summary.csv").string());
  {
    std::ifstream in(dir / "summary.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,kernel_hs,scalar,trace_sq");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == tg.steps + 1);
  }
  sol.write_kernel_csv(0, (dir / "kernel0.csv").string());
  {
    std::ifstream in(dir / "kernel0.csv");
    std::string comment;
    std::getline(in, comment);
    CHECK(comment.substr(0, 1) == "#");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == g.n);
  }
  fs::remove_all(dir);
}

TEST_CASE("trajectory cost accumulates state, control and terminal terms") {
  const Grid g = make_grid(6);
  const TimeGrid tg = TimeGrid::make(0.5, 0.25);
  Trajectory traj;
  traj.timegrid = tg;
  traj.grid = g;
  traj.states.assign(3 * g.n, 1.0);
  traj.controls.assign(2 * g.n, 2.0);
  const CostOperators costs = unit_costs(g, 3.0, 5.0, 0.5);
  // Two steps of dt (3 + 0.5*4) + terminal 5.
  CHECK(trajectory_cost(traj, costs) == doctest::Approx(0.5 * 5.0 + 5.0));
}

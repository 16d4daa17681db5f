#include <doctest.h>

#include <random>

#include "qvix/sensitivity.hpp"
#include "test_support.hpp"

using namespace qvix;
using qvix::testing::random_dual;
using qvix::testing::Toy;

namespace {

struct Contact {
  Grid grid{64};
  EllipticOperator A = assemble_operator(grid, 1.0, BoundaryCondition::Neumann);
  std::shared_ptr<const ThermoformingMap> map;
  DualElement f = DualElement::constant(grid, 1.0);
  DualElement d = DualElement::constant(grid, 1.0);

  Contact() {
    Eigen::VectorXd mould(grid.n_nodes());
    for (int i = 0; i < grid.n_nodes(); ++i) mould[i] = 0.6 + 0.3 * grid.x(i);
    map = std::make_shared<ThermoformingMap>(ThermoParams{.k = 1.0, .M = 1.0, .gamma = 0.1},
                                             NodalFunction(grid, mould));
  }
  IntervalBracket bracket() const {
    return {NodalFunction::zeros(grid), default_supersolution(A, f, d)};
  }
  NodalFunction minimal() const { return iterate_min(A, f, *map, NodalFunction::zeros(grid)).solution; }
};

}  // namespace

TEST_CASE("toy minimal map is flat in constant directions") {
  Toy t;
  const NodalFunction m = iterate_min(t.A, t.f, *t.map, t.constant(0.0)).solution;
  const CriticalConeData cone = build_cone(t.A, t.f, t.map, m);
  CHECK(cone.partition.count(NodeClass::Strict) == t.grid.n_nodes());
  const DerivativeReport r =
      solve_derivative_qvi(t.A, cone, DualElement::constant(t.grid, 1.0), Extremal::Min);
  REQUIRE(r.alpha.has_value());
  CHECK(r.converged);
  CHECK(v_norm(*r.alpha) <= 1e-12);
  CHECK(r.residual <= 1e-9);
  CHECK(r.n_strict == t.grid.n_nodes());
}

TEST_CASE("toy maximal map follows a negative direction") {
  Toy t;
  const NodalFunction M = iterate_max(t.A, t.f, *t.map, t.constant(2.0)).solution;
  const CriticalConeData cone = build_cone(t.A, t.f, t.map, M);
  CHECK(cone.partition.count(NodeClass::Biactive) == t.grid.n_nodes());
  const DerivativeReport r =
      solve_derivative_qvi(t.A, cone, DualElement::constant(t.grid, -1.0), Extremal::Max);
  REQUIRE(r.alpha.has_value());
  CHECK(sup_norm(*r.alpha - t.constant(-1.0)) <= 1e-9);
  CHECK(r.n_biactive == t.grid.n_nodes());
  CHECK(alpha_monotonicity_check(r));
}

TEST_CASE("without contact the derivative is the linear solve") {
  Grid g(64);
  const EllipticOperator A = assemble_operator(g, 1.0, BoundaryCondition::Neumann);
  auto map = std::make_shared<ThermoformingMap>(ThermoParams{.k = 1.0, .M = 1.0, .gamma = 0.1},
                                                NodalFunction::constant(g, 3.0));
  const DualElement f = DualElement::constant(g, 1.0);
  const NodalFunction m = iterate_min(A, f, *map, NodalFunction::zeros(g)).solution;
  const CriticalConeData cone = build_cone(A, f, map, m);
  CHECK(cone.partition.count(NodeClass::Inactive) == g.n_nodes());
  std::mt19937_64 rng(71);
  for (int k = 0; k < 5; ++k) {
    const DualElement d = random_dual(rng, g, 0.0, 1.0);
    const DerivativeReport r = solve_derivative_qvi(A, cone, d, Extremal::Min);
    REQUIRE(r.alpha.has_value());
    CHECK(v_norm(*r.alpha - A.solve(d)) <= 1e-10);
  }
}

TEST_CASE("derivative is positively homogeneous") {
  Contact c;
  const CriticalConeData cone = build_cone(c.A, c.f, c.map, c.minimal());
  const NodalFunction a1 = *solve_derivative_qvi(c.A, cone, c.d, Extremal::Min).alpha;
  for (double scale : {2.0, 10.0, 0.25}) {
    const NodalFunction as = *solve_derivative_qvi(c.A, cone, scale * c.d, Extremal::Min).alpha;
    CHECK(v_norm(as - scale * a1) <= 1e-9 * scale);
  }
  CHECK(v_norm(*solve_derivative_qvi(c.A, cone, DualElement::zeros(c.grid), Extremal::Min).alpha) == 0.0);
}

TEST_CASE("alpha iterates are monotone and the residual vanishes") {
  Contact c;
  const CriticalConeData cone = build_cone(c.A, c.f, c.map, c.minimal());
  const DerivativeReport r = solve_derivative_qvi(c.A, cone, c.d, Extremal::Min);
  CHECK(r.converged);
  CHECK(r.monotone);
  CHECK(alpha_monotonicity_check(r));
  CHECK(r.residual <= 1e-9);
  CHECK(derivative_qvi_residual(c.A, cone, c.d, *r.alpha) <= 1e-9);
  CHECK(derivative_qvi_residual(c.A, cone, c.d, NodalFunction::zeros(c.grid)) > 1e-3);
  CHECK(r.alpha_iterates.size() >= 2);
  CHECK(v_norm(r.alpha_iterates.front()) <= v_norm(*r.alpha) + 1e-12);
}

TEST_CASE("cone and direction preconditions") {
  Toy t;
  CHECK_THROWS_AS(build_cone(t.A, t.f, t.map, t.constant(1.4)), InvalidArgument);
  CHECK_THROWS_AS(build_cone(t.A, t.f, nullptr, t.constant(1.0)), InvalidArgument);
  const CriticalConeData cone = build_cone(t.A, t.f, t.map, t.constant(1.0));
  CHECK_THROWS_AS(
      solve_derivative_qvi(t.A, cone, DualElement::constant(t.grid, -1.0), Extremal::Min),
      InvalidArgument);
  CHECK_THROWS_AS(require_direction_sign(DualElement::constant(t.grid, 1.0), Extremal::Max),
                  InvalidArgument);
  CHECK_NOTHROW(require_direction_sign(DualElement::zeros(t.grid), Extremal::Max));
  CHECK_NOTHROW(require_direction_sign(DualElement::zeros(t.grid), Extremal::Min));
}

TEST_CASE("difference quotients converge to alpha") {
  Contact c;
  const DerivativeReport r = fd_validate(c.A, c.f, c.d, c.map, c.bracket(), Extremal::Min);
  REQUIRE(r.alpha.has_value());
  CHECK(r.fd_passed);
  CHECK(r.error_decreasing);
  REQUIRE(r.fd_table.size() == 4);
  CHECK(r.fd_table.back().error_vnorm <= r.fd_tol);
  REQUIRE(r.observed_order.has_value());
  CHECK(*r.observed_order >= 0.9);
  CHECK(r.fd_tol == doctest::Approx(1e-3 * (1.0 + v_norm(*r.alpha))));
}

TEST_CASE("difference quotients on the toy are exact") {
  Toy t;
  const DualElement d = DualElement::constant(t.grid, 1.0);
  const IntervalBracket bracket{t.constant(0.0), default_supersolution(t.A, t.f, d)};
  const DerivativeReport r = fd_validate(t.A, t.f, d, t.map, bracket, Extremal::Min);
  CHECK(r.fd_passed);
  for (const FdRow& row : r.fd_table) CHECK(row.error_vnorm <= row.noise_floor + 1e-12);
  CHECK_FALSE(r.observed_order.has_value());
}

TEST_CASE("fd_validate rejects bad inputs") {
  Contact c;
  FdOptions opts;
  opts.s_list = {1e-1, 1e-6};
  CHECK_THROWS_AS(fd_validate(c.A, c.f, c.d, c.map, c.bracket(), Extremal::Min, opts), InvalidArgument);
  opts.s_list = {1e-2, 1e-1};
  CHECK_THROWS_AS(fd_validate(c.A, c.f, c.d, c.map, c.bracket(), Extremal::Min, opts), InvalidArgument);
  opts.s_list = {};
  CHECK_THROWS_AS(fd_validate(c.A, c.f, c.d, c.map, c.bracket(), Extremal::Min, opts), InvalidArgument);
  // Upper bound below the perturbed solution set.
  const IntervalBracket low{NodalFunction::zeros(c.grid), NodalFunction::constant(c.grid, 0.1)};
  CHECK_THROWS_AS(fd_validate(c.A, c.f, c.d, c.map, low, Extremal::Max), InvalidArgument);
  CHECK_THROWS_AS(fd_validate(c.A, c.f, c.d, c.map, c.bracket(), Extremal::Max), InvalidArgument);
}

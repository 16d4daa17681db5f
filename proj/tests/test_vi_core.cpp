#include <doctest.h>

#include <random>

#include "qvix/vi_core.hpp"
#include "test_support.hpp"

using namespace qvix;
using qvix::testing::random_dual;
using qvix::testing::random_nodal;

namespace {

EllipticOperator neumann(int n, double c = 1.0) {
  return assemble_operator(Grid(n), c, BoundaryCondition::Neumann);
}

}  // namespace

TEST_CASE("unconstrained obstacle gives the linear solution") {
  const EllipticOperator A = neumann(21);
  const Grid& g = A.grid();
  const ViSolution s =
      solve_vi(A, DualElement::constant(g, 0.7), NodalFunction::constant(g, 1e6));
  CHECK(sup_norm(s.u - NodalFunction::constant(g, 0.7)) <= 1e-12);
  CHECK(s.partition.count(NodeClass::Inactive) == 21);
  CHECK(s.residual <= 1e-10);
}

TEST_CASE("constant obstacle below the linear solution clamps everywhere") {
  const EllipticOperator A = neumann(21);
  const Grid& g = A.grid();
  const ViSolution s = solve_vi(A, DualElement::constant(g, 2.0), NodalFunction::constant(g, 1.0));
  CHECK(sup_norm(s.u - NodalFunction::constant(g, 1.0)) <= 1e-12);
  CHECK(sup_norm(s.lambda - DualElement::constant(g, 1.0)) <= 1e-10);
  CHECK(s.partition.count(NodeClass::Strict) == 21);
}

TEST_CASE("solution invariants: feasibility, sign, complementarity") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const EllipticOperator A = neumann(25, 0.5);
    const Grid& g = A.grid();
    const DualElement f = random_dual(rng, g, -2, 3);
    const NodalFunction phi = random_nodal(rng, g, -0.5, 1.0);
    const ViSolution s = solve_vi(A, f, phi);
    CHECK(leq(s.u, phi, 1e-10));
    CHECK(s.lambda.values().minCoeff() >= -1e-10);
    for (int i = 0; i < g.n_nodes(); ++i) {
      CHECK(std::abs(s.lambda[i] * (phi[i] - s.u[i])) <= 1e-10);
    }
    CHECK(kkt_residual(A, f, MixedConstraint::upper(phi), s.u) <= 1e-10);
  }
}

TEST_CASE("oracle on a four-node instance") {
  // Frozen from tests/oracles/compute_oracles.py (vi_n4).
  Grid g(4);
  const EllipticOperator A = assemble_operator(g, 1.0, BoundaryCondition::Neumann);
  const DualElement f(g, Eigen::Vector4d(3.0, -1.0, 2.0, 0.5));
  const NodalFunction phi(g, Eigen::Vector4d(1.0, 1.0, 0.5, 2.0));
  const Eigen::Vector4d expected(0.6030150753768846, 0.469849246231156, 0.5, 0.5);
  const ViSolution o = oracle_vi(A, f, phi);
  const ViSolution s = solve_vi(A, f, phi);
  CHECK((o.u.values() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s.u.values() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.partition.to_string() == "IISI");
  CHECK(s.lambda[2] == doctest::Approx(1.2286432160804046).epsilon(1e-10));
}

TEST_CASE("oracle on a two-node instance matches solve_vi") {
  Grid g(2);
  const EllipticOperator A = assemble_operator(g, 1.0, BoundaryCondition::Neumann);
  const DualElement f(g, Eigen::Vector2d(3.0, 0.0));
  const NodalFunction phi(g, Eigen::Vector2d(1.0, 1.0));
  // Node 0 clamps at 1; node 1 solves (1/h + h/2) u1 - u0/h = 0 with h = 1.
  const ViSolution o = oracle_vi(A, f, phi);
  CHECK(o.u[0] == doctest::Approx(1.0));
  CHECK(o.u[1] == doctest::Approx(2.0 / 3.0));
  CHECK(sup_norm(o.u - solve_vi(A, f, phi).u) <= 1e-12);
}

TEST_CASE("oracle selects empty and full active sets") {
  const EllipticOperator A = neumann(8);
  const Grid& g = A.grid();
  const ViSolution free = oracle_vi(A, DualElement::constant(g, 0.3), NodalFunction::constant(g, 5));
  CHECK(free.partition.count(NodeClass::Inactive) == 8);
  const ViSolution full =
      oracle_vi(A, DualElement::constant(g, 100.0), NodalFunction::constant(g, 1.0));
  CHECK(full.partition.count(NodeClass::Strict) == 8);
  CHECK_THROWS_AS(oracle_vi(neumann(15), DualElement::zeros(Grid(15)),
                            NodalFunction::zeros(Grid(15))),
                  InvalidArgument);
}

TEST_CASE("random instances agree with the oracle") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 60; ++t) {
    const int n = 4 + t % 7;
    const EllipticOperator A = neumann(n, 0.2 + 0.1 * (t % 5));
    const Grid& g = A.grid();
    const DualElement f = random_dual(rng, g, -3, 3);
    const NodalFunction phi = random_nodal(rng, g, -1, 1);
    CHECK(sup_norm(solve_vi(A, f, phi).u - oracle_vi(A, f, phi).u) <= 1e-10);
  }
}

TEST_CASE("dirichlet nodes stay pinned") {
  Grid g(9);
  const EllipticOperator A = assemble_operator(g, 0.0, BoundaryCondition::Dirichlet);
  const ViSolution s = solve_vi(A, DualElement::constant(g, 10.0), NodalFunction::constant(g, 0.1));
  CHECK(s.u[0] == 0.0);
  CHECK(s.u[8] == 0.0);
  CHECK(s.partition[0] == NodeClass::Inactive);
  CHECK(sup_norm(s.u - oracle_vi(A, DualElement::constant(g, 10.0),
                                 NodalFunction::constant(g, 0.1)).u) <= 1e-12);
}

TEST_CASE("classification") {
  const EllipticOperator A = neumann(11);
  const Grid& g = A.grid();
  const NodalFunction phi = NodalFunction::constant(g, 1.0);
  SUBCASE("all strict") {
    const auto p = classify_active(A, DualElement::constant(g, 2.0), phi, phi);
    CHECK(p.count(NodeClass::Strict) == 11);
  }
  SUBCASE("all inactive") {
    const auto p = classify_active(A, DualElement::constant(g, 0.5),
                                   NodalFunction::constant(g, 0.5), phi);
    CHECK(p.count(NodeClass::Inactive) == 11);
  }
  SUBCASE("manufactured biactive plateau") {
    // u = phi = 1 on nodes 3..7 with f = Au there (lambda = 0); u below phi
    // elsewhere, f = Au + 1 on nodes 0 and 10 would make them strict, so keep
    // them strictly below the obstacle instead.
    Eigen::VectorXd uv = Eigen::VectorXd::Constant(11, 1.0);
    for (int i : {0, 1, 2, 8, 9, 10}) uv[i] = 1.0 - 0.05 * (i < 5 ? 3 - i : i - 7);
    const NodalFunction u(g, uv);
    const DualElement f = A.apply(u);
    const auto p = classify_active(A, f, u, phi);
    CHECK(p.to_string() == "IIIBBBBBIII");
    const ViSolution s = solve_vi(A, f, phi);
    CHECK(sup_norm(s.u - u) <= 1e-10);
  }
}

TEST_CASE("mixed constraints: free, upper and pinned nodes") {
  const EllipticOperator A = neumann(6);
  const Grid& g = A.grid();
  MixedConstraint c{.kinds = {NodeConstraint::Free, NodeConstraint::Upper, NodeConstraint::Pinned,
                              NodeConstraint::Upper, NodeConstraint::Free, NodeConstraint::Free},
                    .bound = NodalFunction(g, (Eigen::VectorXd(6) << 0, 0.2, -0.3, 5, 0, 0).finished())};
  const DualElement f = DualElement::constant(g, 1.0);
  const ViSolution s = solve_mixed_vi(A, f, c);
  const ViSolution o = oracle_mixed_vi(A, f, c);
  CHECK(sup_norm(s.u - o.u) <= 1e-12);
  CHECK(s.u[2] == doctest::Approx(-0.3));
  CHECK(s.u[1] <= 0.2 + 1e-12);
  CHECK(kkt_residual(A, f, c, s.u) <= 1e-10);
}

TEST_CASE("comparison principle in f and phi") {
  std::mt19937_64 rng(31);
  const EllipticOperator A = neumann(30);
  const Grid& g = A.grid();
  for (int t = 0; t < 100; ++t) {
    const DualElement f1 = random_dual(rng, g, -1, 2);
    const NodalFunction phi1 = random_nodal(rng, g, 0, 1);
    CHECK(check_comparison(A, f1, f1, phi1, phi1));
    CHECK(check_comparison(A, f1, f1 + random_dual(rng, g, 0, 1), phi1, phi1));
    CHECK(check_comparison(A, f1, f1, phi1, phi1 + random_nodal(rng, g, 0, 1)));
  }
  const DualElement f = DualElement::constant(g, 1.0);
  const NodalFunction phi = NodalFunction::constant(g, 1.0);
  CHECK_THROWS_AS(check_comparison(A, f, f - DualElement::constant(g, 0.1), phi, phi),
                  InvalidArgument);
}

TEST_CASE("continuous dependence on the obstacle") {
  std::mt19937_64 rng(37);
  const EllipticOperator A = neumann(40);
  const Grid& g = A.grid();
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const DualElement f = random_dual(rng, g, -1, 3);
    const NodalFunction p1 = random_nodal(rng, g, 0, 1);
    const NodalFunction p2 = p1 + random_nodal(rng, g, -0.1, 0.1);
    const double ratio =
        v_norm(solve_vi(A, f, p1).u - solve_vi(A, f, p2).u) / v_norm(p1 - p2);
    worst = std::max(worst, ratio);
  }
  // The projection-type estimate gives |S(f,p1) - S(f,p2)|_V <= (1 + C_b/C_a)|p1 - p2|_V.
  CHECK(worst <= 1.0 + A.boundedness() / A.coercivity());
}

TEST_CASE("non-convergence is reported") {
  const EllipticOperator A = neumann(30);
  const Grid& g = A.grid();
  std::mt19937_64 rng(41);
  SolverOptions opts;
  opts.max_iter = 1;
  CHECK_THROWS_AS(solve_vi(A, random_dual(rng, g, -5, 5), random_nodal(rng, g, -1, 1), opts),
                  ConvergenceError);
}

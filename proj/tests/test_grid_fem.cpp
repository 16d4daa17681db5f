#include <doctest.h>

#include <random>

#include "qvix/grid_fem.hpp"
#include "test_support.hpp"

using namespace qvix;
using qvix::testing::random_dual;
using qvix::testing::random_nodal;

TEST_CASE("grid weights and coordinates") {
  Grid g(5, -1.0, 1.0);
  CHECK(g.h() == doctest::Approx(0.5));
  CHECK(g.x(4) == doctest::Approx(1.0));
  CHECK(g.weight(0) == doctest::Approx(0.25));
  CHECK(g.weight(2) == doctest::Approx(0.5));
  CHECK(g.weights().sum() == doctest::Approx(2.0));
  CHECK_THROWS_AS(Grid(1), InvalidArgument);
  CHECK_THROWS_AS(Grid(4, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("grid vectors validate length and finiteness") {
  Grid g(4);
  CHECK_THROWS_AS(NodalFunction(g, Eigen::VectorXd::Zero(3)), InvalidArgument);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(4);
  bad[2] = std::nan("");
  CHECK_THROWS_AS(NodalFunction(g, bad), InvalidArgument);
  CHECK_THROWS_AS(NodalFunction::zeros(g) + NodalFunction::zeros(Grid(4, 0.0, 2.0)),
                  InvalidArgument);
}

TEST_CASE("neumann operator with c = 1 on three nodes") {
  Grid g(3);
  const EllipticOperator A = assemble_operator(g, 1.0, BoundaryCondition::Neumann);
  const Eigen::MatrixXd m = A.matrix().dense();
  CHECK((m - m.transpose()).norm() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(m.row(i).sum() == doctest::Approx(g.weight(i)));
  CHECK(A.matrix().is_m_matrix());
}

TEST_CASE("assembly rejects singular or degenerate setups") {
  CHECK_THROWS_AS(assemble_operator(Grid(2), 0.0, BoundaryCondition::Neumann), InvalidArgument);
  CHECK_THROWS_AS(assemble_operator(Grid(2), 1.0, BoundaryCondition::Dirichlet), InvalidArgument);
  CHECK_NOTHROW(assemble_operator(Grid(5), 0.0, BoundaryCondition::Dirichlet));
  CHECK_THROWS_AS(assemble_operator(Grid(5), -1.0, BoundaryCondition::Neumann), InvalidArgument);
}

TEST_CASE("constants are reproduced by solve and apply") {
  Grid g(101);
  const EllipticOperator A = assemble_operator(g, 1.0, BoundaryCondition::Neumann);
  const NodalFunction one = NodalFunction::constant(g, 1.0);
  CHECK(sup_norm(A.solve(represent(one)) - one) <= 1e-12);
  const DualElement a3 = A.apply(NodalFunction::constant(g, 3.0));
  // Entries of the nodal operator are O(1/h^2); roundoff scales with them.
  CHECK(sup_norm(a3 - DualElement::constant(g, 3.0)) <= 1e-12 * 4.0 / (g.h() * g.h()));
  CHECK(sup_norm(A.apply(NodalFunction::zeros(g))) == 0.0);
}

TEST_CASE("apply is symmetric and solve inverts it") {
  std::mt19937_64 rng(3);
  for (BoundaryCondition bc : {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
    Grid g(7);
    const EllipticOperator A = assemble_operator(g, 0.5, bc);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd uv = qvix::testing::uniform(rng, 7, -1, 1);
      Eigen::VectorXd vv = qvix::testing::uniform(rng, 7, -1, 1);
      if (bc == BoundaryCondition::Dirichlet) {
        uv[0] = uv[6] = vv[0] = vv[6] = 0.0;
      }
      const NodalFunction u(g, uv), v(g, vv);
      CHECK(std::abs(pairing(A.apply(u), v) - pairing(A.apply(v), u)) <= 1e-12);
      CHECK(sup_norm(A.solve(A.apply(u)) - u) <= 1e-10);
    }
  }
}

TEST_CASE("discrete maximum and comparison principles") {
  std::mt19937_64 rng(5);
  Grid g(50);
  const EllipticOperator A = assemble_operator(g, 1.0, BoundaryCondition::Neumann);
  for (int t = 0; t < 50; ++t) {
    const DualElement f = random_dual(rng, g, 0.0, 2.0);
    CHECK(leq(NodalFunction::zeros(g), A.solve(f)));
    const DualElement f2 = f + random_dual(rng, g, 0.0, 1.0);
    CHECK(leq(A.solve(f), A.solve(f2), 1e-12));
  }
}

TEST_CASE("positive and negative parts") {
  Grid g(3);
  const NodalFunction u(g, Eigen::Vector3d(-1.0, 2.0, 0.0));
  CHECK(positive_part(u).values() == Eigen::Vector3d(0.0, 2.0, 0.0));
  CHECK(negative_part(u).values() == Eigen::Vector3d(1.0, 0.0, 0.0));
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const NodalFunction r = random_nodal(rng, g, -1, 1);
    CHECK((positive_part(r) - negative_part(r)).values() == r.values());
    const NodalFunction p = positive_part(r);
    CHECK(positive_part(p).values() == p.values());
  }
}

TEST_CASE("leq with tolerance") {
  Grid g(2);
  const double t = 1e-3;
  const NodalFunction a(g, Eigen::Vector2d(0.0, 1.0));
  const NodalFunction b(g, Eigen::Vector2d(0.0, 1.0 - 2 * t));
  CHECK(leq(a, a, 0.0));
  CHECK_FALSE(leq(a, b, t));
  CHECK(leq(b, a, 0.0));
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const NodalFunction x = random_nodal(rng, g, -1, 1);
    const NodalFunction y = x + NodalFunction(g, qvix::testing::uniform(rng, 2, 0, 1));
    const NodalFunction z = y + NodalFunction(g, qvix::testing::uniform(rng, 2, 0, 1));
    CHECK(leq(x, y));
    CHECK(leq(y, z));
    CHECK(leq(x, z));
  }
}

TEST_CASE("norms") {
  Grid g(11);
  CHECK(v_norm(NodalFunction::zeros(g)) == 0.0);
  const NodalFunction k = NodalFunction::constant(g, -3.0);
  CHECK(h_norm(k) == doctest::Approx(3.0));
  CHECK(seminorm(k) == 0.0);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    const NodalFunction u = random_nodal(rng, g, -1, 1);
    CHECK(v_norm(u) * v_norm(u) ==
          doctest::Approx(h_norm(u) * h_norm(u) + seminorm(u) * seminorm(u)));
    CHECK(v_norm(positive_part(u)) <= v_norm(u) + 1e-12);
  }
  // The Riesz representative of the constant 1 is 1 itself.
  CHECK(dual_norm(DualElement::constant(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coercivity, boundedness and T-monotonicity on random pairs") {
  std::mt19937_64 rng(17);
  for (BoundaryCondition bc : {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
    for (double c : {0.3, 1.0, 4.0}) {
      Grid g(30);
      const EllipticOperator A = assemble_operator(g, c, bc);
      CHECK(A.coercivity() > 0.0);
      CHECK(A.boundedness() >= A.coercivity());
      for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd uv = qvix::testing::uniform(rng, 30, -1, 1);
        Eigen::VectorXd vv = qvix::testing::uniform(rng, 30, -1, 1);
        if (bc == BoundaryCondition::Dirichlet) uv[0] = uv[29] = vv[0] = vv[29] = 0.0;
        const NodalFunction u(g, uv), v(g, vv);
        CHECK(pairing(A.apply(u), u) >= A.coercivity() * v_norm(u) * v_norm(u) - 1e-12);
        CHECK(std::abs(pairing(A.apply(u), v)) <= A.boundedness() * v_norm(u) * v_norm(v) + 1e-12);
        CHECK(pairing(A.apply(positive_part(u)), negative_part(u)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("embedding constant bounds the sup norm") {
  Grid g(64);
  const double K = embedding_constant(g);
  std::mt19937_64 rng(19);
  for (int t = 0; t < 100; ++t) {
    const NodalFunction u = random_nodal(rng, g, -1, 1);
    CHECK(sup_norm(u) <= K * v_norm(u) + 1e-12);
  }
}

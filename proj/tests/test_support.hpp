#pragma once

#include <random>

#include "qvix/grid_fem.hpp"
#include "qvix/obstacle_maps.hpp"

namespace qvix::testing {

inline Eigen::VectorXd uniform(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline NodalFunction random_nodal(std::mt19937_64& rng, const Grid& g, double lo, double hi) {
  return NodalFunction(g, uniform(rng, g.n_nodes(), lo, hi));
}

inline DualElement random_dual(std::mt19937_64& rng, const Grid& g, double lo, double hi) {
  return DualElement(g, uniform(rng, g.n_nodes(), lo, hi));
}

/// Toy instance: n = 101 on [0, 1], A = -Laplace + I (Neumann), plateaus at
/// 1 and 2 with eps = 1/4, f = 2.
struct Toy {
  Grid grid{101};
  EllipticOperator A = assemble_operator(grid, 1.0, BoundaryCondition::Neumann);
  std::shared_ptr<const PlateauMap> map =
      std::make_shared<PlateauMap>(PlateauParams{.levels = {1.0, 2.0}, .eps = 0.25});
  DualElement f = DualElement::constant(grid, 2.0);

  NodalFunction constant(double v) const { return NodalFunction::constant(grid, v); }
};

}  // namespace qvix::testing

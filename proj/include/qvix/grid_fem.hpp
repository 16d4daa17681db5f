#pragma once

// One-dimensional P1 finite elements with lumped mass on a uniform grid.
//
// Functions live in V = H^1(a,b) (Neumann) or H^1_0(a,b) (Dirichlet) and are
// stored by nodal values. Dual elements are stored nodally as well; the
// pairing is <f, v> = sum_i w_i f_i v_i with the lumped (trapezoidal) weights
// w_i, so that f >= 0 in V* is the same as nodal nonnegativity.

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <string_view>

#include "qvix/errors.hpp"

namespace qvix {

enum class BoundaryCondition { Neumann, Dirichlet };

std::string to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(std::string_view name);

class Grid {
 public:
  explicit Grid(int n_nodes, double a = 0.0, double b = 1.0);

  int n_nodes() const { return n_nodes_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double h() const { return h_; }
  double length() const { return b_ - a_; }
  double x(int i) const { return a_ + h_ * i; }

  /// Lumped mass weight of node i: h in the interior, h/2 at the ends.
  double weight(int i) const;
  Eigen::VectorXd weights() const;
  Eigen::VectorXd coordinates() const;

  bool operator==(const Grid& other) const = default;

 private:
  int n_nodes_;
  double a_;
  double b_;
  double h_;
};

/// Vector of nodal values tied to a grid. The tag separates primal functions
/// from dual elements at compile time.
template <class Tag>
class GridVector {
 public:
  GridVector(Grid grid, Eigen::VectorXd values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_nodes()) {
      throw InvalidArgument("vector length " + std::to_string(values_.size()) +
                            " does not match grid with " + std::to_string(grid_.n_nodes()) +
                            " nodes");
    }
    if (!values_.allFinite()) throw InvalidArgument("nodal values must be finite");
  }

  static GridVector constant(const Grid& grid, double value) {
    return GridVector(grid, Eigen::VectorXd::Constant(grid.n_nodes(), value));
  }
  static GridVector zeros(const Grid& grid) { return constant(grid, 0.0); }

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

  GridVector operator+(const GridVector& o) const {
    require_same_grid(o);
    return GridVector(grid_, values_ + o.values_);
  }
  GridVector operator-(const GridVector& o) const {
    require_same_grid(o);
    return GridVector(grid_, values_ - o.values_);
  }
  GridVector operator-() const { return GridVector(grid_, -values_); }
  GridVector operator*(double s) const { return GridVector(grid_, s * values_); }
  friend GridVector operator*(double s, const GridVector& v) { return v * s; }

  void require_same_grid(const GridVector& o) const {
    if (!(grid_ == o.grid_)) throw InvalidArgument("grid mismatch");
  }

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

struct NodalTag {};
struct DualTag {};
using NodalFunction = GridVector<NodalTag>;
using DualElement = GridVector<DualTag>;

/// Tridiagonal matrix stored by its three bands. lower(i) is entry (i, i-1),
/// upper(i) is entry (i, i+1).
class Tridiagonal {
 public:
  explicit Tridiagonal(int n);

  int size() const { return static_cast<int>(diag_.size()); }
  double& lower(int i) { return lower_[i]; }
  double& diag(int i) { return diag_[i]; }
  double& upper(int i) { return upper_[i]; }
  double lower(int i) const { return lower_[i]; }
  double diag(int i) const { return diag_[i]; }
  double upper(int i) const { return upper_[i]; }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;

  /// Thomas algorithm without pivoting; valid for the diagonally dominant
  /// systems built here. Throws SingularSystem on a vanishing pivot.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  Eigen::MatrixXd dense() const;

  /// Off-diagonals <= 0, diagonal > 0, weakly diagonally dominant rows.
  bool is_m_matrix() const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd diag_;
  Eigen::VectorXd upper_;
};

/// A = -Laplace + c I, assembled as stiffness + c * lumped mass.
///
/// Dirichlet nodes are eliminated: their rows become identity rows and their
/// columns are removed from the neighbouring rows, which keeps the matrix a
/// symmetric M-matrix.
class EllipticOperator {
 public:
  const Grid& grid() const { return grid_; }
  double reaction() const { return c_; }
  BoundaryCondition bc() const { return bc_; }
  const Tridiagonal& matrix() const { return matrix_; }

  /// C_a with <Au,u> >= C_a |u|_V^2.
  double coercivity() const { return coercivity_; }
  /// C_b with <Au,v> <= C_b |u|_V |v|_V.
  double boundedness() const { return boundedness_; }

  /// True for nodes fixed by a Dirichlet condition.
  bool is_pinned(int i) const {
    return bc_ == BoundaryCondition::Dirichlet && (i == 0 || i == grid_.n_nodes() - 1);
  }

  /// Load vector of f (weights times values), zero on pinned rows.
  Eigen::VectorXd load(const DualElement& f) const;

  DualElement apply(const NodalFunction& u) const;
  NodalFunction solve(const DualElement& f) const;

 private:
  friend EllipticOperator assemble_operator(const Grid&, double, BoundaryCondition);
  EllipticOperator(Grid grid, double c, BoundaryCondition bc, Tridiagonal matrix,
                   double coercivity, double boundedness);

  Grid grid_;
  double c_;
  BoundaryCondition bc_;
  Tridiagonal matrix_;
  double coercivity_;
  double boundedness_;
};

EllipticOperator assemble_operator(const Grid& grid, double c, BoundaryCondition bc);

DualElement apply(const EllipticOperator& op, const NodalFunction& u);
NodalFunction solve_linear(const EllipticOperator& op, const DualElement& f);

/// Nodal representation of the constant function, as a dual element.
DualElement represent(const NodalFunction& u);

NodalFunction positive_part(const NodalFunction& u);
NodalFunction negative_part(const NodalFunction& u);

/// u_i <= v_i + tol at every node.
bool leq(const NodalFunction& u, const NodalFunction& v, double tol = 0.0);

double pairing(const DualElement& f, const NodalFunction& v);
double h_inner(const NodalFunction& u, const NodalFunction& v);
double v_inner(const NodalFunction& u, const NodalFunction& v);
double h_norm(const NodalFunction& u);
/// Square root of the discrete Dirichlet energy sum (u_{i+1}-u_i)^2 / h.
double seminorm(const NodalFunction& u);
double v_norm(const NodalFunction& u);
double sup_norm(const NodalFunction& u);
double sup_norm(const DualElement& f);

/// |f|_{V*}, computed as the V-norm of the Riesz representative.
double dual_norm(const DualElement& f, BoundaryCondition bc = BoundaryCondition::Neumann);

/// Discrete constant K of the embedding V -> L^inf: max_i |u_i| <= K |u|_V.
double embedding_constant(const Grid& grid, BoundaryCondition bc = BoundaryCondition::Neumann);

}  // namespace qvix

#include "qvix/grid_fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qvix {

std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Neumann ? "neumann" : "dirichlet";
}

BoundaryCondition parse_boundary_condition(std::string_view name) {
  if (name == "neumann") return BoundaryCondition::Neumann;
  if (name == "dirichlet") return BoundaryCondition::Dirichlet;
  throw InvalidArgument("unknown boundary condition '" + std::string(name) +
                        "' (expected neumann or dirichlet)");
}

Grid::Grid(int n_nodes, double a, double b) : n_nodes_(n_nodes), a_(a), b_(b), h_(0.0) {
  if (n_nodes < 2) throw InvalidArgument("grid needs at least 2 nodes");
  if (!(std::isfinite(a) && std::isfinite(b) && b > a)) {
    throw InvalidArgument("grid interval must satisfy a < b");
  }
  h_ = (b - a) / (n_nodes - 1);
}

double Grid::weight(int i) const {
  return (i == 0 || i == n_nodes_ - 1) ? 0.5 * h_ : h_;
}

Eigen::VectorXd Grid::weights() const {
  Eigen::VectorXd w(n_nodes_);
  for (int i = 0; i < n_nodes_; ++i) w[i] = weight(i);
  return w;
}

Eigen::VectorXd Grid::coordinates() const {
  Eigen::VectorXd xs(n_nodes_);
  for (int i = 0; i < n_nodes_; ++i) xs[i] = x(i);
  return xs;
}

// ---------------------------------------------------------------------------

Tridiagonal::Tridiagonal(int n)
    : lower_(Eigen::VectorXd::Zero(n)),
      diag_(Eigen::VectorXd::Zero(n)),
      upper_(Eigen::VectorXd::Zero(n)) {}

Eigen::VectorXd Tridiagonal::multiply(const Eigen::VectorXd& x) const {
  const int n = size();
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double v = diag_[i] * x[i];
    if (i > 0) v += lower_[i] * x[i - 1];
    if (i + 1 < n) v += upper_[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

Eigen::VectorXd Tridiagonal::solve(const Eigen::VectorXd& rhs) const {
  const int n = size();
  if (rhs.size() != n) throw InvalidArgument("right-hand side has wrong length");
  Eigen::VectorXd c(n);
  Eigen::VectorXd d(n);
  const double scale = diag_.cwiseAbs().maxCoeff() + lower_.cwiseAbs().maxCoeff() +
                       upper_.cwiseAbs().maxCoeff();
  const double tiny = 1e-14 * scale;
  double pivot = diag_[0];
  if (std::abs(pivot) <= tiny) throw SingularSystem("zero pivot at row 0");
  c[0] = upper_[0] / pivot;
  d[0] = rhs[0] / pivot;
  for (int i = 1; i < n; ++i) {
    pivot = diag_[i] - lower_[i] * c[i - 1];
    if (std::abs(pivot) <= tiny) {
      throw SingularSystem("zero pivot at row " + std::to_string(i));
    }
    c[i] = upper_[i] / pivot;
    d[i] = (rhs[i] - lower_[i] * d[i - 1]) / pivot;
  }
  Eigen::VectorXd x(n);
  x[n - 1] = d[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

Eigen::MatrixXd Tridiagonal::dense() const {
  const int n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = diag_[i];
    if (i > 0) m(i, i - 1) = lower_[i];
    if (i + 1 < n) m(i, i + 1) = upper_[i];
  }
  return m;
}

bool Tridiagonal::is_m_matrix() const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const double lo = i > 0 ? lower_[i] : 0.0;
    const double up = i + 1 < n ? upper_[i] : 0.0;
    if (lo > 0.0 || up > 0.0 || diag_[i] <= 0.0) return false;
    // Relative slack for the exact cancellation in Neumann rows.
    if (diag_[i] < -(lo + up) * (1.0 - 1e-14)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

EllipticOperator::EllipticOperator(Grid grid, double c, BoundaryCondition bc, Tridiagonal matrix,
                                   double coercivity, double boundedness)
    : grid_(grid),
      c_(c),
      bc_(bc),
      matrix_(std::move(matrix)),
      coercivity_(coercivity),
      boundedness_(boundedness) {}

EllipticOperator assemble_operator(const Grid& grid, double c, BoundaryCondition bc) {
  const int n = grid.n_nodes();
  if (!(std::isfinite(c) && c >= 0.0)) throw InvalidArgument("reaction coefficient must be >= 0");
  if (bc == BoundaryCondition::Neumann && c == 0.0) {
    throw InvalidArgument("Neumann operator with c = 0 is singular (constants in the kernel)");
  }
  if (bc == BoundaryCondition::Dirichlet && n < 3) {
    throw InvalidArgument("Dirichlet operator needs at least one interior node");
  }

  const double h = grid.h();
  Tridiagonal m(n);
  for (int e = 0; e + 1 < n; ++e) {
    m.diag(e) += 1.0 / h;
    m.diag(e + 1) += 1.0 / h;
    m.upper(e) -= 1.0 / h;
    m.lower(e + 1) -= 1.0 / h;
  }
  for (int i = 0; i < n; ++i) m.diag(i) += c * grid.weight(i);

  // Smallest eigenvalue of M^{-1} K on V; zero for Neumann (constants).
  double kappa_min = 0.0;
  if (bc == BoundaryCondition::Dirichlet) {
    for (int i : {0, n - 1}) {
      m.diag(i) = 1.0;
      m.lower(i) = 0.0;
      m.upper(i) = 0.0;
    }
    m.lower(1) = 0.0;
    m.upper(n - 2) = 0.0;
    kappa_min = (2.0 - 2.0 * std::cos(std::numbers::pi / (n - 1))) / (h * h);
  }
  if (!m.is_m_matrix()) throw Error("assembled operator is not an M-matrix");

  // Rayleigh quotient <Au,u>/|u|_V^2 = (kappa + c)/(kappa + 1) over the
  // spectrum of M^{-1} K; it is bounded by max(1, c) from above.
  const double coercivity = std::min(1.0, (kappa_min + c) / (kappa_min + 1.0));
  const double boundedness = std::max(1.0, c);
  return EllipticOperator(grid, c, bc, std::move(m), coercivity, boundedness);
}

Eigen::VectorXd EllipticOperator::load(const DualElement& f) const {
  if (!(f.grid() == grid_)) throw InvalidArgument("grid mismatch");
  Eigen::VectorXd rhs = f.values().cwiseProduct(grid_.weights());
  if (bc_ == BoundaryCondition::Dirichlet) {
    rhs[0] = 0.0;
    rhs[grid_.n_nodes() - 1] = 0.0;
  }
  return rhs;
}

DualElement EllipticOperator::apply(const NodalFunction& u) const {
  if (!(u.grid() == grid_)) throw InvalidArgument("grid mismatch");
  Eigen::VectorXd r = matrix_.multiply(u.values()).cwiseQuotient(grid_.weights());
  if (bc_ == BoundaryCondition::Dirichlet) {
    r[0] = 0.0;
    r[grid_.n_nodes() - 1] = 0.0;
  }
  return DualElement(grid_, std::move(r));
}

NodalFunction EllipticOperator::solve(const DualElement& f) const {
  return NodalFunction(grid_, matrix_.solve(load(f)));
}

DualElement apply(const EllipticOperator& op, const NodalFunction& u) { return op.apply(u); }

NodalFunction solve_linear(const EllipticOperator& op, const DualElement& f) {
  return op.solve(f);
}

DualElement represent(const NodalFunction& u) { return DualElement(u.grid(), u.values()); }

NodalFunction positive_part(const NodalFunction& u) {
  return NodalFunction(u.grid(), u.values().cwiseMax(0.0));
}

NodalFunction negative_part(const NodalFunction& u) {
  return NodalFunction(u.grid(), (-u.values()).cwiseMax(0.0));
}

bool leq(const NodalFunction& u, const NodalFunction& v, double tol) {
  u.require_same_grid(v);
  return ((u.values() - v.values()).array() <= tol).all();
}

double pairing(const DualElement& f, const NodalFunction& v) {
  if (!(f.grid() == v.grid())) throw InvalidArgument("grid mismatch");
  return (f.values().cwiseProduct(v.values())).dot(f.grid().weights());
}

double h_inner(const NodalFunction& u, const NodalFunction& v) {
  u.require_same_grid(v);
  return u.values().cwiseProduct(v.values()).dot(u.grid().weights());
}

namespace {

double energy_inner(const NodalFunction& u, const NodalFunction& v) {
  const auto& a = u.values();
  const auto& b = v.values();
  double s = 0.0;
  for (int i = 0; i + 1 < u.size(); ++i) s += (a[i + 1] - a[i]) * (b[i + 1] - b[i]);
  return s / u.grid().h();
}

}  // namespace

double v_inner(const NodalFunction& u, const NodalFunction& v) {
  u.require_same_grid(v);
  return h_inner(u, v) + energy_inner(u, v);
}

double h_norm(const NodalFunction& u) { return std::sqrt(h_inner(u, u)); }

double seminorm(const NodalFunction& u) { return std::sqrt(energy_inner(u, u)); }

double v_norm(const NodalFunction& u) { return std::sqrt(v_inner(u, u)); }

double sup_norm(const NodalFunction& u) { return u.values().cwiseAbs().maxCoeff(); }

double sup_norm(const DualElement& f) { return f.values().cwiseAbs().maxCoeff(); }

double dual_norm(const DualElement& f, BoundaryCondition bc) {
  // With c = 1 the operator matrix is exactly the Gram matrix of the V inner product.
  const EllipticOperator riesz = assemble_operator(f.grid(), 1.0, bc);
  return v_norm(riesz.solve(f));
}

double embedding_constant(const Grid& grid, BoundaryCondition bc) {
  // sup_u u_i / |u|_V = sqrt((G^{-1})_{ii}) with G the V Gram matrix.
  const EllipticOperator gram = assemble_operator(grid, 1.0, bc);
  const int n = grid.n_nodes();
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    if (gram.is_pinned(i)) continue;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1.0;
    const Eigen::VectorXd col = gram.matrix().solve(e);
    best = std::max(best, std::sqrt(col[i]));
  }
  return best;
}

}  // namespace qvix

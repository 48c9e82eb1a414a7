#pragma once

// Random QP instances with independent optimal values. Shared by the unit
// tests and the acceptance binary.

#include <random>

#include "oracles.hpp"
#include "taxicbf/qp.hpp"

namespace qp_cases {

struct Case {
  taxicbf::QpProblem qp;
  double oracle_objective = 0.0;
  double grid_bound = oracle::kInf;  // feasible grid-search value, >= optimum
};

// min 1/2|z - z0|^2 over one half-space, solved in closed form.
inline Case projection(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 6);
  std::normal_distribution<double> nd(0.0, 2.0);
  const int n = dim(rng);
  Eigen::VectorXd z0(n), a(n);
  for (int i = 0; i < n; ++i) {
    z0(i) = nd(rng);
    a(i) = nd(rng);
  }
  if (a.norm() < 1e-3) a(0) = 1.0;
  // Shift the boundary so that about half the instances bind.
  const double b = a.dot(z0) + nd(rng);
  Case c;
  c.qp.hessian = Eigen::MatrixXd::Identity(n, n);
  c.qp.linear = -z0;
  c.qp.ineq_matrix = a.transpose();
  c.qp.ineq_lower = Eigen::VectorXd::Constant(1, b);
  const Eigen::VectorXd z = oracle::project_halfspace(z0, a, b);
  c.oracle_objective = 0.5 * z.squaredNorm() - z0.dot(z);
  return c;
}

// Random strictly convex 2-variable QP over a box and up to three
// half-spaces, all containing a common interior point.
inline Case random_2d(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(-3.0, 3.0), slack(0.0, 2.0);
  std::uniform_int_distribution<int> rows(0, 3);
  Eigen::Matrix2d M;
  M << nd(rng), nd(rng), nd(rng), nd(rng);
  const Eigen::Matrix2d H = M * M.transpose() + 0.2 * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d f(4.0 * nd(rng), 4.0 * nd(rng));
  const Eigen::Vector2d lo(-5.0, -5.0), hi(5.0, 5.0);
  const Eigen::Vector2d inside(u(rng), u(rng));
  const int m = rows(rng);
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    Eigen::Vector2d a(nd(rng), nd(rng));
    a.normalize();
    A.row(i) = a.transpose();
    b(i) = a.dot(inside) - slack(rng);
  }
  Case c;
  c.qp.hessian = H;
  c.qp.linear = f;
  c.qp.ineq_matrix = A;
  c.qp.ineq_lower = b;
  c.qp.lower = lo;
  c.qp.upper = hi;
  c.oracle_objective = oracle::boundary_search_qp_2d(H, f, A, b, lo, hi);
  c.grid_bound = oracle::grid_search_qp_2d(H, f, A, b, lo, hi);
  return c;
}

}  // namespace qp_cases

#include "taxicbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace taxicbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flattened view of every inequality as n_i' z >= b_i.
struct RowSet {
  std::vector<QpRowRef> refs;
  std::vector<double> rhs;
  const QpProblem* qp = nullptr;

  // n_i' v
  double dot(int i, const Eigen::VectorXd& v) const {
    const QpRowRef& r = refs[i];
    switch (r.kind) {
      case QpRowRef::Kind::kGeneral:
        return qp->ineq_matrix.row(r.index).dot(v);
      case QpRowRef::Kind::kLower:
        return v(r.index);
      case QpRowRef::Kind::kUpper:
        return -v(r.index);
    }
    return 0.0;
  }

  // J' n_i
  Eigen::VectorXd project(int i, const Eigen::MatrixXd& J) const {
    const QpRowRef& r = refs[i];
    switch (r.kind) {
      case QpRowRef::Kind::kGeneral:
        return J.transpose() * qp->ineq_matrix.row(r.index).transpose();
      case QpRowRef::Kind::kLower:
        return J.row(r.index).transpose();
      case QpRowRef::Kind::kUpper:
        return -J.row(r.index).transpose();
    }
    return {};
  }

  void add_scaled(int i, double scale, Eigen::VectorXd& out) const {
    const QpRowRef& r = refs[i];
    switch (r.kind) {
      case QpRowRef::Kind::kGeneral:
        out += scale * qp->ineq_matrix.row(r.index).transpose();
        break;
      case QpRowRef::Kind::kLower:
        out(r.index) += scale;
        break;
      case QpRowRef::Kind::kUpper:
        out(r.index) -= scale;
        break;
    }
  }
};

RowSet flatten(const QpProblem& qp) {
  RowSet rows;
  rows.qp = &qp;
  for (int i = 0; i < qp.rows(); ++i) {
    rows.refs.push_back({QpRowRef::Kind::kGeneral, i});
    rows.rhs.push_back(qp.ineq_lower(i));
  }
  if (qp.lower.size() > 0) {
    for (int i = 0; i < qp.dim(); ++i) {
      if (std::isfinite(qp.lower(i))) {
        rows.refs.push_back({QpRowRef::Kind::kLower, i});
        rows.rhs.push_back(qp.lower(i));
      }
    }
  }
  if (qp.upper.size() > 0) {
    for (int i = 0; i < qp.dim(); ++i) {
      if (std::isfinite(qp.upper(i))) {
        rows.refs.push_back({QpRowRef::Kind::kUpper, i});
        rows.rhs.push_back(-qp.upper(i));
      }
    }
  }
  return rows;
}

// Givens rotation zeroing b in (a, b).
struct Givens {
  double c = 1.0;
  double s = 0.0;
  double h = 0.0;
};

Givens givens(double a, double b) {
  const double h = std::hypot(a, b);
  if (h == 0.0) return {1.0, 0.0, 0.0};
  return {a / h, b / h, h};
}

// Applies (c, s) to columns (j, k) of J: J_j <- c J_j + s J_k, J_k <- -s J_j + c J_k.
void rotate_columns(Eigen::MatrixXd& J, int j, int k, const Givens& g) {
  for (Eigen::Index r = 0; r < J.rows(); ++r) {
    const double a = J(r, j);
    const double b = J(r, k);
    J(r, j) = g.c * a + g.s * b;
    J(r, k) = -g.s * a + g.c * b;
  }
}

}  // namespace

std::string QpRowRef::describe() const {
  switch (kind) {
    case Kind::kGeneral:
      return "row " + std::to_string(index);
    case Kind::kLower:
      return "lower bound on z[" + std::to_string(index) + "]";
    case Kind::kUpper:
      return "upper bound on z[" + std::to_string(index) + "]";
  }
  return "row";
}

void validate(const QpProblem& qp) {
  const Eigen::Index k = qp.linear.size();
  if (k == 0) throw ValidationError("qp: empty problem");
  if (qp.hessian.rows() != k || qp.hessian.cols() != k) throw ValidationError("qp: H must be k x k");
  if (qp.ineq_matrix.rows() != qp.ineq_lower.size() ||
      (qp.ineq_matrix.rows() > 0 && qp.ineq_matrix.cols() != k)) {
    throw ValidationError("qp: inequality rows must be m x k with m right-hand sides");
  }
  if ((qp.lower.size() != 0 && qp.lower.size() != k) || (qp.upper.size() != 0 && qp.upper.size() != k)) {
    throw ValidationError("qp: bounds must have k entries");
  }
  if (!qp.hessian.allFinite() || !qp.linear.allFinite() || !qp.ineq_matrix.allFinite() ||
      !qp.ineq_lower.allFinite()) {
    throw ValidationError("qp: non-finite problem data");
  }
  const double scale = std::max(1.0, qp.hessian.cwiseAbs().maxCoeff());
  if ((qp.hessian - qp.hessian.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ValidationError("qp: H is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qp.hessian, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < 1e-9) {
    throw ValidationError("qp: H is not positive definite (min eigenvalue " +
                          std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }
}

double qp_objective(const QpProblem& qp, const Eigen::VectorXd& z) {
  return 0.5 * z.dot(qp.hessian * z) + qp.linear.dot(z);
}

QpSolution solve_qp(const QpProblem& qp) {
  validate(qp);
  const int n = qp.dim();
  for (int i = 0; i < n && qp.lower.size() > 0 && qp.upper.size() > 0; ++i) {
    if (qp.lower(i) > qp.upper(i)) {
      throw QpInfeasibleError({{QpRowRef::Kind::kLower, i}, {QpRowRef::Kind::kUpper, i}},
                              "qp: lower bound exceeds upper bound on z[" + std::to_string(i) + "]");
    }
  }
  const RowSet rows = flatten(qp);
  const int total = static_cast<int>(rows.refs.size());

  Eigen::LLT<Eigen::MatrixXd> llt(qp.hessian);
  if (llt.info() != Eigen::Success) throw ValidationError("qp: Cholesky factorization failed");
  // J = L^{-T}, so J J' = H^{-1}.
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  llt.matrixU().solveInPlace(J);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);

  Eigen::VectorXd z = -(J * (J.transpose() * qp.linear));
  std::vector<int> active;    // indices into rows
  std::vector<double> mult;   // multipliers of active rows
  std::vector<bool> is_active(total, false);

  const double scale = 1.0 + qp.linear.cwiseAbs().maxCoeff() + qp.hessian.cwiseAbs().maxCoeff();
  const double feas_tol = 1e-11 * scale;
  const int max_iter = 50 * (n + total) + 100;
  int iterations = 0;

  auto drop = [&](int l) {
    const int q = static_cast<int>(active.size());
    for (int j = l; j + 1 < q; ++j) R.col(j) = R.col(j + 1);
    R.col(q - 1).setZero();
    for (int j = l; j + 1 < q; ++j) {
      const Givens g = givens(R(j, j), R(j + 1, j));
      for (int c = j; c + 1 < q; ++c) {
        const double a = R(j, c);
        const double b = R(j + 1, c);
        R(j, c) = g.c * a + g.s * b;
        R(j + 1, c) = -g.s * a + g.c * b;
      }
      rotate_columns(J, j, j + 1, g);
    }
    is_active[active[l]] = false;
    active.erase(active.begin() + l);
    mult.erase(mult.begin() + l);
  };

  while (true) {
    int p = -1;
    double worst = -feas_tol;
    for (int i = 0; i < total; ++i) {
      if (is_active[i]) continue;
      const double s = rows.dot(i, z) - rows.rhs[i];
      const double tol = feas_tol * (1.0 + std::abs(rows.rhs[i]));
      if (s < -tol && s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) break;

    double u_new = 0.0;
    while (true) {
      if (++iterations > max_iter) throw NumericError("qp: iteration limit reached");
      const int q = static_cast<int>(active.size());
      Eigen::VectorXd d = rows.project(p, J);
      Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
      for (int j = q; j < n; ++j) step += d(j) * J.col(j);
      Eigen::VectorXd r(q);
      if (q > 0) {
        r = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
      }

      double t1 = kInf;
      int l = -1;
      for (int j = 0; j < q; ++j) {
        if (r(j) > 0.0) {
          const double ratio = mult[j] / r(j);
          if (ratio < t1) {
            t1 = ratio;
            l = j;
          }
        }
      }
      const double slack = rows.dot(p, z) - rows.rhs[p];
      const double curvature = rows.dot(p, step);
      double t2 = kInf;
      if (step.norm() > 1e-12 * (1.0 + d.norm()) && curvature > 0.0) t2 = -slack / curvature;

      if (!std::isfinite(t1) && !std::isfinite(t2)) {
        std::vector<QpRowRef> conflict{rows.refs[p]};
        for (int j = 0; j < q; ++j) {
          if (r(j) < 0.0) conflict.push_back(rows.refs[active[j]]);
        }
        std::string msg = "qp: infeasible constraints:";
        for (const auto& c : conflict) msg += " [" + c.describe() + "]";
        throw QpInfeasibleError(std::move(conflict), msg);
      }

      if (!std::isfinite(t2)) {
        // Dual step only.
        for (int j = 0; j < q; ++j) mult[j] -= t1 * r(j);
        u_new += t1;
        drop(l);
        continue;
      }

      const double t = std::min(t1, t2);
      z += t * step;
      for (int j = 0; j < q; ++j) mult[j] -= t * r(j);
      u_new += t;
      if (t2 <= t1) {
        // Full step: p becomes active.
        for (int j = n - 1; j > q; --j) {
          const Givens g = givens(d(j - 1), d(j));
          if (g.s == 0.0) continue;
          d(j - 1) = g.h;
          d(j) = 0.0;
          rotate_columns(J, j - 1, j, g);
        }
        R.col(q).head(q + 1) = d.head(q + 1);
        active.push_back(p);
        mult.push_back(u_new);
        is_active[p] = true;
        break;
      }
      drop(l);
    }
  }

  QpSolution sol;
  sol.z = z;
  sol.iterations = iterations;
  sol.objective = qp_objective(qp, z);
  sol.ineq_multipliers = Eigen::VectorXd::Zero(qp.rows());
  sol.lower_multipliers = Eigen::VectorXd::Zero(n);
  sol.upper_multipliers = Eigen::VectorXd::Zero(n);
  for (std::size_t j = 0; j < active.size(); ++j) {
    const QpRowRef& ref = rows.refs[active[j]];
    sol.active.push_back(ref);
    const double m = std::max(0.0, mult[j]);
    switch (ref.kind) {
      case QpRowRef::Kind::kGeneral:
        sol.ineq_multipliers(ref.index) = m;
        break;
      case QpRowRef::Kind::kLower:
        sol.lower_multipliers(ref.index) = m;
        break;
      case QpRowRef::Kind::kUpper:
        sol.upper_multipliers(ref.index) = m;
        break;
    }
  }
  return sol;
}

double kkt_residual(const QpProblem& qp, const QpSolution& sol) {
  const Eigen::VectorXd& z = sol.z;
  Eigen::VectorXd grad = qp.hessian * z + qp.linear;
  double worst = 0.0;
  for (int i = 0; i < qp.rows(); ++i) {
    const double lambda = sol.ineq_multipliers(i);
    const double s = qp.ineq_matrix.row(i).dot(z) - qp.ineq_lower(i);
    grad -= lambda * qp.ineq_matrix.row(i).transpose();
    worst = std::max({worst, -s, -lambda, std::abs(lambda * s)});
  }
  for (int i = 0; i < qp.dim(); ++i) {
    if (qp.lower.size() > 0 && std::isfinite(qp.lower(i))) {
      const double lambda = sol.lower_multipliers(i);
      const double s = z(i) - qp.lower(i);
      grad(i) -= lambda;
      worst = std::max({worst, -s, -lambda, std::abs(lambda * s)});
    }
    if (qp.upper.size() > 0 && std::isfinite(qp.upper(i))) {
      const double lambda = sol.upper_multipliers(i);
      const double s = qp.upper(i) - z(i);
      grad(i) += lambda;
      worst = std::max({worst, -s, -lambda, std::abs(lambda * s)});
    }
  }
  return std::max(worst, grad.cwiseAbs().maxCoeff());
}

}  // namespace taxicbf

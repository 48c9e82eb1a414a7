#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "taxicbf/error.hpp"

namespace taxicbf {

// minimize 1/2 z'Hz + f'z  s.t.  A z >= b,  lower <= z <= upper.
// Infinite bounds are ignored.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd ineq_matrix;  // m x k, may have zero rows
  Eigen::VectorXd ineq_lower;   // m
  Eigen::VectorXd lower;        // k, or empty for -inf
  Eigen::VectorXd upper;        // k, or empty for +inf

  int dim() const { return static_cast<int>(linear.size()); }
  int rows() const { return static_cast<int>(ineq_lower.size()); }
};

// Identifies one inequality: a general row or a bound on one variable.
struct QpRowRef {
  enum class Kind { kGeneral, kLower, kUpper };
  Kind kind = Kind::kGeneral;
  int index = 0;

  std::string describe() const;
  bool operator==(const QpRowRef&) const = default;
};

struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd ineq_multipliers;   // m, >= 0
  Eigen::VectorXd lower_multipliers;  // k, >= 0
  Eigen::VectorXd upper_multipliers;  // k, >= 0
  double objective = 0.0;
  int iterations = 0;
  std::vector<QpRowRef> active;
};

class QpInfeasibleError : public Error {
 public:
  QpInfeasibleError(std::vector<QpRowRef> conflict, const std::string& message)
      : Error(ErrorKind::kQpInfeasible, message), conflict_(std::move(conflict)) {}

  // Rows that cannot hold simultaneously.
  const std::vector<QpRowRef>& conflicting_rows() const { return conflict_; }

 private:
  std::vector<QpRowRef> conflict_;
};

// Throws ValidationError when H is not symmetric positive definite (minimum
// eigenvalue below 1e-9) or the dimensions disagree.
void validate(const QpProblem& qp);

// Dense dual active-set solver (Goldfarb-Idnani). Throws QpInfeasibleError
// with the conflicting rows when no feasible point exists.
QpSolution solve_qp(const QpProblem& qp);

// Largest violation among stationarity, primal feasibility, dual feasibility
// and complementarity.
double kkt_residual(const QpProblem& qp, const QpSolution& sol);

double qp_objective(const QpProblem& qp, const Eigen::VectorXd& z);

}  // namespace taxicbf

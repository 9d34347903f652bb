#pragma once

// Sparse nonlinear program
//
//   min f(x)  s.t.  c_lo ≤ c(x) ≤ c_hi,  x_lo ≤ x ≤ x_hi
//
// given by callbacks. Rows with c_lo = c_hi are equalities; variables with
// x_lo = x_hi are fixed. Jacobian and Hessian values are returned in the
// order of their (row, col) patterns; repeated entries are summed. The
// Hessian pattern covers the lower triangle (row ≥ col) of
// ∇²(σ f + Σ λ_i c_i).

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace morphco::trajopt {

inline constexpr double kInfinity = 1e20;

struct NlpProblem {
  int n = 0;
  int m = 0;
  Eigen::VectorXd x_lower, x_upper;
  Eigen::VectorXd c_lower, c_upper;
  std::vector<int> jac_rows, jac_cols;
  std::vector<int> hess_rows, hess_cols;

  std::function<double(const Eigen::VectorXd& x)> objective;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& grad)> gradient;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& c)> constraints;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& values)> jacobian;
  std::function<void(const Eigen::VectorXd& x, double sigma, const Eigen::VectorXd& lambda,
                     Eigen::VectorXd& values)>
      hessian;
  // Optional label of a constraint row, used in diagnostics.
  std::function<std::string(int row)> row_label;

  // Keeps whatever the callbacks capture alive.
  std::shared_ptr<const void> owner;

  // Sizes, bound ordering and pattern indices; throws Error.
  void validate() const;
  std::string label(int row) const;
};

// Largest bound violation of x and c(x) (zero when feasible).
double max_violation(const NlpProblem& problem, const Eigen::VectorXd& x);

struct DerivativeReport {
  double max_jacobian_error = 0.0;  // max |a − fd| / max(1, |fd|)
  int worst_row = -1, worst_col = -1;
  double max_gradient_error = 0.0;
  int worst_gradient_col = -1;
  // Finite-difference entries above 1e-8 outside the declared pattern.
  int missing_entries = 0;
};

// Compares the callback Jacobian and gradient with central differences.
DerivativeReport derivative_check(const NlpProblem& problem, const Eigen::VectorXd& x,
                                  double h = 1e-6);

}  // namespace morphco::trajopt

#pragma once

// Lasso regression by cyclic coordinate descent.
//
// Columns of X are z-scored and y is centered; the solver minimizes
//   ½‖y_c − Z w‖² + λ‖w‖₁
// over the standardized weights w. Results are mapped back to raw-scale
// weights plus an intercept. Constant columns are excluded from the
// regression and absorbed by the intercept.

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace morphco::aero {

struct LassoOptions {
  double tolerance = 1e-8;  // max coordinate step per sweep (standardized units)
  int max_sweeps = 100000;
  bool record_objective = false;
};

struct LassoResult {
  Eigen::VectorXd weights;               // raw scale
  double intercept = 0.0;
  Eigen::VectorXd standardized_weights;  // solver variables
  int sweeps = 0;
  bool converged = false;
  bool rank_deficient = false;           // λ = 0 only
  std::vector<double> objective;         // after every sweep, when recorded
};

class LassoProblem {
 public:
  explicit LassoProblem(const Eigen::MatrixXd& x);

  int rows() const { return static_cast<int>(z_.rows()); }
  int features() const { return static_cast<int>(z_.cols()); }
  const Eigen::MatrixXd& standardized() const { return z_; }
  const Eigen::VectorXd& means() const { return mean_; }
  const Eigen::VectorXd& scales() const { return scale_; }
  // False for constant columns.
  bool varies(int j) const { return varies_[j]; }

  // Sets the response and the columns the model may use (empty = all).
  void set_response(const Eigen::VectorXd& y, const std::vector<char>& allowed = {});
  const Eigen::VectorXd& centered_response() const { return yc_; }
  const Eigen::VectorXd& correlations() const { return c_; }

  // Smallest λ for which the all-zero solution is optimal: ‖Zᵀ y_c‖∞.
  double lambda_max() const;
  double objective(const Eigen::VectorXd& standardized_weights, double lambda) const;

  LassoResult solve(double lambda, const LassoOptions& options = {},
                    const Eigen::VectorXd* warm_start = nullptr) const;

 private:
  LassoResult finish(Eigen::VectorXd w) const;
  LassoResult solve_least_squares() const;

  Eigen::MatrixXd z_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd mean_, scale_;
  std::vector<char> varies_;
  std::vector<char> allowed_;
  Eigen::VectorXd yc_, c_;
  double ymean_ = 0.0;
};

// Convenience wrapper for a single fit.
LassoResult lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      const LassoOptions& options = {});
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct CrossValidationOptions {
  int folds = 5;
  int path_length = 25;
  double min_ratio = 1e-4;       // smallest λ on the path relative to λ_max
  bool one_standard_error = true;
  std::uint64_t seed = 0;
  LassoOptions lasso;
};

struct CrossValidationResult {
  double lambda = 0.0;
  std::vector<double> path;
  std::vector<double> error;      // mean held-out MSE per λ
  std::vector<double> std_error;  // standard error of that mean
};

// K-fold cross-validation over a geometric λ path, one result per column of Y.
// masks[r] restricts the columns available for response r (empty = all).
std::vector<CrossValidationResult> lasso_cross_validate(
    const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const std::vector<std::vector<char>>& masks,
    const CrossValidationOptions& options = {});

}  // namespace morphco::aero

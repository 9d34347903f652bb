#pragma once

// Solvers for NlpProblem. InteriorPointSolver is a primal-dual barrier method
// (slack reformulation of inequality rows, inertia-corrected sparse LDLᵀ
// steps, filter line search, Levenberg-Marquardt feasibility restoration).
// Other solvers plug in behind NlpSolver.

#include "morphco/trajopt/nlp.hpp"

#include <string>
#include <vector>

namespace morphco::trajopt {

enum class SolverStatus { Solved, Infeasible, MaxIterations, NumericFailure };

std::string to_string(SolverStatus status);

struct SolverOptions {
  double tolerance = 1e-4;             // scaled stationarity and complementarity
  double constraint_tolerance = 1e-4;  // max violation of the original rows
  int max_iterations = 500;
  int max_restoration_iterations = 200;
  double mu_init = 0.1;
  double bound_push = 1e-2;
  bool scaling = true;     // gradient-based objective and row scaling
  bool verbose = false;    // per-iteration debug log
};

struct SolverStats {
  int iterations = 0;
  int restoration_iterations = 0;
  int function_evaluations = 0;
  int hessian_evaluations = 0;
  int factorizations = 0;
  double final_mu = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
  double seconds = 0.0;
  std::vector<double> mu_history;  // barrier parameter per iteration
};

struct SolverResult {
  SolverStatus status = SolverStatus::NumericFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // constraint multipliers of the unscaled problem
  double objective = 0.0;
  double max_violation = 0.0;
  SolverStats stats;
  std::string message;
  int failed_row = -1;  // first non-finite row on numeric failure
};

class NlpSolver {
 public:
  virtual ~NlpSolver() = default;
  virtual std::string name() const = 0;
  virtual SolverResult solve(const NlpProblem& problem, const Eigen::VectorXd& x0) const = 0;
};

class InteriorPointSolver : public NlpSolver {
 public:
  explicit InteriorPointSolver(SolverOptions options = {}) : options_(options) {}
  std::string name() const override { return "interior-point"; }
  SolverResult solve(const NlpProblem& problem, const Eigen::VectorXd& x0) const override;
  const SolverOptions& options() const { return options_; }

 private:
  SolverOptions options_;
};

}  // namespace morphco::trajopt

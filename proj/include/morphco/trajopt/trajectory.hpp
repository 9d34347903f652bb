#pragma once

// Solving a scenario end to end and reporting the result.

#include "morphco/trajopt/solver.hpp"
#include "morphco/trajopt/transcription.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace morphco::trajopt {

struct TrajectoryOptions {
  SolverOptions solver;
  int knots = 0;  // 0: the scenario's own knot count
  // A run that stops at the iteration limit still counts as feasible when its
  // violation is below this.
  double feasibility_tolerance = 1e-3;
};

struct TrajectorySolution {
  std::string scenario;
  std::vector<Knot> knots;
  SolverStatus status = SolverStatus::NumericFailure;
  double max_violation = 0.0;
  double time = 0.0;       // Σ Δt [s]
  double energy = 0.0;     // [J]
  double objective = 0.0;  // solver objective, ψ·time + energy
  SolverStats stats;
  std::string message;
  int failed_knot = -1;  // knot of the first non-finite row on numeric failure
  double feasibility_tolerance = 1e-3;

  // Solved, or stopped at the iteration limit within the feasibility tolerance.
  bool feasible() const;
};

TrajectorySolution solve_trajectory(const platform::DroneModel& model, const Scenario& scenario,
                                    const TrajectoryOptions& options = {});

// Solves a prepared transcription from `guess` with `solver`.
TrajectorySolution solve_transcription(const Transcription& transcription, const platform::DroneModel& model,
                                       const NlpSolver& solver, const Eigen::VectorXd& guess,
                                       double feasibility_tolerance = 1e-3);

// One line per knot: k,dt,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz,s...,sd...,tau...,u
void write_solution_csv(std::ostream& out, const TrajectorySolution& solution);
// YAML summary: status, energy, time, violation, solver statistics.
std::string solution_summary(const TrajectorySolution& solution);

}  // namespace morphco::trajopt

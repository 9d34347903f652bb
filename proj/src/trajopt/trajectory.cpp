#include "morphco/trajopt/trajectory.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <ostream>

namespace morphco::trajopt {

bool TrajectorySolution::feasible() const {
  if (status == SolverStatus::Solved) return true;
  return status == SolverStatus::MaxIterations && max_violation <= feasibility_tolerance;
}

TrajectorySolution solve_transcription(const Transcription& tr, const platform::DroneModel& model,
                                       const NlpSolver& solver, const Eigen::VectorXd& guess,
                                       double feasibility_tolerance) {
  const SolverResult r = solver.solve(tr.problem(), guess);
  TrajectorySolution out;
  out.status = r.status;
  out.max_violation = r.max_violation;
  out.objective = r.objective;
  out.stats = r.stats;
  out.message = r.message;
  out.feasibility_tolerance = feasibility_tolerance;
  if (r.failed_row >= 0) {
    if (const RowGroup* g = tr.group_of(r.failed_row)) out.failed_knot = g->knot;
  }
  if (r.x.size() == tr.problem().n) {
    out.knots = tr.decode(r.x);
    const Metrics metrics = evaluate_metrics(out.knots, model);
    out.energy = metrics.energy;
    out.time = metrics.time;
  }
  return out;
}

TrajectorySolution solve_trajectory(const platform::DroneModel& model, const Scenario& scenario,
                                    const TrajectoryOptions& options) {
  const int knots = options.knots > 0 ? options.knots : scenario.knots;
  const Transcription tr(model, scenario, knots);
  const InteriorPointSolver solver(options.solver);
  TrajectorySolution out =
      solve_transcription(tr, model, solver, tr.initial_guess(), options.feasibility_tolerance);
  out.scenario = scenario.name;
  return out;
}

void write_solution_csv(std::ostream& out, const TrajectorySolution& sol) {
  const int nj = sol.knots.empty() ? 0 : static_cast<int>(sol.knots.front().s.size());
  out << "k,dt,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz";
  for (const char* name : {"s", "sd", "tau"})
    for (int j = 0; j < nj; ++j) out << ',' << name << j;
  out << ",u\n";
  for (size_t k = 0; k < sol.knots.size(); ++k) {
    const Knot& kn = sol.knots[k];
    out << k << ',' << fmt::format("{:.9g}", kn.dt);
    auto put = [&](const Eigen::VectorXd& v) {
      for (int i = 0; i < v.size(); ++i) out << ',' << fmt::format("{:.9g}", v[i]);
    };
    put(kn.p);
    put(kn.q);
    put(kn.v);
    put(kn.w);
    put(kn.s);
    put(kn.sd);
    put(kn.tau);
    out << ',' << fmt::format("{:.9g}", kn.u) << '\n';
  }
}

std::string solution_summary(const TrajectorySolution& sol) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << sol.scenario;
  e << YAML::Key << "status" << YAML::Value << to_string(sol.status);
  e << YAML::Key << "feasible" << YAML::Value << sol.feasible();
  e << YAML::Key << "energy_J" << YAML::Value << sol.energy;
  e << YAML::Key << "time_s" << YAML::Value << sol.time;
  e << YAML::Key << "objective" << YAML::Value << sol.objective;
  e << YAML::Key << "max_violation" << YAML::Value << sol.max_violation;
  e << YAML::Key << "message" << YAML::Value << sol.message;
  if (sol.failed_knot >= 0) e << YAML::Key << "failed_knot" << YAML::Value << sol.failed_knot;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "iterations" << YAML::Value << sol.stats.iterations;
  e << YAML::Key << "restoration_iterations" << YAML::Value << sol.stats.restoration_iterations;
  e << YAML::Key << "function_evaluations" << YAML::Value << sol.stats.function_evaluations;
  e << YAML::Key << "final_mu" << YAML::Value << sol.stats.final_mu;
  e << YAML::Key << "stationarity" << YAML::Value << sol.stats.stationarity;
  e << YAML::Key << "seconds" << YAML::Value << sol.stats.seconds;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace morphco::trajopt

#include "morphco/codesign/fitness.hpp"

#include "morphco/codesign/nsga2.hpp"
#include "morphco/platform/drone.hpp"

#include <spdlog/spdlog.h>

namespace morphco::codesign {

bool Fitness::all_feasible() const {
  for (const auto& s : scenarios)
    if (!s.feasible) return false;
  return !scenarios.empty();
}

Fitness combine(std::vector<ScenarioOutcome> outcomes) {
  if (outcomes.empty()) throw ContractError("fitness needs at least one scenario");
  Fitness f;
  for (const auto& o : outcomes) {
    f.energy += o.feasible ? o.energy : kInfeasiblePenalty;
    f.time += o.feasible ? o.time : kInfeasiblePenalty;
  }
  const double n = static_cast<double>(outcomes.size());
  f.energy /= n;
  f.time /= n;
  f.scenarios = std::move(outcomes);
  return f;
}

ScenarioOutcome fly(const platform::DroneModel& model, const trajopt::Scenario& scenario,
                    const trajopt::TrajectoryOptions& options) {
  ScenarioOutcome out;
  out.scenario = scenario.name;
  auto sol = std::make_shared<trajopt::TrajectorySolution>(trajopt::solve_trajectory(model, scenario, options));
  out.feasible = sol->feasible();
  out.energy = sol->energy;
  out.time = sol->time;
  out.status = trajopt::to_string(sol->status);
  out.solution = std::move(sol);
  return out;
}

ScenarioOutcome evaluate_scenario(const platform::DesignParams& design, const trajopt::Scenario& scenario,
                                  const FitnessContext& context) {
  ScenarioOutcome out;
  out.scenario = scenario.name;
  try {
    const platform::DroneModel model =
        platform::assemble_drone(design, *context.catalog, *context.library, context.materials);
    out = fly(model, scenario, context.trajectory);
  } catch (const std::exception& e) {
    spdlog::warn("{} on {}: {}", design.name, scenario.name, e.what());
    out.feasible = false;
    out.status = std::string("error: ") + e.what();
  }
  spdlog::debug("{} on {}: {} energy {:.4g} J time {:.4g} s", design.name, scenario.name, out.status, out.energy,
                out.time);
  return out;
}

Fitness evaluate_fitness(const Chromosome& chromosome, const ChromosomeSpace& space, const FitnessContext& context) {
  const platform::DesignParams design = space.decode(chromosome);
  std::vector<ScenarioOutcome> outcomes;
  for (const auto& s : context.scenarios) outcomes.push_back(evaluate_scenario(design, s, context));
  return combine(std::move(outcomes));
}

SearchProblem make_search_problem(const ChromosomeSpace& space, const FitnessContext& context) {
  SearchProblem p;
  p.gene_sizes = space.sizes();
  p.tasks = static_cast<int>(context.scenarios.size());
  p.canonical = [&space](const Chromosome& c) { return space.canonical(c); };
  p.evaluate = [&space, &context](const Chromosome& c, int task) {
    return evaluate_scenario(space.decode(c), context.scenarios.at(task), context);
  };
  return p;
}

}  // namespace morphco::codesign

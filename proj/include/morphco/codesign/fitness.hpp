#pragma once

// Fitness of a design: mean energy J₁ [J] and mean time J₂ [s] over the
// scenarios, with a penalty value standing in for both metrics of every
// scenario the trajectory optimizer cannot fly.

#include "morphco/codesign/chromosome.hpp"
#include "morphco/trajopt/trajectory.hpp"

#include <memory>
#include <string>
#include <vector>

namespace morphco::aero {
class AeroLibrary;
}

namespace morphco::codesign {

inline constexpr double kInfeasiblePenalty = 1e6;

struct ScenarioOutcome {
  std::string scenario;
  bool feasible = false;
  double energy = 0.0;  // [J]
  double time = 0.0;    // [s]
  std::string status;   // solver status, or the error that stopped evaluation
  std::shared_ptr<const trajopt::TrajectorySolution> solution;  // null when none was computed
};

struct Fitness {
  double energy = 0.0;  // J₁
  double time = 0.0;    // J₂
  std::vector<ScenarioOutcome> scenarios;

  bool all_feasible() const;
};

// Means over the outcomes, substituting kInfeasiblePenalty for the energy and
// time of each infeasible one.
Fitness combine(std::vector<ScenarioOutcome> outcomes);

// Everything needed to fly a design through the scenarios.
struct FitnessContext {
  const actuation::ComponentCatalog* catalog = nullptr;
  const aero::AeroLibrary* library = nullptr;
  platform::Materials materials;
  std::vector<trajopt::Scenario> scenarios;
  trajopt::TrajectoryOptions trajectory;
};

// One trajectory optimization of an assembled model.
ScenarioOutcome fly(const platform::DroneModel& model, const trajopt::Scenario& scenario,
                    const trajopt::TrajectoryOptions& options);

// One trajectory optimization. Assembly and transcription errors give an
// infeasible outcome that records the error.
ScenarioOutcome evaluate_scenario(const platform::DesignParams& design, const trajopt::Scenario& scenario,
                                  const FitnessContext& context);

Fitness evaluate_fitness(const Chromosome& chromosome, const ChromosomeSpace& space, const FitnessContext& context);

struct SearchProblem;
// Search problem with one task per scenario. `space` and `context` must
// outlive the returned problem.
SearchProblem make_search_problem(const ChromosomeSpace& space, const FitnessContext& context);

}  // namespace morphco::codesign

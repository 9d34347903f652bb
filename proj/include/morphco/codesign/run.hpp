#pragma once

// Co-design run configuration (YAML, schema morphco.codesign/1) and the
// files a run writes: pareto.csv, generations.csv and per-member exports.

#include "morphco/aero/library.hpp"
#include "morphco/codesign/nsga2.hpp"
#include "morphco/common/yaml_util.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace morphco::codesign {

struct RunConfig {
  Nsga2Config nsga;
  std::vector<std::string> scenarios;  // resolved paths
  std::string catalog;                 // empty: caller's default
  std::string materials;               // empty: built-in defaults
  std::string aero = "synthetic";      // "synthetic" or a directory of fitted models
  trajopt::TrajectoryOptions trajectory;
  std::string source;
};

// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::string& source, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

// "synthetic" gives aero::desk_library(); anything else is a model directory.
aero::AeroLibrary load_aero_library(const std::string& spec);

// Trajectory options from a `trajopt` map: max_iterations,
// max_restoration_iterations, tolerance, constraint_tolerance,
// feasibility_tolerance, knots. Used by several command configs.
trajopt::TrajectoryOptions parse_trajectory_options(const yaml::Reader& r);

// id,<gene columns>,joints,J1_energy_J,J2_time_s,feasible_scenarios
void write_pareto_csv(std::ostream& out, const std::vector<Individual>& members, const ChromosomeSpace& space);
// generation,evaluations,cache_hits,front_size,feasible,hypervolume,best_energy_J,best_time_s
void write_generation_header(std::ostream& out);
void write_generation_row(std::ostream& out, const GenerationStats& stats);

// Joint chain of a design as "sweep+incidence", or "fixed".
std::string chain_label(const platform::DesignParams& design);

}  // namespace morphco::codesign

#pragma once

// Parametric validation sweep: every design flies a two-leg scenario for
// each point of a (d, γ, r, v_x, θ_p) grid. The first leg ends at a gate at
// (d/2, (d/2)·tan γ, 0), the second at (d, 0, 0); for r > 0 a sphere of
// radius r sits at the midpoint of each leg. Energy and time are reported
// per metre of d.

#include "morphco/codesign/fitness.hpp"
#include "morphco/common/yaml_util.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace morphco::cli {

struct ValidationPoint {
  double distance = 0.0;   // d [m]
  double gamma_deg = 0.0;  // γ
  double radius = 0.0;     // r [m]
  double speed = 0.0;      // v_x [m/s]
  double pitch_deg = 0.0;  // θ_p
};

struct ValidationGrid {
  std::vector<double> distance, gamma_deg, radius, speed, pitch_deg;
  int knots = 10;
  double gate_radius = 0.5;
  double target_radius = 0.5;
  std::optional<double> dt_max;  // default 2·d / (v_x·(knots − 1))

  // Grid points, d varying slowest and θ_p fastest.
  std::vector<ValidationPoint> points() const;
  void validate() const;
};

trajopt::Scenario validation_scenario(const ValidationPoint& point, const ValidationGrid& grid);

struct ValidationConfig {
  std::vector<std::string> designs;  // resolved paths
  ValidationGrid grid;
  std::string catalog, materials;
  std::string aero = "synthetic";
  trajopt::TrajectoryOptions trajectory;
  int workers = 1;
};

// Schema morphco.validation/1. Relative paths resolve against `base_dir`.
ValidationConfig parse_validation_config(const std::string& text, const std::string& source,
                                         const std::string& base_dir);
ValidationConfig load_validation_config(const std::string& path);

struct ValidationRow {
  std::string design;
  ValidationPoint point;
  std::string status;  // solver status, or "error"
  bool feasible = false;
  double energy = 0.0, time = 0.0, max_violation = 0.0;
  int iterations = 0;
  int obstacle_rows = 0;
  std::string error;

  double energy_per_distance() const { return energy / point.distance; }
  double time_per_distance() const { return time / point.distance; }
};

// One row per (design, grid point), designs outermost. Failures of single
// points are recorded in their rows.
std::vector<ValidationRow> run_validation(const std::vector<platform::DesignParams>& designs,
                                          const ValidationGrid& grid, const codesign::FitnessContext& context,
                                          int workers);

void write_validation_csv(std::ostream& out, const std::vector<ValidationRow>& rows);
// Wide table: grid columns then one column per design, holding energy/d
// (or time/d when `time` is set).
void write_normalized_table(std::ostream& out, const std::vector<ValidationRow>& rows,
                            const std::vector<std::string>& designs, bool time);

}  // namespace morphco::cli

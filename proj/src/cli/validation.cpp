#include "morphco/cli/validation.hpp"

#include "morphco/codesign/nsga2.hpp"
#include "morphco/codesign/run.hpp"
#include "morphco/platform/drone.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <ostream>

namespace morphco::cli {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

std::string num(double x) { return fmt::format("{:.9g}", x); }

std::string point_name(const ValidationPoint& p) {
  return fmt::format("d{}-g{}-r{}-v{}-p{}", p.distance, p.gamma_deg, p.radius, p.speed, p.pitch_deg);
}

void put_point(std::ostream& out, const ValidationPoint& p) {
  out << num(p.distance) << ',' << num(p.gamma_deg) << ',' << num(p.radius) << ',' << num(p.speed) << ','
      << num(p.pitch_deg);
}

}  // namespace

std::vector<ValidationPoint> ValidationGrid::points() const {
  std::vector<ValidationPoint> out;
  for (double d : distance)
    for (double g : gamma_deg)
      for (double r : radius)
        for (double v : speed)
          for (double p : pitch_deg) out.push_back({d, g, r, v, p});
  return out;
}

void ValidationGrid::validate() const {
  if (distance.empty() || gamma_deg.empty() || radius.empty() || speed.empty() || pitch_deg.empty())
    throw SchemaError("validation grid: every axis needs at least one value");
  for (double d : distance)
    if (!(d > 0.0)) throw SchemaError("validation grid: d must be positive");
  for (double g : gamma_deg)
    if (!(std::abs(g) < 80.0)) throw SchemaError("validation grid: |γ| must stay below 80°");
  for (double r : radius)
    if (!(r >= 0.0)) throw SchemaError("validation grid: r must be non-negative");
  for (double v : speed)
    if (!(v > 0.0)) throw SchemaError("validation grid: v_x must be positive");
  if (knots < 3) throw SchemaError("validation grid: at least 3 knots");
  if (!(gate_radius > 0.0 && target_radius > 0.0)) throw SchemaError("validation grid: radii must be positive");
  if (dt_max && !(*dt_max > 0.0)) throw SchemaError("validation grid: dt_max must be positive");
}

trajopt::Scenario validation_scenario(const ValidationPoint& p, const ValidationGrid& grid) {
  trajopt::Scenario s;
  s.name = point_name(p);
  s.knots = grid.knots;
  s.initial.velocity = {p.speed, 0.0, 0.0};
  s.initial.quaternion = platform::attitude_quaternion(deg2rad(p.pitch_deg));
  s.bounds.dt_max = grid.dt_max ? *grid.dt_max : 2.0 * p.distance / (p.speed * (grid.knots - 1));
  const double lateral = 0.5 * p.distance * std::tan(deg2rad(p.gamma_deg));
  trajopt::Checkpoint gate;
  gate.name = "gate";
  gate.fraction = 0.5;
  gate.position = trajopt::PositionBall{{0.5 * p.distance, lateral, 0.0}, grid.gate_radius};
  trajopt::Checkpoint target;
  target.name = "target";
  target.fraction = 1.0;
  target.position = trajopt::PositionBall{{p.distance, 0.0, 0.0}, grid.target_radius};
  s.checkpoints = {gate, target};
  if (p.radius > 0.0) {
    s.obstacles.push_back(trajopt::Obstacle::sphere({0.25 * p.distance, 0.5 * lateral, 0.0}, p.radius));
    s.obstacles.push_back(trajopt::Obstacle::sphere({0.75 * p.distance, 0.5 * lateral, 0.0}, p.radius));
  }
  s.validate();
  return s;
}

ValidationConfig parse_validation_config(const std::string& text, const std::string& source,
                                         const std::string& base_dir) {
  yaml::Reader r(yaml::parse(text, source), source);
  r.expect_schema("morphco.validation/1");
  r.allow_keys({"schema", "designs", "grid", "catalog", "materials", "aero", "trajopt", "workers"});
  ValidationConfig c;
  for (const auto& d : r.get<std::vector<std::string>>("designs")) c.designs.push_back(resolve(base_dir, d));
  if (c.designs.empty()) r.fail("designs", "must list at least one design");
  const yaml::Reader g = r.child("grid");
  g.allow_keys({"d", "gamma_deg", "r", "v_x", "theta_p_deg", "knots", "gate_radius", "target_radius", "dt_max"});
  c.grid.distance = g.get_doubles("d");
  c.grid.gamma_deg = g.get_doubles("gamma_deg");
  c.grid.radius = g.get_doubles("r");
  c.grid.speed = g.get_doubles("v_x");
  c.grid.pitch_deg = g.get_doubles("theta_p_deg");
  c.grid.knots = g.get_or("knots", c.grid.knots);
  c.grid.gate_radius = g.get_or("gate_radius", c.grid.gate_radius);
  c.grid.target_radius = g.get_or("target_radius", c.grid.target_radius);
  if (g.has("dt_max")) c.grid.dt_max = g.get<double>("dt_max");
  try {
    c.grid.validate();
  } catch (const SchemaError& e) {
    g.fail(e.what());
  }
  if (r.has("catalog")) c.catalog = resolve(base_dir, r.get<std::string>("catalog"));
  if (r.has("materials")) c.materials = resolve(base_dir, r.get<std::string>("materials"));
  if (r.has("aero")) {
    c.aero = r.get<std::string>("aero");
    if (c.aero != "synthetic") c.aero = resolve(base_dir, c.aero);
  }
  if (r.has("trajopt")) c.trajectory = codesign::parse_trajectory_options(r.child("trajopt"));
  c.workers = r.get_or("workers", c.workers);
  if (c.workers < 1) r.fail("workers", "must be at least 1");
  return c;
}

ValidationConfig load_validation_config(const std::string& path) {
  return parse_validation_config(yaml::read_file(path), path, fs::path(path).parent_path().string());
}

std::vector<ValidationRow> run_validation(const std::vector<platform::DesignParams>& designs,
                                          const ValidationGrid& grid, const codesign::FitnessContext& context,
                                          int workers) {
  grid.validate();
  const auto points = grid.points();
  std::vector<ValidationRow> rows(designs.size() * points.size());
  codesign::parallel_for(static_cast<int>(rows.size()), workers, [&](int i) {
    const platform::DesignParams& design = designs[i / points.size()];
    ValidationRow& row = rows[i];
    row.design = design.name;
    row.point = points[i % points.size()];
    try {
      const trajopt::Scenario scenario = validation_scenario(row.point, grid);
      const platform::DroneModel model =
          platform::assemble_drone(design, *context.catalog, *context.library, context.materials);
      const int knots = context.trajectory.knots > 0 ? context.trajectory.knots : scenario.knots;
      const trajopt::Transcription tr(model, scenario, knots);
      row.obstacle_rows = tr.row_count(trajopt::RowKind::Obstacle);
      const trajopt::InteriorPointSolver solver(context.trajectory.solver);
      const auto sol = trajopt::solve_transcription(tr, model, solver, tr.initial_guess(),
                                                    context.trajectory.feasibility_tolerance);
      row.status = trajopt::to_string(sol.status);
      row.feasible = sol.feasible();
      row.energy = sol.energy;
      row.time = sol.time;
      row.max_violation = sol.max_violation;
      row.iterations = sol.stats.iterations;
    } catch (const std::exception& e) {
      spdlog::warn("{} at {}: {}", design.name, point_name(row.point), e.what());
      row.status = "error";
      row.error = e.what();
    }
    spdlog::info("{} {}: {} energy/d {:.4g} J/m time/d {:.4g} s/m", row.design,
                 point_name(row.point), row.status, row.energy_per_distance(),
                 row.time_per_distance());
  });
  return rows;
}

void write_validation_csv(std::ostream& out, const std::vector<ValidationRow>& rows) {
  out << "design,d,gamma_deg,r,v_x,theta_p_deg,status,feasible,energy_J,time_s,energy_per_d,time_per_d,"
         "max_violation,iterations,obstacle_rows,error\n";
  for (const auto& r : rows) {
    out << r.design << ',';
    put_point(out, r.point);
    std::string error = r.error;
    for (char& c : error)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    out << ',' << r.status << ',' << (r.feasible ? 1 : 0) << ',' << num(r.energy) << ',' << num(r.time) << ','
        << num(r.energy_per_distance()) << ',' << num(r.time_per_distance()) << ',' << num(r.max_violation) << ','
        << r.iterations << ',' << r.obstacle_rows << ',' << error << '\n';
  }
}

void write_normalized_table(std::ostream& out, const std::vector<ValidationRow>& rows,
                            const std::vector<std::string>& designs, bool time) {
  out << "d,gamma_deg,r,v_x,theta_p_deg";
  for (const auto& d : designs) out << ',' << d;
  out << '\n';
  // Rows are grouped by design with the same point order in each group.
  const size_t per_design = designs.empty() ? 0 : rows.size() / designs.size();
  for (size_t i = 0; i < per_design; ++i) {
    put_point(out, rows[i].point);
    for (size_t d = 0; d < designs.size(); ++d) {
      const ValidationRow& r = rows[d * per_design + i];
      out << ',' << num(time ? r.time_per_distance() : r.energy_per_distance());
    }
    out << '\n';
  }
}

}  // namespace morphco::cli

#include "morphco/cli/commands.hpp"

#include "morphco/aero/fit.hpp"
#include "morphco/aero/library.hpp"
#include "morphco/aero/sample_table.hpp"
#include "morphco/aero/synthetic.hpp"
#include "morphco/cli/manifest.hpp"
#include "morphco/cli/validation.hpp"
#include "morphco/codesign/run.hpp"
#include "morphco/platform/drone.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>

namespace morphco::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string catalog, materials, aero;
};

struct Context {
  std::vector<std::string> args;
  RunManifest manifest;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  return f;
}

void prepare_out(Context& ctx, const std::string& command, const std::string& out) {
  fs::create_directories(out);
  ctx.manifest.command = command;
  ctx.manifest.arguments = ctx.args;
  ctx.manifest.output_dir = out;
  ctx.manifest.timestamp = utc_timestamp();
}

void finish(const Context& ctx) { ctx.manifest.write((fs::path(ctx.manifest.output_dir) / "manifest.yaml").string()); }

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw IoError("no such file '" + path + "'");
}

// Catalog/materials/aero shared by the commands that assemble drones.
struct Models {
  actuation::ComponentCatalog catalog;
  platform::Materials materials;
  aero::AeroLibrary library;
};

Models load_models(Context& ctx, const std::string& catalog, const std::string& materials, const std::string& aero) {
  Models m;
  const std::string cat = catalog.empty() ? default_catalog_path() : catalog;
  require_file(cat);
  m.catalog = actuation::load_catalog(cat);
  ctx.manifest.add_input(cat);
  if (!materials.empty()) {
    require_file(materials);
    m.materials = platform::load_materials(materials);
    ctx.manifest.add_input(materials);
  }
  const std::string spec = aero.empty() ? "synthetic" : aero;
  if (spec != "synthetic") {
    m.library = aero::AeroLibrary::load_directory(spec);
    for (const auto& e : fs::directory_iterator(spec))
      if (e.path().extension() == ".yaml" && e.path().filename() != "manifest.yaml")
        ctx.manifest.add_input(e.path().string());
  } else {
    m.library = aero::desk_library();
  }
  return m;
}

std::string pick(const std::string& flag, const std::string& config) { return flag.empty() ? config : flag; }

// --- synth-aero ---

int synth_aero(Context& ctx, const Common& c, bool coarse, std::vector<double> aspect_ratios) {
  prepare_out(ctx, "synth-aero", c.out);
  if (aspect_ratios.empty()) aspect_ratios = aero::design_aspect_ratios();
  const auto wing_grid = coarse ? aero::coarse_wing_grid() : aero::default_wing_grid();
  const auto fuselage_grid = coarse ? aero::coarse_fuselage_grid() : aero::default_fuselage_grid();
  const fs::path out(c.out);
  aero::write_table(aero::synthetic_fuselage_table(fuselage_grid), (out / "fuselage.csv").string());
  for (double ar : aspect_ratios) {
    const auto name = fmt::format("wing_ar{}.csv", std::lround(ar * 1000.0));
    aero::write_table(aero::synthetic_wing_table(ar, wing_grid), (out / name).string());
  }
  spdlog::info("wrote {} synthetic tables to {}", aspect_ratios.size() + 1, c.out);
  finish(ctx);
  return kExitOk;
}

// --- fit-aero ---

int fit_aero(Context& ctx, const Common& c, const std::vector<std::string>& tables, const aero::FitOptions& options) {
  for (const auto& t : tables) require_file(t);
  prepare_out(ctx, "fit-aero", c.out);
  auto report = open_out(fs::path(c.out) / "fit_report.csv");
  report << "table,body,aspect_ratio";
  for (const char* n : aero::kCoefficientNames) report << ",lambda_" << n;
  for (const char* n : aero::kCoefficientNames) report << ",rmse_" << n;
  for (const char* n : aero::kCoefficientNames) report << ",nonzero_" << n;
  report << '\n';
  for (const auto& path : tables) {
    ctx.manifest.add_input(path);
    ctx.manifest.add_input(aero::sidecar_path(path));
    const aero::AeroSampleTable table = aero::read_table(path);
    const aero::FitReport fit = aero::fit_coefficients(table, options);
    const std::string stem = fs::path(path).stem().string();
    aero::save_model(fit.model, (fs::path(c.out) / (stem + ".yaml")).string());
    report << stem << ',' << fit.model.body << ',' << fmt::format("{:.9g}", fit.model.aspect_ratio);
    for (double x : fit.lambda) report << ',' << fmt::format("{:.9g}", x);
    for (double x : fit.rmse) report << ',' << fmt::format("{:.9g}", x);
    for (int x : fit.nonzero) report << ',' << x;
    report << '\n';
    double worst = 0.0;
    for (double x : fit.rmse) worst = std::max(worst, x);
    spdlog::info("{}: {} rows, max RMSE {:.3g}{}", stem, table.rows.size(), worst,
                 fit.rank_deficient ? " (rank deficient)" : "");
  }
  finish(ctx);
  return kExitOk;
}

// --- trajopt ---

int trajopt_cmd(Context& ctx, const Common& c, const std::string& design_path, const std::string& scenario_path,
                trajopt::TrajectoryOptions options, std::optional<double> u_max) {
  require_file(design_path);
  require_file(scenario_path);
  prepare_out(ctx, "trajopt", c.out);
  const platform::DesignParams design = platform::load_design(design_path);
  const trajopt::Scenario scenario = trajopt::load_scenario(scenario_path);
  ctx.manifest.add_input(design_path);
  ctx.manifest.add_input(scenario_path);
  const Models m = load_models(ctx, c.catalog, c.materials, c.aero);
  platform::DroneModel model = platform::assemble_drone(design, m.catalog, m.library, m.materials);
  if (u_max) model.propulsion.u_max = *u_max;
  const trajopt::TrajectorySolution sol = trajopt::solve_trajectory(model, scenario, options);
  {
    auto f = open_out(fs::path(c.out) / "solution.csv");
    trajopt::write_solution_csv(f, sol);
  }
  {
    auto f = open_out(fs::path(c.out) / "summary.yaml");
    f << trajopt::solution_summary(sol);
  }
  finish(ctx);
  spdlog::info("{} on {}: {} after {} iterations, violation {:.3g}, energy {:.6g} J, time {:.6g} s", design.name,
               scenario.name, trajopt::to_string(sol.status), sol.stats.iterations, sol.max_violation, sol.energy,
               sol.time);
  switch (sol.status) {
    case trajopt::SolverStatus::Solved:
      return kExitOk;
    case trajopt::SolverStatus::NumericFailure:
      return kExitNumeric;
    default:
      return kExitInfeasible;
  }
}

// --- codesign ---

struct CodesignOverrides {
  std::optional<int> population, generations;
};

int codesign_cmd(Context& ctx, const Common& c, const CodesignOverrides& o) {
  require_file(c.config);
  codesign::RunConfig cfg = codesign::load_run_config(c.config);
  if (c.seed) cfg.nsga.seed = *c.seed;
  if (c.workers) cfg.nsga.workers = *c.workers;
  if (o.population) cfg.nsga.population = *o.population;
  if (o.generations) cfg.nsga.generations = *o.generations;
  cfg.nsga.validate();
  prepare_out(ctx, "codesign", c.out);
  ctx.manifest.seed = cfg.nsga.seed;
  ctx.manifest.workers = cfg.nsga.workers;
  ctx.manifest.add_input(c.config);

  codesign::FitnessContext fc;
  for (const auto& s : cfg.scenarios) {
    require_file(s);
    fc.scenarios.push_back(trajopt::load_scenario(s));
    ctx.manifest.add_input(s);
  }
  const Models m = load_models(ctx, pick(c.catalog, cfg.catalog), pick(c.materials, cfg.materials),
                               pick(c.aero, cfg.aero));
  fc.catalog = &m.catalog;
  fc.library = &m.library;
  fc.materials = m.materials;
  fc.trajectory = cfg.trajectory;
  const codesign::ChromosomeSpace space(m.catalog);
  const codesign::SearchProblem problem = codesign::make_search_problem(space, fc);

  const fs::path out(c.out);
  auto generations = open_out(out / "generations.csv");
  codesign::write_generation_header(generations);
  codesign::FitnessCache cache;
  const auto archive = codesign::nsga2_run(
      problem, cfg.nsga,
      [&](const codesign::GenerationStats& s, const auto&) {
        codesign::write_generation_row(generations, s);
        generations.flush();
        spdlog::info("generation {}: {} new evaluations, front {}, hypervolume {:.6g}", s.generation,
                     s.evaluations, s.front_size, s.hypervolume);
      },
      &cache);
  {
    auto f = open_out(out / "pareto.csv");
    codesign::write_pareto_csv(f, archive.members, space);
  }
  {
    // Every distinct design the run flew, in chromosome order.
    std::vector<codesign::Individual> all;
    for (auto& [genes, fitness] : cache.entries()) all.push_back(codesign::Individual{genes, fitness, -1, 0.0});
    auto f = open_out(out / "evaluations.csv");
    codesign::write_pareto_csv(f, all, space);
  }
  {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "schema" << YAML::Value << "morphco.codesign-summary/1";
    e << YAML::Key << "generations" << YAML::Value << cfg.nsga.generations;
    e << YAML::Key << "distinct_designs" << YAML::Value << cache.size();
    e << YAML::Key << "archive_size" << YAML::Value << archive.members.size();
    e << YAML::Key << "hypervolume_reference" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << archive.reference[0] << archive.reference[1] << YAML::EndSeq;
    e << YAML::Key << "hypervolume_initial" << YAML::Value << archive.history.front().hypervolume;
    e << YAML::Key << "hypervolume_final" << YAML::Value << archive.history.back().hypervolume;
    e << YAML::EndMap;
    auto f = open_out(out / "summary.yaml");
    f << e.c_str() << '\n';
  }
  fs::create_directories(out / "archive");
  int feasible = 0;
  for (size_t i = 0; i < archive.members.size(); ++i) {
    const auto& member = archive.members[i];
    const auto design = space.decode(space.canonical(member.genes));
    auto f = open_out(out / "archive" / fmt::format("{}.yaml", i));
    f << platform::design_to_yaml(design);
    for (const auto& s : member.fitness->scenarios) {
      if (!s.solution) continue;
      auto t = open_out(out / "archive" / fmt::format("{}_{}.csv", i, s.scenario));
      trajopt::write_solution_csv(t, *s.solution);
    }
    feasible += member.fitness->all_feasible();
  }
  finish(ctx);
  spdlog::info("archive: {} members, {} feasible on every scenario", archive.members.size(), feasible);
  return feasible > 0 ? kExitOk : kExitInfeasible;
}

// --- validate ---

int validate_cmd(Context& ctx, const Common& c, const std::vector<std::string>& design_flags) {
  require_file(c.config);
  const ValidationConfig cfg = load_validation_config(c.config);
  prepare_out(ctx, "validate", c.out);
  ctx.manifest.add_input(c.config);
  const int workers = c.workers ? *c.workers : cfg.workers;
  if (workers < 1) throw ContractError("--workers must be at least 1");
  ctx.manifest.workers = workers;

  std::vector<platform::DesignParams> designs;
  std::vector<std::string> names;
  for (const auto& path : design_flags.empty() ? cfg.designs : design_flags) {
    require_file(path);
    designs.push_back(platform::load_design(path));
    names.push_back(designs.back().name);
    ctx.manifest.add_input(path);
  }
  const Models m = load_models(ctx, pick(c.catalog, cfg.catalog), pick(c.materials, cfg.materials),
                               pick(c.aero, cfg.aero));
  codesign::FitnessContext fc;
  fc.catalog = &m.catalog;
  fc.library = &m.library;
  fc.materials = m.materials;
  fc.trajectory = cfg.trajectory;
  const auto rows = run_validation(designs, cfg.grid, fc, workers);

  const fs::path out(c.out);
  {
    auto f = open_out(out / "validation.csv");
    write_validation_csv(f, rows);
  }
  {
    auto f = open_out(out / "energy_per_d.csv");
    write_normalized_table(f, rows, names, false);
  }
  {
    auto f = open_out(out / "time_per_d.csv");
    write_normalized_table(f, rows, names, true);
  }
  finish(ctx);
  int feasible = 0, errors = 0;
  for (const auto& r : rows) {
    feasible += r.feasible;
    errors += !r.error.empty();
  }
  spdlog::info("{} rows, {} feasible, {} errors", rows.size(), feasible, errors);
  return kExitOk;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ContractError*>(&e)) return kExitUsage;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const Error*>(&e)) return kExitSchema;
  return kExitNumeric;
}

}  // namespace

std::string default_catalog_path() {
  if (const char* env = std::getenv("MORPHCO_CATALOG"); env && *env) return env;
  return (fs::path(MORPHCO_DATA_DIR) / "catalog.yaml").string();
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Morphing-wing drone co-design tools"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  Common common;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    sub->add_option("--out", common.out, "Output directory")->required();
    auto* cfg = sub->add_option("--config", common.config, "Configuration file");
    if (config_required) cfg->required();
    sub->add_option("--seed", common.seed, "Random seed (overrides the config)");
    sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_models = [&](CLI::App* sub) {
    sub->add_option("--catalog", common.catalog, "Component catalog (default $MORPHCO_CATALOG)");
    sub->add_option("--materials", common.materials, "Materials file");
    sub->add_option("--aero", common.aero, "\"synthetic\" or a directory of fitted models");
  };

  auto* synth = app.add_subcommand("synth-aero", "Write synthetic coefficient tables");
  add_common(synth, false);
  bool coarse = false;
  std::vector<double> aspect_ratios;
  synth->add_flag("--coarse", coarse, "Sparse desk-scale grids");
  synth->add_option("--aspect-ratio", aspect_ratios, "Wing aspect ratios (default: the design grid)");

  auto* fit = app.add_subcommand("fit-aero", "Fit coefficient models to tables");
  add_common(fit, false);
  std::vector<std::string> tables;
  aero::FitOptions fit_options;
  bool no_log_re = false;
  fit->add_option("tables", tables, "Table CSV files")->required();
  fit->add_option("--lambda", fit_options.lambda, "Lasso weight; negative selects it by cross-validation");
  fit->add_option("--alpha-harmonics", fit_options.basis.alpha_harmonics)->check(CLI::Range(0, 8));
  fit->add_option("--beta-harmonics", fit_options.basis.beta_harmonics)->check(CLI::Range(0, 8));
  fit->add_flag("--no-log-re", no_log_re, "Drop the log(Re) terms");
  fit->add_flag("--symmetric", fit_options.basis.symmetric, "Even/odd terms in beta per coefficient");

  auto* traj = app.add_subcommand("trajopt", "Solve one trajectory");
  add_common(traj, false);
  add_models(traj);
  std::string design_path, scenario_path;
  trajopt::TrajectoryOptions traj_options;
  traj->add_option("--design", design_path, "Design file")->required();
  traj->add_option("--scenario", scenario_path, "Scenario file")->required();
  traj->add_option("--knots", traj_options.knots, "Knot count (default: the scenario's)");
  traj->add_option("--max-iterations", traj_options.solver.max_iterations)->check(CLI::PositiveNumber);
  std::optional<double> u_max;
  traj->add_option("--u-max", u_max, "Override the thrust limit [N]")->check(CLI::NonNegativeNumber);

  auto* cod = app.add_subcommand("codesign", "Run the NSGA-II design search");
  add_common(cod, true);
  add_models(cod);
  CodesignOverrides overrides;
  cod->add_option("--population", overrides.population)->check(CLI::PositiveNumber);
  cod->add_option("--generations", overrides.generations)->check(CLI::NonNegativeNumber);

  auto* val = app.add_subcommand("validate", "Fly designs over a parametric scenario grid");
  add_common(val, true);
  add_models(val);
  std::vector<std::string> design_flags;
  val->add_option("--design", design_flags, "Design files (default: the config's list)");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);
  if (quiet) spdlog::set_level(spdlog::level::warn);

  Context ctx;
  ctx.args = args;
  try {
    if (synth->parsed()) return synth_aero(ctx, common, coarse, aspect_ratios);
    if (fit->parsed()) {
      fit_options.basis.log_reynolds = !no_log_re;
      return fit_aero(ctx, common, tables, fit_options);
    }
    if (traj->parsed()) return trajopt_cmd(ctx, common, design_path, scenario_path, traj_options, u_max);
    if (cod->parsed()) return codesign_cmd(ctx, common, overrides);
    if (val->parsed()) return validate_cmd(ctx, common, design_flags);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return exit_code(e);
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) { return run_cli(std::vector<std::string>(argv, argv + argc)); }

}  // namespace morphco::cli

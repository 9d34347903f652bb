#include "morphco/codesign/run.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <ostream>

namespace morphco::codesign {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = "morphco.codesign/1";

std::string resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

std::string num(double x) { return fmt::format("{:.9g}", x); }

}  // namespace

trajopt::TrajectoryOptions parse_trajectory_options(const yaml::Reader& r) {
  r.allow_keys({"max_iterations", "max_restoration_iterations", "tolerance", "constraint_tolerance",
                "feasibility_tolerance", "knots"});
  trajopt::TrajectoryOptions o;
  o.solver.max_iterations = r.get_or("max_iterations", o.solver.max_iterations);
  o.solver.max_restoration_iterations = r.get_or("max_restoration_iterations", o.solver.max_restoration_iterations);
  o.solver.tolerance = r.get_or("tolerance", o.solver.tolerance);
  o.solver.constraint_tolerance = r.get_or("constraint_tolerance", o.solver.constraint_tolerance);
  o.feasibility_tolerance = r.get_or("feasibility_tolerance", o.feasibility_tolerance);
  o.knots = r.get_or("knots", o.knots);
  if (o.solver.max_iterations < 1 || o.solver.max_restoration_iterations < 0)
    r.fail("iteration limits must be positive");
  if (!(o.solver.tolerance > 0.0 && o.solver.constraint_tolerance > 0.0 && o.feasibility_tolerance > 0.0))
    r.fail("tolerances must be positive");
  if (o.knots != 0 && o.knots < 2) r.fail("knots", "must be 0 (scenario default) or at least 2");
  return o;
}

RunConfig parse_run_config(const std::string& text, const std::string& source, const std::string& base_dir) {
  yaml::Reader r(yaml::parse(text, source), source);
  r.expect_schema(kSchema);
  r.allow_keys({"schema", "population", "generations", "crossover", "mutation", "seed", "workers", "scenarios",
                "catalog", "materials", "aero", "trajopt"});
  RunConfig c;
  c.source = source;
  c.nsga.population = r.get_or("population", c.nsga.population);
  c.nsga.generations = r.get_or("generations", c.nsga.generations);
  c.nsga.crossover = r.get_or("crossover", c.nsga.crossover);
  c.nsga.mutation = r.get_or("mutation", c.nsga.mutation);
  c.nsga.seed = r.get_or<std::uint64_t>("seed", c.nsga.seed);
  c.nsga.workers = r.get_or("workers", c.nsga.workers);
  try {
    c.nsga.validate();
  } catch (const ContractError& e) {
    r.fail(e.what());
  }
  for (const auto& s : r.get<std::vector<std::string>>("scenarios")) c.scenarios.push_back(resolve(base_dir, s));
  if (c.scenarios.empty()) r.fail("scenarios", "must list at least one scenario");
  if (r.has("catalog")) c.catalog = resolve(base_dir, r.get<std::string>("catalog"));
  if (r.has("materials")) c.materials = resolve(base_dir, r.get<std::string>("materials"));
  if (r.has("aero")) {
    c.aero = r.get<std::string>("aero");
    if (c.aero != "synthetic") c.aero = resolve(base_dir, c.aero);
  }
  if (r.has("trajopt")) c.trajectory = parse_trajectory_options(r.child("trajopt"));
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(yaml::read_file(path), path, fs::path(path).parent_path().string());
}

aero::AeroLibrary load_aero_library(const std::string& spec) {
  if (spec == "synthetic") return aero::desk_library();
  return aero::AeroLibrary::load_directory(spec);
}

std::string chain_label(const platform::DesignParams& design) {
  if (design.joint_chain.empty()) return "fixed";
  std::string s;
  for (size_t i = 0; i < design.joint_chain.size(); ++i)
    s += (i ? "+" : "") + platform::to_string(design.joint_chain[i]);
  return s;
}

void write_pareto_csv(std::ostream& out, const std::vector<Individual>& members, const ChromosomeSpace& space) {
  out << "id";
  for (int g = 0; g < kGeneCount; ++g) out << ',' << gene_name(g);
  out << ",joints,J1_energy_J,J2_time_s,feasible_scenarios\n";
  for (size_t i = 0; i < members.size(); ++i) {
    const Individual& m = members[i];
    const Chromosome c = space.canonical(m.genes);
    out << i;
    for (int g : c) out << ',' << g;
    int feasible = 0;
    for (const auto& s : m.fitness->scenarios) feasible += s.feasible;
    out << ',' << chain_label(space.decode(c)) << ',' << num(m.fitness->energy) << ',' << num(m.fitness->time) << ','
        << feasible << '\n';
  }
}

void write_generation_header(std::ostream& out) {
  out << "generation,evaluations,cache_hits,front_size,feasible,hypervolume,best_energy_J,best_time_s\n";
}

void write_generation_row(std::ostream& out, const GenerationStats& s) {
  out << s.generation << ',' << s.evaluations << ',' << s.cache_hits << ',' << s.front_size << ',' << s.feasible << ','
      << num(s.hypervolume) << ',' << num(s.best[0]) << ',' << num(s.best[1]) << '\n';
}

}  // namespace morphco::codesign

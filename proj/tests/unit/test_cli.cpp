#include "morphco/aero/fit.hpp"
#include "morphco/aero/sample_table.hpp"
#include "morphco/aero/synthetic.hpp"
#include "morphco/cli/commands.hpp"
#include "morphco/cli/manifest.hpp"
#include "morphco/cli/validation.hpp"
#include "morphco/trajopt/transcription.hpp"
#include "model_support.hpp"

#include <gtest/gtest.h>
#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace morphco;
using namespace morphco::cli;

namespace {

const std::string kData = MORPHCO_DATA_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("morphco-cli-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "morphco");
  args.push_back("--quiet");
  return run_cli(args);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

int column(const std::vector<std::string>& header, const std::string& name) {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  ADD_FAILURE() << "no column " << name;
  return 0;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

// --- manifest ---

TEST(Manifest, BlobHashMatchesGit) {
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  // Empty blob.
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(sha1_hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
}

TEST(Manifest, InputHashIgnoresOrder) {
  RunManifest a, b;
  a.inputs = {{"x", "1"}, {"y", "2"}};
  b.inputs = {{"y", "2"}, {"x", "1"}};
  EXPECT_EQ(a.input_hash(), b.input_hash());
  b.inputs[0].blob = "3";
  EXPECT_NE(a.input_hash(), b.input_hash());
}

TEST(Manifest, YamlCarriesTheFields) {
  TempDir dir;
  RunManifest m;
  m.command = "trajopt";
  m.arguments = {"morphco", "trajopt"};
  m.seed = 42;
  m.add_input(kData + "/catalog.yaml");
  m.write(dir / "manifest.yaml");
  const YAML::Node n = YAML::LoadFile(dir / "manifest.yaml");
  EXPECT_EQ(n["schema"].as<std::string>(), "morphco.manifest/1");
  EXPECT_EQ(n["seed"].as<int>(), 42);
  EXPECT_EQ(n["inputs"][0]["blob"].as<std::string>(), git_blob_hash(slurp(kData + "/catalog.yaml")));
  EXPECT_EQ(n["input_hash"].as<std::string>(), m.input_hash());
}

// --- usage ---

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"no-such-command"}), kExitUsage);
  EXPECT_EQ(run({"trajopt", "--out", "/tmp/x"}), kExitUsage);
  EXPECT_EQ(run({"codesign", "--out", "/tmp/x", "--config", "c.yaml", "--workers", "0"}), kExitUsage);
}

TEST(Cli, DefaultCatalogFollowsTheEnvironment) {
  unsetenv("MORPHCO_CATALOG");
  EXPECT_EQ(fs::path(default_catalog_path()), fs::path(kData) / "catalog.yaml");
  setenv("MORPHCO_CATALOG", "/elsewhere/catalog.yaml", 1);
  EXPECT_EQ(default_catalog_path(), "/elsewhere/catalog.yaml");
  unsetenv("MORPHCO_CATALOG");
}

// --- fit-aero ---

TEST(FitAero, SyntheticTableFitsWithinTolerance) {
  TempDir dir;
  ASSERT_EQ(run({"synth-aero", "--coarse", "--aspect-ratio", "3.5", "--out", dir / "tables"}), kExitOk);
  ASSERT_TRUE(fs::exists(dir / "tables/wing_ar3500.csv"));
  ASSERT_TRUE(fs::exists(dir / "tables/fuselage.csv"));
  ASSERT_EQ(run({"fit-aero", dir / "tables/wing_ar3500.csv", dir / "tables/fuselage.csv", "--lambda", "0",
                 "--symmetric", "--out", dir / "models"}),
            kExitOk);
  const auto report = read_csv(dir / "models/fit_report.csv");
  ASSERT_EQ(report.size(), 3u);
  for (size_t r = 1; r < report.size(); ++r)
    for (const char* name : aero::kCoefficientNames)
      EXPECT_LT(std::stod(report[r][column(report[0], std::string("rmse_") + name)]), 1e-3)
          << report[r][0] << ' ' << name;
  // The output directory loads as a library, manifest included.
  EXPECT_TRUE(fs::exists(dir / "models/manifest.yaml"));
  const auto lib = aero::AeroLibrary::load_directory(dir / "models");
  EXPECT_TRUE(lib.has_fuselage());
  EXPECT_NO_THROW(lib.wing(3.5));
}

TEST(FitAero, EmptyTableIsASchemaError) {
  TempDir dir;
  aero::AeroSampleTable t = aero::synthetic_wing_table(4.0, aero::coarse_wing_grid());
  aero::write_table(t, dir / "t.csv");
  {
    std::ofstream f(dir / "t.csv", std::ios::trunc);
    f << "alpha_deg,beta_deg,reynolds,CD,CL,CY,Cl,Cm,Cn\n";
  }
  EXPECT_EQ(run({"fit-aero", dir / "t.csv", "--out", dir / "out"}), kExitSchema);
  EXPECT_EQ(run({"fit-aero", dir / "missing.csv", "--out", dir / "out"}), kExitUsage);
}

TEST(FitAero, RefitOfOwnPredictionsHasNearZeroResidual) {
  TempDir dir;
  aero::AeroSampleTable t = aero::synthetic_wing_table(4.0, aero::coarse_wing_grid());
  aero::write_table(t, dir / "t.csv");
  ASSERT_EQ(run({"fit-aero", dir / "t.csv", "--lambda", "0", "--out", dir / "a"}), kExitOk);
  const aero::CoefficientModel first = aero::load_model(dir / "a/t.yaml");
  for (auto& row : t.rows) row.coefficients = first.evaluate<double>(row.alpha, row.beta, row.reynolds);
  aero::write_table(t, dir / "p.csv");
  ASSERT_EQ(run({"fit-aero", dir / "p.csv", "--lambda", "0", "--out", dir / "b"}), kExitOk);
  const auto report = read_csv(dir / "b/fit_report.csv");
  for (const char* name : aero::kCoefficientNames)
    EXPECT_LT(std::stod(report[1][column(report[0], std::string("rmse_") + name)]), 1e-9) << name;
}

// --- trajopt ---

TEST(TrajoptCommand, StraightScenarioSolves) {
  TempDir dir;
  EXPECT_EQ(run({"trajopt", "--design", kData + "/designs/fixed_wing.yaml", "--scenario",
                 kData + "/scenarios/desk_straight.yaml", "--out", dir / "out"}),
            kExitOk);
  const YAML::Node s = YAML::LoadFile(dir / "out/summary.yaml");
  EXPECT_EQ(s["status"].as<std::string>(), "solved");
  EXPECT_LT(s["max_violation"].as<double>(), 1e-4);
  const auto sol = read_csv(dir / "out/solution.csv");
  EXPECT_EQ(sol.size(), 9u);  // header + 8 knots
  const YAML::Node m = YAML::LoadFile(dir / "out/manifest.yaml");
  EXPECT_EQ(m["command"].as<std::string>(), "trajopt");
  EXPECT_EQ(m["inputs"].size(), 3u);
}

TEST(TrajoptCommand, NoThrustIsInfeasible) {
  TempDir dir;
  EXPECT_EQ(run({"trajopt", "--design", kData + "/designs/fixed_wing.yaml", "--scenario",
                 kData + "/scenarios/desk_straight.yaml", "--u-max", "0", "--out", dir / "out"}),
            kExitInfeasible);
  const YAML::Node s = YAML::LoadFile(dir / "out/summary.yaml");
  EXPECT_FALSE(s["feasible"].as<bool>());
}

TEST(TrajoptCommand, MissingFileIsAUsageError) {
  TempDir dir;
  EXPECT_EQ(run({"trajopt", "--design", kData + "/designs/nope.yaml", "--scenario",
                 kData + "/scenarios/desk_straight.yaml", "--out", dir / "out"}),
            kExitUsage);
  EXPECT_EQ(run({"trajopt", "--design", kData + "/designs/fixed_wing.yaml", "--scenario",
                 kData + "/scenarios/desk_straight.yaml", "--catalog", dir / "none.yaml", "--out", dir / "out"}),
            kExitUsage);
}

TEST(TrajoptCommand, BadScenarioIsASchemaError) {
  TempDir dir;
  {
    std::ofstream f(dir / "bad.yaml");
    f << "schema: morphco.scenario/1\nname: bad\nknots: 8\nwobble: 3\n";
  }
  EXPECT_EQ(run({"trajopt", "--design", kData + "/designs/fixed_wing.yaml", "--scenario", dir / "bad.yaml",
                 "--out", dir / "out"}),
            kExitSchema);
}

// --- validate ---

TEST(Validation, GridOrderAndCount) {
  ValidationGrid g;
  g.distance = {10, 20};
  g.gamma_deg = {0, 10};
  g.radius = {0, 0.5};
  g.speed = {8, 10};
  g.pitch_deg = {-2.4, 0};
  const auto pts = g.points();
  ASSERT_EQ(pts.size(), 32u);
  EXPECT_EQ(pts[0].distance, 10);
  EXPECT_EQ(pts[1].pitch_deg, 0);
  EXPECT_EQ(pts[16].distance, 20);
  g.radius.clear();
  EXPECT_THROW(g.validate(), SchemaError);
}

TEST(Validation, ScenarioGeometry) {
  ValidationGrid g;
  g.distance = {20};
  g.gamma_deg = {10};
  g.radius = {0.5};
  g.speed = {10};
  g.pitch_deg = {0};
  const ValidationPoint p = g.points()[0];
  const trajopt::Scenario s = validation_scenario(p, g);
  ASSERT_EQ(s.checkpoints.size(), 2u);
  EXPECT_NEAR(s.checkpoints[0].position->center.y(), 10.0 * std::tan(deg2rad(10.0)), 1e-12);
  EXPECT_EQ(s.checkpoints[1].position->center, Eigen::Vector3d(20, 0, 0));
  ASSERT_EQ(s.obstacles.size(), 2u);
  EXPECT_EQ(s.obstacles[0].kind, trajopt::ObstacleKind::Sphere);
  EXPECT_DOUBLE_EQ(s.bounds.dt_max, 2.0 * 20 / (10 * 9));
  EXPECT_EQ(s.initial.velocity, Eigen::Vector3d(10, 0, 0));
}

TEST(Validation, ZeroRadiusHasNoObstacleRows) {
  ValidationGrid g;
  g.distance = {10};
  g.gamma_deg = {0};
  g.radius = {0, 0.5};
  g.speed = {10};
  g.pitch_deg = {0};
  const auto model = morphco::testing::assemble(morphco::testing::fixed_wing_design());
  const trajopt::Transcription free(model, validation_scenario(g.points()[0], g), g.knots);
  const trajopt::Transcription blocked(model, validation_scenario(g.points()[1], g), g.knots);
  EXPECT_EQ(free.row_count(trajopt::RowKind::Obstacle), 0);
  EXPECT_GT(blocked.row_count(trajopt::RowKind::Obstacle), 0);
}

TEST(Validation, ConfigRejectsUnknownKeys) {
  const std::string ok =
      "schema: morphco.validation/1\ndesigns: [a.yaml]\n"
      "grid: {d: [10], gamma_deg: [0], r: [0], v_x: [10], theta_p_deg: [0]}\n";
  const ValidationConfig c = parse_validation_config(ok, "<t>", "/base");
  EXPECT_EQ(c.designs[0], "/base/a.yaml");
  EXPECT_EQ(c.grid.points().size(), 1u);
  EXPECT_THROW(parse_validation_config(ok + "extra: 1\n", "<t>", ""), SchemaError);
  EXPECT_THROW(parse_validation_config("schema: morphco.validation/1\ndesigns: [a.yaml]\n"
                                       "grid: {d: [], gamma_deg: [0], r: [0], v_x: [10], theta_p_deg: [0]}\n",
                                       "<t>", ""),
               SchemaError);
}

TEST(ValidateCommand, OnePointOneDesignGivesOneRow) {
  TempDir dir;
  {
    std::ofstream f(dir / "v.yaml");
    f << "schema: morphco.validation/1\n"
      << "designs: [" << kData << "/designs/fixed_wing.yaml]\n"
      << "grid: {d: [10], gamma_deg: [0], r: [0], v_x: [10], theta_p_deg: [0], knots: 8}\n"
      << "trajopt: {max_iterations: 150}\n";
  }
  ASSERT_EQ(run({"validate", "--config", dir / "v.yaml", "--out", dir / "out"}), kExitOk);
  const auto rows = read_csv(dir / "out/validation.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][column(rows[0], "design")], "fixed-wing");
  EXPECT_EQ(rows[1][column(rows[0], "obstacle_rows")], "0");
  EXPECT_EQ(rows[1][column(rows[0], "feasible")], "1");
  const double e = std::stod(rows[1][column(rows[0], "energy_J")]);
  EXPECT_DOUBLE_EQ(std::stod(rows[1][column(rows[0], "energy_per_d")]), e / 10.0);
  const auto energy = read_csv(dir / "out/energy_per_d.csv");
  ASSERT_EQ(energy.size(), 2u);
  EXPECT_EQ(energy[0].back(), "fixed-wing");
  EXPECT_EQ(energy[1].back(), rows[1][column(rows[0], "energy_per_d")]);
  EXPECT_TRUE(fs::exists(dir / "out/time_per_d.csv"));
  EXPECT_TRUE(fs::exists(dir / "out/manifest.yaml"));
}

// --- codesign ---

TEST(CodesignCommand, ZeroGenerationsWritesTheInitialFront) {
  TempDir dir;
  {
    std::ofstream f(dir / "c.yaml");
    f << "schema: morphco.codesign/1\npopulation: 4\ngenerations: 0\nseed: 3\nworkers: 2\n"
      << "scenarios: [" << kData << "/scenarios/desk_straight.yaml]\n"
      << "trajopt: {max_iterations: 150, max_restoration_iterations: 100}\n";
  }
  const int code = run({"codesign", "--config", dir / "c.yaml", "--out", dir / "out"});
  EXPECT_TRUE(code == kExitOk || code == kExitInfeasible);
  const auto gens = read_csv(dir / "out/generations.csv");
  ASSERT_EQ(gens.size(), 2u);
  EXPECT_EQ(gens[1][0], "0");
  EXPECT_EQ(gens[1][1], "4");
  const auto pareto = read_csv(dir / "out/pareto.csv");
  ASSERT_GE(pareto.size(), 2u);
  EXPECT_EQ(static_cast<int>(pareto.size()) - 1, std::stoi(gens[1][column(gens[0], "front_size")]));
  // No member of the written front dominates another.
  const int e = column(pareto[0], "J1_energy_J"), t = column(pareto[0], "J2_time_s");
  for (size_t i = 1; i < pareto.size(); ++i)
    for (size_t j = 1; j < pareto.size(); ++j) {
      if (i == j) continue;
      const double ei = std::stod(pareto[i][e]), ti = std::stod(pareto[i][t]);
      const double ej = std::stod(pareto[j][e]), tj = std::stod(pareto[j][t]);
      EXPECT_FALSE(ei <= ej && ti <= tj && (ei < ej || ti < tj)) << i << " dominates " << j;
    }
  EXPECT_TRUE(fs::exists(dir / "out/archive/0.yaml"));
  // Every archive member was evaluated; the summary hypervolume matches the log.
  const auto evals = read_csv(dir / "out/evaluations.csv");
  EXPECT_EQ(evals[0], pareto[0]);
  EXPECT_GE(evals.size(), pareto.size());
  const YAML::Node s = YAML::LoadFile(dir / "out/summary.yaml");
  EXPECT_EQ(s["generations"].as<int>(), 0);
  EXPECT_EQ(s["hypervolume_reference"].size(), 2u);
  // generations.csv carries 9 significant digits.
  const double hv = s["hypervolume_final"].as<double>();
  EXPECT_NEAR(hv, std::stod(gens[1][column(gens[0], "hypervolume")]), 1e-8 * (1.0 + hv));
  EXPECT_DOUBLE_EQ(s["hypervolume_initial"].as<double>(), s["hypervolume_final"].as<double>());
  const YAML::Node m = YAML::LoadFile(dir / "out/manifest.yaml");
  EXPECT_EQ(m["seed"].as<int>(), 3);
  EXPECT_EQ(m["workers"].as<int>(), 2);
}

#include "morphco/codesign/chromosome.hpp"
#include "morphco/codesign/fitness.hpp"
#include "morphco/codesign/nsga2.hpp"

#include "model_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <set>

using namespace morphco;
using namespace morphco::codesign;
namespace mt = morphco::testing;

namespace {

const ChromosomeSpace& space() {
  static const ChromosomeSpace s(mt::default_catalog());
  return s;
}

platform::DesignParams unnamed(platform::DesignParams d) {
  d.name.clear();
  return d;
}

// Fronts by repeatedly peeling off the points no remaining point dominates.
std::vector<std::vector<int>> brute_force_fronts(const std::vector<Objectives>& pts) {
  std::vector<int> left(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) left[i] = static_cast<int>(i);
  std::vector<std::vector<int>> fronts;
  while (!left.empty()) {
    std::vector<int> front, rest;
    for (int i : left) {
      bool dominated = false;
      for (int j : left) dominated = dominated || dominates(pts[j], pts[i]);
      (dominated ? rest : front).push_back(i);
    }
    fronts.push_back(front);
    left = rest;
  }
  return fronts;
}

bool has_dominated_pair(const std::vector<Individual>& members) {
  for (const auto& a : members)
    for (const auto& b : members)
      if (dominates(a.objectives(), b.objectives())) return true;
  return false;
}

ScenarioOutcome outcome(double energy, double time, bool feasible = true) {
  ScenarioOutcome o;
  o.feasible = feasible;
  o.energy = energy;
  o.time = time;
  return o;
}

// Two objectives over a 2-D grid: squared distances to (0, 0) and (2, 0).
SearchProblem sphere_problem(std::atomic<int>* calls = nullptr) {
  SearchProblem p;
  p.gene_sizes = {101, 101};
  p.evaluate = [calls](const Chromosome& c, int) {
    if (calls) ++*calls;
    const double x = c[0] / 25.0 - 1.0, y = c[1] / 25.0 - 2.0;
    return outcome(x * x + y * y, (x - 2) * (x - 2) + y * y);
  };
  return p;
}

}  // namespace

TEST(Chromosome, GeneSizesFollowTheGrids) {
  const auto& s = space().sizes();
  ASSERT_EQ(s.size(), static_cast<size_t>(kGeneCount));
  EXPECT_EQ(s[kChord], 7);
  EXPECT_EQ(s[kAspectRatio], 7);
  EXPECT_EQ(s[kVerticalOffset], 7);
  EXPECT_EQ(s[kHorizontalOffset], 7);
  EXPECT_EQ(s[kDihedral], 11);
  EXPECT_EQ(s[kJointCount], 4);
  EXPECT_EQ(s[kAxisOrder], 6);
  EXPECT_EQ(s[kServo0], static_cast<int>(mt::default_catalog().servos().size()));
  EXPECT_EQ(s[kPropulsion], static_cast<int>(mt::default_catalog().propulsion().size()));
  EXPECT_EQ(s[kControllerWeight], 6);
}

TEST(Chromosome, AxisOrdersArePermutations) {
  std::set<std::array<platform::JointAxis, 3>> seen;
  for (const auto& o : axis_orders()) {
    EXPECT_TRUE(std::is_permutation(o.begin(), o.end(), axis_orders()[0].begin()));
    seen.insert(o);
  }
  EXPECT_EQ(seen.size(), 6u);
}

TEST(Chromosome, DecodeEncodeIsTheIdentityOnDesigns) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 3000; ++i) {
    const Chromosome c = space().random(rng);
    const platform::DesignParams d = space().decode(c);
    EXPECT_NO_THROW(d.validate());
    EXPECT_TRUE(d.on_grid());
    EXPECT_EQ(static_cast<int>(d.joint_chain.size()), c[kJointCount]);
    const Chromosome e = space().encode(d);
    EXPECT_EQ(e, space().canonical(c));
    EXPECT_EQ(unnamed(space().decode(e)), unnamed(d));
  }
}

TEST(Chromosome, EveryGeneValueRoundTrips) {
  Chromosome base(kGeneCount, 0);
  base[kJointCount] = 3;
  for (int g = 0; g < kGeneCount; ++g)
    for (int v = 0; v < space().sizes()[g]; ++v) {
      Chromosome c = base;
      c[g] = v;
      EXPECT_EQ(space().encode(space().decode(c)), space().canonical(c)) << gene_name(g) << " = " << v;
    }
}

TEST(Chromosome, InactiveGenesDoNotChangeTheDesign) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    Chromosome a = space().random(rng);
    Chromosome b = a;
    for (int j = a[kJointCount]; j < 3; ++j) b[kServo0 + j] = (b[kServo0 + j] + 1) % space().sizes()[kServo0];
    if (a[kJointCount] == 0) b[kAxisOrder] = (a[kAxisOrder] + 3) % 6;
    EXPECT_EQ(space().canonical(a), space().canonical(b));
    EXPECT_EQ(unnamed(space().decode(a)), unnamed(space().decode(b)));
    // A change in an active gene changes the design and the canonical form.
    Chromosome c = a;
    c[kChord] = (a[kChord] + 1) % space().sizes()[kChord];
    EXPECT_NE(space().canonical(a), space().canonical(c));
    EXPECT_NE(unnamed(space().decode(a)), unnamed(space().decode(c)));
  }
}

TEST(Chromosome, ReferenceDesignsEncode) {
  for (const auto& d : {mt::fixed_wing_design(), mt::energy_design(), mt::agile_design()}) {
    const Chromosome c = space().encode(d);
    EXPECT_EQ(unnamed(space().decode(c)), unnamed(d)) << d.name;
  }
  EXPECT_EQ(space().encode(mt::fixed_wing_design())[kJointCount], 0);
}

TEST(Chromosome, OffGridDesignsAreRejected) {
  auto d = mt::energy_design();
  d.chord = 0.24;
  EXPECT_THROW(space().encode(d), LookupError);
  d = mt::energy_design();
  d.servo_ids[0] = "ghost";
  EXPECT_THROW(space().encode(d), LookupError);
  Chromosome c(kGeneCount, 0);
  c[kChord] = 7;
  EXPECT_THROW(space().decode(c), LookupError);
}

TEST(Fitness, AllScenariosInfeasibleGivesThePenalty) {
  std::vector<ScenarioOutcome> o(5, outcome(3.0, 2.0, false));
  const Fitness f = combine(o);
  EXPECT_EQ(f.energy, 1e6);
  EXPECT_EQ(f.time, 1e6);
  EXPECT_FALSE(f.all_feasible());
}

TEST(Fitness, SingleScenarioIsItsOwnMean) {
  const Fitness f = combine({outcome(50.0, 6.0)});
  EXPECT_EQ(f.energy, 50.0);
  EXPECT_EQ(f.time, 6.0);
  EXPECT_TRUE(f.all_feasible());
}

TEST(Fitness, InfeasibleScenarioIsSubstituted) {
  const Fitness f = combine({outcome(40.0, 5.0), outcome(1.0, 1.0, false)});
  EXPECT_DOUBLE_EQ(f.energy, (40.0 + 1e6) / 2.0);
  EXPECT_DOUBLE_EQ(f.time, (5.0 + 1e6) / 2.0);
}

TEST(Fitness, AssemblyFailureCountsAsInfeasible) {
  ChromosomeSpace ghost({"ghost"}, {"prop-4"});
  FitnessContext ctx;
  ctx.catalog = &mt::default_catalog();
  ctx.library = &mt::quick_library();
  ctx.scenarios = {trajopt::load_scenario(std::string(MORPHCO_DATA_DIR) + "/scenarios/straight.yaml")};
  Chromosome c = space().encode(mt::fixed_wing_design());
  c[kJointCount] = 1;
  c[kServo0] = 0;
  c[kPropulsion] = 0;
  const Fitness f = evaluate_fitness(c, ghost, ctx);
  EXPECT_EQ(f.energy, 1e6);
  EXPECT_EQ(f.time, 1e6);
  ASSERT_EQ(f.scenarios.size(), 1u);
  EXPECT_NE(f.scenarios[0].status.find("ghost"), std::string::npos) << f.scenarios[0].status;
}

TEST(Fitness, FixedWingOnAShortLegMatchesTheTrajectorySolve) {
  const auto scenario = trajopt::parse_scenario(R"(schema: morphco.scenario/1
name: short
knots: 8
initial: {attitude_deg: {pitch: -2.4}, velocity: [10, 0, 0]}
bounds: {dt_max: 0.3}
checkpoints:
  - {fraction: 1.0, position: {center: [15, 0, 0], radius: 0.5}}
)",
                                                "short");
  FitnessContext ctx;
  ctx.catalog = &mt::default_catalog();
  ctx.library = &mt::quick_library();
  ctx.scenarios = {scenario, scenario};
  const Chromosome c = space().encode(mt::fixed_wing_design());
  const Fitness f = evaluate_fitness(c, space(), ctx);
  const auto direct = trajopt::solve_trajectory(mt::assemble(mt::fixed_wing_design()), scenario);
  ASSERT_TRUE(direct.feasible()) << direct.message;
  ASSERT_TRUE(f.all_feasible());
  EXPECT_DOUBLE_EQ(f.energy, direct.energy);
  EXPECT_DOUBLE_EQ(f.time, direct.time);
  ASSERT_TRUE(f.scenarios[0].solution);
  EXPECT_EQ(f.scenarios[0].solution->knots.size(), 8u);
}

TEST(NonDominatedSort, StrictDominanceGivesTwoFronts) {
  const auto fronts = non_dominated_sort(std::vector<Objectives>{{1, 1}, {2, 2}});
  EXPECT_EQ(fronts, (std::vector<std::vector<int>>{{0}, {1}}));
}

TEST(NonDominatedSort, TradeOffGivesOneFront) {
  const auto fronts = non_dominated_sort(std::vector<Objectives>{{1, 2}, {2, 1}});
  EXPECT_EQ(fronts, (std::vector<std::vector<int>>{{0, 1}}));
}

TEST(NonDominatedSort, MatchesBruteForceOnRandomPopulations) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 60)(rng);
    // Small integer coordinates force ties and duplicates.
    const bool ties = trial % 2 == 0;
    std::vector<Objectives> pts(n);
    for (auto& p : pts)
      for (double& v : p)
        v = ties ? std::uniform_int_distribution<int>(0, 6)(rng) : std::uniform_real_distribution<double>(0, 1)(rng);
    EXPECT_EQ(non_dominated_sort(pts), brute_force_fronts(pts)) << "trial " << trial;
  }
}

TEST(NonDominatedSort, MissingFitnessIsAContractError) {
  std::vector<Individual> pop(2);
  pop[0].fitness = combine({outcome(1, 1)});
  EXPECT_THROW(non_dominated_sort(pop), ContractError);
}

TEST(CrowdingDistance, SmallFrontsAreAllBoundary) {
  const std::vector<Objectives> pts{{0, 1}, {1, 0}};
  EXPECT_TRUE(std::isinf(crowding_distance(pts, {0})[0]));
  const auto d = crowding_distance(pts, {0, 1});
  EXPECT_TRUE(std::isinf(d[0]) && std::isinf(d[1]));
  EXPECT_THROW(crowding_distance(pts, {}), ContractError);
}

TEST(CrowdingDistance, InteriorIsTheNormalizedGapSum) {
  const std::vector<Objectives> pts{{2, 0}, {1, 1}, {0, 2}};
  const auto d = crowding_distance(pts, {0, 1, 2});
  EXPECT_TRUE(std::isinf(d[0]));
  EXPECT_DOUBLE_EQ(d[1], 2.0);
  EXPECT_TRUE(std::isinf(d[2]));
}

TEST(CrowdingDistance, TiedObjectivesStayFinite) {
  const std::vector<Objectives> pts{{1, 3}, {1, 3}, {1, 3}, {1, 3}};
  const auto d = crowding_distance(pts, {0, 1, 2, 3});
  EXPECT_EQ(std::count_if(d.begin(), d.end(), [](double x) { return std::isinf(x); }), 2);
  for (double x : d) EXPECT_FALSE(std::isnan(x));
}

TEST(Hypervolume, HandExamples) {
  EXPECT_DOUBLE_EQ(hypervolume({{1, 1}}, {3, 3}), 4.0);
  EXPECT_DOUBLE_EQ(hypervolume({{1, 2}, {2, 1}}, {3, 3}), 3.0);
  EXPECT_DOUBLE_EQ(hypervolume({{1, 2}, {2, 1}, {2, 2}}, {3, 3}), 3.0);
  EXPECT_DOUBLE_EQ(hypervolume({{3, 1}, {1, 3}}, {3, 3}), 0.0);
  EXPECT_DOUBLE_EQ(hypervolume({}, {3, 3}), 0.0);
}

TEST(Hypervolume, MatchesCellCountingOnIntegerPoints) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Objectives> pts(std::uniform_int_distribution<int>(1, 12)(rng));
    for (auto& p : pts) p = {double(std::uniform_int_distribution<int>(0, 12)(rng)),
                             double(std::uniform_int_distribution<int>(0, 12)(rng))};
    const Objectives ref{10, 10};
    int cells = 0;
    for (int x = 0; x < 10; ++x)
      for (int y = 0; y < 10; ++y) {
        bool covered = false;
        for (const auto& p : pts) covered = covered || (p[0] <= x && p[1] <= y);
        cells += covered;
      }
    EXPECT_DOUBLE_EQ(hypervolume(pts, ref), cells) << "trial " << trial;
  }
}

TEST(Nsga2, ZeroGenerationsKeepsTheInitialFront) {
  Nsga2Config cfg;
  cfg.population = 20;
  cfg.generations = 0;
  std::vector<Individual> initial;
  const auto archive = nsga2_run(sphere_problem(), cfg, [&](const GenerationStats&, const std::vector<Individual>& p) {
    initial = p;
  });
  ASSERT_EQ(initial.size(), 20u);
  std::vector<Objectives> pts;
  for (const auto& ind : initial) pts.push_back(ind.objectives());
  std::set<Chromosome> expected;
  const auto fronts = brute_force_fronts(pts);
  for (int i : fronts[0]) expected.insert(initial[i].genes);
  std::set<Chromosome> got;
  for (const auto& m : archive.members) got.insert(m.genes);
  EXPECT_EQ(got, expected);
  EXPECT_EQ(archive.history.size(), 1u);
}

TEST(Nsga2, NoVariationKeepsThePopulationMultiset) {
  Nsga2Config cfg;
  cfg.population = 16;
  cfg.generations = 5;
  cfg.crossover = 0.0;
  cfg.mutation = 0.0;
  std::vector<std::multiset<Chromosome>> seen;
  nsga2_run(sphere_problem(), cfg, [&](const GenerationStats&, const std::vector<Individual>& p) {
    std::multiset<Chromosome> s;
    for (const auto& ind : p) s.insert(ind.genes);
    seen.push_back(s);
  });
  ASSERT_EQ(seen.size(), 6u);
  for (const auto& s : seen) EXPECT_EQ(s, seen[0]);
}

TEST(Nsga2, SphereFrontImprovesAndInvariantsHold) {
  Nsga2Config cfg;
  cfg.population = 20;
  cfg.generations = 30;
  cfg.seed = 42;
  std::atomic<int> calls{0};
  std::vector<GenerationStats> stats;
  const auto archive = nsga2_run(sphere_problem(&calls), cfg, [&](const GenerationStats& s,
                                                                   const std::vector<Individual>& pop) {
    stats.push_back(s);
    std::vector<Individual> front;
    for (const auto& ind : pop)
      if (ind.rank == 0) front.push_back(ind);
    EXPECT_FALSE(has_dominated_pair(front)) << "generation " << s.generation;
  });
  ASSERT_EQ(archive.history.size(), 31u);
  EXPECT_GT(archive.history.back().hypervolume, archive.history.front().hypervolume);
  EXPECT_FALSE(has_dominated_pair(archive.members));
  for (size_t g = 1; g < stats.size(); ++g) {
    EXPECT_LE(stats[g].best[0], stats[g - 1].best[0]);
    EXPECT_LE(stats[g].best[1], stats[g - 1].best[1]);
  }
  int evaluations = 0;
  for (const auto& s : stats) evaluations += s.evaluations;
  EXPECT_EQ(calls.load(), evaluations);
}

TEST(Nsga2, CacheNeverSolvesAChromosomeTwice) {
  Nsga2Config cfg;
  cfg.population = 12;
  cfg.generations = 15;
  cfg.mutation = 0.02;
  std::mutex m;
  std::vector<Chromosome> solved;
  SearchProblem p;
  p.gene_sizes = {3, 3, 3, 4};
  p.tasks = 2;
  // Gene 3 is inactive unless gene 0 is 2.
  p.canonical = [](Chromosome c) {
    if (c[0] != 2) c[3] = 0;
    return c;
  };
  p.evaluate = [&](const Chromosome& c, int task) {
    {
      std::lock_guard lock(m);
      if (task == 0) solved.push_back(p.canonical(c));
    }
    return outcome(c[0] + c[1] + 0.5 * c[3] + task, 4.0 - c[0] + c[2]);
  };
  FitnessCache cache;
  nsga2_run(p, cfg, {}, &cache);
  std::set<Chromosome> distinct(solved.begin(), solved.end());
  EXPECT_EQ(distinct.size(), solved.size());
  EXPECT_EQ(cache.size(), solved.size());
  EXPECT_EQ(cache.solves(), static_cast<int>(solved.size()));
}

TEST(Nsga2, ResultDoesNotDependOnWorkerCount) {
  Nsga2Config cfg;
  cfg.population = 16;
  cfg.generations = 8;
  cfg.seed = 9;
  auto run = [&](int workers) {
    cfg.workers = workers;
    return nsga2_run(sphere_problem(), cfg);
  };
  const auto a = run(1), b = run(4);
  ASSERT_EQ(a.members.size(), b.members.size());
  for (size_t i = 0; i < a.members.size(); ++i) {
    EXPECT_EQ(a.members[i].genes, b.members[i].genes);
    EXPECT_EQ(a.members[i].objectives(), b.members[i].objectives());
  }
  for (size_t g = 0; g < a.history.size(); ++g) EXPECT_EQ(a.history[g].hypervolume, b.history[g].hypervolume);
}

TEST(Nsga2, FailingEvaluationIsPenalized) {
  SearchProblem p = sphere_problem();
  p.evaluate = [](const Chromosome& c, int) -> ScenarioOutcome {
    if (c[0] % 2) throw NumericError("odd");
    return outcome(c[0], 100.0 - c[0]);
  };
  Nsga2Config cfg;
  cfg.population = 10;
  cfg.generations = 2;
  const auto archive = nsga2_run(p, cfg);
  for (const auto& ind : archive.population)
    if (ind.genes[0] % 2) {
      EXPECT_EQ(ind.objectives(), (Objectives{1e6, 1e6}));
      EXPECT_NE(ind.fitness->scenarios[0].status.find("odd"), std::string::npos);
    }
}

TEST(Nsga2, InvalidConfigIsRejected) {
  Nsga2Config cfg;
  cfg.population = 1;
  EXPECT_THROW(nsga2_run(sphere_problem(), cfg), ContractError);
  cfg.population = 4;
  cfg.mutation = 1.5;
  EXPECT_THROW(nsga2_run(sphere_problem(), cfg), ContractError);
}

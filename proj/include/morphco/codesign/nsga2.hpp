#pragma once

// NSGA-II over integer chromosomes with two minimized objectives: fast
// non-dominated sorting, crowding distance, binary tournament on (rank,
// crowding), single-point crossover, random-reset mutation and elitist
// selection from parents plus offspring.

#include "morphco/codesign/chromosome.hpp"
#include "morphco/codesign/fitness.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

namespace morphco::codesign {

using Objectives = std::array<double, 2>;

// a is no worse in both objectives and better in one.
bool dominates(const Objectives& a, const Objectives& b);

// Fronts as index lists into `points`; front 0 is the non-dominated set.
// Indices inside a front are ascending.
std::vector<std::vector<int>> non_dominated_sort(const std::vector<Objectives>& points);

// Crowding distance of each member of `front` (indices into `points`), in
// front order. Boundary members of each objective get +∞.
std::vector<double> crowding_distance(const std::vector<Objectives>& points, const std::vector<int>& front);

// Area dominated by `points` and bounded by `reference`; points not strictly
// better than the reference in both objectives contribute nothing.
double hypervolume(std::vector<Objectives> points, const Objectives& reference);

struct Individual {
  Chromosome genes;
  std::optional<Fitness> fitness;
  int rank = -1;
  double crowding = 0.0;

  Objectives objectives() const;  // throws ContractError before evaluation
};

// Fronts of evaluated individuals; throws ContractError when one lacks fitness.
std::vector<std::vector<int>> non_dominated_sort(const std::vector<Individual>& population);

// Problem seen by the search: gene ranges, a canonical form used as the
// cache key, and the per-task evaluation (one task per scenario). `evaluate`
// is called concurrently from worker threads and must be thread-safe.
struct SearchProblem {
  std::vector<int> gene_sizes;
  int tasks = 1;
  std::function<Chromosome(const Chromosome&)> canonical;  // identity when empty
  std::function<ScenarioOutcome(const Chromosome&, int task)> evaluate;
};

struct Nsga2Config {
  int population = 100;
  int generations = 100;
  double crossover = 0.9;  // single-point, per pair
  double mutation = 0.06;  // random reset, per gene
  std::uint64_t seed = 1;
  int workers = 1;

  void validate() const;
};

struct GenerationStats {
  int generation = 0;
  int evaluations = 0;  // chromosomes evaluated in this generation
  int cache_hits = 0;
  int front_size = 0;
  int feasible = 0;     // individuals with every scenario feasible
  double hypervolume = 0.0;
  Objectives best{};    // per-objective minimum over the population
};

struct ParetoArchive {
  std::vector<Individual> members;  // non-dominated, sorted by objectives
  std::vector<GenerationStats> history;
  Objectives reference{};           // hypervolume reference: nadir of generation 0's front
  std::vector<Individual> population;  // final population
};

// Fitness memo keyed by canonical chromosome. Values are deterministic, so
// concurrent inserts of the same key are harmless.
class FitnessCache {
 public:
  std::optional<Fitness> find(const Chromosome& key) const;
  void insert(const Chromosome& key, const Fitness& fitness);
  std::size_t size() const;
  // Every stored (key, fitness), ordered by key.
  std::vector<std::pair<Chromosome, Fitness>> entries() const;
  // Number of evaluations that reached the problem (not served from cache).
  int solves() const { return solves_; }
  void count_solve(int n) { solves_ += n; }

 private:
  mutable std::mutex mutex_;
  std::map<Chromosome, Fitness> values_;
  int solves_ = 0;
};

using GenerationCallback = std::function<void(const GenerationStats&, const std::vector<Individual>& population)>;

ParetoArchive nsga2_run(const SearchProblem& problem, const Nsga2Config& config,
                        const GenerationCallback& on_generation = {}, FitnessCache* cache = nullptr);

// Runs fn(i) for i in [0, count) on `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace morphco::codesign

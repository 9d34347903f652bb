#include "morphco/codesign/nsga2.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <set>
#include <thread>

namespace morphco::codesign {

bool dominates(const Objectives& a, const Objectives& b) {
  return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

std::vector<std::vector<int>> non_dominated_sort(const std::vector<Objectives>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<std::vector<int>> dominated(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<int>> fronts;
  std::vector<int> current;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (dominates(points[i], points[j]))
        dominated[i].push_back(j);
      else if (dominates(points[j], points[i]))
        ++count[i];
    }
    if (count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<int> next;
    for (int i : current)
      for (int j : dominated[i])
        if (--count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<Objectives>& points, const std::vector<int>& front) {
  const int n = static_cast<int>(front.size());
  if (n == 0) throw ContractError("crowding distance of an empty front");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n, 0.0);
  if (n <= 2) return std::vector<double>(n, inf);
  std::vector<int> order(n);
  for (int m = 0; m < 2; ++m) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return points[front[a]][m] < points[front[b]][m]; });
    const double lo = points[front[order.front()]][m];
    const double hi = points[front[order.back()]][m];
    d[order.front()] = d[order.back()] = inf;
    if (hi - lo <= 0.0) continue;
    for (int k = 1; k + 1 < n; ++k)
      d[order[k]] += (points[front[order[k + 1]]][m] - points[front[order[k - 1]]][m]) / (hi - lo);
  }
  return d;
}

double hypervolume(std::vector<Objectives> points, const Objectives& ref) {
  std::erase_if(points, [&](const Objectives& p) { return !(p[0] < ref[0] && p[1] < ref[1]); });
  std::sort(points.begin(), points.end());
  double area = 0.0, ceiling = ref[1];
  for (const auto& p : points) {
    if (p[1] >= ceiling) continue;
    area += (ref[0] - p[0]) * (ceiling - p[1]);
    ceiling = p[1];
  }
  return area;
}

Objectives Individual::objectives() const {
  if (!fitness) throw ContractError("individual " + to_string(genes) + " has no fitness");
  return {fitness->energy, fitness->time};
}

std::vector<std::vector<int>> non_dominated_sort(const std::vector<Individual>& population) {
  std::vector<Objectives> points;
  points.reserve(population.size());
  for (const auto& ind : population) points.push_back(ind.objectives());
  return non_dominated_sort(points);
}

void Nsga2Config::validate() const {
  if (population < 2) throw ContractError("population must hold at least 2 individuals");
  if (generations < 0) throw ContractError("generations must be non-negative");
  if (!(crossover >= 0.0 && crossover <= 1.0)) throw ContractError("crossover probability outside [0, 1]");
  if (!(mutation >= 0.0 && mutation <= 1.0)) throw ContractError("mutation probability outside [0, 1]");
  if (workers < 1) throw ContractError("workers must be at least 1");
}

std::optional<Fitness> FitnessCache::find(const Chromosome& key) const {
  std::lock_guard lock(mutex_);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void FitnessCache::insert(const Chromosome& key, const Fitness& fitness) {
  std::lock_guard lock(mutex_);
  values_[key] = fitness;
}

std::size_t FitnessCache::size() const {
  std::lock_guard lock(mutex_);
  return values_.size();
}

std::vector<std::pair<Chromosome, Fitness>> FitnessCache::entries() const {
  std::lock_guard lock(mutex_);
  return {values_.begin(), values_.end()};
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> threads;
  const int n = std::min(workers, count);
  for (int t = 0; t < n; ++t)
    threads.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  for (auto& t : threads) t.join();
}

namespace {

class Search {
 public:
  Search(const SearchProblem& p, const Nsga2Config& c, FitnessCache& cache)
      : problem_(p), config_(c), cache_(cache), rng_(c.seed) {}

  Chromosome key(const Chromosome& c) const { return problem_.canonical ? problem_.canonical(c) : c; }

  Chromosome random() {
    Chromosome c(problem_.gene_sizes.size());
    for (size_t i = 0; i < c.size(); ++i)
      c[i] = std::uniform_int_distribution<int>(0, problem_.gene_sizes[i] - 1)(rng_);
    return c;
  }

  std::vector<Individual> initial_population() {
    std::vector<Individual> pop;
    std::set<Chromosome> seen;
    while (static_cast<int>(pop.size()) < config_.population) {
      Chromosome c = random();
      for (int tries = 0; tries < 100 && seen.count(key(c)); ++tries) c = random();
      seen.insert(key(c));
      pop.push_back(Individual{std::move(c), std::nullopt});
    }
    return pop;
  }

  // Fills in fitness, solving each distinct uncached chromosome once.
  void evaluate(std::vector<Individual>& pop, GenerationStats& stats) {
    std::vector<Chromosome> todo;
    std::set<Chromosome> queued;
    for (auto& ind : pop) {
      const Chromosome k = key(ind.genes);
      if (auto f = cache_.find(k)) {
        ind.fitness = *f;
        ++stats.cache_hits;
      } else if (queued.insert(k).second) {
        todo.push_back(k);
      } else {
        ++stats.cache_hits;
      }
    }
    const int tasks = problem_.tasks;
    std::vector<ScenarioOutcome> outcomes(todo.size() * tasks);
    parallel_for(static_cast<int>(outcomes.size()), config_.workers, [&](int i) {
      const Chromosome& c = todo[i / tasks];
      try {
        outcomes[i] = problem_.evaluate(c, i % tasks);
      } catch (const std::exception& e) {
        spdlog::warn("evaluation of {} task {} failed: {}", to_string(c), i % tasks, e.what());
        outcomes[i].feasible = false;
        outcomes[i].status = std::string("error: ") + e.what();
      }
    });
    for (size_t j = 0; j < todo.size(); ++j) {
      std::vector<ScenarioOutcome> mine(outcomes.begin() + j * tasks, outcomes.begin() + (j + 1) * tasks);
      cache_.insert(todo[j], combine(std::move(mine)));
    }
    cache_.count_solve(static_cast<int>(todo.size()));
    stats.evaluations = static_cast<int>(todo.size());
    for (auto& ind : pop)
      if (!ind.fitness) ind.fitness = cache_.find(key(ind.genes));
  }

  static void rank(std::vector<Individual>& pop) {
    std::vector<Objectives> pts;
    for (const auto& ind : pop) pts.push_back(ind.objectives());
    const auto fronts = non_dominated_sort(pts);
    for (size_t f = 0; f < fronts.size(); ++f) {
      const auto d = crowding_distance(pts, fronts[f]);
      for (size_t i = 0; i < fronts[f].size(); ++i) {
        pop[fronts[f][i]].rank = static_cast<int>(f);
        pop[fronts[f][i]].crowding = d[i];
      }
    }
  }

  const Individual& tournament(const std::vector<Individual>& pop) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(pop.size()) - 1);
    const Individual& a = pop[pick(rng_)];
    const Individual& b = pop[pick(rng_)];
    if (b.rank < a.rank || (b.rank == a.rank && b.crowding > a.crowding)) return b;
    return a;
  }

  std::vector<Individual> offspring(const std::vector<Individual>& parents) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int len = static_cast<int>(problem_.gene_sizes.size());
    std::vector<Individual> kids;
    while (static_cast<int>(kids.size()) < config_.population) {
      Chromosome c1 = tournament(parents).genes;
      Chromosome c2 = tournament(parents).genes;
      if (len > 1 && u(rng_) < config_.crossover) {
        const int cut = std::uniform_int_distribution<int>(1, len - 1)(rng_);
        for (int i = cut; i < len; ++i) std::swap(c1[i], c2[i]);
      }
      for (Chromosome* c : {&c1, &c2})
        for (int i = 0; i < len; ++i)
          if (u(rng_) < config_.mutation)
            (*c)[i] = std::uniform_int_distribution<int>(0, problem_.gene_sizes[i] - 1)(rng_);
      kids.push_back(Individual{std::move(c1), std::nullopt});
      if (static_cast<int>(kids.size()) < config_.population) kids.push_back(Individual{std::move(c2), std::nullopt});
    }
    return kids;
  }

  // Elitist selection from parents + offspring. Duplicates (same canonical
  // chromosome) compete only when there are too few distinct individuals.
  std::vector<Individual> select(std::vector<Individual> combined) {
    std::vector<Individual> pool, spare;
    std::set<Chromosome> seen;
    for (auto& ind : combined) (seen.insert(key(ind.genes)).second ? pool : spare).push_back(std::move(ind));
    std::vector<Objectives> pts;
    for (const auto& ind : pool) pts.push_back(ind.objectives());
    std::vector<Individual> next;
    for (const auto& front : non_dominated_sort(pts)) {
      const int room = config_.population - static_cast<int>(next.size());
      if (room <= 0) break;
      std::vector<int> order(front.size());
      std::iota(order.begin(), order.end(), 0);
      if (static_cast<int>(front.size()) > room) {
        const auto d = crowding_distance(pts, front);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] > d[b]; });
        order.resize(room);
        std::sort(order.begin(), order.end());
      }
      for (int i : order) next.push_back(pool[front[i]]);
    }
    for (size_t i = 0; static_cast<int>(next.size()) < config_.population && i < spare.size(); ++i)
      next.push_back(spare[i]);
    rank(next);
    return next;
  }

  std::vector<Individual> archive(const std::vector<Individual>& pop) const {
    std::vector<Individual> out;
    std::set<Chromosome> seen;
    for (const auto& ind : pop)
      if (ind.rank == 0 && seen.insert(key(ind.genes)).second) out.push_back(ind);
    std::sort(out.begin(), out.end(), [](const Individual& a, const Individual& b) {
      const auto oa = a.objectives(), ob = b.objectives();
      return oa != ob ? oa < ob : a.genes < b.genes;
    });
    return out;
  }

  void summarize(const std::vector<Individual>& pop, const std::vector<Individual>& front, const Objectives& ref,
                 GenerationStats& stats) const {
    stats.front_size = static_cast<int>(front.size());
    std::vector<Objectives> pts;
    for (const auto& ind : front) pts.push_back(ind.objectives());
    stats.hypervolume = hypervolume(pts, ref);
    stats.best = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (const auto& ind : pop) {
      const auto o = ind.objectives();
      stats.best = {std::min(stats.best[0], o[0]), std::min(stats.best[1], o[1])};
      stats.feasible += ind.fitness->all_feasible() ? 1 : 0;
    }
  }

 private:
  const SearchProblem& problem_;
  const Nsga2Config& config_;
  FitnessCache& cache_;
  std::mt19937_64 rng_;
};

}  // namespace

ParetoArchive nsga2_run(const SearchProblem& problem, const Nsga2Config& config, const GenerationCallback& on_generation,
                        FitnessCache* cache) {
  config.validate();
  if (problem.gene_sizes.empty() || !problem.evaluate || problem.tasks < 1)
    throw ContractError("search problem needs genes, tasks and an evaluator");
  for (int s : problem.gene_sizes)
    if (s < 1) throw ContractError("every gene needs at least one value");
  FitnessCache local;
  FitnessCache& memo = cache ? *cache : local;
  Search search(problem, config, memo);
  ParetoArchive out;

  std::vector<Individual> pop = search.initial_population();
  GenerationStats stats;
  search.evaluate(pop, stats);
  Search::rank(pop);
  std::vector<Individual> front = search.archive(pop);
  out.reference = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& ind : front) {
    const auto o = ind.objectives();
    out.reference = {std::max(out.reference[0], o[0]), std::max(out.reference[1], o[1])};
  }
  search.summarize(pop, front, out.reference, stats);
  out.history.push_back(stats);
  if (on_generation) on_generation(stats, pop);

  for (int g = 1; g <= config.generations; ++g) {
    std::vector<Individual> kids = search.offspring(pop);
    stats = GenerationStats{};
    stats.generation = g;
    search.evaluate(kids, stats);
    std::vector<Individual> combined = std::move(pop);
    combined.insert(combined.end(), std::make_move_iterator(kids.begin()), std::make_move_iterator(kids.end()));
    pop = search.select(std::move(combined));
    front = search.archive(pop);
    search.summarize(pop, front, out.reference, stats);
    out.history.push_back(stats);
    spdlog::debug("generation {}: {} new, {} cached, front {}, hypervolume {:.6g}", g, stats.evaluations,
                 stats.cache_hits, stats.front_size, stats.hypervolume);
    if (on_generation) on_generation(stats, pop);
  }
  out.members = std::move(front);
  out.population = std::move(pop);
  return out;
}

}  // namespace morphco::codesign

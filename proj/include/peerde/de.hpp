#pragma once

//
// Generational differential evolution over a box-constrained search space.
//
// One generation forms a trial vector for every member of the population:
// a mutation strategy combines scaled member differences into a mutant,
// binomial crossover mixes the mutant with the target, out-of-bound
// components are clipped, and greedy selection keeps the trial iff its
// fitness does not exceed the target's. All random draws for a generation
// happen on a single serial stream before any fitness evaluation, so runs
// are seed-deterministic regardless of evaluation parallelism.
//

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "peerde/rng.hpp"

namespace peerde::de {

// Box constraints for the decision variables.
struct SearchBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  SearchBounds(std::vector<double> lo, std::vector<double> up);

  std::size_t dimension() const { return lower.size(); }
  double clip(double v, std::size_t j) const;
  bool contains(std::span<const double> x) const;
};

struct Individual {
  std::vector<double> params;
  std::optional<double> fitness;
};

struct Population {
  std::vector<Individual> members;
  int generation = 0;

  // Index of the lowest-fitness member; every member must be evaluated.
  std::size_t best_index() const;
};

enum class MutationStrategy { Rand1, Best1, RandToBest1, Best2, Rand2 };

// Number of distinct random indices the strategy consumes (r1..rk).
int distinct_indices_required(MutationStrategy s);
std::string_view to_string(MutationStrategy s);
std::optional<MutationStrategy> parse_strategy(std::string_view name);

struct StoppingRule {
  int max_generations = 1000;               // hard cap, always enforced
  std::optional<double> target_fitness;     // stop once best <= target
  std::optional<int> stagnation_window;     // stop after this many
                                            // generations without improvement
};

struct DEConfig {
  int np = 40;
  double f = 0.8;   // difference scaling factor, in [0, 2]
  double cr = 0.9;  // crossover rate, in [0, 1]
  MutationStrategy strategy = MutationStrategy::Rand1;
  StoppingRule stop;
  std::uint64_t seed = 0;
  // Worker threads for fitness evaluation. Does not affect results: all
  // random draws are made serially before evaluations start.
  int threads = 1;
};

// Throws std::invalid_argument when a field is out of range or NP is below
// the strategy's minimum (distinct indices plus the excluded target).
void validate(const DEConfig& config);

// Minimization objective. Must be deterministic and, when threads > 1,
// safe to call concurrently.
using Objective = std::function<double(std::span<const double>)>;

enum class StopReason { MaxGenerations, TargetReached, Stagnation };
std::string_view to_string(StopReason r);

struct RunResult {
  Individual best;
  std::vector<double> best_history;  // best fitness per generation, G=0 first
  int generations = 0;               // evolution steps executed
  StopReason reason = StopReason::MaxGenerations;
  std::uint64_t evaluations = 0;
};

// Optional introspection callbacks, invoked serially from the evolve loop.
struct TraceHooks {
  std::function<void(int generation, int target_index,
                     std::span<const int> indices)>
      on_mutation;
  std::function<void(const Population&)> on_generation;
};

// Uniform random population inside the bounds: x = B_L + r (B_U - B_L)
// with r drawn in [0, 1) per member and per dimension. Fitness left unset.
Population initialize(const SearchBounds& bounds, const DEConfig& config,
                      Rng& rng);
Population initialize(const SearchBounds& bounds, const DEConfig& config);

// k pairwise-distinct indices in [0, np), all different from `exclude`.
std::vector<int> draw_distinct_indices(int k, int np, int exclude, Rng& rng);

// The strategy's linear combination for the given (already drawn) indices.
// The result is not bound-repaired.
std::vector<double> mutant_vector(const Population& pop, int target_index,
                                  int best_index, MutationStrategy strategy,
                                  double f, std::span<const int> indices);

// Draws the strategy's indices from `rng` and forms the mutant. The drawn
// indices are reported through `drawn` when non-null.
std::vector<double> mutate(const Population& pop, int target_index,
                           int best_index, const DEConfig& config, Rng& rng,
                           std::vector<int>* drawn = nullptr);

// Binomial crossover: component j comes from the mutant when r <= cr or
// j == j_rand, from the target otherwise. j_rand is drawn once per call
// and reported through `j_rand_out` when non-null.
std::vector<double> crossover(std::span<const double> target,
                              std::span<const double> mutant, double cr,
                              Rng& rng, int* j_rand_out = nullptr);

// Greedy survivor selection: the trial wins ties. Both individuals must
// carry finite fitness; otherwise throws EvaluationError.
const Individual& select(const Individual& target, const Individual& trial);

// Full synchronous loop: initialize, evaluate, then per generation
// mutate / crossover / repair / evaluate / select until a stopping rule
// fires. best_history has one entry per generation including G=0.
RunResult evolve(const Objective& objective, const SearchBounds& bounds,
                 const DEConfig& config, const TraceHooks* hooks = nullptr);

}  // namespace peerde::de

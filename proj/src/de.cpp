#include "peerde/de.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "peerde/errors.hpp"

namespace peerde::de {

namespace {

std::string format_vector(std::span<const double> x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j) os << ", ";
    os << x[j];
  }
  os << ")";
  return os.str();
}

double evaluate_checked(const Objective& objective,
                        std::span<const double> x) {
  const double v = objective(x);
  if (!std::isfinite(v)) {
    throw EvaluationError("objective returned a non-finite value at " +
                          format_vector(x));
  }
  return v;
}

// Evaluates members [0, n) of `params` into `out`. Draw order is already
// fixed by the caller, so the partition across threads cannot change the
// result.
void evaluate_all(const Objective& objective,
                  const std::vector<std::vector<double>>& params,
                  std::vector<double>& out, int threads) {
  const std::size_t n = params.size();
  out.resize(n);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = evaluate_checked(objective, params[i]);
    return;
  }
  const int workers = std::min<int>(threads, static_cast<int>(n));
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = static_cast<std::size_t>(w); i < n;
             i += static_cast<std::size_t>(workers)) {
          out[i] = evaluate_checked(objective, params[i]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

SearchBounds::SearchBounds(std::vector<double> lo, std::vector<double> up)
    : lower(std::move(lo)), upper(std::move(up)) {
  if (lower.empty())
    throw std::invalid_argument("bounds must have dimension >= 1");
  if (lower.size() != upper.size())
    throw std::invalid_argument("lower and upper bounds differ in length");
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] <= upper[j]))
      throw std::invalid_argument("lower bound exceeds upper bound");
  }
}

double SearchBounds::clip(double v, std::size_t j) const {
  return std::min(std::max(v, lower[j]), upper[j]);
}

bool SearchBounds::contains(std::span<const double> x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] < lower[j] || x[j] > upper[j]) return false;
  return true;
}

std::size_t Population::best_index() const {
  if (members.empty()) throw std::logic_error("empty population");
  std::size_t best = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!members[i].fitness)
      throw std::logic_error("best_index on unevaluated population");
    if (*members[i].fitness < *members[best].fitness) best = i;
  }
  return best;
}

int distinct_indices_required(MutationStrategy s) {
  switch (s) {
    case MutationStrategy::Rand1: return 3;
    case MutationStrategy::Best1: return 2;
    case MutationStrategy::RandToBest1: return 2;
    case MutationStrategy::Best2: return 4;
    case MutationStrategy::Rand2: return 5;
  }
  throw std::logic_error("unknown strategy");
}

std::string_view to_string(MutationStrategy s) {
  switch (s) {
    case MutationStrategy::Rand1: return "rand1";
    case MutationStrategy::Best1: return "best1";
    case MutationStrategy::RandToBest1: return "randtobest1";
    case MutationStrategy::Best2: return "best2";
    case MutationStrategy::Rand2: return "rand2";
  }
  return "?";
}

std::optional<MutationStrategy> parse_strategy(std::string_view name) {
  if (name == "rand1") return MutationStrategy::Rand1;
  if (name == "best1") return MutationStrategy::Best1;
  if (name == "randtobest1" || name == "rand-to-best1")
    return MutationStrategy::RandToBest1;
  if (name == "best2") return MutationStrategy::Best2;
  if (name == "rand2") return MutationStrategy::Rand2;
  return std::nullopt;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxGenerations: return "max generations";
    case StopReason::TargetReached: return "target reached";
    case StopReason::Stagnation: return "stagnation";
  }
  return "?";
}

void validate(const DEConfig& config) {
  const int needed = distinct_indices_required(config.strategy) + 1;
  if (config.np < needed) {
    throw std::invalid_argument(
        "np=" + std::to_string(config.np) + " too small for strategy " +
        std::string(to_string(config.strategy)) + " (needs at least " +
        std::to_string(needed) + ")");
  }
  if (!(config.f >= 0.0 && config.f <= 2.0))
    throw std::invalid_argument("f must lie in [0, 2]");
  if (!(config.cr >= 0.0 && config.cr <= 1.0))
    throw std::invalid_argument("cr must lie in [0, 1]");
  if (config.stop.max_generations < 0)
    throw std::invalid_argument("max_generations must be non-negative");
  if (config.stop.stagnation_window && *config.stop.stagnation_window < 1)
    throw std::invalid_argument("stagnation_window must be positive");
  if (config.threads < 1)
    throw std::invalid_argument("threads must be positive");
}

Population initialize(const SearchBounds& bounds, const DEConfig& config,
                      Rng& rng) {
  validate(config);
  const std::size_t dim = bounds.dimension();
  Population pop;
  pop.generation = 0;
  pop.members.resize(static_cast<std::size_t>(config.np));
  for (auto& member : pop.members) {
    member.params.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const double r = rng.uniform01();
      member.params[j] = bounds.lower[j] + r * (bounds.upper[j] - bounds.lower[j]);
    }
  }
  return pop;
}

Population initialize(const SearchBounds& bounds, const DEConfig& config) {
  Rng rng(config.seed);
  return initialize(bounds, config, rng);
}

std::vector<int> draw_distinct_indices(int k, int np, int exclude, Rng& rng) {
  if (k >= np)
    throw std::invalid_argument("population too small for distinct draws");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  while (static_cast<int>(out.size()) < k) {
    const int c = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(np)));
    if (c == exclude) continue;
    if (std::find(out.begin(), out.end(), c) != out.end()) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<double> mutant_vector(const Population& pop, int target_index,
                                  int best_index, MutationStrategy strategy,
                                  double f, std::span<const int> indices) {
  if (static_cast<int>(indices.size()) < distinct_indices_required(strategy))
    throw std::invalid_argument("not enough indices for strategy");
  const auto& x = [&](int i) -> const std::vector<double>& {
    return pop.members[static_cast<std::size_t>(i)].params;
  };
  const std::size_t dim = x(target_index).size();
  std::vector<double> v(dim);
  switch (strategy) {
    case MutationStrategy::Rand1:
      for (std::size_t j = 0; j < dim; ++j)
        v[j] = x(indices[0])[j] + f * (x(indices[1])[j] - x(indices[2])[j]);
      break;
    case MutationStrategy::Best1:
      for (std::size_t j = 0; j < dim; ++j)
        v[j] = x(best_index)[j] + f * (x(indices[0])[j] - x(indices[1])[j]);
      break;
    case MutationStrategy::RandToBest1:
      for (std::size_t j = 0; j < dim; ++j)
        v[j] = x(target_index)[j] +
               f * (x(best_index)[j] - x(target_index)[j]) +
               f * (x(indices[0])[j] - x(indices[1])[j]);
      break;
    case MutationStrategy::Best2:
      for (std::size_t j = 0; j < dim; ++j)
        v[j] = x(best_index)[j] + f * (x(indices[0])[j] - x(indices[1])[j]) +
               f * (x(indices[2])[j] - x(indices[3])[j]);
      break;
    case MutationStrategy::Rand2:
      for (std::size_t j = 0; j < dim; ++j)
        v[j] = x(indices[0])[j] + f * (x(indices[1])[j] - x(indices[2])[j]) +
               f * (x(indices[3])[j] - x(indices[4])[j]);
      break;
  }
  return v;
}

std::vector<double> mutate(const Population& pop, int target_index,
                           int best_index, const DEConfig& config, Rng& rng,
                           std::vector<int>* drawn) {
  const int k = distinct_indices_required(config.strategy);
  if (config.np < k + 1)
    throw std::invalid_argument("np too small to draw distinct indices");
  auto indices = draw_distinct_indices(k, static_cast<int>(pop.members.size()),
                                       target_index, rng);
  auto v = mutant_vector(pop, target_index, best_index, config.strategy,
                         config.f, indices);
  if (drawn) *drawn = std::move(indices);
  return v;
}

std::vector<double> crossover(std::span<const double> target,
                              std::span<const double> mutant, double cr,
                              Rng& rng, int* j_rand_out) {
  if (target.size() != mutant.size())
    throw std::invalid_argument("target and mutant dimensions differ");
  const std::size_t dim = target.size();
  const int j_rand = static_cast<int>(rng.uniform_below(dim));
  std::vector<double> trial(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double r = rng.uniform01();
    trial[j] = (r <= cr || static_cast<int>(j) == j_rand) ? mutant[j] : target[j];
  }
  if (j_rand_out) *j_rand_out = j_rand;
  return trial;
}

const Individual& select(const Individual& target, const Individual& trial) {
  if (!target.fitness || !trial.fitness)
    throw EvaluationError("select requires evaluated individuals");
  if (!std::isfinite(*target.fitness) || !std::isfinite(*trial.fitness))
    throw EvaluationError("select saw a non-finite fitness");
  return (*trial.fitness <= *target.fitness) ? trial : target;
}

RunResult evolve(const Objective& objective, const SearchBounds& bounds,
                 const DEConfig& config, const TraceHooks* hooks) {
  validate(config);
  Rng rng(config.seed);
  Population pop = initialize(bounds, config, rng);
  const std::size_t np = pop.members.size();

  RunResult result;
  {
    std::vector<std::vector<double>> params;
    params.reserve(np);
    for (const auto& m : pop.members) params.push_back(m.params);
    std::vector<double> fitness;
    evaluate_all(objective, params, fitness, config.threads);
    for (std::size_t i = 0; i < np; ++i) pop.members[i].fitness = fitness[i];
    result.evaluations += np;
  }
  result.best_history.push_back(*pop.members[pop.best_index()].fitness);

  double best_so_far = result.best_history.front();
  int stagnant = 0;
  result.reason = StopReason::MaxGenerations;

  std::vector<std::vector<double>> trials(np);
  std::vector<double> trial_fitness;
  for (int gen = 0; gen < config.stop.max_generations; ++gen) {
    const int best = static_cast<int>(pop.best_index());

    // All draws for this generation happen here, on the single stream.
    std::vector<int> indices;
    for (std::size_t i = 0; i < np; ++i) {
      auto mutant =
          mutate(pop, static_cast<int>(i), best, config, rng, &indices);
      for (std::size_t j = 0; j < mutant.size(); ++j)
        mutant[j] = bounds.clip(mutant[j], j);
      trials[i] = crossover(pop.members[i].params, mutant, config.cr, rng);
      if (hooks && hooks->on_mutation)
        hooks->on_mutation(gen, static_cast<int>(i), indices);
    }

    evaluate_all(objective, trials, trial_fitness, config.threads);
    result.evaluations += np;

    for (std::size_t i = 0; i < np; ++i) {
      Individual trial{std::move(trials[i]), trial_fitness[i]};
      const Individual& survivor = select(pop.members[i], trial);
      if (&survivor == &trial) pop.members[i] = std::move(trial);
    }
    pop.generation = gen + 1;
    result.generations = gen + 1;

    const double gen_best = *pop.members[pop.best_index()].fitness;
    result.best_history.push_back(gen_best);
    if (hooks && hooks->on_generation) hooks->on_generation(pop);

    if (config.stop.target_fitness &&
        gen_best <= *config.stop.target_fitness) {
      result.reason = StopReason::TargetReached;
      break;
    }
    if (config.stop.stagnation_window) {
      if (best_so_far - gen_best > 1e-12) {
        stagnant = 0;
      } else {
        ++stagnant;
      }
      if (stagnant >= *config.stop.stagnation_window) {
        result.reason = StopReason::Stagnation;
        break;
      }
    }
    best_so_far = std::min(best_so_far, gen_best);
  }

  result.best = pop.members[pop.best_index()];
  return result;
}

}  // namespace peerde::de

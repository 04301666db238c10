#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "apsk/channel.hpp"
#include "apsk/constellation.hpp"

namespace apsk::ga {

enum class Selection {
  kStochasticUniform,
  kRemainder,
  kUniform,
  kRoulette,
  kTournament,
};

enum class Crossover {
  kScattered,
  kSinglePoint,
  kTwoPoint,
  kIntermediate,
  kHeuristic,
  kArithmetic,
};

const std::vector<Selection>& all_selections();
const std::vector<Crossover>& all_crossovers();

const char* to_string(Selection s);
const char* to_string(Crossover c);
Selection selection_from_string(const std::string& s);
Crossover crossover_from_string(const std::string& s);

struct GaConfig {
  int pop_size = 80;
  int max_generations = 130;
  Selection selection = Selection::kRemainder;
  Crossover crossover = Crossover::kSinglePoint;
  int elite_count = 2;
  double crossover_fraction = 0.8;
  int tournament_size = 4;
  double mutation_scale = 1.0;
  double mutation_shrink = 1.0;
  double heuristic_ratio = 1.2;
  double intermediate_ratio = 1.0;
  int stall_generations = 50;
  double stall_tol = 1e-6;
  std::uint64_t seed = 0;
};

void validate_config(const GaConfig& cfg);

struct Population {
  int generation_index = 0;
  std::vector<GeneVector> members;
  std::vector<double> mse;     // raw objective per member
  std::vector<double> scores;  // fitness R = 1/mse
  int best_index = 0;          // argmax scores
};

enum class Termination { kMaxGenerations, kStall };
const char* to_string(Termination t);

struct TraceEntry {
  int generation;
  double best_mse;
  double mean_mse;
  GeneVector best_genes;
};

struct RunTrace {
  std::vector<TraceEntry> generations;
  Termination termination_reason = Termination::kMaxGenerations;
};

struct RunResult {
  GeneVector best;
  double best_mse;
  RunTrace trace;
};

// Returns the candidate's MSE. generation is the index being evaluated,
// child_index the candidate's slot within that generation's evaluation batch.
using MseEvaluator =
    std::function<double(const GeneVector& genes, int generation, int child_index)>;

// Expectation of the rank-r member is proportional to 1/sqrt(r) (r = 1 best),
// normalized so the sum equals n_parents. Score ties rank by member index.
std::vector<double> rank_scale(const std::vector<double>& scores, int n_parents);

// All selection functions return exactly n member indices.
std::vector<int> select_stochastic_uniform(const std::vector<double>& expectations,
                                           int n, std::mt19937_64& rng);
std::vector<int> select_remainder(const std::vector<double>& expectations, int n,
                                  std::mt19937_64& rng);
std::vector<int> select_uniform(int pop_size, int n, std::mt19937_64& rng);
std::vector<int> select_roulette(const std::vector<double>& expectations, int n,
                                 std::mt19937_64& rng);
std::vector<int> select_tournament(const std::vector<double>& scores, int n, int k,
                                   std::mt19937_64& rng);
std::vector<int> select(Selection method, const std::vector<double>& expectations,
                        const std::vector<double>& scores, int n, const GaConfig& cfg,
                        std::mt19937_64& rng);

// Deterministic mixing cores. The xover_* wrappers draw the randomness, call
// these, then clamp and repair; keeping the cores separate makes the operator
// postconditions exactly testable.
std::vector<double> scattered_mix(const std::vector<double>& p1,
                                  const std::vector<double>& p2,
                                  const std::vector<char>& take_p1);
std::vector<double> single_point_mix(const std::vector<double>& p1,
                                     const std::vector<double>& p2, int cut);
std::vector<double> two_point_mix(const std::vector<double>& p1,
                                  const std::vector<double>& p2, int cut1, int cut2);
std::vector<double> intermediate_mix(const std::vector<double>& p1,
                                     const std::vector<double>& p2,
                                     const std::vector<double>& weights, double ratio);
std::vector<double> heuristic_mix(const std::vector<double>& worse,
                                  const std::vector<double>& better, double ratio,
                                  const std::vector<GeneBound>& bounds);
std::vector<double> arithmetic_mix(const std::vector<double>& p1,
                                   const std::vector<double>& p2, double alpha);

// One child per invocation. score1/score2 are the parents' fitness values
// (only heuristic uses them, to pick the fitter parent; ties favor p1).
GeneVector crossover_child(Crossover op, const GeneVector& p1, const GeneVector& p2,
                           double score1, double score2, const GaConfig& cfg,
                           std::mt19937_64& rng);

// Adds N(0, sigma_i) per gene with sigma_i = scale * range_i *
// (1 - shrink*gen/max_generations), then clamps and repairs.
GeneVector mutate_gaussian(const GeneVector& g, int generation, const GaConfig& cfg,
                           std::mt19937_64& rng);

Population next_generation(const Population& pop, const GaConfig& cfg,
                           const MseEvaluator& evaluator, std::mt19937_64& rng);

// Uniform initial population, generational loop with elitism, stall detection
// (relative best-MSE improvement < stall_tol over stall_generations).
RunResult run(const RingLayout& layout, SymmetryMode symmetry, const GaConfig& cfg,
              const MseEvaluator& evaluator);

// Channel-backed fitness at ch.snr_db. Evaluation streams derive from
// (cfg.seed, generation) with common random numbers, plus the child index
// without; ev.seed is ignored here so a run replays from cfg.seed alone.
RunResult run(const RingLayout& layout, SymmetryMode symmetry, const GaConfig& cfg,
              const ChannelParams& ch, const EvalSettings& ev);

}  // namespace apsk::ga

#include "apsk/genetic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "apsk/rng.hpp"

namespace apsk::ga {

namespace {

// Seed-derivation tags for the two independent random streams of a run.
constexpr std::uint64_t kOpsTag = 1;   // init, selection, crossover, mutation
constexpr std::uint64_t kEvalTag = 2;  // channel noise streams

// Stable descending argsort; ties keep the lower index first.
std::vector<int> argsort_desc(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return v[a] > v[b]; });
  return idx;
}

// Bounds used for clamping and sampling. The nominal phase interval for the
// unconstrained mode is half-open [0, 2pi); clamp targets must stay inside it.
std::vector<GeneBound> effective_bounds(const RingLayout& layout,
                                        SymmetryMode symmetry) {
  auto bounds = gene_bounds(layout, symmetry);
  if (symmetry == SymmetryMode::kNone) {
    const double open_hi = std::nextafter(kTwoPi, 0.0);
    for (std::size_t i = layout.n_rings() - 1; i < bounds.size(); ++i)
      bounds[i].hi = open_hi;
  }
  return bounds;
}

GeneVector clamp_and_repair(const RingLayout& layout, SymmetryMode symmetry,
                            std::vector<double> flat,
                            const std::vector<GeneBound>& bounds) {
  for (std::size_t i = 0; i < flat.size(); ++i)
    flat[i] = std::clamp(flat[i], bounds[i].lo, bounds[i].hi);
  return GeneVector::from_flat(layout, symmetry, flat);
}

void check_same_shape(const GeneVector& p1, const GeneVector& p2) {
  if (!(p1.layout == p2.layout) || p1.symmetry != p2.symmetry ||
      p1.radii.size() != p2.radii.size() || p1.phases.size() != p2.phases.size())
    throw std::invalid_argument("crossover parents have different shapes");
}

int roulette_spin(const std::vector<double>& wheel, double total,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, total);
  const double r = u(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < wheel.size(); ++i) {
    cum += wheel[i];
    if (r < cum) return static_cast<int>(i);
  }
  return static_cast<int>(wheel.size()) - 1;
}

}  // namespace

const std::vector<Selection>& all_selections() {
  static const std::vector<Selection> v = {
      Selection::kStochasticUniform, Selection::kRemainder, Selection::kUniform,
      Selection::kRoulette, Selection::kTournament};
  return v;
}

const std::vector<Crossover>& all_crossovers() {
  static const std::vector<Crossover> v = {
      Crossover::kScattered,    Crossover::kSinglePoint, Crossover::kTwoPoint,
      Crossover::kIntermediate, Crossover::kHeuristic,   Crossover::kArithmetic};
  return v;
}

const char* to_string(Selection s) {
  switch (s) {
    case Selection::kStochasticUniform: return "stochastic_uniform";
    case Selection::kRemainder: return "remainder";
    case Selection::kUniform: return "uniform";
    case Selection::kRoulette: return "roulette";
    case Selection::kTournament: return "tournament";
  }
  throw std::logic_error("bad selection");
}

const char* to_string(Crossover c) {
  switch (c) {
    case Crossover::kScattered: return "scattered";
    case Crossover::kSinglePoint: return "single_point";
    case Crossover::kTwoPoint: return "two_point";
    case Crossover::kIntermediate: return "intermediate";
    case Crossover::kHeuristic: return "heuristic";
    case Crossover::kArithmetic: return "arithmetic";
  }
  throw std::logic_error("bad crossover");
}

Selection selection_from_string(const std::string& s) {
  for (Selection v : all_selections())
    if (s == to_string(v)) return v;
  throw std::invalid_argument("bad selection '" + s + "'");
}

Crossover crossover_from_string(const std::string& s) {
  for (Crossover v : all_crossovers())
    if (s == to_string(v)) return v;
  throw std::invalid_argument("bad crossover '" + s + "'");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kMaxGenerations: return "max_generations";
    case Termination::kStall: return "stall";
  }
  throw std::logic_error("bad termination");
}

void validate_config(const GaConfig& cfg) {
  if (cfg.pop_size < 4) throw std::invalid_argument("pop_size must be >= 4");
  if (cfg.max_generations < 1)
    throw std::invalid_argument("max_generations must be >= 1");
  if (cfg.elite_count < 0 || cfg.elite_count >= cfg.pop_size)
    throw std::invalid_argument("elite_count must be in [0, pop_size)");
  if (!(cfg.crossover_fraction > 0.0 && cfg.crossover_fraction <= 1.0))
    throw std::invalid_argument("crossover_fraction must be in (0, 1]");
  if (cfg.tournament_size < 1)
    throw std::invalid_argument("tournament_size must be >= 1");
  if (cfg.mutation_scale < 0.0)
    throw std::invalid_argument("mutation_scale must be >= 0");
  if (cfg.stall_generations < 1)
    throw std::invalid_argument("stall_generations must be >= 1");
  if (cfg.stall_tol < 0.0) throw std::invalid_argument("stall_tol must be >= 0");
}

std::vector<double> rank_scale(const std::vector<double>& scores, int n_parents) {
  if (scores.empty()) throw std::domain_error("rank_scale on empty scores");
  if (n_parents < 1) throw std::domain_error("n_parents must be >= 1");
  const auto order = argsort_desc(scores);
  std::vector<double> e(scores.size());
  double total = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const double raw = 1.0 / std::sqrt(static_cast<double>(r + 1));
    e[order[r]] = raw;
    total += raw;
  }
  const double scale = n_parents / total;
  for (double& x : e) x *= scale;
  return e;
}

std::vector<int> select_stochastic_uniform(const std::vector<double>& expectations,
                                           int n, std::mt19937_64& rng) {
  if (expectations.empty()) throw std::domain_error("empty expectations");
  const double total =
      std::accumulate(expectations.begin(), expectations.end(), 0.0);
  if (std::abs(total - n) > 1e-6 * std::max(1, n))
    throw std::domain_error("expectations must sum to the slot count");
  const double step = total / n;
  std::uniform_real_distribution<double> u(0.0, step);
  const double start = u(rng);

  std::vector<int> out;
  out.reserve(n);
  int idx = 0;
  double cum = expectations[0];
  for (int k = 0; k < n; ++k) {
    const double pos = start + k * step;
    while (pos >= cum && idx + 1 < static_cast<int>(expectations.size())) {
      ++idx;
      cum += expectations[idx];
    }
    out.push_back(idx);
  }
  return out;
}

std::vector<int> select_remainder(const std::vector<double>& expectations, int n,
                                  std::mt19937_64& rng) {
  if (expectations.empty()) throw std::domain_error("empty expectations");
  std::vector<int> out;
  out.reserve(n);
  std::vector<double> frac(expectations.size());
  for (std::size_t i = 0; i < expectations.size(); ++i) {
    const double c = std::floor(expectations[i]);
    for (int k = 0; k < static_cast<int>(c); ++k) out.push_back(static_cast<int>(i));
    frac[i] = expectations[i] - c;
  }
  if (static_cast<int>(out.size()) > n)
    throw std::domain_error("integer expectation parts exceed the slot count");
  const double f_total = std::accumulate(frac.begin(), frac.end(), 0.0);
  std::uniform_int_distribution<int> any(0,
                                         static_cast<int>(expectations.size()) - 1);
  while (static_cast<int>(out.size()) < n) {
    if (f_total > 0.0)
      out.push_back(roulette_spin(frac, f_total, rng));
    else
      out.push_back(any(rng));
  }
  return out;
}

std::vector<int> select_uniform(int pop_size, int n, std::mt19937_64& rng) {
  if (pop_size < 1) throw std::domain_error("empty population");
  std::uniform_int_distribution<int> u(0, pop_size - 1);
  std::vector<int> out(n);
  for (int& x : out) x = u(rng);
  return out;
}

std::vector<int> select_roulette(const std::vector<double>& expectations, int n,
                                 std::mt19937_64& rng) {
  if (expectations.empty()) throw std::domain_error("empty expectations");
  const double total =
      std::accumulate(expectations.begin(), expectations.end(), 0.0);
  if (!(total > 0.0)) throw std::domain_error("expectations sum to zero");
  std::vector<int> out(n);
  for (int& x : out) x = roulette_spin(expectations, total, rng);
  return out;
}

std::vector<int> select_tournament(const std::vector<double>& scores, int n, int k,
                                   std::mt19937_64& rng) {
  if (scores.empty()) throw std::domain_error("empty scores");
  if (k < 1 || k > static_cast<int>(scores.size()))
    throw std::domain_error("tournament size exceeds population");
  std::uniform_int_distribution<int> u(0, static_cast<int>(scores.size()) - 1);
  std::vector<int> out(n);
  for (int& x : out) {
    int best = u(rng);
    for (int j = 1; j < k; ++j) {
      const int cand = u(rng);
      if (scores[cand] > scores[best]) best = cand;  // earlier draw wins ties
    }
    x = best;
  }
  return out;
}

std::vector<int> select(Selection method, const std::vector<double>& expectations,
                        const std::vector<double>& scores, int n,
                        const GaConfig& cfg, std::mt19937_64& rng) {
  switch (method) {
    case Selection::kStochasticUniform:
      return select_stochastic_uniform(expectations, n, rng);
    case Selection::kRemainder:
      return select_remainder(expectations, n, rng);
    case Selection::kUniform:
      return select_uniform(static_cast<int>(scores.size()), n, rng);
    case Selection::kRoulette:
      return select_roulette(expectations, n, rng);
    case Selection::kTournament:
      return select_tournament(scores, n, cfg.tournament_size, rng);
  }
  throw std::logic_error("bad selection");
}

std::vector<double> scattered_mix(const std::vector<double>& p1,
                                  const std::vector<double>& p2,
                                  const std::vector<char>& take_p1) {
  std::vector<double> out(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i) out[i] = take_p1[i] ? p1[i] : p2[i];
  return out;
}

std::vector<double> single_point_mix(const std::vector<double>& p1,
                                     const std::vector<double>& p2, int cut) {
  std::vector<double> out(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i)
    out[i] = static_cast<int>(i) < cut ? p1[i] : p2[i];
  return out;
}

std::vector<double> two_point_mix(const std::vector<double>& p1,
                                  const std::vector<double>& p2, int cut1,
                                  int cut2) {
  std::vector<double> out(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    const int k = static_cast<int>(i);
    out[i] = (k >= cut1 && k < cut2) ? p2[i] : p1[i];
  }
  return out;
}

std::vector<double> intermediate_mix(const std::vector<double>& p1,
                                     const std::vector<double>& p2,
                                     const std::vector<double>& weights,
                                     double ratio) {
  std::vector<double> out(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i)
    out[i] = p1[i] + weights[i] * ratio * (p2[i] - p1[i]);
  return out;
}

std::vector<double> heuristic_mix(const std::vector<double>& worse,
                                  const std::vector<double>& better, double ratio,
                                  const std::vector<GeneBound>& bounds) {
  std::vector<double> out(worse.size());
  for (std::size_t i = 0; i < worse.size(); ++i) {
    const double v = worse[i] + ratio * (better[i] - worse[i]);
    out[i] = std::clamp(v, bounds[i].lo, bounds[i].hi);
  }
  return out;
}

std::vector<double> arithmetic_mix(const std::vector<double>& p1,
                                   const std::vector<double>& p2, double alpha) {
  std::vector<double> out(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i)
    out[i] = alpha * p1[i] + (1.0 - alpha) * p2[i];
  return out;
}

GeneVector crossover_child(Crossover op, const GeneVector& p1, const GeneVector& p2,
                           double score1, double score2, const GaConfig& cfg,
                           std::mt19937_64& rng) {
  check_same_shape(p1, p2);
  const auto f1 = p1.flat();
  const auto f2 = p2.flat();
  const int len = static_cast<int>(f1.size());
  const auto bounds = effective_bounds(p1.layout, p1.symmetry);

  std::vector<double> child;
  switch (op) {
    case Crossover::kScattered: {
      std::uniform_int_distribution<int> coin(0, 1);
      std::vector<char> take(f1.size());
      for (auto& t : take) t = static_cast<char>(coin(rng));
      child = scattered_mix(f1, f2, take);
      break;
    }
    case Crossover::kSinglePoint: {
      if (len < 2) throw std::domain_error("point crossover needs >= 2 genes");
      std::uniform_int_distribution<int> cut(1, len - 1);
      child = single_point_mix(f1, f2, cut(rng));
      break;
    }
    case Crossover::kTwoPoint: {
      if (len < 3)
        throw std::domain_error("two-point crossover needs >= 3 genes");
      std::uniform_int_distribution<int> cut(1, len - 1);
      int c1 = cut(rng);
      int c2 = cut(rng);
      while (c2 == c1) c2 = cut(rng);
      if (c2 < c1) std::swap(c1, c2);
      child = two_point_mix(f1, f2, c1, c2);
      break;
    }
    case Crossover::kIntermediate: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> w(f1.size());
      for (auto& x : w) x = u(rng);
      child = intermediate_mix(f1, f2, w, cfg.intermediate_ratio);
      break;
    }
    case Crossover::kHeuristic: {
      const bool p1_better = score1 >= score2;  // tie keeps the first parent
      const auto& better = p1_better ? f1 : f2;
      const auto& worse = p1_better ? f2 : f1;
      child = heuristic_mix(worse, better, cfg.heuristic_ratio, bounds);
      break;
    }
    case Crossover::kArithmetic: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      child = arithmetic_mix(f1, f2, u(rng));
      break;
    }
  }
  return clamp_and_repair(p1.layout, p1.symmetry, std::move(child), bounds);
}

GeneVector mutate_gaussian(const GeneVector& g, int generation, const GaConfig& cfg,
                           std::mt19937_64& rng) {
  const auto bounds = effective_bounds(g.layout, g.symmetry);
  auto flat = g.flat();
  double factor =
      1.0 - cfg.mutation_shrink * generation / std::max(1, cfg.max_generations);
  if (factor < 0.0) factor = 0.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    // Draw unconditionally so RNG consumption does not depend on sigma.
    const double z = gauss(rng);
    const double sigma = cfg.mutation_scale * (bounds[i].hi - bounds[i].lo) * factor;
    flat[i] += sigma * z;
  }
  return clamp_and_repair(g.layout, g.symmetry, std::move(flat), bounds);
}

Population next_generation(const Population& pop, const GaConfig& cfg,
                           const MseEvaluator& evaluator, std::mt19937_64& rng) {
  validate_config(cfg);
  if (static_cast<int>(pop.members.size()) != cfg.pop_size)
    throw std::invalid_argument("population size does not match config");

  const int n_elite = cfg.elite_count;
  const int n_children = cfg.pop_size - n_elite;
  const int n_xover =
      static_cast<int>(std::lround(cfg.crossover_fraction * n_children));
  const int n_mut = n_children - n_xover;
  const int n_parents = 2 * n_xover + n_mut;
  const int next_gen = pop.generation_index + 1;

  const auto expectations = rank_scale(pop.scores, std::max(1, n_parents));
  auto parents =
      select(cfg.selection, expectations, pop.scores, n_parents, cfg, rng);
  // Selection output is ordered (SUS and remainder emit runs of the same
  // index); shuffle so crossover pairs are not systematically self-paired.
  for (int i = n_parents - 1; i > 0; --i) {
    std::uniform_int_distribution<int> u(0, i);
    std::swap(parents[i], parents[u(rng)]);
  }

  Population next;
  next.generation_index = next_gen;
  next.members.reserve(cfg.pop_size);
  next.mse.reserve(cfg.pop_size);

  const auto order = argsort_desc(pop.scores);
  for (int i = 0; i < n_elite; ++i) {
    next.members.push_back(pop.members[order[i]]);
    next.mse.push_back(pop.mse[order[i]]);
  }

  std::vector<GeneVector> children;
  children.reserve(n_children);
  for (int i = 0; i < n_xover; ++i) {
    const int a = parents[2 * i];
    const int b = parents[2 * i + 1];
    children.push_back(crossover_child(cfg.crossover, pop.members[a],
                                       pop.members[b], pop.scores[a],
                                       pop.scores[b], cfg, rng));
  }
  for (int j = 0; j < n_mut; ++j) {
    const int a = parents[2 * n_xover + j];
    children.push_back(mutate_gaussian(pop.members[a], next_gen, cfg, rng));
  }

  for (int i = 0; i < n_children; ++i) {
    next.members.push_back(children[i]);
    next.mse.push_back(evaluator(children[i], next_gen, i));
  }

  next.scores.resize(cfg.pop_size);
  for (int i = 0; i < cfg.pop_size; ++i) next.scores[i] = fitness(next.mse[i]);
  next.best_index = static_cast<int>(std::distance(
      next.scores.begin(), std::max_element(next.scores.begin(), next.scores.end())));
  return next;
}

RunResult run(const RingLayout& layout, SymmetryMode symmetry, const GaConfig& cfg,
              const MseEvaluator& evaluator) {
  validate_config(cfg);
  const auto bounds = effective_bounds(layout, symmetry);
  std::mt19937_64 ops_rng(derive_seed(cfg.seed, kOpsTag));

  Population pop;
  pop.generation_index = 0;
  pop.members.reserve(cfg.pop_size);
  for (int i = 0; i < cfg.pop_size; ++i) {
    std::vector<double> flat(bounds.size());
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      std::uniform_real_distribution<double> u(bounds[j].lo, bounds[j].hi);
      flat[j] = u(ops_rng);
    }
    pop.members.push_back(GeneVector::from_flat(layout, symmetry, flat));
  }
  pop.mse.resize(cfg.pop_size);
  pop.scores.resize(cfg.pop_size);
  for (int i = 0; i < cfg.pop_size; ++i) {
    pop.mse[i] = evaluator(pop.members[i], 0, i);
    pop.scores[i] = fitness(pop.mse[i]);
  }
  pop.best_index = static_cast<int>(std::distance(
      pop.scores.begin(), std::max_element(pop.scores.begin(), pop.scores.end())));

  RunResult result;
  result.best = pop.members[pop.best_index];
  result.best_mse = pop.mse[pop.best_index];

  auto record = [&](const Population& p) {
    TraceEntry entry;
    entry.generation = p.generation_index;
    entry.best_mse = p.mse[p.best_index];
    entry.mean_mse =
        std::accumulate(p.mse.begin(), p.mse.end(), 0.0) / p.mse.size();
    entry.best_genes = p.members[p.best_index];
    result.trace.generations.push_back(entry);
    if (p.mse[p.best_index] < result.best_mse) {
      result.best_mse = p.mse[p.best_index];
      result.best = p.members[p.best_index];
    }
  };
  record(pop);

  result.trace.termination_reason = Termination::kMaxGenerations;
  for (int g = 1; g <= cfg.max_generations; ++g) {
    pop = next_generation(pop, cfg, evaluator, ops_rng);
    record(pop);
    if (g >= cfg.stall_generations) {
      const double ref =
          result.trace.generations[g - cfg.stall_generations].best_mse;
      const double cur = result.trace.generations[g].best_mse;
      const double improvement = ref > 0.0 ? (ref - cur) / ref : 0.0;
      if (improvement < cfg.stall_tol) {
        result.trace.termination_reason = Termination::kStall;
        break;
      }
    }
  }
  return result;
}

RunResult run(const RingLayout& layout, SymmetryMode symmetry, const GaConfig& cfg,
              const ChannelParams& ch, const EvalSettings& ev) {
  if (ev.n_symbols < 10000)
    throw std::invalid_argument("fitness evaluation needs n_symbols >= 10000");
  const std::uint64_t eval_master = derive_seed(cfg.seed, kEvalTag);
  const SalehParams saleh = ch.saleh;
  const double snr_db = ch.snr_db;
  const std::int64_t n_symbols = ev.n_symbols;
  const bool crn = ev.crn;

  // With common random numbers one stream is shared by every candidate of a
  // generation; unit noise is scaled by each candidate's own sigma.
  struct StreamCache {
    int generation = -1;
    NoiseStream stream;
  };
  auto cache = std::make_shared<StreamCache>();

  MseEvaluator evaluator = [=](const GeneVector& genes, int generation,
                               int child_index) {
    const Constellation c = expand(genes);
    const AmplifiedConstellation amp = amplify(c, saleh);
    const NoiseParams np = snr_to_noise(snr_db, amp.es_avg);
    if (crn) {
      if (cache->generation != generation) {
        cache->stream.fill(derive_seed(eval_master, generation, 0), n_symbols,
                           amp.order());
        cache->generation = generation;
      }
      return mse_with_stream(amp, np.sigma_per_dim, cache->stream);
    }
    NoiseStream stream;
    stream.fill(derive_seed(eval_master, generation, child_index + 1), n_symbols,
                amp.order());
    return mse_with_stream(amp, np.sigma_per_dim, stream);
  };
  return run(layout, symmetry, cfg, evaluator);
}

}  // namespace apsk::ga

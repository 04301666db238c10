#include "apsk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "apsk/rng.hpp"
#include "apsk/version.hpp"

namespace apsk::harness {

namespace {

namespace fs = std::filesystem;

// Shortest round-trip decimal form; keeps every emitted file replay-stable.
std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join_genes(const GeneVector& g) {
  std::string out;
  const auto flat = g.flat();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (i) out += ',';
    out += fmt(flat[i]);
  }
  return out;
}

// Resolved configuration, one line. Worker count is deliberately absent:
// outputs must not depend on evaluation parallelism.
std::string config_line(const ExperimentSpec& spec) {
  std::ostringstream s;
  s << "layout=" << to_string(spec.layout)
    << " symmetry=" << to_string(spec.symmetry)
    << " selection=" << ga::to_string(spec.ga.selection)
    << " crossover=" << ga::to_string(spec.ga.crossover)
    << " pop=" << spec.ga.pop_size
    << " generations=" << spec.ga.max_generations
    << " elite=" << spec.ga.elite_count
    << " crossover_fraction=" << fmt(spec.ga.crossover_fraction)
    << " tournament_size=" << spec.ga.tournament_size
    << " mutation_scale=" << fmt(spec.ga.mutation_scale)
    << " mutation_shrink=" << fmt(spec.ga.mutation_shrink)
    << " heuristic_ratio=" << fmt(spec.ga.heuristic_ratio)
    << " intermediate_ratio=" << fmt(spec.ga.intermediate_ratio)
    << " stall_generations=" << spec.ga.stall_generations
    << " stall_tol=" << fmt(spec.ga.stall_tol)
    << " snr_db=" << fmt(spec.channel.snr_db)
    << " symbols=" << spec.eval.n_symbols
    << " crn=" << (spec.eval.crn ? 1 : 0)
    << " replicates=" << spec.replicates;
  return s.str();
}

std::string file_header(const ExperimentSpec& spec) {
  std::string h;
  h += std::string("# apskopt ") + kVersion + "\n";
  h += "# seed " + std::to_string(spec.ga.seed) + "\n";
  h += "# config " + config_line(spec) + "\n";
  return h;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string sanitize_csv(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

OptimizeOutput cmd_optimize(const ExperimentSpec& spec) {
  ga::validate_config(spec.ga);
  fs::create_directories(spec.out_dir);

  OptimizeOutput out;
  out.result = ga::run(spec.layout, spec.symmetry, spec.ga, spec.channel, spec.eval);
  out.best = expand(out.result.best);

  const std::string header = file_header(spec);

  out.constellation_path = spec.out_dir / "constellation.txt";
  write_file(out.constellation_path, header + to_record(out.best));

  out.trace_path = spec.out_dir / "trace.csv";
  {
    std::string t = header;
    t += std::string("# termination_reason ") +
         ga::to_string(out.result.trace.termination_reason) + "\n";
    t += "generation,best_mse,mean_mse\n";
    for (const auto& e : out.result.trace.generations) {
      t += std::to_string(e.generation) + "," + fmt(e.best_mse) + "," +
           fmt(e.mean_mse) + "\n";
    }
    write_file(out.trace_path, t);
  }

  out.summary_path = spec.out_dir / "summary.txt";
  {
    std::string s = header;
    s += "best_mse " + fmt(out.result.best_mse) + "\n";
    s += "generations " +
         std::to_string(out.result.trace.generations.back().generation) + "\n";
    s += std::string("termination_reason ") +
         ga::to_string(out.result.trace.termination_reason) + "\n";
    s += "best_genes " + join_genes(out.result.best) + "\n";
    write_file(out.summary_path, s);
  }
  return out;
}

SweepOutput cmd_sweep(const ExperimentSpec& spec) {
  ga::validate_config(spec.ga);
  if (spec.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  fs::create_directories(spec.out_dir);

  const auto& xovers = ga::all_crossovers();
  const auto& sels = ga::all_selections();
  const int n_cells = static_cast<int>(xovers.size() * sels.size());
  const int n_jobs = n_cells * spec.replicates;

  struct JobResult {
    double mse = std::numeric_limits<double>::quiet_NaN();
    int last_generation = 0;
    ga::Termination reason = ga::Termination::kMaxGenerations;
    std::string error;
  };
  std::vector<JobResult> results(n_jobs);

  // Jobs write disjoint slots; output assembly below is single-threaded and
  // ordered, so the worker count never reaches the emitted bytes.
  std::atomic<int> next_job{0};
  auto worker = [&]() {
    for (;;) {
      const int j = next_job.fetch_add(1);
      if (j >= n_jobs) return;
      const int cell = j / spec.replicates;
      const int rep = j % spec.replicates;
      ga::GaConfig cfg = spec.ga;
      cfg.crossover = xovers[cell / 5];
      cfg.selection = sels[cell % 5];
      cfg.seed = derive_seed(spec.ga.seed, static_cast<std::uint64_t>(cell),
                             static_cast<std::uint64_t>(rep));
      try {
        const auto r =
            ga::run(spec.layout, spec.symmetry, cfg, spec.channel, spec.eval);
        results[j].mse = r.best_mse;
        results[j].last_generation = r.trace.generations.back().generation;
        results[j].reason = r.trace.termination_reason;
      } catch (const std::exception& e) {
        results[j].error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min(spec.workers, n_jobs));
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  SweepOutput out;
  out.cells.reserve(n_cells);
  for (int cell = 0; cell < n_cells; ++cell) {
    SweepCell c;
    c.crossover = xovers[cell / 5];
    c.selection = sels[cell % 5];
    for (int rep = 0; rep < spec.replicates; ++rep) {
      const JobResult& r = results[cell * spec.replicates + rep];
      c.seeds.push_back(derive_seed(spec.ga.seed, static_cast<std::uint64_t>(cell),
                                    static_cast<std::uint64_t>(rep)));
      if (r.error.empty())
        c.mse.push_back(r.mse);
      else
        c.errors.push_back(r.error);
    }
    c.best_mse = c.mse.empty()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : *std::min_element(c.mse.begin(), c.mse.end());
    c.median_mse = median(c.mse);
    out.cells.push_back(std::move(c));
  }

  const std::string header = file_header(spec);

  out.table_path = spec.out_dir / "sweep.csv";
  {
    std::string t = header;
    t += "crossover";
    for (auto s : sels) t += std::string(",") + ga::to_string(s);
    t += "\n";
    for (std::size_t xi = 0; xi < xovers.size(); ++xi) {
      t += ga::to_string(xovers[xi]);
      for (std::size_t si = 0; si < sels.size(); ++si)
        t += "," + fmt(out.cells[xi * sels.size() + si].best_mse);
      t += "\n";
    }
    write_file(out.table_path, t);
  }

  out.long_path = spec.out_dir / "sweep_long.csv";
  {
    std::string t = header;
    t += "crossover,selection,replicate,seed,best_mse,generations,termination_reason,error\n";
    for (int cell = 0; cell < n_cells; ++cell) {
      for (int rep = 0; rep < spec.replicates; ++rep) {
        const JobResult& r = results[cell * spec.replicates + rep];
        t += ga::to_string(xovers[cell / 5]);
        t += std::string(",") + ga::to_string(sels[cell % 5]);
        t += "," + std::to_string(rep);
        t += "," + std::to_string(derive_seed(spec.ga.seed,
                                              static_cast<std::uint64_t>(cell),
                                              static_cast<std::uint64_t>(rep)));
        if (r.error.empty()) {
          t += "," + fmt(r.mse);
          t += "," + std::to_string(r.last_generation);
          t += std::string(",") + ga::to_string(r.reason);
          t += ",-";
        } else {
          t += ",nan,0,-," + sanitize_csv(r.error);
        }
        t += "\n";
      }
    }
    write_file(out.long_path, t);
  }
  return out;
}

std::vector<double> SnrGrid::values() const {
  if (!(step_db > 0.0)) throw std::invalid_argument("snr step must be positive");
  std::vector<double> v;
  for (int i = 0;; ++i) {
    const double x = min_db + i * step_db;
    if (x > max_db + 1e-9) break;
    v.push_back(x);
  }
  return v;
}

CurveOutput cmd_curve(const std::vector<fs::path>& documents, const SnrGrid& grid,
                      const EvalSettings& eval, const SalehParams& saleh,
                      const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto snrs = grid.values();

  CurveOutput out;
  std::vector<std::pair<std::string, Constellation>> loaded;
  for (std::size_t di = 0; di < documents.size(); ++di) {
    const std::string name = documents[di].stem().string();
    std::ifstream in(documents[di]);
    if (!in) {
      out.errors.push_back(name + ": cannot open " + documents[di].string());
      continue;
    }
    try {
      loaded.emplace_back(name, from_record(in));
    } catch (const std::exception& e) {
      out.errors.push_back(name + ": " + e.what());
    }
  }

  std::map<std::string, std::vector<double>> by_name;
  for (std::size_t ni = 0; ni < loaded.size(); ++ni) {
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      EvalSettings ev = eval;
      ev.seed = derive_seed(eval.seed, ni, si);
      ChannelParams ch;
      ch.snr_db = snrs[si];
      ch.saleh = saleh;
      const double mse = estimate_mse(loaded[ni].second, ch, ev);
      out.points.push_back({loaded[ni].first, snrs[si], mse});
    }
    by_name[loaded[ni].first].resize(snrs.size());
  }
  std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) {
    return a.name != b.name ? a.name < b.name : a.snr_db < b.snr_db;
  });
  for (const auto& p : out.points) {
    auto it = by_name.find(p.name);
    const auto si = static_cast<std::size_t>(
        std::lround((p.snr_db - grid.min_db) / grid.step_db));
    if (it != by_name.end() && si < it->second.size()) it->second[si] = p.mse;
  }

  // Curve-order flips are reported, never asserted: with Monte-Carlo noise a
  // crossing is a qualitative observation.
  std::vector<std::string> names;
  for (const auto& [name, _] : by_name) names.push_back(name);
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = a + 1; b < names.size(); ++b) {
      const auto& va = by_name[names[a]];
      const auto& vb = by_name[names[b]];
      for (std::size_t si = 1; si < snrs.size(); ++si) {
        const double d0 = va[si - 1] - vb[si - 1];
        const double d1 = va[si] - vb[si];
        if (d0 != 0.0 && d1 != 0.0 && (d0 < 0) != (d1 < 0)) {
          out.crossings.push_back(names[a] + " and " + names[b] +
                                  " cross between " + fmt(snrs[si - 1]) +
                                  " dB and " + fmt(snrs[si]) + " dB");
        }
      }
    }
  }

  out.csv_path = out_dir / "curve.csv";
  std::string t;
  t += std::string("# apskopt ") + kVersion + "\n";
  t += "# seed " + std::to_string(eval.seed) + "\n";
  t += "# config symbols=" + std::to_string(eval.n_symbols) +
       " snr_min=" + fmt(grid.min_db) + " snr_max=" + fmt(grid.max_db) +
       " snr_step=" + fmt(grid.step_db) + "\n";
  t += "name,snr_db,mse\n";
  for (const auto& p : out.points)
    t += p.name + "," + fmt(p.snr_db) + "," + fmt(p.mse) + "\n";
  write_file(out.csv_path, t);
  return out;
}

EvaluateOutput cmd_evaluate(const fs::path& document, double snr_db,
                            EvalMethod method, const EvalSettings& eval,
                            const SalehParams& saleh) {
  std::ifstream in(document);
  if (!in) throw std::runtime_error("cannot open " + document.string());
  const Constellation c = from_record(in);
  const auto amp = amplify(c, saleh);
  const auto np = snr_to_noise(snr_db, amp.es_avg);

  EvaluateOutput out;
  out.method = method;
  out.snr_db = snr_db;
  out.es_avg = amp.es_avg;
  out.n0 = np.n0;
  out.seed = eval.seed;
  ChannelParams ch;
  ch.snr_db = snr_db;
  ch.saleh = saleh;
  out.mse = method == EvalMethod::kMonteCarlo ? estimate_mse(c, ch, eval)
                                              : exact_mse(c, ch);
  out.fitness = fitness(out.mse);
  return out;
}

namespace {

struct ReferenceGeometry {
  const char* name;
  RingLayout layout;
  SymmetryMode symmetry;
  std::vector<double> radii;
  std::vector<double> phases;
  double phase_shift;  // applied to every phase gene before expansion
};

// Published table columns for both layouts. The 32-APSK reference column was
// published over [pi/2, 3pi/2]; shifting by -pi/2 maps it onto the [0, pi]
// range used here and a global rotation leaves the distortion unchanged.
const std::vector<ReferenceGeometry>& reference_geometries() {
  static const std::vector<ReferenceGeometry> v = {
      {"16apsk_baseline", RingLayout::apsk16(), SymmetryMode::kDouble,
       {0.6404},
       {1.0482, 0.9355, 0.6374, 0.4891},
       0.0},
      {"16apsk_double", RingLayout::apsk16(), SymmetryMode::kDouble,
       {0.8996},
       {1.0360, 0.8867, 0.5802, 0.4013},
       0.0},
      {"16apsk_single", RingLayout::apsk16(), SymmetryMode::kSingle,
       {0.9627},
       {2.5650, 2.3592, 2.0128, 1.7317, 1.4188, 1.2107, 0.8849, 0.5372},
       0.0},
      {"16apsk_none", RingLayout::apsk16(), SymmetryMode::kNone,
       {0.9593},
       {5.0872, 4.7453, 4.3400, 3.7447, 3.4121, 3.1109, 2.7071, 2.2326, 1.8925,
        1.5490, 1.2567, 1.0438, 0.7340, 0.4687, 0.2205, 0.0699},
       0.0},
      {"32apsk_baseline", RingLayout::apsk32(), SymmetryMode::kSingle,
       {0.2453, 0.8163},
       {3.9215, 3.8878, 3.7697, 3.6837, 3.4184, 3.6422, 3.2628, 3.1881, 2.6639,
        2.6409, 2.4866, 2.3709, 2.2034, 2.1479, 2.0492, 2.0199},
       -kPi / 2.0},
      {"32apsk_double", RingLayout::apsk32(), SymmetryMode::kDouble,
       {0.2446, 0.8285},
       {0.1664, 0.2998, 0.3009, 0.6293, 0.5831, 0.9550, 0.9219, 1.0028},
       0.0},
      {"32apsk_single", RingLayout::apsk32(), SymmetryMode::kSingle,
       {0.2487, 0.8217},
       {0.5301, 0.7360, 0.7342, 0.8993, 1.1148, 1.2771, 1.4283, 1.5063, 1.8236,
        1.9895, 2.0694, 2.1592, 2.2590, 2.5016, 2.5479, 2.5813},
       0.0},
  };
  return v;
}

}  // namespace

std::vector<fs::path> export_published_constellations(const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> paths;
  for (const auto& ref : reference_geometries()) {
    GeneVector g;
    g.layout = ref.layout;
    g.symmetry = ref.symmetry;
    g.radii = ref.radii;
    g.phases = ref.phases;
    for (double& p : g.phases) p += ref.phase_shift;
    const Constellation c = expand(g);
    const fs::path path = out_dir / (std::string(ref.name) + ".txt");
    write_file(path, to_record(c));
    paths.push_back(path);
  }
  return paths;
}

namespace {

struct CliOptions {
  std::string layout = "16apsk";
  std::string symmetry = "double";
  std::string selection = "remainder";
  std::string crossover = "single_point";
  int pop = 80;
  int generations = 130;
  double snr_db = 10.0;
  std::uint64_t symbols = 200000;
  std::uint64_t seed = 0;
  int replicates = 5;
  int workers = 1;
  std::string out = "out";
  int elite = 2;
  double crossover_fraction = 0.8;
  int tournament_size = 4;
  double mutation_scale = 1.0;
  double mutation_shrink = 1.0;
  double heuristic_ratio = 1.2;
  double intermediate_ratio = 1.0;
  int stall_generations = 50;
  double stall_tol = 1e-6;
  bool crn = true;
  std::string config;
};

constexpr const char* kGeneCountHelp =
    "Gene counts (radii + phase genes): 16apsk 5 (double) / 9 (single) / 17 "
    "(none); 32apsk 10 (double) / 18 (single) / 34 (none).";

void add_common_flags(CLI::App* sub, CliOptions& o) {
  sub->add_option("--layout", o.layout, "Ring layout: 16apsk or 32apsk")
      ->capture_default_str();
  sub->add_option("--symmetry", o.symmetry, "Symmetry mode: double, single or none")
      ->capture_default_str();
  sub->add_option("--selection", o.selection,
                  "Selection: stochastic_uniform, remainder, uniform, roulette "
                  "or tournament")
      ->capture_default_str();
  sub->add_option("--crossover", o.crossover,
                  "Crossover: scattered, single_point, two_point, intermediate, "
                  "heuristic or arithmetic")
      ->capture_default_str();
  sub->add_option("--pop", o.pop, "Population size")->capture_default_str();
  sub->add_option("--generations", o.generations, "Maximum generations")
      ->capture_default_str();
  sub->add_option("--snr-db", o.snr_db, "Target SNR in dB")->capture_default_str();
  sub->add_option("--symbols", o.symbols, "Monte Carlo symbols per evaluation")
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  sub->add_option("--elite", o.elite, "Elite count")->capture_default_str();
  sub->add_option("--crossover-fraction", o.crossover_fraction,
                  "Fraction of children produced by crossover")
      ->capture_default_str();
  sub->add_option("--tournament-size", o.tournament_size, "Tournament size")
      ->capture_default_str();
  sub->add_option("--mutation-scale", o.mutation_scale,
                  "Mutation sigma as a fraction of each gene range")
      ->capture_default_str();
  sub->add_option("--mutation-shrink", o.mutation_shrink,
                  "Linear mutation shrink over the generations")
      ->capture_default_str();
  sub->add_option("--heuristic-ratio", o.heuristic_ratio,
                  "Heuristic crossover step past the fitter parent")
      ->capture_default_str();
  sub->add_option("--intermediate-ratio", o.intermediate_ratio,
                  "Intermediate crossover blend range")
      ->capture_default_str();
  sub->add_option("--stall-generations", o.stall_generations,
                  "Stall window in generations")
      ->capture_default_str();
  sub->add_option("--stall-tol", o.stall_tol,
                  "Relative best-MSE improvement treated as progress")
      ->capture_default_str();
  sub->add_flag("--crn,!--no-crn", o.crn,
                "Share one noise stream per generation (common random numbers)")
      ->capture_default_str();
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--config", o.config,
                  "Config file with key=value lines naming the long flags; "
                  "explicit flags override file values");
}

// Turns a key=value config file into long-flag tokens for the given
// subcommand, dropping keys the command line already set.
std::vector<std::string> config_file_tokens(const std::string& path,
                                            CLI::App* sub) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError("could not read config file: " + path);
  const auto trim = [](const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  };
  std::vector<std::string> tokens;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("config line " + std::to_string(line_no) +
                                 ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    const CLI::Option* o = sub->get_option_no_throw("--" + key);
    if (o == nullptr)
      throw CLI::ValidationError("config key '" + key + "' does not match any " +
                                 sub->get_name() + " option");
    if (o->count() > 0) continue;
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

ExperimentSpec spec_from_options(const CliOptions& o) {
  ExperimentSpec spec;
  spec.layout = layout_from_string(o.layout);
  spec.symmetry = symmetry_from_string(o.symmetry);
  spec.ga.selection = ga::selection_from_string(o.selection);
  spec.ga.crossover = ga::crossover_from_string(o.crossover);
  spec.ga.pop_size = o.pop;
  spec.ga.max_generations = o.generations;
  spec.ga.elite_count = o.elite;
  spec.ga.crossover_fraction = o.crossover_fraction;
  spec.ga.tournament_size = o.tournament_size;
  spec.ga.mutation_scale = o.mutation_scale;
  spec.ga.mutation_shrink = o.mutation_shrink;
  spec.ga.heuristic_ratio = o.heuristic_ratio;
  spec.ga.intermediate_ratio = o.intermediate_ratio;
  spec.ga.stall_generations = o.stall_generations;
  spec.ga.stall_tol = o.stall_tol;
  spec.ga.seed = o.seed;
  spec.channel.snr_db = o.snr_db;
  spec.eval.n_symbols = o.symbols;
  spec.eval.crn = o.crn;
  spec.replicates = o.replicates;
  spec.workers = o.workers;
  spec.out_dir = o.out;
  return spec;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"APSK constellation optimizer for a nonlinear satellite channel"};
  app.footer(kGeneCountHelp);
  app.require_subcommand(1);

  CliOptions opt;

  auto* optimize = app.add_subcommand(
      "optimize", "Run one genetic optimization and write the best geometry");
  add_common_flags(optimize, opt);
  optimize->footer(kGeneCountHelp);

  auto* sweep = app.add_subcommand(
      "sweep", "Run the full selection x crossover grid with replicates");
  add_common_flags(sweep, opt);
  sweep->footer(kGeneCountHelp);
  sweep->add_option("--replicates", opt.replicates, "Runs per grid cell")
      ->capture_default_str();
  sweep->add_option("--workers", opt.workers, "Concurrent runs")
      ->capture_default_str();

  auto* curve = app.add_subcommand(
      "curve", "Evaluate MSE over an SNR grid for constellation documents");
  std::vector<std::string> curve_docs;
  SnrGrid grid;
  std::uint64_t curve_symbols = 1000000;
  std::uint64_t curve_seed = 0;
  std::string curve_out = "out";
  curve->add_option("documents", curve_docs, "Constellation document files")
      ->required();
  curve->add_option("--snr-min", grid.min_db, "Grid start in dB")
      ->capture_default_str();
  curve->add_option("--snr-max", grid.max_db, "Grid end in dB")
      ->capture_default_str();
  curve->add_option("--snr-step", grid.step_db, "Grid step in dB")
      ->capture_default_str();
  curve->add_option("--symbols", curve_symbols, "Monte Carlo symbols per point")
      ->capture_default_str();
  curve->add_option("--seed", curve_seed, "Master seed")->capture_default_str();
  curve->add_option("--out", curve_out, "Output directory")->capture_default_str();
  curve->add_option("--config", opt.config,
                    "Config file with key=value lines naming the long flags");

  auto* evaluate = app.add_subcommand(
      "evaluate", "Evaluate one constellation document at one SNR");
  std::string eval_doc;
  double eval_snr = 10.0;
  std::string eval_method = "mc";
  std::uint64_t eval_symbols = 1000000;
  std::uint64_t eval_seed = 1;
  evaluate->add_option("document", eval_doc, "Constellation document file")
      ->required();
  evaluate->add_option("--snr-db", eval_snr, "SNR in dB")->capture_default_str();
  evaluate
      ->add_option("--method", eval_method,
                   "mc (Monte Carlo) or exact (quadrature)")
      ->capture_default_str();
  evaluate->add_option("--symbols", eval_symbols, "Monte Carlo symbols")
      ->capture_default_str();
  evaluate->add_option("--seed", eval_seed, "Monte Carlo seed")
      ->capture_default_str();
  evaluate->add_option("--config", opt.config,
                       "Config file with key=value lines naming the long flags");

  auto* export_cmd = app.add_subcommand(
      "export-published-constellations",
      "Write the shipped published-geometry documents");
  std::string export_out = "data/constellations";
  export_cmd->add_option("--out", export_out, "Output directory")
      ->capture_default_str();

  std::vector<std::string> tokens = args;

  try {
    // A config file expands into long-flag tokens once, then the line is
    // reparsed so CLI11 applies its usual validation; flags given explicitly
    // are never overridden because their keys are dropped from the expansion.
    bool config_applied = false;
    for (;;) {
      std::vector<const char*> argv;
      argv.reserve(tokens.size());
      for (const auto& a : tokens) argv.push_back(a.c_str());
      app.parse(static_cast<int>(argv.size()), argv.data());
      if (opt.config.empty() || config_applied) break;
      CLI::App* sub = nullptr;
      for (CLI::App* s : {optimize, sweep, curve, evaluate})
        if (s->parsed()) sub = s;
      if (sub == nullptr) break;
      const auto extra = config_file_tokens(opt.config, sub);
      if (extra.empty()) break;
      const auto at = std::find(tokens.begin() + 1, tokens.end(), sub->get_name());
      if (at == tokens.end()) break;
      tokens.insert(at + 1, extra.begin(), extra.end());
      config_applied = true;
    }

    if (optimize->parsed()) {
      const auto spec = spec_from_options(opt);
      const auto out = cmd_optimize(spec);
      std::cout << "best_mse " << fmt(out.result.best_mse) << "\n"
                << "termination_reason "
                << ga::to_string(out.result.trace.termination_reason) << "\n"
                << "constellation " << out.constellation_path.string() << "\n"
                << "trace " << out.trace_path.string() << "\n"
                << "summary " << out.summary_path.string() << "\n";
    } else if (sweep->parsed()) {
      const auto spec = spec_from_options(opt);
      const auto out = cmd_sweep(spec);
      int failures = 0;
      for (const auto& c : out.cells)
        failures += static_cast<int>(c.errors.size());
      std::cout << "table " << out.table_path.string() << "\n"
                << "long " << out.long_path.string() << "\n"
                << "failed_replicates " << failures << "\n";
    } else if (curve->parsed()) {
      EvalSettings ev;
      ev.n_symbols = curve_symbols;
      ev.seed = curve_seed;
      std::vector<fs::path> docs(curve_docs.begin(), curve_docs.end());
      const auto out = cmd_curve(docs, grid, ev, SalehParams{}, curve_out);
      std::cout << "curve " << out.csv_path.string() << "\n";
      for (const auto& e : out.errors) std::cout << "error " << e << "\n";
      for (const auto& c : out.crossings) std::cout << "crossing " << c << "\n";
      if (!out.errors.empty()) return 1;
    } else if (evaluate->parsed()) {
      EvalMethod method;
      if (eval_method == "mc") method = EvalMethod::kMonteCarlo;
      else if (eval_method == "exact") method = EvalMethod::kExact;
      else throw CLI::ValidationError("--method must be mc or exact");
      EvalSettings ev;
      ev.n_symbols = eval_symbols;
      ev.seed = eval_seed;
      const auto out = cmd_evaluate(eval_doc, eval_snr, method, ev, SalehParams{});
      std::cout << "method " << (method == EvalMethod::kMonteCarlo ? "mc" : "exact")
                << "\n"
                << "snr_db " << fmt(out.snr_db) << "\n"
                << "es_avg " << fmt(out.es_avg) << "\n"
                << "n0 " << fmt(out.n0) << "\n"
                << "mse " << fmt(out.mse) << "\n"
                << "fitness " << fmt(out.fitness) << "\n"
                << "seed " << out.seed << "\n";
    } else if (export_cmd->parsed()) {
      const auto paths = export_published_constellations(export_out);
      for (const auto& p : paths) std::cout << p.string() << "\n";
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace apsk::harness

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apsk/channel.hpp"
#include "apsk/constellation.hpp"
#include "apsk/genetic.hpp"

namespace apsk::harness {

struct ExperimentSpec {
  RingLayout layout = RingLayout::apsk16();
  SymmetryMode symmetry = SymmetryMode::kDouble;
  ga::GaConfig ga;
  ChannelParams channel;  // snr_db defaults to the 10 dB target
  EvalSettings eval;
  int replicates = 5;
  int workers = 1;
  std::filesystem::path out_dir = "out";
};

struct OptimizeOutput {
  ga::RunResult result;
  Constellation best;
  std::filesystem::path constellation_path;
  std::filesystem::path trace_path;
  std::filesystem::path summary_path;
};

// Runs one GA optimization and writes constellation.txt, trace.csv and
// summary.txt into spec.out_dir. Every file embeds version, master seed and
// the resolved config.
OptimizeOutput cmd_optimize(const ExperimentSpec& spec);

struct SweepCell {
  ga::Crossover crossover;
  ga::Selection selection;
  std::vector<double> mse;  // per successful replicate
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> errors;
  double best_mse;    // min over replicates; NaN if none succeeded
  double median_mse;  // NaN if none succeeded
};

struct SweepOutput {
  std::vector<SweepCell> cells;  // row-major: crossover row, selection column
  std::filesystem::path table_path;
  std::filesystem::path long_path;
};

// Full 5x6 operator grid x replicates. Cell seeds derive from
// (spec.ga.seed, cell index, replicate); jobs may run on spec.workers threads
// without changing any output byte. Per-replicate failures are recorded and
// the sweep continues.
SweepOutput cmd_sweep(const ExperimentSpec& spec);

struct SnrGrid {
  double min_db = 0.0;
  double max_db = 20.0;
  double step_db = 1.0;
  std::vector<double> values() const;
};

struct CurvePoint {
  std::string name;
  double snr_db;
  double mse;
};

struct CurveOutput {
  std::vector<CurvePoint> points;  // sorted by (name, snr_db)
  std::vector<std::string> errors;
  std::vector<std::string> crossings;  // qualitative curve-ordering flips
  std::filesystem::path csv_path;
};

CurveOutput cmd_curve(const std::vector<std::filesystem::path>& documents,
                      const SnrGrid& grid, const EvalSettings& eval,
                      const SalehParams& saleh, const std::filesystem::path& out_dir);

enum class EvalMethod { kMonteCarlo, kExact };

struct EvaluateOutput {
  EvalMethod method;
  double snr_db;
  double es_avg;
  double n0;
  double mse;
  double fitness;
  std::uint64_t seed;  // meaningful for Monte Carlo only
};

EvaluateOutput cmd_evaluate(const std::filesystem::path& document, double snr_db,
                            EvalMethod method, const EvalSettings& eval,
                            const SalehParams& saleh);

// Writes the shipped reference geometry documents (published table columns for
// both layouts) into out_dir; returns the file paths.
std::vector<std::filesystem::path> export_published_constellations(
    const std::filesystem::path& out_dir);

// Full CLI entry point; args[0] is the program name. Returns the process exit
// code.
int run_cli(const std::vector<std::string>& args);

}  // namespace apsk::harness

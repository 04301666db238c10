#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "apsk/harness.hpp"

using namespace apsk;
using namespace apsk::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("apsk_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

ExperimentSpec tiny_spec(const fs::path& out) {
  ExperimentSpec spec;
  spec.ga.pop_size = 8;
  spec.ga.max_generations = 2;
  spec.ga.seed = 3;
  spec.eval.n_symbols = 10000;
  spec.out_dir = out;
  return spec;
}

}  // namespace

TEST_CASE("snr grid is inclusive on both ends") {
  SnrGrid grid;
  const auto v = grid.values();
  REQUIRE(v.size() == 21);
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 20.0);

  const SnrGrid half{0.0, 2.0, 0.5};
  CHECK(half.values() == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});

  const SnrGrid bad{0.0, 2.0, 0.0};
  CHECK_THROWS_AS(bad.values(), std::invalid_argument);
  const SnrGrid empty{3.0, 2.0, 1.0};
  CHECK(empty.values().empty());
}

TEST_CASE("exported reference geometries parse, validate and match the shipped data") {
  const fs::path dir = fresh_dir("export");
  const auto paths = export_published_constellations(dir);
  REQUIRE(paths.size() == 7);

  const std::vector<std::string> expected = {
      "16apsk_baseline.txt", "16apsk_double.txt", "16apsk_single.txt",
      "16apsk_none.txt",     "32apsk_baseline.txt", "32apsk_double.txt",
      "32apsk_single.txt"};
  for (std::size_t i = 0; i < paths.size(); ++i) {
    CHECK(paths[i].filename().string() == expected[i]);
    std::ifstream doc_in(paths[i]);
    const Constellation c = from_record(doc_in);
    CHECK(validate(c).empty());
    // Byte-identical to the documents shipped with the repository.
    const fs::path shipped = fs::path(DATA_DIR) / "constellations" / expected[i];
    CHECK(slurp(paths[i]) == slurp(shipped));
  }
}

TEST_CASE("optimize writes three files and replays byte-identically") {
  const fs::path dir = fresh_dir("optimize");
  const ExperimentSpec spec = tiny_spec(dir);
  const OptimizeOutput out = cmd_optimize(spec);

  CHECK(out.constellation_path == dir / "constellation.txt");
  CHECK(out.trace_path == dir / "trace.csv");
  CHECK(out.summary_path == dir / "summary.txt");
  CHECK(validate(out.best).empty());
  CHECK(out.result.best_mse > 0.0);

  const std::string trace = slurp(out.trace_path);
  const auto tl = lines_of(trace);
  REQUIRE(tl.size() >= 7);
  CHECK(tl[0].rfind("# apskopt ", 0) == 0);
  CHECK(tl[1] == "# seed 3");
  CHECK(tl[2].rfind("# config ", 0) == 0);
  CHECK(tl[2].find("layout=4+12") != std::string::npos);
  CHECK(tl[2].find("selection=remainder") != std::string::npos);
  CHECK(tl[2].find("workers") == std::string::npos);
  CHECK(tl[3].rfind("# termination_reason ", 0) == 0);
  CHECK(tl[4] == "generation,best_mse,mean_mse");
  CHECK(tl.size() == 5 + out.result.trace.generations.size());

  // The constellation document embeds the same header yet still parses.
  std::ifstream reread_in(out.constellation_path);
  const Constellation reread = from_record(reread_in);
  CHECK(validate(reread).empty());
  const auto summary = slurp(out.summary_path);
  CHECK(summary.find("best_mse ") != std::string::npos);
  CHECK(summary.find("termination_reason ") != std::string::npos);
  CHECK(summary.find("best_genes ") != std::string::npos);

  const fs::path dir2 = fresh_dir("optimize_replay");
  ExperimentSpec replay = spec;
  replay.out_dir = dir2;
  const OptimizeOutput out2 = cmd_optimize(replay);
  CHECK(slurp(out2.trace_path) == trace);
  CHECK(slurp(out2.constellation_path) == slurp(out.constellation_path));
  CHECK(slurp(out2.summary_path) == slurp(out.summary_path));
}

TEST_CASE("sweep covers the full operator grid and is worker-invariant") {
  const fs::path dir = fresh_dir("sweep1");
  ExperimentSpec spec = tiny_spec(dir);
  spec.ga.max_generations = 1;
  spec.replicates = 1;
  spec.workers = 1;
  const SweepOutput out = cmd_sweep(spec);

  REQUIRE(out.cells.size() == 30);
  int idx = 0;
  for (ga::Crossover x : ga::all_crossovers()) {
    for (ga::Selection s : ga::all_selections()) {
      const SweepCell& cell = out.cells[idx++];
      CHECK(cell.crossover == x);
      CHECK(cell.selection == s);
      REQUIRE(cell.mse.size() == 1);
      CHECK(cell.errors.empty());
      CHECK(cell.best_mse == cell.mse[0]);
      CHECK(cell.median_mse == cell.mse[0]);
      CHECK(cell.best_mse > 0.0);
    }
  }

  const auto table = lines_of(slurp(out.table_path));
  REQUIRE(table.size() == 3 + 1 + 6);
  CHECK(table[3] ==
        "crossover,stochastic_uniform,remainder,uniform,roulette,tournament");
  CHECK(table[4].rfind("scattered,", 0) == 0);
  CHECK(table[9].rfind("arithmetic,", 0) == 0);

  const auto longtab = lines_of(slurp(out.long_path));
  REQUIRE(longtab.size() == 3 + 1 + 30);
  CHECK(longtab[3] ==
        "crossover,selection,replicate,seed,best_mse,generations,"
        "termination_reason,error");
  for (std::size_t i = 4; i < longtab.size(); ++i) {
    CHECK(longtab[i].find(",max_generations,") != std::string::npos);
    CHECK(longtab[i].back() == '-');  // no error recorded
  }

  // Reruns with a worker pool give byte-identical files.
  const fs::path dir4 = fresh_dir("sweep4");
  ExperimentSpec pooled = spec;
  pooled.out_dir = dir4;
  pooled.workers = 4;
  const SweepOutput out4 = cmd_sweep(pooled);
  CHECK(slurp(out4.table_path) == slurp(out.table_path));
  CHECK(slurp(out4.long_path) == slurp(out.long_path));
}

TEST_CASE("curve evaluates every document over the grid, skipping bad files") {
  const fs::path dir = fresh_dir("curve");
  const fs::path docs = fs::path(DATA_DIR) / "constellations";
  EvalSettings eval;
  eval.n_symbols = 20000;
  eval.seed = 9;
  const SnrGrid grid{0.0, 2.0, 1.0};

  const CurveOutput out = cmd_curve(
      {docs / "16apsk_baseline.txt", dir / "missing.txt",
       docs / "16apsk_double.txt"},
      grid, eval, SalehParams{}, dir);

  REQUIRE(out.errors.size() == 1);
  CHECK(out.errors[0].find("missing.txt") != std::string::npos);
  REQUIRE(out.points.size() == 6);  // 2 readable documents x 3 grid points
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    const auto& a = out.points[i - 1];
    const auto& b = out.points[i];
    CHECK((a.name < b.name || (a.name == b.name && a.snr_db < b.snr_db)));
  }
  CHECK(out.points[0].name == "16apsk_baseline");
  CHECK(out.points[3].name == "16apsk_double");
  // MSE falls with SNR on this small grid for both geometries.
  CHECK(out.points[0].mse > out.points[2].mse);
  CHECK(out.points[3].mse > out.points[5].mse);

  const auto csv = lines_of(slurp(out.csv_path));
  REQUIRE(csv.size() == 3 + 1 + 6);
  CHECK(csv[2].find("snr_min=0") != std::string::npos);
  CHECK(csv[2].find("snr_step=1") != std::string::npos);
  CHECK(csv[2].find("symbols=20000") != std::string::npos);
  CHECK(csv[3] == "name,snr_db,mse");
  CHECK(csv[4].rfind("16apsk_baseline,0,", 0) == 0);
}

TEST_CASE("evaluate agrees between Monte Carlo and quadrature") {
  const fs::path doc = fs::path(DATA_DIR) / "constellations" / "16apsk_baseline.txt";
  EvalSettings eval;
  eval.n_symbols = 200000;
  eval.seed = 4;

  const EvaluateOutput mc =
      cmd_evaluate(doc, 10.0, EvalMethod::kMonteCarlo, eval, SalehParams{});
  const EvaluateOutput exact =
      cmd_evaluate(doc, 10.0, EvalMethod::kExact, eval, SalehParams{});

  CHECK(mc.snr_db == 10.0);
  CHECK(mc.es_avg == exact.es_avg);
  CHECK(mc.n0 == exact.n0);
  CHECK(mc.es_avg > 0.0);
  CHECK(exact.mse > 0.0);
  CHECK(std::abs(mc.mse - exact.mse) / exact.mse < 0.02);
  CHECK(mc.fitness == 1.0 / mc.mse);
  CHECK_THROWS(cmd_evaluate(fs::path(DATA_DIR) / "nope.txt", 10.0,
                            EvalMethod::kExact, eval, SalehParams{}));
}

TEST_CASE("cli entry point drives the subcommands") {
  const fs::path dir = fresh_dir("cli");

  CHECK(run_cli({"apskopt"}) != 0);  // a subcommand is required
  CHECK(run_cli({"apskopt", "evaluate", (dir / "missing.txt").string()}) == 1);

  CHECK(run_cli({"apskopt", "export-published-constellations", "--out",
                 (dir / "geo").string()}) == 0);
  CHECK(fs::exists(dir / "geo" / "32apsk_single.txt"));

  CHECK(run_cli({"apskopt", "evaluate",
                 (dir / "geo" / "16apsk_baseline.txt").string(), "--method",
                 "exact"}) == 0);

  // Config file values apply; explicit flags take precedence over the file.
  const fs::path cfg = dir / "run.ini";
  std::ofstream(cfg) << "pop=8\ngenerations=1\nsymbols=10000\nseed=3\n"
                     << "out=" << (dir / "a").string() << "\n";
  CHECK(run_cli({"apskopt", "optimize", "--config", cfg.string()}) == 0);
  const auto trace_a = lines_of(slurp(dir / "a" / "trace.csv"));
  CHECK(trace_a.size() == 5 + 2);  // generations 0..1
  CHECK(trace_a[1] == "# seed 3");

  CHECK(run_cli({"apskopt", "optimize", "--config", cfg.string(),
                 "--generations", "2", "--out", (dir / "b").string()}) == 0);
  const auto trace_b = lines_of(slurp(dir / "b" / "trace.csv"));
  CHECK(trace_b.size() == 5 + 3);  // CLI override wins

  CHECK(run_cli({"apskopt", "optimize", "--layout", "11apsk"}) != 0);
  CHECK(run_cli({"apskopt", "optimize", "--bogus-flag"}) != 0);
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "serpa/analytic.hpp"
#include "serpa/env.hpp"
#include "serpa/trainer.hpp"

namespace serpa {

// One experiment. The first block mirrors the CLI flags; the plumbing knobs
// below it have sane defaults and are still echoed so a config file alone
// pins the run completely.
struct RunSpec {
  std::string task = "predator_prey";  // predator_prey | mug | file:<path>
  std::string mode = "analytic";       // analytic | gradient | compare | grid
  double beta1 = 1.0;
  double beta2 = 1.0;
  double alpha_vw = 0.01;
  double alpha_eta = 0.01;
  int iterations = 100000;
  std::uint64_t seed = 0;
  std::string out = "out";
  double noise = 0.0;      // encoder pixel-flip probability
  std::string unit = "bits";  // display unit for summaries/reports

  int batch = 1;
  int stride = 500;
  int hidden = 0;    // 0 → task default (20; mug: 4)
  int percepts = 0;  // 0 → task default (|A|; mug: 4)
  int restarts = 5;  // analytic random restarts

  void validate() const;  // throws ConfigError naming the offending field
};

// Plain-text key=value echo; parse(write(spec)) == spec, byte for byte.
void write_config(std::ostream& out, const RunSpec& spec);
RunSpec parse_config(std::istream& in);
RunSpec load_config_file(const std::string& path);

// Instantiates the task named by the spec and applies its noise level.
WorldModel resolve_task(const RunSpec& spec);

// Fills 0-valued hidden/percepts with the task defaults.
void resolve_architecture(const RunSpec& spec, const WorldModel& model,
                          int& hidden, int& percepts);

// What run() reports back to callers (everything else lands on disk).
struct RunResult {
  double J = 0.0;           // headline objective (trained J when training ran)
  double baseline_J = 0.0;  // analytic J (analytic/compare modes)
  double delta_J_rel = 0.0;  // |J − baseline| / |baseline| (compare mode)
  double expected_utility = 0.0;
  double I_wx = 0.0;  // nats
  double I_xa = 0.0;  // nats
  bool converged = true;
  double wall_seconds = 0.0;
};

// Executes the spec and writes config.txt plus, per mode:
//   analytic: convergence.csv, behavior.csv, summary.txt
//   gradient: trace.csv, behavior.csv, params.txt, summary.txt
//   compare:  both sets + behavior_analytic.csv (trained tables in behavior.csv)
//   grid:     grid.csv, summary.txt
// Artifacts are byte-identical across reruns except the wall-clock line.
// Throws ConvergenceError after writing artifacts if the analytic stage
// exhausted its sweep budget.
RunResult run(const RunSpec& spec);

// The four paper configurations (predator-prey compare + the three mug
// capacity regimes), each in its own subdirectory of `out_dir`, plus a
// consolidated report.txt with the per-regime mutual informations and their
// ordering. Per-run failures are caught and reported; returns 0 when every
// run succeeded, else the exit code of the first failure.
int reproduce_paper(const std::string& out_dir);

// The 5×5 log-grid (factors 1/4..4) around the spec's learning rates used by
// grid mode and the `grid` verb.
std::vector<double> log_grid_around(double center);

}  // namespace serpa

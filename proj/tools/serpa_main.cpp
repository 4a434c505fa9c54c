#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "serpa/errors.hpp"
#include "serpa/run.hpp"

namespace {

// Flags mirror RunSpec. A --config file supplies the base values; any flag
// given explicitly on the command line overrides the file.
struct RunFlags {
  serpa::RunSpec v;
  std::string config;
  CLI::Option *o_config{}, *o_task{}, *o_mode{}, *o_beta1{}, *o_beta2{},
      *o_alpha_vw{}, *o_alpha_eta{}, *o_iters{}, *o_seed{}, *o_out{},
      *o_noise{}, *o_unit{}, *o_batch{}, *o_stride{}, *o_hidden{},
      *o_percepts{}, *o_restarts{};

  void attach(CLI::App* cmd) {
    o_config = cmd->add_option("--config", config,
                               "key=value config file; explicit flags override");
    o_task = cmd->add_option("--task", v.task, "predator_prey | mug | file:<path>");
    o_mode = cmd->add_option("--mode", v.mode,
                             "analytic | gradient | compare | grid");
    o_beta1 = cmd->add_option("--beta1", v.beta1, "perceptual inverse temperature");
    o_beta2 = cmd->add_option("--beta2", v.beta2, "action inverse temperature");
    o_alpha_vw = cmd->add_option("--alpha-vw", v.alpha_vw,
                                 "perceptual-network learning rate");
    o_alpha_eta = cmd->add_option("--alpha-eta", v.alpha_eta,
                                  "action-channel learning rate");
    o_iters = cmd->add_option("--iters", v.iterations, "gradient iterations");
    o_seed = cmd->add_option("--seed", v.seed, "rng seed");
    o_out = cmd->add_option("--out", v.out, "output directory");
    o_noise = cmd->add_option("--noise", v.noise,
                              "encoder pixel-flip probability in [0,1]");
    o_unit = cmd->add_option("--unit", v.unit, "display unit: bits | nats");
    o_batch = cmd->add_option("--batch", v.batch, "samples per update (default 1)");
    o_stride = cmd->add_option("--stride", v.stride,
                               "iterations between trace snapshots");
    o_hidden = cmd->add_option("--hidden", v.hidden,
                               "hidden units (0 = task default)");
    o_percepts = cmd->add_option("--percepts", v.percepts,
                                 "percept count (0 = task default)");
    o_restarts = cmd->add_option("--restarts", v.restarts,
                                 "analytic random restarts");
  }

  serpa::RunSpec resolve() const {
    serpa::RunSpec s =
        config.empty() ? serpa::RunSpec{} : serpa::load_config_file(config);
    if (o_task->count()) s.task = v.task;
    if (o_mode->count()) s.mode = v.mode;
    if (o_beta1->count()) s.beta1 = v.beta1;
    if (o_beta2->count()) s.beta2 = v.beta2;
    if (o_alpha_vw->count()) s.alpha_vw = v.alpha_vw;
    if (o_alpha_eta->count()) s.alpha_eta = v.alpha_eta;
    if (o_iters->count()) s.iterations = v.iterations;
    if (o_seed->count()) s.seed = v.seed;
    if (o_out->count()) s.out = v.out;
    if (o_noise->count()) s.noise = v.noise;
    if (o_unit->count()) s.unit = v.unit;
    if (o_batch->count()) s.batch = v.batch;
    if (o_stride->count()) s.stride = v.stride;
    if (o_hidden->count()) s.hidden = v.hidden;
    if (o_percepts->count()) s.percepts = v.percepts;
    if (o_restarts->count()) s.restarts = v.restarts;
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serpa: bounded-rational serial perception-action channels — "
               "analytic fixed-point baselines and online score-function "
               "gradient training"};
  app.require_subcommand(1);

  auto* run_cmd =
      app.add_subcommand("run", "Execute one experiment (flags and/or --config)");
  auto* grid_cmd = app.add_subcommand(
      "grid", "5x5 log-grid learning-rate search around --alpha-vw/--alpha-eta");
  auto* repro_cmd = app.add_subcommand(
      "reproduce",
      "Run the four reference configurations and write a consolidated report");

  RunFlags rf, gf;
  rf.attach(run_cmd);
  gf.attach(grid_cmd);
  std::string repro_out = "reproduce_out";
  repro_cmd->add_option("--out", repro_out, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (repro_cmd->parsed()) {
      const int rc = serpa::reproduce_paper(repro_out);
      std::cout << "report: " << repro_out << "/report.txt\n";
      return rc;
    }
    serpa::RunSpec spec = run_cmd->parsed() ? rf.resolve() : gf.resolve();
    if (grid_cmd->parsed()) spec.mode = "grid";
    const serpa::RunResult r = serpa::run(spec);
    std::cout << "final_J=" << r.J;
    if (spec.mode == "compare") std::cout << " delta_J_rel=" << r.delta_J_rel;
    std::cout << " artifacts=" << spec.out << "\n";
    return 0;
  } catch (const serpa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n\n"
              << app.help() << std::endl;
    return 2;
  } catch (const serpa::ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << std::endl;
    return 3;
  } catch (const serpa::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << std::endl;
    return 4;
  }
}

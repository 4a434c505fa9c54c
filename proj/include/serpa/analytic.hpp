#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "serpa/env.hpp"

namespace serpa {

struct SolverConfig {
  double epsilon = 1e-10;     // convergence: max absolute table change
  int max_iterations = 10000;
  bool jitter = false;        // Dirichlet-jittered q(a|x) init (random restarts)
  std::uint64_t seed = 0;     // consumed only when jitter is set
};

// Single-stage bounded-rational solution of max E[U] − (1/β)·I(Ω;A).
struct SingleStageSolution {
  Eigen::MatrixXd p_a_given_w;  // |Ω| × |A|
  Eigen::VectorXd p_a;
  double J = 0.0;
  std::vector<double> J_history;  // one entry per sweep
  int iterations = 0;
  double final_change = 0.0;
  bool converged = false;
};

// Alternates p*(a|ω) ∝ p(a)·exp(β·U(ω,a)) and p(a) = Σ_ω p(ω)p*(a|ω) until
// the max table change drops below ε. Never throws on budget exhaustion;
// check `converged`.
SingleStageSolution solve_rate_distortion(const WorldModel& model, double beta,
                                          const SolverConfig& cfg = {});

// Per-sweep diagnostics of the two-stage solver (also the convergence CSV rows).
struct SweepStat {
  int sweep = 0;
  double J = 0.0;
  double I_wx = 0.0;  // nats
  double I_xa = 0.0;  // nats
  double max_change = 0.0;
};

// Converged two-stage tables for the serial chain Ω → X → A.
struct TabularSolution {
  Eigen::MatrixXd p_x_given_w;  // |Ω| × |X|
  Eigen::MatrixXd p_a_given_x;  // |X| × |A|
  Eigen::VectorXd p_x, p_a;
  std::vector<SweepStat> sweeps;
  double J = 0.0;
  double final_change = 0.0;
  bool converged = false;
};

// Cycles the four self-consistent updates
//   p*(x|ω) ∝ p(x)·exp(β₁·ΔF(ω,x))
//   p(x)    = Σ_ω p(ω)p*(x|ω)
//   p*(a|x) ∝ p(a)·exp(β₂·Σ_ω p(ω|x)U(ω,a))   (Bayes posterior p(ω|x))
//   p(a)    = Σ_{ω,x} p(ω)p*(x|ω)p*(a|x)
// recomputing ΔF from the current action stage every sweep. Throws
// NumericError if any table goes non-finite; budget exhaustion is flagged.
TabularSolution solve_serial(const WorldModel& model, double beta1, double beta2,
                             int num_percepts, const SolverConfig& cfg = {});

// Best-of-N restart wrapper: restart 0 runs the deterministic uniform init,
// restarts 1..N−1 use Dirichlet-jittered action tables (seeds base_seed+r).
// Ties are broken toward the lowest restart index.
struct RestartReport {
  TabularSolution best;
  int best_index = 0;
  double J_spread = 0.0;  // max−min over converged restarts
  bool agree = false;     // spread within agreement_tol
  std::vector<double> J_values;
};

RestartReport solve_serial_restarts(const WorldModel& model, double beta1,
                                    double beta2, int num_percepts, int restarts,
                                    std::uint64_t base_seed = 0,
                                    const SolverConfig& cfg = {},
                                    double agreement_tol = 1e-6);

// Max absolute mismatch when the converged tables are substituted back into
// the right-hand sides of the four self-consistent equations.
double fixed_point_residual(const WorldModel& model, const TabularSolution& sol,
                            double beta1, double beta2);

}  // namespace serpa

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "serpa/channels.hpp"
#include "serpa/env.hpp"
#include "serpa/infotheory.hpp"
#include "serpa/rng.hpp"

namespace serpa {

struct TrainingConfig {
  double beta1 = 1.0;
  double beta2 = 1.0;
  double alpha_vw = 0.01;
  double alpha_eta = 0.01;
  int batch = 1;           // N sample triplets per update
  int iterations = 100000;
  int stride = 500;        // iterations between exact-metric snapshots
  std::uint64_t seed = 0;
  int hidden = 20;
  int num_percepts = 13;

  void validate() const;  // throws ConfigError
};

// One environment interaction: ω̂ ~ p(ω), ξ = encode(ω̂), x̂ ~ p(x|ξ),
// â ~ p(a|x̂). Consumes the rng strictly in that order.
struct Rollout {
  int world = 0;
  Eigen::VectorXd xi;
  int percept = 0;
  int action = 0;
  double utility = 0.0;
};

Rollout sample_rollout(const WorldModel& model, const PerceptualNetwork& net,
                       const ActionChannel& ch, Rng& rng);

// Exact metrics of the current parameters (tables materialized at zero
// encoder noise). Information terms in nats.
struct Snapshot {
  int iteration = 0;
  double J = 0.0;
  double expected_utility = 0.0;
  double I_wx = 0.0;
  double I_xa = 0.0;
};

struct StepDiagnostics {
  double mean_j = 0.0;
  Rollout last;
};

// One soft update θ ← θ + α·ĝ where ĝ is the batch mean of score × j
// (Eqs. of the log-trick scheme). j is evaluated with exact marginals from
// the noise-free tabulation of the current network. The η update touches
// only the sampled percept's column. Throws NumericError naming the
// iteration, parameter, and triplet if a gradient goes non-finite.
StepDiagnostics gradient_step(const WorldModel& model, PerceptualNetwork& net,
                              ActionChannel& ch, const TrainingConfig& cfg,
                              Rng& rng, int iteration = 0);

struct TrainingTrace {
  std::vector<Snapshot> snapshots;  // iteration 0, every stride, and final
  PerceptualNetwork net;            // final parameters
  ActionChannel channel;
};

// Glorot-initializes the network, zero-initializes η (uniform actions), and
// runs the full iteration budget with snapshots.
TrainingTrace train(const WorldModel& model, const TrainingConfig& cfg);

// One grid cell result. Failed or non-finite cells carry a note and are
// never ranked above finished ones.
struct GridCell {
  double alpha_vw = 0.0;
  double alpha_eta = 0.0;
  double final_J = 0.0;
  bool ok = false;
  std::string note;
};

// Trains every (α_VW, α_eta) combination and returns cells sorted by final
// exact J descending; ties broken by (α_VW, α_eta) ascending; failures last.
// Cells run concurrently on up to `threads` workers (0 = hardware default);
// each cell owns an isolated rng seeded from base.seed.
std::vector<GridCell> grid_search(const WorldModel& model, TrainingConfig base,
                                  const std::vector<double>& alphas_vw,
                                  const std::vector<double>& alphas_eta,
                                  int threads = 0);

}  // namespace serpa

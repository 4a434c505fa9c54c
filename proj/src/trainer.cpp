#include "serpa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "serpa/errors.hpp"

namespace serpa {
namespace {

std::string triplet_str(int w, int x, int a) {
  std::ostringstream os;
  os << "(ω=" << w << ", x=" << x << ", a=" << a << ")";
  return os.str();
}

Snapshot take_snapshot(const WorldModel& model, const PerceptualNetwork& net,
                       const ActionChannel& ch, const TrainingConfig& cfg,
                       int iteration) {
  JointSystem sys{model.prior, model.utility, net.tabulate(model.encodings),
                  ch.table(), cfg.beta1, cfg.beta2};
  const Metrics m = metrics(sys);
  return {iteration, m.J, m.expected_utility, m.I_wx, m.I_xa};
}

}  // namespace

void TrainingConfig::validate() const {
  if (!(beta1 > 0.0) || !(beta2 > 0.0))
    throw ConfigError("training betas must be positive");
  if (alpha_vw < 0.0 || alpha_eta < 0.0)
    throw ConfigError("learning rates must be nonnegative");
  if (batch < 1) throw ConfigError("batch size must be at least 1");
  if (iterations < 0) throw ConfigError("iteration budget must be nonnegative");
  if (stride < 1) throw ConfigError("snapshot stride must be at least 1");
  if (hidden < 1 || num_percepts < 1)
    throw ConfigError("network dimensions must be positive");
}

Rollout sample_rollout(const WorldModel& model, const PerceptualNetwork& net,
                       const ActionChannel& ch, Rng& rng) {
  Rollout r;
  r.world = sample_world(model, rng);
  r.xi = encode(model, r.world, rng);
  r.percept = rng.categorical(net.forward(r.xi));
  r.action = rng.categorical(ch.probs(r.percept));
  r.utility = model.utility(r.world, r.action);
  return r;
}

StepDiagnostics gradient_step(const WorldModel& model, PerceptualNetwork& net,
                              ActionChannel& ch, const TrainingConfig& cfg,
                              Rng& rng, int iteration) {
  // All batch triplets are drawn at the current parameters; the exact
  // marginals entering j come from the noise-free tabulation.
  JointSystem sys{model.prior, model.utility, net.tabulate(model.encodings),
                  ch.table(), cfg.beta1, cfg.beta2};
  const Eigen::VectorXd p_x = marginal_x(sys);
  const Eigen::VectorXd p_a = marginal_a(sys);

  Eigen::MatrixXd gV = Eigen::MatrixXd::Zero(net.V.rows(), net.V.cols());
  Eigen::MatrixXd gW = Eigen::MatrixXd::Zero(net.W.rows(), net.W.cols());
  Eigen::MatrixXd geta = Eigen::MatrixXd::Zero(ch.eta.rows(), ch.eta.cols());

  StepDiagnostics diag;
  for (int n = 0; n < cfg.batch; ++n) {
    const Rollout r = sample_rollout(model, net, ch, rng);
    const double j =
        sample_integrand_j(sys, r.world, r.percept, r.action, p_x, p_a);
    if (!std::isfinite(j))
      throw NumericError("non-finite integrand j at iteration " +
                         std::to_string(iteration) + ", triplet " +
                         triplet_str(r.world, r.percept, r.action));

    const Eigen::MatrixXd sV = grad_log_perceptual_V(net, r.xi, r.percept);
    const Eigen::MatrixXd sW = grad_log_perceptual_W(net, r.xi, r.percept);
    const Eigen::VectorXd sEta = grad_log_action_eta(ch, r.percept, r.action);
    if (!sV.allFinite())
      throw NumericError("non-finite gradient in V at iteration " +
                         std::to_string(iteration) + ", triplet " +
                         triplet_str(r.world, r.percept, r.action));
    if (!sW.allFinite())
      throw NumericError("non-finite gradient in W at iteration " +
                         std::to_string(iteration) + ", triplet " +
                         triplet_str(r.world, r.percept, r.action));
    if (!sEta.allFinite())
      throw NumericError("non-finite gradient in eta at iteration " +
                         std::to_string(iteration) + ", triplet " +
                         triplet_str(r.world, r.percept, r.action));

    gV += j * sV;
    gW += j * sW;
    geta.col(r.percept) += j * sEta;
    diag.mean_j += j;
    diag.last = r;
  }
  const double inv_n = 1.0 / cfg.batch;
  diag.mean_j *= inv_n;
  net.V += cfg.alpha_vw * inv_n * gV;
  net.W += cfg.alpha_vw * inv_n * gW;
  ch.eta += cfg.alpha_eta * inv_n * geta;
  return diag;
}

TrainingTrace train(const WorldModel& model, const TrainingConfig& cfg) {
  model.validate();
  cfg.validate();
  Rng rng(cfg.seed);

  TrainingTrace trace;
  trace.net = init_glorot(model.input_dim(), cfg.hidden, cfg.num_percepts, rng);
  trace.channel = init_uniform_actions(model.num_actions(), cfg.num_percepts);

  trace.snapshots.reserve(static_cast<size_t>(cfg.iterations / cfg.stride) + 2);
  trace.snapshots.push_back(
      take_snapshot(model, trace.net, trace.channel, cfg, 0));
  for (int it = 1; it <= cfg.iterations; ++it) {
    gradient_step(model, trace.net, trace.channel, cfg, rng, it);
    if (it % cfg.stride == 0 || it == cfg.iterations)
      trace.snapshots.push_back(
          take_snapshot(model, trace.net, trace.channel, cfg, it));
  }
  return trace;
}

std::vector<GridCell> grid_search(const WorldModel& model, TrainingConfig base,
                                  const std::vector<double>& alphas_vw,
                                  const std::vector<double>& alphas_eta,
                                  int threads) {
  if (alphas_vw.empty() || alphas_eta.empty())
    throw ConfigError("grid must contain at least one cell");
  model.validate();

  std::vector<GridCell> cells;
  cells.reserve(alphas_vw.size() * alphas_eta.size());
  for (double avw : alphas_vw)
    for (double aeta : alphas_eta) cells.push_back({avw, aeta});

  int workers = threads > 0 ? threads
                            : static_cast<int>(std::max(
                                  1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(cells.size()));

  std::mutex mu;
  size_t next = 0;
  auto work = [&] {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lk(mu);
        if (next >= cells.size()) return;
        i = next++;
      }
      GridCell& cell = cells[i];
      TrainingConfig cfg = base;
      cfg.alpha_vw = cell.alpha_vw;
      cfg.alpha_eta = cell.alpha_eta;
      try {
        const TrainingTrace t = train(model, cfg);
        cell.final_J = t.snapshots.back().J;
        if (std::isfinite(cell.final_J)) {
          cell.ok = true;
        } else {
          cell.note = "non-finite final J";
        }
      } catch (const std::exception& e) {
        cell.note = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  std::sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    if (a.ok != b.ok) return a.ok;
    if (a.ok && a.final_J != b.final_J) return a.final_J > b.final_J;
    if (a.alpha_vw != b.alpha_vw) return a.alpha_vw < b.alpha_vw;
    return a.alpha_eta < b.alpha_eta;
  });
  return cells;
}

}  // namespace serpa

#include "serpa/analytic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "serpa/errors.hpp"
#include "serpa/infotheory.hpp"
#include "serpa/rng.hpp"

namespace serpa {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row of a Dirichlet(1,...,1) draw: normalized unit-rate exponentials.
Eigen::VectorXd dirichlet_row(int n, Rng& rng) {
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = -std::log1p(-rng.uniform());
  const double s = g.sum();
  if (s <= 0.0) return Eigen::VectorXd::Constant(n, 1.0 / n);
  return g / s;
}

// exp-normalizes each row of `logits` in place; −inf logits become 0 mass.
void rows_softmax(Eigen::MatrixXd& logits, const char* what) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    if (!std::isfinite(m))
      throw NumericError(std::string("degenerate logits in ") + what +
                         " update, row " + std::to_string(r));
    logits.row(r) = (logits.row(r).array() - m).exp();
    logits.row(r) /= logits.row(r).sum();
  }
}

struct SerialState {
  Eigen::MatrixXd Pxw;  // |Ω| × |X|
  Eigen::MatrixXd Pax;  // |X| × |A|
  Eigen::VectorXd px, pa;
};

// One full Eq. 9 → 10 → 11 → 12 cycle. The ΔF and Bayes posterior are
// rebuilt from the incoming state, so feeding a fixed point back in must
// reproduce it — `fixed_point_residual` relies on that.
SerialState sweep_serial(const WorldModel& model, double beta1, double beta2,
                         const SerialState& in) {
  const int nW = model.num_worlds();
  const int nX = static_cast<int>(in.Pax.rows());
  const int nA = model.num_actions();
  SerialState out;

  // ΔF(ω,x) = Σ_a p(a|x)U(ω,a) − KL(p(·|x)‖p(a))/β₂
  Eigen::VectorXd kl(nX);
  for (int x = 0; x < nX; ++x)
    kl[x] = kl_divergence(in.Pax.row(x).transpose(), in.pa);
  Eigen::MatrixXd dF = model.utility * in.Pax.transpose();  // (ω,x)
  dF.rowwise() -= (kl.transpose() / beta2);

  // Eq. 9: p*(x|ω) ∝ p(x)·exp(β₁·ΔF)
  Eigen::MatrixXd logits(nW, nX);
  for (int x = 0; x < nX; ++x) {
    const double lpx = in.px[x] > 0.0 ? std::log(in.px[x]) : -kInf;
    for (int w = 0; w < nW; ++w) logits(w, x) = lpx + beta1 * dF(w, x);
  }
  rows_softmax(logits, "perception");
  out.Pxw = std::move(logits);

  // Eq. 10
  out.px = out.Pxw.transpose() * model.prior;

  // Eq. 11: p*(a|x) ∝ p(a)·exp(β₂·Σ_ω p(ω|x)U(ω,a)); a percept with zero
  // marginal has an undefined posterior — fall back to the prior (its action
  // row carries no probability mass either way).
  Eigen::MatrixXd posterior(nX, nW);
  for (int x = 0; x < nX; ++x) {
    if (out.px[x] > 0.0)
      posterior.row(x) =
          (model.prior.array() * out.Pxw.col(x).array()).transpose() / out.px[x];
    else
      posterior.row(x) = model.prior.transpose();
  }
  Eigen::MatrixXd logits2 = beta2 * (posterior * model.utility);
  for (int a = 0; a < nA; ++a) {
    const double lpa = in.pa[a] > 0.0 ? std::log(in.pa[a]) : -kInf;
    logits2.col(a).array() += lpa;
  }
  rows_softmax(logits2, "action");
  out.Pax = std::move(logits2);

  // Eq. 12
  out.pa = out.Pax.transpose() * out.px;
  return out;
}

double max_change(const SerialState& a, const SerialState& b) {
  double m = (a.Pxw - b.Pxw).cwiseAbs().maxCoeff();
  m = std::max(m, (a.Pax - b.Pax).cwiseAbs().maxCoeff());
  m = std::max(m, (a.px - b.px).cwiseAbs().maxCoeff());
  return std::max(m, (a.pa - b.pa).cwiseAbs().maxCoeff());
}

bool all_finite(const SerialState& s) {
  return s.Pxw.allFinite() && s.Pax.allFinite() && s.px.allFinite() &&
         s.pa.allFinite();
}

}  // namespace

SingleStageSolution solve_rate_distortion(const WorldModel& model, double beta,
                                          const SolverConfig& cfg) {
  model.validate();
  if (beta <= 0.0) throw ConfigError("beta must be positive");
  const int nW = model.num_worlds();
  const int nA = model.num_actions();

  SingleStageSolution sol;
  sol.p_a_given_w = Eigen::MatrixXd::Constant(nW, nA, 1.0 / nA);
  if (cfg.jitter) {
    Rng rng(cfg.seed);
    for (int w = 0; w < nW; ++w)
      sol.p_a_given_w.row(w) = dirichlet_row(nA, rng).transpose();
  }
  sol.p_a = sol.p_a_given_w.transpose() * model.prior;

  sol.J_history.reserve(64);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const Eigen::MatrixXd old_P = sol.p_a_given_w;
    const Eigen::VectorXd old_pa = sol.p_a;

    // p*(a|ω) ∝ p(a)·exp(β·U(ω,a))
    Eigen::MatrixXd logits = beta * model.utility;
    for (int a = 0; a < nA; ++a) {
      const double lpa = sol.p_a[a] > 0.0 ? std::log(sol.p_a[a]) : -kInf;
      logits.col(a).array() += lpa;
    }
    rows_softmax(logits, "single-stage");
    sol.p_a_given_w = std::move(logits);
    sol.p_a = sol.p_a_given_w.transpose() * model.prior;

    if (!sol.p_a_given_w.allFinite() || !sol.p_a.allFinite())
      throw NumericError("single-stage solver produced non-finite values at sweep " +
                         std::to_string(it + 1));

    const Eigen::MatrixXd joint =
        model.prior.asDiagonal() * sol.p_a_given_w;
    const double EU = joint.cwiseProduct(model.utility).sum();
    sol.J = EU - mutual_information(joint) / beta;
    sol.J_history.push_back(sol.J);

    sol.iterations = it + 1;
    sol.final_change =
        std::max((sol.p_a_given_w - old_P).cwiseAbs().maxCoeff(),
                 (sol.p_a - old_pa).cwiseAbs().maxCoeff());
    if (sol.final_change < cfg.epsilon) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

TabularSolution solve_serial(const WorldModel& model, double beta1, double beta2,
                             int num_percepts, const SolverConfig& cfg) {
  model.validate();
  if (beta1 <= 0.0 || beta2 <= 0.0) throw ConfigError("betas must be positive");
  if (num_percepts < 1) throw ConfigError("need at least one percept");
  const int nW = model.num_worlds();
  const int nX = num_percepts;
  const int nA = model.num_actions();

  SerialState st;
  st.Pxw = Eigen::MatrixXd::Constant(nW, nX, 1.0 / nX);
  st.Pax = Eigen::MatrixXd::Constant(nX, nA, 1.0 / nA);
  if (cfg.jitter) {
    Rng rng(cfg.seed);
    for (int x = 0; x < nX; ++x)
      st.Pax.row(x) = dirichlet_row(nA, rng).transpose();
  }
  st.px = Eigen::VectorXd::Constant(nX, 1.0 / nX);
  st.pa = Eigen::VectorXd::Constant(nA, 1.0 / nA);

  TabularSolution sol;
  sol.sweeps.reserve(256);
  for (int s = 0; s < cfg.max_iterations; ++s) {
    SerialState next = sweep_serial(model, beta1, beta2, st);
    if (!all_finite(next))
      throw NumericError("serial solver produced non-finite values at sweep " +
                         std::to_string(s + 1));
    const double mc = max_change(next, st);
    st = std::move(next);

    JointSystem sys{model.prior, model.utility, st.Pxw, st.Pax, beta1, beta2};
    const Metrics m = metrics(sys);
    sol.sweeps.push_back({s + 1, m.J, m.I_wx, m.I_xa, mc});
    sol.J = m.J;
    sol.final_change = mc;
    if (mc < cfg.epsilon) {
      sol.converged = true;
      break;
    }
  }
  sol.p_x_given_w = std::move(st.Pxw);
  sol.p_a_given_x = std::move(st.Pax);
  sol.p_x = std::move(st.px);
  sol.p_a = std::move(st.pa);
  return sol;
}

RestartReport solve_serial_restarts(const WorldModel& model, double beta1,
                                    double beta2, int num_percepts, int restarts,
                                    std::uint64_t base_seed,
                                    const SolverConfig& cfg,
                                    double agreement_tol) {
  if (restarts < 1) throw ConfigError("need at least one restart");
  RestartReport rep;
  rep.J_values.reserve(restarts);
  double lo = kInf, hi = -kInf;
  for (int r = 0; r < restarts; ++r) {
    SolverConfig rc = cfg;
    rc.jitter = r > 0;
    rc.seed = base_seed + static_cast<std::uint64_t>(r);
    TabularSolution sol = solve_serial(model, beta1, beta2, num_percepts, rc);
    rep.J_values.push_back(sol.J);
    if (sol.converged) {
      lo = std::min(lo, sol.J);
      hi = std::max(hi, sol.J);
    }
    if (r == 0 || sol.J > rep.best.J) {
      rep.best = std::move(sol);
      rep.best_index = r;
    }
  }
  rep.J_spread = hi >= lo ? hi - lo : 0.0;
  rep.agree = hi >= lo && rep.J_spread <= agreement_tol;
  return rep;
}

double fixed_point_residual(const WorldModel& model, const TabularSolution& sol,
                            double beta1, double beta2) {
  SerialState st{sol.p_x_given_w, sol.p_a_given_x, sol.p_x, sol.p_a};
  return max_change(sweep_serial(model, beta1, beta2, st), st);
}

}  // namespace serpa

#include "serpa/infotheory.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "serpa/errors.hpp"

namespace serpa {

namespace {

void check_rows_normalized(const Eigen::MatrixXd& table, const char* name) {
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    if (table.row(r).minCoeff() < 0.0)
      throw ConfigError(std::string(name) + ": negative probability entry");
    if (std::abs(table.row(r).sum() - 1.0) > 1e-10)
      throw ConfigError(std::string(name) + ": row does not sum to 1");
  }
}

}  // namespace

void JointSystem::validate() const {
  if (beta1 <= 0.0 || beta2 <= 0.0) throw ConfigError("beta1/beta2 must be > 0");
  if (prior.minCoeff() < 0.0 || std::abs(prior.sum() - 1.0) > 1e-10)
    throw ConfigError("prior is not a probability vector");
  if (utility.rows() != prior.size()) throw ConfigError("utility rows != |Omega|");
  if (!utility.allFinite()) throw ConfigError("utility has non-finite entries");
  if (p_x_given_w.rows() != prior.size()) throw ConfigError("p(x|w) rows != |Omega|");
  if (p_a_given_x.rows() != p_x_given_w.cols())
    throw ConfigError("p(a|x) rows != |X|");
  if (p_a_given_x.cols() != utility.cols()) throw ConfigError("p(a|x) cols != |A|");
  check_rows_normalized(p_x_given_w, "p(x|w)");
  check_rows_normalized(p_a_given_x, "p(a|x)");
}

Eigen::VectorXd marginal_x(const JointSystem& sys) {
  return sys.p_x_given_w.transpose() * sys.prior;
}

Eigen::VectorXd marginal_a(const JointSystem& sys) {
  return sys.p_a_given_x.transpose() * marginal_x(sys);
}

double entropy(const Eigen::Ref<const Eigen::VectorXd>& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p,
                     const Eigen::Ref<const Eigen::VectorXd>& q) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d < 0.0 ? 0.0 : d;  // clamp rounding residue
}

double mutual_information(const Eigen::Ref<const Eigen::MatrixXd>& joint) {
  if (joint.minCoeff() < 0.0)
    throw ConfigError("mutual_information: negative joint entry");
  if (std::abs(joint.sum() - 1.0) > 1e-10)
    throw ConfigError("mutual_information: joint does not sum to 1");
  const Eigen::VectorXd pu = joint.rowwise().sum();
  const Eigen::VectorXd pv = joint.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index u = 0; u < joint.rows(); ++u)
    for (Eigen::Index v = 0; v < joint.cols(); ++v) {
      const double puv = joint(u, v);
      if (puv > 0.0) mi += puv * std::log(puv / (pu[u] * pv[v]));
    }
  return mi < 0.0 ? 0.0 : mi;
}

double mutual_information_bits(const Eigen::Ref<const Eigen::MatrixXd>& joint) {
  return nats_to_bits(mutual_information(joint));
}

double free_energy_diff(const JointSystem& sys, int w, int x) {
  const Eigen::VectorXd p_a = marginal_a(sys);
  const Eigen::VectorXd row = sys.p_a_given_x.row(x);
  return sys.utility.row(w).dot(row) - kl_divergence(row, p_a) / sys.beta2;
}

Eigen::MatrixXd free_energy_diff_table(const JointSystem& sys,
                                       const Eigen::Ref<const Eigen::VectorXd>& p_a) {
  // ΔF(ω,x) = Σ_a p(a|x)U(ω,a) − (1/β₂)·KL(p(·|x)‖p(a))
  Eigen::MatrixXd eu = sys.utility * sys.p_a_given_x.transpose();  // (ω,x)
  Eigen::VectorXd kl(sys.num_percepts());
  for (int x = 0; x < sys.num_percepts(); ++x)
    kl[x] = kl_divergence(sys.p_a_given_x.row(x), p_a);
  eu.rowwise() -= (kl / sys.beta2).transpose();
  return eu;
}

Metrics metrics(const JointSystem& sys) {
  const Eigen::VectorXd p_x = marginal_x(sys);
  Metrics m;
  // E[U] = Σ_{ω,x,a} p(ω)p(x|ω)p(a|x)U(ω,a)
  const Eigen::MatrixXd p_a_given_w = sys.p_x_given_w * sys.p_a_given_x;
  m.expected_utility =
      (sys.prior.asDiagonal() * p_a_given_w).cwiseProduct(sys.utility).sum();
  m.I_wx = mutual_information(sys.prior.asDiagonal() * sys.p_x_given_w);
  m.I_xa = mutual_information(p_x.asDiagonal() * sys.p_a_given_x);
  m.J = m.expected_utility - m.I_wx / sys.beta1 - m.I_xa / sys.beta2;
  return m;
}

double objective_J(const JointSystem& sys) { return metrics(sys).J; }

double sample_integrand_j(const JointSystem& sys, int w, int x, int a,
                          const Eigen::Ref<const Eigen::VectorXd>& p_x,
                          const Eigen::Ref<const Eigen::VectorXd>& p_a) {
  const double pxw = sys.p_x_given_w(w, x);
  const double pax = sys.p_a_given_x(x, a);
  if (pxw <= 0.0 || pax <= 0.0) {
    std::ostringstream msg;
    msg << "sample_integrand_j: zero-probability triplet (w=" << w << ", x=" << x
        << ", a=" << a << ")";
    throw NumericError(msg.str());
  }
  return sys.utility(w, a) - std::log(pxw / p_x[x]) / sys.beta1 -
         std::log(pax / p_a[a]) / sys.beta2;
}

double sample_integrand_j(const JointSystem& sys, int w, int x, int a) {
  return sample_integrand_j(sys, w, x, a, marginal_x(sys), marginal_a(sys));
}

}  // namespace serpa

#include "serpa/channels.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "serpa/errors.hpp"

namespace serpa {

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  Eigen::VectorXd z = (logits.array() - logits.maxCoeff()).exp();
  return z / z.sum();
}

Eigen::VectorXd PerceptualNetwork::hidden(
    const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  return (V.transpose() * xi).array().tanh();
}

Eigen::VectorXd PerceptualNetwork::forward(
    const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  return softmax(W.transpose() * hidden(xi));
}

Eigen::MatrixXd PerceptualNetwork::tabulate(
    const Eigen::Ref<const Eigen::MatrixXd>& encodings) const {
  Eigen::MatrixXd table(encodings.rows(), num_percepts());
  for (Eigen::Index w = 0; w < encodings.rows(); ++w)
    table.row(w) = forward(encodings.row(w).transpose()).transpose();
  return table;
}

Eigen::VectorXd ActionChannel::probs(int x) const {
  const int n = static_cast<int>(eta.rows());
  // Logits are [0, η₁ˣ..η_nˣ]; stabilize with the max before exponentiating.
  const double m = std::max(0.0, n > 0 ? eta.col(x).maxCoeff() : 0.0);
  Eigen::VectorXd ex = (eta.col(x).array() - m).exp();
  const double z0 = std::exp(-m);            // the fixed zero logit
  const double denom = z0 + ex.sum();        // exp(−m)·(1 + Σ exp(ηᵢ))
  Eigen::VectorXd p(n + 1);
  p.tail(n) = ex / denom;
  p[0] = 1.0 - p.tail(n).sum();              // complement action
  return p;
}

Eigen::MatrixXd ActionChannel::table() const {
  Eigen::MatrixXd t(num_percepts(), num_actions());
  for (int x = 0; x < num_percepts(); ++x) t.row(x) = probs(x).transpose();
  return t;
}

Eigen::MatrixXd grad_log_perceptual_V(const PerceptualNetwork& net,
                                      const Eigen::Ref<const Eigen::VectorXd>& xi,
                                      int x_i) {
  const Eigen::VectorXd h = net.hidden(xi);
  const Eigen::VectorXd p = softmax(net.W.transpose() * h);
  const Eigen::VectorXd phi_prime = 1.0 - h.array().square();
  // ξ ⊗ [φ′ ⊙ (W_{:,i} − W·p)]
  const Eigen::VectorXd back = phi_prime.cwiseProduct(net.W.col(x_i) - net.W * p);
  return xi * back.transpose();
}

Eigen::MatrixXd grad_log_perceptual_W(const PerceptualNetwork& net,
                                      const Eigen::Ref<const Eigen::VectorXd>& xi,
                                      int x_i) {
  const Eigen::VectorXd h = net.hidden(xi);
  Eigen::VectorXd coeff = -softmax(net.W.transpose() * h);
  coeff[x_i] += 1.0;
  return h * coeff.transpose();
}

Eigen::VectorXd grad_log_action_eta(const ActionChannel& ch, int x, int a) {
  Eigen::VectorXd g = -ch.probs(x).tail(ch.eta.rows());
  if (a >= 1) g[a - 1] += 1.0;
  return g;
}

PerceptualNetwork init_glorot(int d_xi, int hidden, int num_percepts, Rng& rng) {
  if (d_xi <= 0 || hidden <= 0 || num_percepts <= 0)
    throw ConfigError("init_glorot: dimensions must be positive");
  PerceptualNetwork net;
  net.V.resize(d_xi, hidden);
  net.W.resize(hidden, num_percepts);
  const double sv = std::sqrt(6.0 / (d_xi + hidden));
  for (int r = 0; r < d_xi; ++r)
    for (int c = 0; c < hidden; ++c) net.V(r, c) = rng.uniform(-sv, sv);
  const double sw = std::sqrt(6.0 / (hidden + num_percepts));
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < num_percepts; ++c) net.W(r, c) = rng.uniform(-sw, sw);
  return net;
}

ActionChannel init_uniform_actions(int num_actions, int num_percepts) {
  if (num_actions < 2 || num_percepts <= 0)
    throw ConfigError("init_uniform_actions: need |A| >= 2 and |X| >= 1");
  ActionChannel ch;
  ch.eta = Eigen::MatrixXd::Zero(num_actions - 1, num_percepts);
  return ch;
}

namespace {

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  out.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out << (c ? " " : "") << m(r, c);
    out << "\n";
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      if (!(in >> m(r, c))) throw ConfigError("parameter snapshot: truncated matrix");
  return m;
}

}  // namespace

void save_params(std::ostream& out, const PerceptualNetwork& net,
                 const ActionChannel& ch) {
  out << net.input_dim() << " " << net.hidden_dim() << " " << net.num_percepts()
      << " " << ch.num_actions() << "\n";
  write_matrix(out, net.V);
  write_matrix(out, net.W);
  write_matrix(out, ch.eta);
}

void load_params(std::istream& in, PerceptualNetwork& net, ActionChannel& ch) {
  int d_xi = 0, hidden = 0, nx = 0, na = 0;
  if (!(in >> d_xi >> hidden >> nx >> na) || d_xi <= 0 || hidden <= 0 || nx <= 0 ||
      na < 2)
    throw ConfigError("parameter snapshot: bad dims line");
  net.V = read_matrix(in, d_xi, hidden);
  net.W = read_matrix(in, hidden, nx);
  ch.eta = read_matrix(in, na - 1, nx);
}

}  // namespace serpa

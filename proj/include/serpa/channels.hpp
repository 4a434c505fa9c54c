#pragma once

#include <Eigen/Core>
#include <iosfwd>

#include "serpa/rng.hpp"

namespace serpa {

// Numerically safe softmax (max-subtraction before exponentiation).
Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits);

// One-hidden-layer perceptual model: p(x|ξ) = softmax(tanh(ξᵀV)·W).
// No bias terms; the hidden activation is the standard tanh.
struct PerceptualNetwork {
  Eigen::MatrixXd V;  // d_ξ × h
  Eigen::MatrixXd W;  // h × |X|

  int input_dim() const { return static_cast<int>(V.rows()); }
  int hidden_dim() const { return static_cast<int>(V.cols()); }
  int num_percepts() const { return static_cast<int>(W.cols()); }

  Eigen::VectorXd hidden(const Eigen::Ref<const Eigen::VectorXd>& xi) const;
  Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& xi) const;

  // Materialize p(x|ω) over the rows of an encoding matrix (|Ω| × d_ξ).
  Eigen::MatrixXd tabulate(const Eigen::Ref<const Eigen::MatrixXd>& encodings) const;
};

// Multinomial action channel. Per percept x the action logits are
// [0, η₁ˣ, …, η_nˣ] with n = |A|−1; action 0 is the complement whose
// probability is 1 − Σᵢ p(aᵢ|x).
struct ActionChannel {
  Eigen::MatrixXd eta;  // n × |X|

  int num_actions() const { return static_cast<int>(eta.rows()) + 1; }
  int num_percepts() const { return static_cast<int>(eta.cols()); }

  Eigen::VectorXd probs(int x) const;  // length |A|
  Eigen::MatrixXd table() const;       // |X| × |A|
};

// ∂ log p(x_i|ξ) / ∂V  =  ξ ⊗ [φ′(Vᵀξ) ⊙ (W_{:,i} − W·p)], φ′ = 1 − tanh².
Eigen::MatrixXd grad_log_perceptual_V(const PerceptualNetwork& net,
                                      const Eigen::Ref<const Eigen::VectorXd>& xi,
                                      int x_i);

// ∂ log p(x_i|ξ) / ∂W: column j is ((j==i) − p(x_j|ξ))·φ(Vᵀξ).
Eigen::MatrixXd grad_log_perceptual_W(const PerceptualNetwork& net,
                                      const Eigen::Ref<const Eigen::VectorXd>& xi,
                                      int x_i);

// ∂ log p_η(a|x) / ∂η^x: component i is 𝟙[a=i] − p(aᵢ|x), i = 1..n.
// Action 0 carries no indicator (it is the complement action).
Eigen::VectorXd grad_log_action_eta(const ActionChannel& ch, int x, int a);

// Glorot-uniform weights: every entry drawn in ±sqrt(6/(fan_in+fan_out)).
// Fill order is V then W, each row-major, one uniform per entry.
PerceptualNetwork init_glorot(int d_xi, int hidden, int num_percepts, Rng& rng);

// η ≡ 0, i.e. uniform action probabilities at every percept.
ActionChannel init_uniform_actions(int num_actions, int num_percepts);

// Text snapshot: dims line, then row-major V, W, η with 17 significant
// digits. Round-trips within 1 ulp.
void save_params(std::ostream& out, const PerceptualNetwork& net,
                 const ActionChannel& ch);
void load_params(std::istream& in, PerceptualNetwork& net, ActionChannel& ch);

}  // namespace serpa

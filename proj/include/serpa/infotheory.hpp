#pragma once

#include <Eigen/Core>

namespace serpa {

inline constexpr double kNatsPerBit = 0.6931471805599453;  // ln 2

inline double nats_to_bits(double nats) { return nats / kNatsPerBit; }

// Discrete serial chain Ω → X → A with its prior, utility and temperatures.
// The joint factorizes as p(ω)·p(x|ω)·p(a|x).
struct JointSystem {
  Eigen::VectorXd prior;        // p(ω), length |Ω|
  Eigen::MatrixXd utility;      // U(ω,a), |Ω| × |A|
  Eigen::MatrixXd p_x_given_w;  // |Ω| × |X|, rows sum to 1
  Eigen::MatrixXd p_a_given_x;  // |X| × |A|, rows sum to 1
  double beta1 = 1.0;
  double beta2 = 1.0;

  int num_worlds() const { return static_cast<int>(prior.size()); }
  int num_percepts() const { return static_cast<int>(p_x_given_w.cols()); }
  int num_actions() const { return static_cast<int>(p_a_given_x.cols()); }

  void validate() const;  // throws ConfigError on broken invariants
};

Eigen::VectorXd marginal_x(const JointSystem& sys);
Eigen::VectorXd marginal_a(const JointSystem& sys);

// Shannon entropy in nats; 0·log 0 := 0.
double entropy(const Eigen::Ref<const Eigen::VectorXd>& p);

// KL divergence in nats; returns +inf when support(p) ⊄ support(q).
double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p,
                     const Eigen::Ref<const Eigen::VectorXd>& q);

// Mutual information of a joint table, in nats. Entries must be nonnegative
// and sum to 1 within 1e-10; tiny negative rounding is clamped to zero.
double mutual_information(const Eigen::Ref<const Eigen::MatrixXd>& joint);
double mutual_information_bits(const Eigen::Ref<const Eigen::MatrixXd>& joint);

// Free-energy difference of the action stage:
//   ΔF(ω,x) = Σ_a p(a|x)·U(ω,a) − (1/β₂)·KL(p(·|x) ‖ p(a)).
double free_energy_diff(const JointSystem& sys, int w, int x);

// All ΔF values at once given a precomputed action marginal; (ω,x)-shaped.
Eigen::MatrixXd free_energy_diff_table(const JointSystem& sys,
                                       const Eigen::Ref<const Eigen::VectorXd>& p_a);

// Exact decomposition of the objective. Information terms are in nats.
struct Metrics {
  double J = 0.0;
  double expected_utility = 0.0;
  double I_wx = 0.0;
  double I_xa = 0.0;
};

Metrics metrics(const JointSystem& sys);

// J = E[U] − (1/β₁)·I(Ω;X) − (1/β₂)·I(X;A).
double objective_J(const JointSystem& sys);

// Per-sample integrand:
//   j(ω,x,a) = U(ω,a) − (1/β₁)·log[p(x|ω)/p(x)] − (1/β₂)·log[p(a|x)/p(a)].
// The overload taking marginals is the trainer's hot path; it avoids
// recomputing the exact sums per sample. Throws NumericError if the sampled
// conditional is zero (impossible under exact sampling).
double sample_integrand_j(const JointSystem& sys, int w, int x, int a);
double sample_integrand_j(const JointSystem& sys, int w, int x, int a,
                          const Eigen::Ref<const Eigen::VectorXd>& p_x,
                          const Eigen::Ref<const Eigen::VectorXd>& p_a);

}  // namespace serpa

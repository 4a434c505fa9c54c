#include <Eigen/Core>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "serpa/channels.hpp"
#include "serpa/rng.hpp"

using namespace serpa;

namespace {

PerceptualNetwork random_net(int d, int h, int nx, Rng& rng) {
  PerceptualNetwork net;
  net.V = Eigen::MatrixXd::NullaryExpr(
      d, h, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1.5, 1.5); });
  net.W = Eigen::MatrixXd::NullaryExpr(
      h, nx, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1.5, 1.5); });
  return net;
}

Eigen::VectorXd random_xi(int d, Rng& rng) {
  return Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
}

// Naive reference forward pass: plain loops, unnormalized exponentials.
Eigen::VectorXd forward_loops(const PerceptualNetwork& net,
                              const Eigen::VectorXd& xi) {
  const int h = net.hidden_dim(), nx = net.num_percepts();
  Eigen::VectorXd phi(h);
  for (int k = 0; k < h; ++k) {
    double z = 0.0;
    for (int i = 0; i < net.input_dim(); ++i) z += xi[i] * net.V(i, k);
    phi[k] = std::tanh(z);
  }
  Eigen::VectorXd p(nx);
  double zsum = 0.0;
  for (int j = 0; j < nx; ++j) {
    double logit = 0.0;
    for (int k = 0; k < h; ++k) logit += phi[k] * net.W(k, j);
    p[j] = std::exp(logit);
    zsum += p[j];
  }
  return p / zsum;
}

// Naive reference action probabilities per Psi(eta) = log(1 + sum exp).
Eigen::VectorXd action_loops(const ActionChannel& ch, int x) {
  const int n = static_cast<int>(ch.eta.rows());
  double z = 1.0;
  for (int i = 0; i < n; ++i) z += std::exp(ch.eta(i, x));
  Eigen::VectorXd p(n + 1);
  p[0] = 1.0 / z;
  for (int i = 0; i < n; ++i) p[i + 1] = std::exp(ch.eta(i, x)) / z;
  return p;
}

double log_forward(const PerceptualNetwork& net, const Eigen::VectorXd& xi, int x) {
  return std::log(net.forward(xi)[x]);
}

double log_action(const ActionChannel& ch, int x, int a) {
  return std::log(ch.probs(x)[a]);
}

}  // namespace

TEST_CASE("perceptual forward") {
  Rng rng(21);
  SUBCASE("zero weights or zero input give uniform") {
    PerceptualNetwork net = random_net(4, 3, 5, rng);
    net.W.setZero();
    Eigen::VectorXd p = net.forward(random_xi(4, rng));
    for (int j = 0; j < 5; ++j) CHECK(p[j] == doctest::Approx(0.2).epsilon(1e-12));

    net = random_net(4, 3, 5, rng);
    p = net.forward(Eigen::VectorXd::Zero(4));
    for (int j = 0; j < 5; ++j) CHECK(p[j] == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("matches the naive reference") {
    for (int t = 0; t < 20; ++t) {
      PerceptualNetwork net = random_net(6, 4, 13, rng);
      Eigen::VectorXd xi = random_xi(6, rng);
      Eigen::VectorXd p = net.forward(xi), ref = forward_loops(net, xi);
      CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.minCoeff() > 0.0);
      CHECK((p - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("huge logits stay finite") {
    PerceptualNetwork net = random_net(3, 2, 4, rng);
    net.W *= 500.0;
    Eigen::VectorXd p = net.forward(random_xi(3, rng));
    CHECK(p.allFinite());
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("tabulate stacks per-world forwards") {
    PerceptualNetwork net = random_net(4, 3, 5, rng);
    Eigen::MatrixXd enc = Eigen::MatrixXd::NullaryExpr(
        6, 4, [&](Eigen::Index, Eigen::Index) { return rng.uniform(0.0, 1.0); });
    Eigen::MatrixXd tab = net.tabulate(enc);
    for (int w = 0; w < 6; ++w)
      CHECK((tab.row(w).transpose() - net.forward(enc.row(w).transpose()))
                .cwiseAbs()
                .maxCoeff() < 1e-14);
  }
}

TEST_CASE("action channel probabilities") {
  Rng rng(22);
  SUBCASE("zero eta is uniform") {
    ActionChannel ch = init_uniform_actions(4, 3);
    for (int x = 0; x < 3; ++x) {
      Eigen::VectorXd p = ch.probs(x);
      for (int a = 0; a < 4; ++a) CHECK(p[a] == doctest::Approx(0.25).epsilon(1e-12));
    }
  }
  SUBCASE("large logit saturates") {
    ActionChannel ch = init_uniform_actions(4, 1);
    ch.eta(0, 0) = 40.0;
    ch.eta(1, 0) = -40.0;
    ch.eta(2, 0) = -40.0;
    Eigen::VectorXd p = ch.probs(0);
    CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[0] < 1e-12);
    CHECK(p[2] < 1e-12);
    CHECK(p[3] < 1e-12);
  }
  SUBCASE("matches the naive reference") {
    for (int t = 0; t < 20; ++t) {
      ActionChannel ch = init_uniform_actions(13, 5);
      ch.eta = Eigen::MatrixXd::NullaryExpr(
          12, 5, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-3.0, 3.0); });
      for (int x = 0; x < 5; ++x) {
        Eigen::VectorXd p = ch.probs(x), ref = action_loops(ch, x);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((p - ref).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
  SUBCASE("table stacks per-percept rows") {
    ActionChannel ch = init_uniform_actions(4, 3);
    ch.eta.setRandom();
    Eigen::MatrixXd tab = ch.table();
    for (int x = 0; x < 3; ++x)
      CHECK((tab.row(x).transpose() - ch.probs(x)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("perceptual gradients") {
  Rng rng(23);
  SUBCASE("zero input zeroes both gradients") {
    PerceptualNetwork net = random_net(4, 3, 5, rng);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
    CHECK(grad_log_perceptual_V(net, zero, 2).isZero(0.0));
    // W gradient at xi = 0: phi = 0, so every column vanishes
    CHECK(grad_log_perceptual_W(net, zero, 2).isZero(0.0));
  }
  SUBCASE("single percept has constant log-probability") {
    PerceptualNetwork net = random_net(4, 3, 1, rng);
    Eigen::VectorXd xi = random_xi(4, rng);
    CHECK(grad_log_perceptual_V(net, xi, 0).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(grad_log_perceptual_W(net, xi, 0).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("uniform two-percept W column") {
    PerceptualNetwork net = random_net(4, 3, 2, rng);
    net.W.setZero();
    Eigen::VectorXd xi = random_xi(4, rng);
    Eigen::VectorXd phi = net.hidden(xi);
    Eigen::MatrixXd g = grad_log_perceptual_W(net, xi, 1);
    CHECK((g.col(1) - 0.5 * phi).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.col(0) + 0.5 * phi).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("finite differences") {
    const double step = 1e-6;
    for (int t = 0; t < 20; ++t) {
      PerceptualNetwork net = random_net(3, 4, 5, rng);
      Eigen::VectorXd xi = random_xi(3, rng);
      int x = t % 5;
      Eigen::MatrixXd gv = grad_log_perceptual_V(net, xi, x);
      Eigen::MatrixXd gw = grad_log_perceptual_W(net, xi, x);
      for (int i = 0; i < net.V.size(); ++i) {
        PerceptualNetwork up = net, dn = net;
        up.V(i / 4, i % 4) += step;
        dn.V(i / 4, i % 4) -= step;
        double fd = (log_forward(up, xi, x) - log_forward(dn, xi, x)) / (2 * step);
        CHECK(std::abs(gv(i / 4, i % 4) - fd) < 1e-6);
      }
      for (int i = 0; i < net.W.size(); ++i) {
        PerceptualNetwork up = net, dn = net;
        up.W(i / 5, i % 5) += step;
        dn.W(i / 5, i % 5) -= step;
        double fd = (log_forward(up, xi, x) - log_forward(dn, xi, x)) / (2 * step);
        CHECK(std::abs(gw(i / 5, i % 5) - fd) < 1e-6);
      }
    }
  }
  SUBCASE("expected score is zero") {
    for (int t = 0; t < 5; ++t) {
      PerceptualNetwork net = random_net(4, 3, 6, rng);
      Eigen::VectorXd xi = random_xi(4, rng);
      Eigen::VectorXd p = net.forward(xi);
      Eigen::MatrixXd sv = Eigen::MatrixXd::Zero(4, 3);
      Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(3, 6);
      for (int x = 0; x < 6; ++x) {
        sv += p[x] * grad_log_perceptual_V(net, xi, x);
        sw += p[x] * grad_log_perceptual_W(net, xi, x);
      }
      CHECK(sv.cwiseAbs().maxCoeff() < 1e-9);
      CHECK(sw.cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("action gradient") {
  Rng rng(24);
  SUBCASE("uniform channel hand values") {
    ActionChannel ch = init_uniform_actions(4, 2);
    Eigen::VectorXd g0 = grad_log_action_eta(ch, 1, 0);
    CHECK(g0[0] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(g0[1] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(g0[2] == doctest::Approx(-0.25).epsilon(1e-12));
    Eigen::VectorXd g2 = grad_log_action_eta(ch, 1, 2);
    CHECK(g2[0] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(g2[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(g2[2] == doctest::Approx(-0.25).epsilon(1e-12));
  }
  SUBCASE("finite differences, every action") {
    const double step = 1e-6;
    for (int t = 0; t < 20; ++t) {
      ActionChannel ch = init_uniform_actions(5, 3);
      ch.eta = Eigen::MatrixXd::NullaryExpr(
          4, 3, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-2.0, 2.0); });
      int x = t % 3;
      for (int a = 0; a < 5; ++a) {
        Eigen::VectorXd g = grad_log_action_eta(ch, x, a);
        for (int i = 0; i < 4; ++i) {
          ActionChannel up = ch, dn = ch;
          up.eta(i, x) += step;
          dn.eta(i, x) -= step;
          double fd = (log_action(up, x, a) - log_action(dn, x, a)) / (2 * step);
          CHECK(std::abs(g[i] - fd) < 1e-6);
        }
      }
    }
  }
  SUBCASE("score identity") {
    Rng r2(25);
    ActionChannel ch = init_uniform_actions(6, 4);
    ch.eta = Eigen::MatrixXd::NullaryExpr(
        5, 4, [&](Eigen::Index, Eigen::Index) { return r2.uniform(-2.0, 2.0); });
    for (int x = 0; x < 4; ++x) {
      Eigen::VectorXd p = ch.probs(x);
      Eigen::VectorXd s = Eigen::VectorXd::Zero(5);
      for (int a = 0; a < 6; ++a) s += p[a] * grad_log_action_eta(ch, x, a);
      CHECK(s.cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("initialization") {
  SUBCASE("glorot bounds") {
    Rng rng(26);
    PerceptualNetwork net = init_glorot(40, 50, 60, rng);
    const double bv = std::sqrt(6.0 / (40 + 50)), bw = std::sqrt(6.0 / (50 + 60));
    CHECK(net.V.cwiseAbs().maxCoeff() <= bv);
    CHECK(net.W.cwiseAbs().maxCoeff() <= bw);
    CHECK(net.V.size() + net.W.size() == 40 * 50 + 50 * 60);
    // the draw actually spreads over the interval
    CHECK(net.V.cwiseAbs().maxCoeff() > 0.8 * bv);
  }
  SUBCASE("seeded determinism") {
    Rng a(5), b(5);
    PerceptualNetwork na = init_glorot(4, 20, 13, a), nb = init_glorot(4, 20, 13, b);
    CHECK((na.V - nb.V).cwiseAbs().maxCoeff() == 0.0);
    CHECK((na.W - nb.W).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("uniform actions everywhere") {
    ActionChannel ch = init_uniform_actions(13, 7);
    CHECK(ch.eta.isZero(0.0));
    for (int x = 0; x < 7; ++x)
      CHECK(ch.probs(x).maxCoeff() == doctest::Approx(1.0 / 13).epsilon(1e-12));
  }
}

TEST_CASE("parameter snapshot round trip") {
  Rng rng(27);
  PerceptualNetwork net = init_glorot(4, 3, 5, rng);
  ActionChannel ch = init_uniform_actions(5, 5);
  ch.eta = Eigen::MatrixXd::NullaryExpr(
      4, 5, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-7.0, 7.0); });

  std::stringstream ss;
  save_params(ss, net, ch);
  PerceptualNetwork net2;
  ActionChannel ch2;
  load_params(ss, net2, ch2);
  CHECK((net.V - net2.V).cwiseAbs().maxCoeff() == 0.0);  // %.17g is exact
  CHECK((net.W - net2.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ch.eta - ch2.eta).cwiseAbs().maxCoeff() == 0.0);
}

#include "serpa/env.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "serpa/errors.hpp"

namespace serpa {

namespace {

// Predator-prey utility shape. Within the small group a wrong snare still
// earns near-full credit, so telling small animals apart is a fine
// distinction that coarse percepts may drop at moderate β₁. A wrong
// medium-specific hunt earns only half credit, which makes the generic hunt
// the clear choice for any percept that pools several medium animals
// (the tie with each specific action survives, but no mixture of medium
// animals prefers a specific one). Large animals score only on flee.
// Two rows get special care for the binary input geometry:
//  - World 0 is the trivially catchable smallest animal: every action nets
//    0.96 (its own snare slightly more). Its input code is all-zero, so no
//    perceptual network can adapt to it (zero input ⇒ zero first-layer
//    gradient) and it must be cheap wherever it lands.
//  - World 4 is a small animal whose code shares its high bit with the
//    medium group; a percept that groups it with the mediums will hunt
//    generically, so the generic hunt nets it near-full credit rather
//    than a dead zero.
constexpr double kPpSmallCredit = 0.98;   // wrong snare, right size group
constexpr double kPpMediumCredit = 0.5;   // wrong medium-specific hunt
constexpr double kPpEasyWorld = 0.96;     // world 0 baseline credit
constexpr double kPpValve = 0.95;         // world 4 under the generic hunt
constexpr double kPpScale = 10.0;         // global utility scale
constexpr int kPpGroup = 5;               // animals per size group
constexpr int kPpActions = 13;            // 5 + 5 + generic + flee + idle

// Mug utility values. A successful specific grasp scores full; lifting a
// one-handle mug with the two-handed grasp works but wastes effort; any
// other (mug, action) pair fails and scores zero.
constexpr double kMugScale = 7.0;   // global utility scale
constexpr double kMugEffort = 0.6;  // two-handed lift of a one-handle mug

// World index → little-endian binary code over `bits` components
// (world 5 → [1,0,1,0] at 4 bits).
Eigen::VectorXd binary_code(int world, int bits) {
  Eigen::VectorXd xi(bits);
  const unsigned code = static_cast<unsigned>(world);
  for (int b = 0; b < bits; ++b) xi[b] = static_cast<double>((code >> b) & 1u);
  return xi;
}

int bits_for(int num_worlds) {
  int bits = 1;
  while ((1 << bits) - 1 < num_worlds - 1) ++bits;
  return bits;
}

Eigen::MatrixXd binary_encodings(int num_worlds) {
  const int bits = bits_for(num_worlds);
  Eigen::MatrixXd enc(num_worlds, bits);
  for (int w = 0; w < num_worlds; ++w) enc.row(w) = binary_code(w, bits).transpose();
  return enc;
}

}  // namespace

void WorldModel::validate() const {
  if (prior.size() == 0) throw ConfigError("world model: empty prior");
  if (prior.minCoeff() < 0.0) throw ConfigError("world model: negative prior entry");
  if (std::abs(prior.sum() - 1.0) > 1e-12)
    throw ConfigError("world model: prior does not sum to 1");
  if (utility.rows() != prior.size())
    throw ConfigError("world model: utility rows != |Omega|");
  if (utility.cols() < 2) throw ConfigError("world model: need at least 2 actions");
  if (!utility.allFinite())
    throw ConfigError("world model: utility has non-finite entries");
  if (encodings.rows() != prior.size())
    throw ConfigError("world model: encoding rows != |Omega|");
  if (noise < 0.0 || noise > 1.0)
    throw ConfigError("world model: noise must be in [0,1]");
}

int sample_world(const WorldModel& m, Rng& rng) { return rng.categorical(m.prior); }

Eigen::VectorXd encode(const WorldModel& m, int world, Rng& rng) {
  Eigen::VectorXd xi = m.encodings.row(world).transpose();
  if (m.noise > 0.0)
    for (Eigen::Index i = 0; i < xi.size(); ++i)
      if (rng.uniform() < m.noise) xi[i] = 1.0 - xi[i];
  return xi;
}

Eigen::MatrixXd predator_prey_utility() {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(3 * kPpGroup, kPpActions);
  const int generic = 2 * kPpGroup;  // action 10
  const int flee = generic + 1;      // action 11
  for (int i = 0; i < kPpGroup; ++i) {
    for (int j = 0; j < kPpGroup; ++j) {
      u(i, j) = i == j ? 1.0 : kPpSmallCredit;  // small block, strict argmax
      u(kPpGroup + i, kPpGroup + j) = i == j ? 1.0 : kPpMediumCredit;
    }
    u(kPpGroup + i, generic) = 1.0;   // ties the medium-specific maximum
    u(2 * kPpGroup + i, flee) = 1.0;  // only nonzero entry for large animals
  }
  u.row(0).setConstant(kPpEasyWorld);  // world 0: anything works...
  u(0, 0) = 1.0;                       // ...its own snare slightly better
  u(kPpGroup - 1, generic) = kPpValve;  // world 4 survives the generic hunt
  return u * kPpScale;
}

WorldModel predator_prey_task() {
  WorldModel m;
  const int n = 3 * kPpGroup;
  m.prior = Eigen::VectorXd::Constant(n, 1.0 / n);
  m.utility = predator_prey_utility();
  m.encodings = binary_encodings(n);
  m.validate();
  return m;
}

Eigen::MatrixXd mug_utility() {
  // Rows m0,mL,mR,m2; columns a0,aL,aR,a2.
  Eigen::MatrixXd u(4, 4);
  u << 1.0, 0.0, 0.0, 0.0,
       0.0, 1.0, 0.0, kMugEffort,
       0.0, 0.0, 1.0, kMugEffort,
       0.0, 0.0, 0.0, 1.0;
  return u * kMugScale;
}

Eigen::MatrixXd mug_templates() {
  constexpr int kRows = 12, kCols = 16;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(4, kRows * kCols);
  const bool handles[4][2] = {{false, false}, {true, false}, {false, true}, {true, true}};
  for (int m = 0; m < 4; ++m) {
    auto set = [&](int r0, int r1, int c0, int c1) {
      for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) t(m, r * kCols + c) = 1.0;
    };
    // Small body, large handles: the body is the only shared pixel mass, so
    // keeping it small leaves the four bitmaps close to orthogonal and the
    // handle blocks carry the class identity.
    set(5, 9, 7, 9);                        // body
    if (handles[m][0]) set(2, 10, 1, 6);    // left handle
    if (handles[m][1]) set(2, 10, 10, 15);  // right handle
  }
  return t;
}

WorldModel mug_task(double noise) {
  WorldModel m;
  m.prior = Eigen::VectorXd::Constant(4, 0.25);
  m.utility = mug_utility();
  m.encodings = mug_templates();
  m.noise = noise;
  m.validate();
  return m;
}

WorldModel load_world_model(std::istream& in) {
  int num_worlds = 0, num_actions = 0;
  if (!(in >> num_worlds >> num_actions) || num_worlds <= 0 || num_actions <= 0)
    throw ConfigError("model file: expected header 'num_worlds num_actions'");
  WorldModel m;
  m.utility.resize(num_worlds, num_actions);
  for (int w = 0; w < num_worlds; ++w)
    for (int a = 0; a < num_actions; ++a)
      if (!(in >> m.utility(w, a)))
        throw ConfigError("model file: truncated utility table");
  m.prior.resize(num_worlds);
  for (int w = 0; w < num_worlds; ++w)
    if (!(in >> m.prior[w])) throw ConfigError("model file: truncated prior row");
  m.encodings = binary_encodings(num_worlds);
  m.validate();
  return m;
}

WorldModel load_world_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("model file: cannot open '" + path + "'");
  return load_world_model(in);
}

Eigen::VectorXd load_bitmap(std::istream& in) {
  constexpr int kRows = 12, kCols = 16;
  Eigen::VectorXd v(kRows * kCols);
  std::string line;
  int r = 0;
  while (r < kRows && std::getline(in, line)) {
    if (line.empty()) continue;
    if (static_cast<int>(line.size()) < kCols)
      throw ConfigError("bitmap: line shorter than 16 columns");
    for (int c = 0; c < kCols; ++c) {
      if (line[c] != '0' && line[c] != '1')
        throw ConfigError("bitmap: characters must be 0 or 1");
      v[r * kCols + c] = line[c] - '0';
    }
    ++r;
  }
  if (r < kRows) throw ConfigError("bitmap: fewer than 12 lines");
  return v;
}

}  // namespace serpa

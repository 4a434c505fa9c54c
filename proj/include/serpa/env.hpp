#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>

#include "serpa/rng.hpp"

namespace serpa {

// Discrete task definition: world prior, utility table, and a deterministic
// encoder mapping each world index to a real input vector. `encodings` holds
// the noise-free template per world; `noise` is a per-pixel flip probability
// applied on top (0 disables it and makes encode fully deterministic).
struct WorldModel {
  Eigen::VectorXd prior;      // |Ω|
  Eigen::MatrixXd utility;    // |Ω| × |A|
  Eigen::MatrixXd encodings;  // |Ω| × d_ξ
  double noise = 0.0;

  int num_worlds() const { return static_cast<int>(prior.size()); }
  int num_actions() const { return static_cast<int>(utility.cols()); }
  int input_dim() const { return static_cast<int>(encodings.cols()); }

  void validate() const;  // throws ConfigError on broken invariants
};

// Draws a world index from the prior; consumes exactly one uniform.
int sample_world(const WorldModel& m, Rng& rng);

// Returns the input vector for `world`. With noise > 0 every component is
// flipped (v → 1−v) independently with that probability, consuming one
// uniform per component; at noise = 0 no randomness is consumed.
Eigen::VectorXd encode(const WorldModel& m, int world, Rng& rng);

// Built-in predator-prey task: 15 worlds (5 small, 5 medium, 5 large),
// 13 actions (5 small-specific, 5 medium-specific, generic hunt, flee, idle),
// uniform prior, 4-bit binary encoder.
WorldModel predator_prey_task();
Eigen::MatrixXd predator_prey_utility();

// Built-in mug task: 4 mugs {m0, mL, mR, m2}, 4 actions {a0, aL, aR, a2},
// uniform prior, 16×12 bitmap encoder flattened row-major to 192 components.
WorldModel mug_task(double noise = 0.0);
Eigen::MatrixXd mug_utility();
Eigen::MatrixXd mug_templates();  // 4 × 192, entries in {0,1}

// Plain-text model file: header "num_worlds num_actions", then the utility
// rows, then one prior row. The encoder defaults to the binary scheme used
// by the predator-prey task, sized to the loaded |Ω|.
WorldModel load_world_model(std::istream& in);
WorldModel load_world_model_file(const std::string& path);

// 12 lines × 16 columns of '0'/'1' characters → flattened 192-vector.
Eigen::VectorXd load_bitmap(std::istream& in);

}  // namespace serpa

#ifndef MARBLR_SIMULATOR_HPP
#define MARBLR_SIMULATOR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "marblr/belief.hpp"

namespace marblr {

enum class ShiftKind { InitialShift, Cyclical, Decay };

/// Synthetic drift stream description. All drift magnitudes live in
/// drift_params; names and defaults are listed in default_drift_params().
struct ScenarioSpec {
  int scenario = 2;  // 1: subgroups, 2: logistic revision, 3: ensembling
  ShiftKind shift = ShiftKind::InitialShift;
  int T = 100;
  int n = 20;
  int d_x = 10;
  std::uint64_t seed = 0;
  double group_prev_a = 0.2;  // scenario 1; group B has 1 - p_A
  std::map<std::string, double> drift_params;
  bool subset_refit_corruption = false;  // scenario 3 label-noise burst
  int tau_grid = 10;                     // Decay oracle down-sampling

  void validate() const;
  double param(const std::string& name) const;
};

std::map<std::string, double> default_drift_params();

struct SimBatch {
  Matrix x;                 // n x d_x
  std::vector<int> group;   // scenario 1 only, else empty
  Vector true_prob;
  Vector y;
  Vector original_score;    // fixed t=0 model output
  Vector y_refit;           // labels handed to the refit manager (scenario 3)
};

/// Deterministic given the spec. The true logit is b0(t) + b(t)'x; the
/// original model is the t=0 parameterization, so miscalibration at time t
/// is exactly the parameter drift.
std::vector<SimBatch> generate(const ScenarioSpec& spec);

/// The generator's true parameter-change times (tau_1 = 1 always).
std::vector<int> oracle_tau(const ScenarioSpec& spec);

}  // namespace marblr

#endif  // MARBLR_SIMULATOR_HPP

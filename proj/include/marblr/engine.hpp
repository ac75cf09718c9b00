#ifndef MARBLR_ENGINE_HPP
#define MARBLR_ENGINE_HPP

#include <array>
#include <functional>
#include <vector>

#include "marblr/belief.hpp"
#include "marblr/logistic.hpp"

namespace marblr {

// Branches with log-weight below max - kLogWeightFloor are zeroed out.
inline constexpr double kLogWeightFloor = 700.0;

struct MarBLRConfig {
  Vector theta_init;
  Matrix sigma_init;
  double alpha = 0.0;
  double delta2 = 0.0;
  CollapseMode collapse_mode = CollapseMode::PaperFaithful;
  PredictiveMethod predictive = PredictiveMethod::probit();

  bool is_blr() const { return alpha == 0.0 && delta2 == 0.0; }
  void validate() const;
};

/// The two collapsed branches, indexed by w in {0,1}: branch w holds the
/// Gaussian for theta_t | W_t = w and the weight Pr(W_t = w | data).
struct EngineState {
  std::array<WeightedComponent, 2> branches;
  long t = 1;
};

struct PredictiveComponent {
  int w_t;
  int w_prev;
  double weight;
  GaussianBelief belief;
};

/// Up to four components indexed by (w_t, w_{t-1}); zero-weight entries are
/// retained so the component order is fixed.
struct PredictiveMixture {
  std::vector<PredictiveComponent> components;
};

struct StepRecord {
  long t = 0;
  Vector probs;     // prequential probabilities for the step's batch
  Vector outcomes;  // observed y for the step's batch
  Vector post_mean; // mixture over branches, before the update
  Matrix post_cov;
  std::array<double, 2> branch_weights{0.0, 0.0};
};

struct RunHistory {
  std::vector<StepRecord> steps;
  EngineState final_state;
};

using StepObserver =
    std::function<void(long t, const Vector& probs, const EngineState& pre_update)>;

EngineState init(const MarBLRConfig& config);

PredictiveMixture predict_step(const EngineState& state, const MarBLRConfig& config);

Vector predict_proba(const EngineState& state, const MarBLRConfig& config,
                     const Matrix& z_rows);

EngineState update_step(const EngineState& state, const MarBLRConfig& config,
                        const LabeledBatch& batch);

/// Prequential loop: score each batch before its outcomes are used.
RunHistory run_stream(const MarBLRConfig& config,
                      const std::vector<LabeledBatch>& stream,
                      const StepObserver& observer = {});

/// Mixture over the two branches, merged with the config's collapse mode.
GaussianBelief collapsed_posterior(const EngineState& state, const MarBLRConfig& config);

}  // namespace marblr

#endif  // MARBLR_ENGINE_HPP

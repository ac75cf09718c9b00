#ifndef MARBLR_HARNESS_HPP
#define MARBLR_HARNESS_HPP

#include <optional>
#include <vector>

#include "marblr/engine.hpp"
#include "marblr/metrics.hpp"
#include "marblr/revision.hpp"
#include "marblr/simulator.hpp"

namespace marblr {

enum class Method { Locked, BLR, MarBLR, CumulativeMle };

struct HarnessConfig {
  Method method = Method::BLR;
  FeatureMap map;
  double alpha = 0.0;
  double delta2 = 0.0;
  std::optional<Vector> theta_init;  // defaults to the identity revision
  double sigma_init_scale = 1.0;
  CollapseMode collapse = CollapseMode::PaperFaithful;
  PredictiveMethod predictive = PredictiveMethod::probit();
  std::optional<RefitManager> refit;  // ensemble runs only
};

/// Prequential run of one method over a simulated stream. The feature
/// batches are the reviser inputs actually used (for the ensemble variant
/// they include the evolving refitted model's scores).
struct HarnessResult {
  std::vector<LabeledBatch> features;
  RunHistory history;  // locked/cumulative-MLE runs fill probs and post_mean too
  MarBLRConfig engine_config;
};

HarnessResult run_harness(const HarnessConfig& config,
                          const std::vector<SimBatch>& stream);

Vector flatten_probs(const RunHistory& history);
Vector flatten_outcomes(const RunHistory& history);

/// Pooled AUC over the steps with t in [t_lo, t_hi] (1-based, inclusive).
double window_auc(const RunHistory& history, int t_lo, int t_hi);

}  // namespace marblr

#endif  // MARBLR_HARNESS_HPP

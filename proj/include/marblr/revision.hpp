#ifndef MARBLR_REVISION_HPP
#define MARBLR_REVISION_HPP

#include <optional>
#include <vector>

#include "marblr/logistic.hpp"

namespace marblr {

/// Feature-map constructor for the reviser input z. Scores are clipped to
/// [eps, 1-eps] before taking logits.
struct FeatureMap {
  enum class Variant {
    Recalibrate,            // [1, logit(f)]
    SubgroupRecalibrate,    // [logit(f), one-hot group intercepts]
    SubgroupPerSlope,       // [per-group logit slopes, one-hot intercepts]
    LogisticRevision,       // [1, logit(f), x_1..x_dx]
    Ensemble                // [1, logit(f_1), .., logit(f_m)]
  };

  Variant variant = Variant::Recalibrate;
  int groups = 2;      // SubgroupRecalibrate / SubgroupPerSlope
  int num_vars = 10;   // LogisticRevision
  int models = 2;      // Ensemble
  double logit_clip_eps = 1e-4;

  int dim() const;
  double clip(double score) const;

  /// scores: per-model probabilities (only scores[0] used outside Ensemble).
  Vector build(const Vector& scores, const Vector& x,
               std::optional<int> group = std::nullopt) const;

  /// theta for which the revised probability equals the clipped original
  /// score exactly.
  Vector identity_theta() const;
};

/// Underlying-model refit manager for ensembling runs. The model is a
/// logistic regression on [1, x]; refitting pools either all history
/// (AllRefit) or a trailing window of time steps (SubsetRefit).
struct RefitManager {
  enum class Strategy { AllRefit, SubsetRefit };

  Strategy strategy = Strategy::AllRefit;
  int window = 20;       // SubsetRefit only, in time steps
  int refit_every = 1;
  double ridge = 1e-6;
  Vector model_params;   // [intercept, coefficients]
  bool last_refit_skipped = false;

  RefitManager() = default;
  RefitManager(Strategy s, int window, int refit_every, double ridge, int d_x);

  /// history[k] holds the raw design [1, x] and outcomes for time step k+1.
  void maybe_refit(const std::vector<LabeledBatch>& history, long t);

  double score(const Vector& x_row) const;
};

}  // namespace marblr

#endif  // MARBLR_REVISION_HPP

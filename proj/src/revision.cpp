#include "marblr/revision.hpp"

#include <algorithm>
#include <stdexcept>

namespace marblr {

int FeatureMap::dim() const {
  switch (variant) {
    case Variant::Recalibrate: return 2;
    case Variant::SubgroupRecalibrate: return groups + 1;
    case Variant::SubgroupPerSlope: return 2 * groups;
    case Variant::LogisticRevision: return num_vars + 2;
    case Variant::Ensemble: return models + 1;
  }
  throw std::logic_error("FeatureMap: unknown variant");
}

double FeatureMap::clip(double score) const {
  return std::clamp(score, logit_clip_eps, 1.0 - logit_clip_eps);
}

Vector FeatureMap::build(const Vector& scores, const Vector& x,
                         std::optional<int> group) const {
  if (scores.size() < 1) {
    throw std::invalid_argument("FeatureMap: at least one score required");
  }
  const double l0 = logit(clip(scores[0]));
  Vector z = Vector::Zero(dim());
  switch (variant) {
    case Variant::Recalibrate:
      z << 1.0, l0;
      break;
    case Variant::SubgroupRecalibrate: {
      if (!group || *group < 0 || *group >= groups) {
        throw std::invalid_argument("FeatureMap: subgroup variant requires a group id");
      }
      z[0] = l0;
      z[1 + *group] = 1.0;
      break;
    }
    case Variant::SubgroupPerSlope: {
      if (!group || *group < 0 || *group >= groups) {
        throw std::invalid_argument("FeatureMap: subgroup variant requires a group id");
      }
      z[*group] = l0;
      z[groups + *group] = 1.0;
      break;
    }
    case Variant::LogisticRevision: {
      if (x.size() != num_vars) {
        throw std::invalid_argument("FeatureMap: expected num_vars patient variables");
      }
      z[0] = 1.0;
      z[1] = l0;
      z.tail(num_vars) = x;
      break;
    }
    case Variant::Ensemble: {
      if (scores.size() != models) {
        throw std::invalid_argument("FeatureMap: expected one score per model");
      }
      z[0] = 1.0;
      for (int m = 0; m < models; ++m) z[1 + m] = logit(clip(scores[m]));
      break;
    }
  }
  return z;
}

Vector FeatureMap::identity_theta() const {
  Vector theta = Vector::Zero(dim());
  switch (variant) {
    case Variant::Recalibrate:
    case Variant::LogisticRevision:
    case Variant::Ensemble:
      theta[1] = 1.0;
      break;
    case Variant::SubgroupRecalibrate:
      theta[0] = 1.0;
      break;
    case Variant::SubgroupPerSlope:
      theta.head(groups).setOnes();
      break;
  }
  return theta;
}

RefitManager::RefitManager(Strategy s, int window_in, int refit_every_in,
                           double ridge_in, int d_x)
    : strategy(s), window(window_in), refit_every(refit_every_in), ridge(ridge_in),
      model_params(Vector::Zero(d_x + 1)) {
  if (strategy == Strategy::SubsetRefit && window < 1) {
    throw std::invalid_argument("RefitManager: window must be >= 1");
  }
  if (refit_every < 1) {
    throw std::invalid_argument("RefitManager: refit_every must be >= 1");
  }
}

void RefitManager::maybe_refit(const std::vector<LabeledBatch>& history, long t) {
  if (t < 1) throw std::invalid_argument("RefitManager: t must be >= 1");
  if (t % refit_every != 0) return;
  size_t first = 0;
  if (strategy == Strategy::SubsetRefit && history.size() > static_cast<size_t>(window)) {
    first = history.size() - static_cast<size_t>(window);
  }
  std::vector<LabeledBatch> pool(history.begin() + first, history.end());
  double positives = 0.0, total = 0.0;
  for (const auto& b : pool) {
    positives += b.y.sum();
    total += static_cast<double>(b.size());
  }
  if (total == 0.0 || positives == 0.0 || positives == total) {
    last_refit_skipped = true;  // single-class window, keep previous params
    return;
  }
  const MleResult fit = fit_mle(pool, model_params, ridge);
  model_params = fit.theta;
  last_refit_skipped = false;
}

double RefitManager::score(const Vector& x_row) const {
  double w = model_params[0];
  w += model_params.tail(model_params.size() - 1).dot(x_row);
  return sigmoid(w);
}

}  // namespace marblr

#include "marblr/harness.hpp"

#include <stdexcept>

namespace marblr {

namespace {

LabeledBatch build_feature_batch(const FeatureMap& map, const SimBatch& sim,
                                 const RefitManager* refit) {
  const int n = static_cast<int>(sim.y.size());
  Matrix z(n, map.dim());
  for (int i = 0; i < n; ++i) {
    Vector scores;
    if (map.variant == FeatureMap::Variant::Ensemble) {
      if (refit == nullptr) {
        throw std::invalid_argument("harness: ensemble variant requires a refit manager");
      }
      scores = Vector(2);
      scores << sim.original_score[i], refit->score(sim.x.row(i).transpose());
    } else {
      scores = Vector::Constant(1, sim.original_score[i]);
    }
    std::optional<int> group;
    if (!sim.group.empty()) group = sim.group[i];
    z.row(i) = map.build(scores, sim.x.row(i).transpose(), group).transpose();
  }
  return LabeledBatch(z, sim.y);
}

}  // namespace

HarnessResult run_harness(const HarnessConfig& config,
                          const std::vector<SimBatch>& stream) {
  HarnessResult res;
  const Vector theta_init =
      config.theta_init ? *config.theta_init : config.map.identity_theta();
  const Eigen::Index d = theta_init.size();
  if (d != config.map.dim()) {
    throw std::invalid_argument("harness: theta_init dimension mismatch");
  }
  res.engine_config = MarBLRConfig{
      theta_init,
      config.sigma_init_scale * Matrix::Identity(d, d),
      config.method == Method::MarBLR ? config.alpha : 0.0,
      config.method == Method::MarBLR ? config.delta2 : 0.0,
      config.collapse,
      config.predictive};

  RefitManager refit = config.refit.value_or(RefitManager{});
  const bool use_refit = config.refit.has_value();
  std::vector<LabeledBatch> raw_history;  // [1, x] design for refitting

  EngineState state =
      (config.method == Method::BLR || config.method == Method::MarBLR)
          ? init(res.engine_config)
          : EngineState{};
  Vector mle_theta = theta_init;  // CumulativeMle running estimate

  long t = 1;
  for (const auto& sim : stream) {
    LabeledBatch batch =
        build_feature_batch(config.map, sim, use_refit ? &refit : nullptr);

    StepRecord rec;
    rec.t = t;
    rec.outcomes = batch.y;
    switch (config.method) {
      case Method::Locked: {
        rec.probs = Vector(batch.size());
        for (Eigen::Index i = 0; i < batch.size(); ++i) {
          rec.probs[i] = sigmoid(batch.z.row(i).dot(theta_init));
        }
        rec.post_mean = theta_init;
        rec.post_cov = Matrix::Zero(d, d);
        rec.branch_weights = {1.0, 0.0};
        break;
      }
      case Method::CumulativeMle: {
        rec.probs = Vector(batch.size());
        for (Eigen::Index i = 0; i < batch.size(); ++i) {
          rec.probs[i] = sigmoid(batch.z.row(i).dot(mle_theta));
        }
        rec.post_mean = mle_theta;
        rec.post_cov = Matrix::Zero(d, d);
        rec.branch_weights = {1.0, 0.0};
        break;
      }
      case Method::BLR:
      case Method::MarBLR: {
        rec.probs = predict_proba(state, res.engine_config, batch.z);
        const GaussianBelief post = collapsed_posterior(state, res.engine_config);
        rec.post_mean = post.mean();
        rec.post_cov = post.cov();
        rec.branch_weights = {state.branches[0].weight, state.branches[1].weight};
        break;
      }
    }
    res.history.steps.push_back(rec);

    // Updates, after the prequential scoring.
    if (config.method == Method::BLR || config.method == Method::MarBLR) {
      state = update_step(state, res.engine_config, batch);
    } else if (config.method == Method::CumulativeMle) {
      res.features.push_back(batch);
      const MleResult fit = fit_mle(res.features, mle_theta, 1e-6);
      mle_theta = fit.theta;
    }
    if (config.method != Method::CumulativeMle) res.features.push_back(batch);

    if (use_refit) {
      Matrix design(sim.x.rows(), sim.x.cols() + 1);
      design.col(0).setOnes();
      design.rightCols(sim.x.cols()) = sim.x;
      raw_history.emplace_back(design, sim.y_refit);
      refit.maybe_refit(raw_history, t);
    }
    ++t;
  }
  if (config.method == Method::BLR || config.method == Method::MarBLR) {
    res.history.final_state = state;
  }
  return res;
}

Vector flatten_probs(const RunHistory& history) {
  Eigen::Index total = 0;
  for (const auto& s : history.steps) total += s.probs.size();
  Vector out(total);
  Eigen::Index k = 0;
  for (const auto& s : history.steps) {
    out.segment(k, s.probs.size()) = s.probs;
    k += s.probs.size();
  }
  return out;
}

Vector flatten_outcomes(const RunHistory& history) {
  Eigen::Index total = 0;
  for (const auto& s : history.steps) total += s.outcomes.size();
  Vector out(total);
  Eigen::Index k = 0;
  for (const auto& s : history.steps) {
    out.segment(k, s.outcomes.size()) = s.outcomes;
    k += s.outcomes.size();
  }
  return out;
}

double window_auc(const RunHistory& history, int t_lo, int t_hi) {
  std::vector<double> p, y;
  for (const auto& s : history.steps) {
    if (s.t < t_lo || s.t > t_hi) continue;
    for (Eigen::Index i = 0; i < s.probs.size(); ++i) {
      p.push_back(s.probs[i]);
      y.push_back(s.outcomes[i]);
    }
  }
  Vector pv = Eigen::Map<Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
  Vector yv = Eigen::Map<Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  return auc(pv, yv);
}

}  // namespace marblr

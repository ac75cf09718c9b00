#include "marblr/engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace marblr {

void MarBLRConfig::validate() const {
  if (theta_init.size() == 0) {
    throw std::invalid_argument("MarBLRConfig: theta_init is empty");
  }
  if (sigma_init.rows() != theta_init.size() ||
      sigma_init.cols() != theta_init.size()) {
    throw std::invalid_argument("MarBLRConfig: sigma_init dimension mismatch");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("MarBLRConfig: alpha must lie in [0,1]");
  }
  if (delta2 < 0.0) {
    throw std::invalid_argument("MarBLRConfig: delta2 must be >= 0");
  }
  GaussianBelief(theta_init, sigma_init);  // PD check
}

EngineState init(const MarBLRConfig& config) {
  config.validate();
  GaussianBelief prior(config.theta_init, config.sigma_init);
  // W_1 = 1 under the prior: all mass on the w = 1 branch.
  return EngineState{{WeightedComponent{0.0, prior}, WeightedComponent{1.0, prior}},
                     1};
}

PredictiveMixture predict_step(const EngineState& state, const MarBLRConfig& config) {
  PredictiveMixture mix;
  mix.components.reserve(4);
  for (int w_t = 0; w_t <= 1; ++w_t) {
    const double trans = (w_t == 1) ? config.alpha : 1.0 - config.alpha;
    const double factor = 1.0 + config.delta2 * w_t;
    for (int w_prev = 0; w_prev <= 1; ++w_prev) {
      const auto& branch = state.branches[w_prev];
      mix.components.push_back(PredictiveComponent{
          w_t, w_prev, trans * branch.weight, inflate(branch.belief, factor)});
    }
  }
  return mix;
}

Vector predict_proba(const EngineState& state, const MarBLRConfig& config,
                     const Matrix& z_rows) {
  if (z_rows.cols() != config.theta_init.size() && z_rows.rows() > 0) {
    throw std::invalid_argument("predict_proba: feature dimension mismatch");
  }
  const PredictiveMixture mix = predict_step(state, config);
  Vector probs = Vector::Zero(z_rows.rows());
  for (const auto& comp : mix.components) {
    if (comp.weight == 0.0) continue;
    for (Eigen::Index i = 0; i < z_rows.rows(); ++i) {
      probs[i] += comp.weight * posterior_predictive(
                                    comp.belief, z_rows.row(i).transpose(),
                                    config.predictive);
    }
  }
  return probs;
}

EngineState update_step(const EngineState& state, const MarBLRConfig& config,
                        const LabeledBatch& batch) {
  if (batch.size() > 0 && batch.dim() != config.theta_init.size()) {
    throw std::invalid_argument("update_step: feature dimension mismatch");
  }
  const Eigen::Index d = config.theta_init.size();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const PredictiveMixture mix = predict_step(state, config);

  struct Candidate {
    int w_t;
    int w_prev;
    double log_weight;
    Vector theta;
    Matrix cov;
  };
  std::vector<Candidate> cands;
  cands.reserve(4);

  for (const auto& comp : mix.components) {
    // Penalized objective around the predictive mean: the Gaussian prior
    // gradient vanishes there, so only the likelihood gradient remains.
    const GradHess ll = grad_hessian(batch, comp.belief.mean());
    const Matrix prior_prec = comp.belief.llt().solve(Matrix::Identity(d, d));
    const NewtonResult upd =
        newton_step(comp.belief.mean(), ll.grad, ll.hess - prior_prec);
    GaussianBelief post(upd.theta, upd.cov);
    double log_w = neg_inf;
    if (comp.weight > 0.0) {
      // Laplace estimate of the marginal likelihood times the mixture weight.
      log_w = std::log(comp.weight) + 0.5 * d * std::log(2.0 * M_PI) +
              0.5 * post.log_det_cov() + log_likelihood(batch, upd.theta) +
              gaussian_log_density(upd.theta, comp.belief);
    }
    cands.push_back(Candidate{comp.w_t, comp.w_prev, log_w, upd.theta, upd.cov});
  }

  double log_max = neg_inf;
  for (const auto& c : cands) log_max = std::max(log_max, c.log_weight);
  if (log_max == neg_inf) {
    throw std::runtime_error("update_step: all branch weights vanished");
  }
  double total = 0.0;
  std::array<double, 4> q{};
  for (size_t k = 0; k < cands.size(); ++k) {
    q[k] = (cands[k].log_weight >= log_max - kLogWeightFloor)
               ? std::exp(cands[k].log_weight - log_max)
               : 0.0;
    total += q[k];
  }
  for (auto& v : q) v /= total;

  EngineState next;
  next.t = state.t + 1;
  for (int w_t = 0; w_t <= 1; ++w_t) {
    std::vector<WeightedComponent> parts;
    double branch_weight = 0.0;
    for (size_t k = 0; k < cands.size(); ++k) {
      if (cands[k].w_t != w_t) continue;
      branch_weight += q[k];
      parts.push_back(WeightedComponent{
          q[k], GaussianBelief(cands[k].theta, cands[k].cov)});
    }
    if (branch_weight == 0.0) {
      // Dead branch: carry a deterministic placeholder built from the
      // previous branch weights so the state stays well formed.
      for (size_t k = 0, j = 0; k < cands.size(); ++k) {
        if (cands[k].w_t != w_t) continue;
        parts[j++].weight = state.branches[cands[k].w_prev].weight;
      }
    }
    next.branches[w_t] =
        WeightedComponent{branch_weight, collapse_mixture(parts, config.collapse_mode)};
  }
  return next;
}

GaussianBelief collapsed_posterior(const EngineState& state,
                                   const MarBLRConfig& config) {
  return collapse_mixture({state.branches[0], state.branches[1]},
                          config.collapse_mode);
}

RunHistory run_stream(const MarBLRConfig& config,
                      const std::vector<LabeledBatch>& stream,
                      const StepObserver& observer) {
  EngineState state = init(config);
  RunHistory history;
  history.steps.reserve(stream.size());
  for (const auto& batch : stream) {
    StepRecord rec;
    rec.t = state.t;
    rec.probs = predict_proba(state, config, batch.z);
    rec.outcomes = batch.y;
    const GaussianBelief post = collapsed_posterior(state, config);
    rec.post_mean = post.mean();
    rec.post_cov = post.cov();
    rec.branch_weights = {state.branches[0].weight, state.branches[1].weight};
    if (observer) observer(state.t, rec.probs, state);
    history.steps.push_back(std::move(rec));
    state = update_step(state, config, batch);
  }
  history.final_state = state;
  return history;
}

}  // namespace marblr

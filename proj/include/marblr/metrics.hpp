#ifndef MARBLR_METRICS_HPP
#define MARBLR_METRICS_HPP

#include <vector>

#include "marblr/engine.hpp"
#include "marblr/logistic.hpp"

namespace marblr {

struct EciMethod {
  enum class Kind { Binned, LogitSmooth };
  Kind kind = Kind::Binned;
  int bins = 10;

  static EciMethod binned(int k = 10) { return {Kind::Binned, k}; }
  static EciMethod logit_smooth() { return {Kind::LogitSmooth, 0}; }
};

struct EciResult {
  double value = 0.0;
  bool degenerate = false;  // single-class input
};

/// 100 x mean over observations of (chat(p_i) - p_i)^2, where chat is the
/// estimated calibration curve.
EciResult eci(const Vector& probs, const Vector& outcomes, EciMethod method = {});

/// Mann-Whitney statistic with ties counted 0.5. Both classes required.
double auc(const Vector& probs, const Vector& outcomes);

/// -(1/N) sum_i log p(y_i; p_i), probs clipped to [1e-12, 1-1e-12].
double cumulative_nll(const Vector& probs, const Vector& outcomes);

/// Per-observation negative log likelihoods, same clipping as above.
Vector nll_series(const Vector& probs, const Vector& outcomes);

/// Positive part of mean(reviser - locked) over per-observation NLL series.
double type1_regret(const Vector& reviser_nll, const Vector& locked_nll);

struct Type2Result {
  double regret = 0.0;
  std::vector<Vector> oracle_thetas;
  std::vector<bool> ridge_fallback;  // per segment: separable, refit with 1e-8
};

/// Fits the per-segment oracle (ridge 0, falling back to 1e-8 on separable
/// segments) and returns the positive part of the mean per-observation NLL
/// difference reviser - oracle.
Type2Result type2_regret(const RunHistory& run, const std::vector<LabeledBatch>& data,
                         const std::vector<int>& tau);

/// Smallest R with (1/(n(tau_{j+1}-tau_j))) sum z z^T <= R^2 I per segment.
double compute_R(const std::vector<LabeledBatch>& data, const std::vector<int>& tau);

struct BoundInputs {
  int d = 0;
  int n = 0;
  int T = 0;
  double c = 1.0;  // curvature bound; the logistic statement uses 1
  double R = 0.0;
  double trace_sigma = 0.0;
  double alpha = 0.0;
  double delta2 = 0.0;
  std::vector<int> tau;
  std::vector<int> tau_prime;
  Vector theta_init;
  Matrix sigma_init;
  std::vector<Vector> oracle_thetas;  // one per tau segment
  Vector theta_locked;                // whole-stream stationary point
};

/// (d/2) log(1 + c n R^2 T tr(S)/d)
///   + (d a (T-1)/2) log(1 + d2 c n R^2 T tr(S)/(2d))
double type1_bound_marblr(const BoundInputs& inp);

double type2_bound_blr(const BoundInputs& inp);

/// Evaluates the printed bound at inp.tau_prime; with minimize = true and
/// |tau| <= 12, takes the minimum over all subsequences of tau keeping
/// tau_1 = 1.
double type2_bound_marblr(const BoundInputs& inp, bool minimize = false);

struct RegretReport {
  double type1_empirical = 0.0;
  double type1_bound = 0.0;        // cumulative scale
  double type2_empirical = 0.0;
  double type2_bound_blr = 0.0;
  double type2_bound_marblr = 0.0;
  Vector reviser_nll;              // per-observation series
  Vector locked_nll;
  Vector oracle_nll;
  BoundInputs inputs;
  bool type1_pass = false;
  bool type2_pass = false;
};

}  // namespace marblr

#endif  // MARBLR_METRICS_HPP

#ifndef MARBLR_LOGISTIC_HPP
#define MARBLR_LOGISTIC_HPP

#include <cstdint>
#include <vector>

#include "marblr/belief.hpp"

namespace marblr {

inline constexpr double kGradTol = 1e-8;
inline constexpr int kMaxIter = 100;
inline constexpr int kMaxHalvings = 30;

/// One time step of labeled observations: features z (n x d) and binary
/// outcomes y in {0,1}. An empty batch (n = 0) is allowed.
struct LabeledBatch {
  Matrix z;
  Vector y;

  LabeledBatch(Matrix z_in, Vector y_in);
  Eigen::Index size() const { return z.rows(); }
  Eigen::Index dim() const { return z.cols(); }
};

struct MleResult {
  Vector theta;
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = 0.0;
};

struct GradHess {
  Vector grad;
  Matrix hess;
};

struct NewtonResult {
  Vector theta;
  Matrix cov;  // inverse of the negated objective Hessian, PD
};

struct PredictiveMethod {
  enum class Kind { ProbitApprox, MonteCarlo };
  Kind kind = Kind::ProbitApprox;
  int samples = 1000;
  std::uint64_t seed = 0;

  static PredictiveMethod probit() { return {}; }
  static PredictiveMethod monte_carlo(int samples, std::uint64_t seed) {
    return {Kind::MonteCarlo, samples, seed};
  }
};

double sigmoid(double w);
double logit(double p);

/// sum_i [y_i log s(z_i^T theta) + (1 - y_i) log(1 - s(z_i^T theta))],
/// computed with log-sum-exp stabilization. Empty batch gives 0.
double log_likelihood(const LabeledBatch& batch, const Vector& theta);

/// Gradient sum_i (y_i - p_i) z_i and Hessian -sum_i p_i(1-p_i) z_i z_i^T.
GradHess grad_hessian(const LabeledBatch& batch, const Vector& theta);

/// One Newton step for the full penalized objective whose gradient and
/// Hessian are supplied: theta_new = theta_prev - H^-1 g, cov = (-H)^-1.
/// The Hessian must be negative definite.
NewtonResult newton_step(const Vector& theta_prev, const Vector& objective_grad,
                         const Matrix& objective_hess);

/// Damped Newton maximization of log-likelihood - 0.5 * ridge * |theta|^2
/// over the pooled batches. Non-convergence is reported, not thrown.
MleResult fit_mle(const std::vector<LabeledBatch>& data, const Vector& init,
                  double ridge);

/// Approximates E_{theta ~ belief} sigmoid(z^T theta). ProbitApprox uses
/// s(m / sqrt(1 + pi s2 / 8)); MonteCarlo averages over seeded draws.
double posterior_predictive(const GaussianBelief& belief, const Vector& z,
                            const PredictiveMethod& method);

}  // namespace marblr

#endif  // MARBLR_LOGISTIC_HPP

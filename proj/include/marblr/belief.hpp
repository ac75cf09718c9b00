#ifndef MARBLR_BELIEF_HPP
#define MARBLR_BELIEF_HPP

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace marblr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSymTol = 1e-10;
inline constexpr double kWeightTol = 1e-9;

enum class CollapseMode { PaperFaithful, FullMoment };

/// Gaussian over logit-space revision parameters. The covariance is
/// symmetrized as (A + A^T)/2 on construction and must admit a Cholesky
/// factorization; a non-PD covariance is an error, never repaired.
class GaussianBelief {
 public:
  GaussianBelief() = default;  // empty sentinel, dim 0
  GaussianBelief(Vector mean, Matrix cov);

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

  // Cached factorization of cov.
  const Eigen::LLT<Matrix>& llt() const { return llt_; }

  // log |cov|
  double log_det_cov() const;

 private:
  Vector mean_;
  Matrix cov_;
  Eigen::LLT<Matrix> llt_;
};

struct WeightedComponent {
  double weight;
  GaussianBelief belief;
};

/// log N(x; mean, cov), computed through the cached Cholesky factor.
double gaussian_log_density(const Vector& x, const GaussianBelief& belief);

/// Scales the covariance by factor >= 1, leaving the mean unchanged.
GaussianBelief inflate(const GaussianBelief& belief, double factor);

/// Merges a mixture into a single Gaussian. PaperFaithful averages means
/// and covariances; FullMoment also adds the between-component spread
/// sum_k w_k (mu_k - mu)(mu_k - mu)^T. Weights are renormalized.
GaussianBelief collapse_mixture(const std::vector<WeightedComponent>& components,
                                CollapseMode mode);

}  // namespace marblr

#endif  // MARBLR_BELIEF_HPP

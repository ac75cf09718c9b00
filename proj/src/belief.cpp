#include "marblr/belief.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace marblr {

GaussianBelief::GaussianBelief(Vector mean, Matrix cov) : mean_(std::move(mean)) {
  if (cov.rows() != cov.cols()) {
    throw std::invalid_argument("GaussianBelief: covariance must be square");
  }
  if (mean_.size() != cov.rows()) {
    throw std::invalid_argument("GaussianBelief: mean/covariance dimension mismatch");
  }
  cov_ = 0.5 * (cov + cov.transpose());
  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success) {
    throw std::runtime_error("GaussianBelief: covariance is not positive definite");
  }
}

double GaussianBelief::log_det_cov() const {
  return 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double gaussian_log_density(const Vector& x, const GaussianBelief& belief) {
  if (x.size() != belief.dim()) {
    throw std::invalid_argument("gaussian_log_density: dimension mismatch");
  }
  const double d = static_cast<double>(belief.dim());
  const Vector r = x - belief.mean();
  const double quad = r.dot(belief.llt().solve(r));
  return -0.5 * d * std::log(2.0 * M_PI) - 0.5 * belief.log_det_cov() - 0.5 * quad;
}

GaussianBelief inflate(const GaussianBelief& belief, double factor) {
  if (factor < 1.0) {
    throw std::invalid_argument("inflate: factor must be >= 1 (prior only widens)");
  }
  return GaussianBelief(belief.mean(), factor * belief.cov());
}

GaussianBelief collapse_mixture(const std::vector<WeightedComponent>& components,
                                CollapseMode mode) {
  if (components.empty()) {
    throw std::invalid_argument("collapse_mixture: empty component list");
  }
  double total = 0.0;
  for (const auto& c : components) total += c.weight;
  if (!(total > 0.0)) {
    throw std::invalid_argument("collapse_mixture: weights sum to zero");
  }
  const Eigen::Index d = components.front().belief.dim();
  Vector mean = Vector::Zero(d);
  for (const auto& c : components) {
    mean += (c.weight / total) * c.belief.mean();
  }
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& c : components) {
    const double w = c.weight / total;
    cov += w * c.belief.cov();
    if (mode == CollapseMode::FullMoment) {
      const Vector dm = c.belief.mean() - mean;
      cov += w * dm * dm.transpose();
    }
  }
  return GaussianBelief(std::move(mean), std::move(cov));
}

}  // namespace marblr

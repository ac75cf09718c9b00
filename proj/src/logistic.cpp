#include "marblr/logistic.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

namespace marblr {

namespace {

// log(1 + e^w) without overflow.
double softplus(double w) {
  return std::max(w, 0.0) + std::log1p(std::exp(-std::abs(w)));
}

}  // namespace

double sigmoid(double w) {
  if (w >= 0.0) {
    return 1.0 / (1.0 + std::exp(-w));
  }
  const double e = std::exp(w);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

LabeledBatch::LabeledBatch(Matrix z_in, Vector y_in)
    : z(std::move(z_in)), y(std::move(y_in)) {
  if (z.rows() != y.size()) {
    throw std::invalid_argument("LabeledBatch: row count of z must equal length of y");
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw std::invalid_argument("LabeledBatch: outcomes must be 0 or 1");
    }
  }
}

double log_likelihood(const LabeledBatch& batch, const Vector& theta) {
  if (batch.size() > 0 && batch.dim() != theta.size()) {
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  }
  double ll = 0.0;
  const Vector w = batch.z * theta;
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    ll += batch.y[i] * w[i] - softplus(w[i]);
  }
  return ll;
}

GradHess grad_hessian(const LabeledBatch& batch, const Vector& theta) {
  if (batch.size() > 0 && batch.dim() != theta.size()) {
    throw std::invalid_argument("grad_hessian: dimension mismatch");
  }
  const Eigen::Index d = theta.size();
  GradHess out{Vector::Zero(d), Matrix::Zero(d, d)};
  const Vector w = batch.z * theta;
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const double p = sigmoid(w[i]);
    out.grad += (batch.y[i] - p) * batch.z.row(i).transpose();
    out.hess -= p * (1.0 - p) * batch.z.row(i).transpose() * batch.z.row(i);
  }
  return out;
}

NewtonResult newton_step(const Vector& theta_prev, const Vector& objective_grad,
                         const Matrix& objective_hess) {
  const Eigen::Index d = theta_prev.size();
  if (objective_grad.size() != d || objective_hess.rows() != d ||
      objective_hess.cols() != d) {
    throw std::invalid_argument("newton_step: dimension mismatch");
  }
  const Matrix neg_hess = -0.5 * (objective_hess + objective_hess.transpose());
  Eigen::LLT<Matrix> llt(neg_hess);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("newton_step: objective Hessian is not negative definite");
  }
  NewtonResult out;
  out.theta = theta_prev + llt.solve(objective_grad);
  out.cov = llt.solve(Matrix::Identity(d, d));
  return out;
}

MleResult fit_mle(const std::vector<LabeledBatch>& data, const Vector& init,
                  double ridge) {
  const Eigen::Index d = init.size();
  auto objective = [&](const Vector& theta) {
    double f = -0.5 * ridge * theta.squaredNorm();
    for (const auto& b : data) f += log_likelihood(b, theta);
    return f;
  };
  auto grad_hess = [&](const Vector& theta) {
    GradHess gh{Vector::Zero(d), Matrix::Zero(d, d)};
    for (const auto& b : data) {
      const GradHess part = grad_hessian(b, theta);
      gh.grad += part.grad;
      gh.hess += part.hess;
    }
    gh.grad -= ridge * theta;
    gh.hess -= ridge * Matrix::Identity(d, d);
    return gh;
  };

  // A stationary point only counts as a maximum if the Hessian there has
  // non-negligible negative curvature; separable data saturates with a
  // vanishing gradient and a vanishing Hessian and must not be reported as
  // converged.
  auto is_maximum = [](const Matrix& hess) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(-hess));
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return lo > kGradTol * std::max(1.0, hi);
  };

  MleResult res;
  res.theta = init;
  double f = objective(res.theta);
  for (res.iterations = 0; res.iterations < kMaxIter; ++res.iterations) {
    const GradHess gh = grad_hess(res.theta);
    res.final_grad_norm = gh.grad.lpNorm<Eigen::Infinity>();
    if (res.final_grad_norm < kGradTol) {
      res.converged = is_maximum(gh.hess);
      return res;
    }
    const Matrix neg_hess = -gh.hess;
    Eigen::LDLT<Matrix> ldlt(neg_hess);
    Vector step = ldlt.solve(gh.grad);
    if (!step.allFinite()) {
      step = gh.grad;  // gradient ascent fallback for a degenerate Hessian
    }
    double scale = 1.0;
    Vector cand = res.theta + step;
    double f_cand = objective(cand);
    int halvings = 0;
    // Near the optimum the true improvement drops below the rounding noise
    // of the objective; halving on noise-level differences would stall the
    // Newton step, so only back off on a genuine decrease.
    const double noise =
        8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
    while (f_cand < f - noise && halvings < kMaxHalvings) {
      scale *= 0.5;
      cand = res.theta + scale * step;
      f_cand = objective(cand);
      ++halvings;
    }
    res.theta = cand;
    f = f_cand;
  }
  const GradHess gh = grad_hess(res.theta);
  res.final_grad_norm = gh.grad.lpNorm<Eigen::Infinity>();
  res.converged = res.final_grad_norm < kGradTol && is_maximum(gh.hess);
  return res;
}

double posterior_predictive(const GaussianBelief& belief, const Vector& z,
                            const PredictiveMethod& method) {
  if (z.size() != belief.dim()) {
    throw std::invalid_argument("posterior_predictive: dimension mismatch");
  }
  const double m = z.dot(belief.mean());
  if (method.kind == PredictiveMethod::Kind::ProbitApprox) {
    const double s2 = z.dot(belief.cov() * z);
    return sigmoid(m / std::sqrt(1.0 + M_PI * s2 / 8.0));
  }
  std::mt19937_64 rng(method.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Matrix chol = belief.llt().matrixL();
  Vector eps(belief.dim());
  double acc = 0.0;
  for (int k = 0; k < method.samples; ++k) {
    for (Eigen::Index j = 0; j < eps.size(); ++j) eps[j] = gauss(rng);
    acc += sigmoid(m + z.dot(chol * eps));
  }
  return acc / static_cast<double>(method.samples);
}

}  // namespace marblr

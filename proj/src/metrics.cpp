#include "marblr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace marblr {

namespace {

constexpr double kProbClip = 1e-12;

void check_series(const Vector& probs, const Vector& outcomes) {
  if (probs.size() != outcomes.size()) {
    throw std::invalid_argument("metric: series length mismatch");
  }
}

bool single_class(const Vector& outcomes) {
  const double s = outcomes.sum();
  return s == 0.0 || s == static_cast<double>(outcomes.size());
}

// Segment boundaries [tau_j, tau_{j+1}-1] with the sentinel tau_{|tau|+1}=T+1.
std::vector<std::pair<int, int>> segments(const std::vector<int>& tau, int T) {
  if (tau.empty() || tau.front() != 1) {
    throw std::invalid_argument("tau must be non-empty with tau[0] = 1");
  }
  std::vector<std::pair<int, int>> segs;
  for (size_t j = 0; j < tau.size(); ++j) {
    const int lo = tau[j];
    const int hi = (j + 1 < tau.size() ? tau[j + 1] : T + 1) - 1;
    if (lo > hi || (j > 0 && tau[j] <= tau[j - 1])) {
      throw std::invalid_argument("tau must be strictly increasing and <= T");
    }
    segs.emplace_back(lo, hi);
  }
  return segs;
}

}  // namespace

EciResult eci(const Vector& probs, const Vector& outcomes, EciMethod method) {
  check_series(probs, outcomes);
  const Eigen::Index n = probs.size();
  if (n < 20) throw std::invalid_argument("eci: need at least 20 observations");
  EciResult out;
  out.degenerate = single_class(outcomes);

  Vector fitted(n);
  if (method.kind == EciMethod::Kind::Binned) {
    const int k = std::max(1, method.bins);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return probs[a] < probs[b]; });
    for (int b = 0; b < k; ++b) {
      const Eigen::Index lo = n * b / k;
      const Eigen::Index hi = n * (b + 1) / k;
      if (lo == hi) continue;
      double mean_y = 0.0;
      for (Eigen::Index i = lo; i < hi; ++i) mean_y += outcomes[order[i]];
      mean_y /= static_cast<double>(hi - lo);
      for (Eigen::Index i = lo; i < hi; ++i) fitted[order[i]] = mean_y;
    }
  } else {
    Matrix z(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = std::clamp(probs[i], 1e-8, 1.0 - 1e-8);
      z(i, 0) = 1.0;
      z(i, 1) = logit(p);
    }
    const LabeledBatch batch(z, outcomes);
    MleResult fit = fit_mle({batch}, Vector::Zero(2), 0.0);
    if (!fit.converged) fit = fit_mle({batch}, Vector::Zero(2), 1e-8);
    for (Eigen::Index i = 0; i < n; ++i) fitted[i] = sigmoid(z.row(i).dot(fit.theta));
  }
  out.value = 100.0 * (fitted - probs).squaredNorm() / static_cast<double>(n);
  return out;
}

double auc(const Vector& probs, const Vector& outcomes) {
  check_series(probs, outcomes);
  if (single_class(outcomes)) {
    throw std::invalid_argument("auc: both classes must be present");
  }
  const Eigen::Index n = probs.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return probs[a] < probs[b]; });
  // Average ranks over ties, then the Mann-Whitney statistic.
  Vector rank(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double pos_ranks = 0.0, n_pos = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (outcomes[k] == 1.0) {
      pos_ranks += rank[k];
      n_pos += 1.0;
    }
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  return (pos_ranks - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

Vector nll_series(const Vector& probs, const Vector& outcomes) {
  check_series(probs, outcomes);
  Vector out(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbClip, 1.0 - kProbClip);
    out[i] = outcomes[i] == 1.0 ? -std::log(p) : -std::log1p(-p);
  }
  return out;
}

double cumulative_nll(const Vector& probs, const Vector& outcomes) {
  if (probs.size() == 0) return 0.0;
  return nll_series(probs, outcomes).mean();
}

double type1_regret(const Vector& reviser_nll, const Vector& locked_nll) {
  if (reviser_nll.size() != locked_nll.size()) {
    throw std::invalid_argument("type1_regret: series length mismatch");
  }
  return std::max(0.0, (reviser_nll - locked_nll).mean());
}

Type2Result type2_regret(const RunHistory& run, const std::vector<LabeledBatch>& data,
                         const std::vector<int>& tau) {
  const int T = static_cast<int>(data.size());
  if (run.steps.size() != data.size()) {
    throw std::invalid_argument("type2_regret: run and data length mismatch");
  }
  Type2Result res;
  double diff_sum = 0.0;
  double n_obs = 0.0;
  for (const auto& [lo, hi] : segments(tau, T)) {
    std::vector<LabeledBatch> pool(data.begin() + (lo - 1), data.begin() + hi);
    const Eigen::Index d = pool.front().dim();
    MleResult fit = fit_mle(pool, Vector::Zero(d), 0.0);
    bool fallback = false;
    if (!fit.converged) {
      fit = fit_mle(pool, Vector::Zero(d), 1e-8);
      fallback = true;
    }
    res.oracle_thetas.push_back(fit.theta);
    res.ridge_fallback.push_back(fallback);
    for (int t = lo; t <= hi; ++t) {
      const auto& batch = data[t - 1];
      Vector oracle_p(batch.size());
      for (Eigen::Index i = 0; i < batch.size(); ++i) {
        oracle_p[i] = sigmoid(batch.z.row(i).dot(fit.theta));
      }
      const Vector rev = nll_series(run.steps[t - 1].probs, batch.y);
      const Vector ora = nll_series(oracle_p, batch.y);
      diff_sum += (rev - ora).sum();
      n_obs += static_cast<double>(batch.size());
    }
  }
  res.regret = std::max(0.0, diff_sum / n_obs);
  return res;
}

double compute_R(const std::vector<LabeledBatch>& data, const std::vector<int>& tau) {
  const int T = static_cast<int>(data.size());
  double r2_max = 0.0;
  for (const auto& [lo, hi] : segments(tau, T)) {
    const Eigen::Index d = data[lo - 1].dim();
    Matrix gram = Matrix::Zero(d, d);
    double count = 0.0;
    for (int t = lo; t <= hi; ++t) {
      gram += data[t - 1].z.transpose() * data[t - 1].z;
      count += static_cast<double>(data[t - 1].size());
    }
    if (count == 0.0) continue;
    gram /= count;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    r2_max = std::max(r2_max, es.eigenvalues().maxCoeff());
  }
  return std::sqrt(r2_max);
}

double type1_bound_marblr(const BoundInputs& inp) {
  const double d = static_cast<double>(inp.d);
  const double load = inp.c * inp.n * inp.R * inp.R * inp.T * inp.trace_sigma;
  double bound = 0.5 * d * std::log(1.0 + load / d);
  bound += 0.5 * d * inp.alpha * (inp.T - 1) *
           std::log(1.0 + inp.delta2 * load / (2.0 * d));
  return bound;
}

double type2_bound_blr(const BoundInputs& inp) {
  if (inp.oracle_thetas.empty() || inp.theta_locked.size() == 0) {
    throw std::invalid_argument("type2_bound_blr: oracle parameters missing");
  }
  const double d = static_cast<double>(inp.d);
  Eigen::LLT<Matrix> llt(inp.sigma_init);
  const Vector dv = inp.theta_locked - inp.theta_init;
  double bound = 0.5 * dv.dot(llt.solve(dv));
  const double load = inp.c * inp.n * inp.T * inp.R * inp.R * inp.trace_sigma;
  bound += 0.5 * d * std::log((d + load) / d);
  const auto segs = segments(inp.tau, inp.T);
  const double cnr2 = inp.c * inp.n * inp.R * inp.R;
  for (size_t j = 0; j < segs.size(); ++j) {
    const double len = segs[j].second - segs[j].first + 1;
    bound += 0.5 * cnr2 * len * (inp.theta_locked - inp.oracle_thetas[j]).squaredNorm();
  }
  return bound;
}

namespace {

double type2_marblr_at(const BoundInputs& inp, const std::vector<size_t>& prime_idx) {
  // prime_idx: indices into inp.tau selecting tau', prime_idx[0] == 0.
  const double d = static_cast<double>(inp.d);
  const size_t s = prime_idx.size();
  if (inp.delta2 <= 0.0) {
    throw std::invalid_argument("type2_bound_marblr: requires delta2 > 0");
  }
  if (inp.alpha == 0.0 && s > 1) {
    throw std::invalid_argument(
        "type2_bound_marblr: |tau'| > 1 is impossible under the prior with alpha = 0");
  }
  Eigen::LLT<Matrix> llt(inp.sigma_init);
  const double cn_load = inp.c * inp.n * inp.R * inp.R * inp.trace_sigma;
  auto tau_prime_at = [&](size_t k) {
    return k < s ? inp.tau[prime_idx[k]] : inp.T + 1;
  };

  const Vector d1 = inp.oracle_thetas.front() - inp.theta_init;
  double bound = 0.5 * d1.dot(llt.solve(d1));
  bound += 0.5 * d *
           std::log(1.0 + 1.0 / inp.delta2 +
                    cn_load * (tau_prime_at(1) - tau_prime_at(0)) / d);
  for (size_t k = 1; k < s; ++k) {
    const Vector dk = inp.oracle_thetas[prime_idx[k]] - inp.oracle_thetas[prime_idx[k - 1]];
    bound += 0.5 * dk.dot(llt.solve(dk)) / inp.delta2;
    bound += 0.5 * d *
             std::log(2.0 / inp.delta2 +
                      cn_load * (tau_prime_at(k + 1) - tau_prime_at(k)) / d);
  }
  // -log p0(tau') under W_1 = 1 and independent Bernoulli(alpha) transitions.
  const double shifts = static_cast<double>(s - 1);
  double log_p0 = shifts == 0.0 ? 0.0 : shifts * std::log(inp.alpha);
  log_p0 += (static_cast<double>(inp.T - 1) - shifts) * std::log1p(-inp.alpha);
  bound -= log_p0;
  bound += 0.5 * shifts * d * std::log(inp.delta2);

  const auto segs = segments(inp.tau, inp.T);
  const double cnr2 = inp.c * inp.n * inp.R * inp.R;
  for (size_t j = 0; j < segs.size(); ++j) {
    // k(j) = max{k : tau'_k <= tau_j}
    size_t kj = 0;
    for (size_t k = 0; k < s; ++k) {
      if (inp.tau[prime_idx[k]] <= inp.tau[j]) kj = k;
    }
    const double len = segs[j].second - segs[j].first + 1;
    bound += 0.5 * cnr2 * len *
             (inp.oracle_thetas[prime_idx[kj]] - inp.oracle_thetas[j]).squaredNorm();
  }
  return bound;
}

}  // namespace

double type2_bound_marblr(const BoundInputs& inp, bool minimize) {
  const size_t m = inp.tau.size();
  if (!minimize || m > 12) {
    std::vector<size_t> prime_idx;
    for (int tp : inp.tau_prime.empty() ? inp.tau : inp.tau_prime) {
      const auto it = std::find(inp.tau.begin(), inp.tau.end(), tp);
      if (it == inp.tau.end()) {
        throw std::invalid_argument("type2_bound_marblr: tau' must be a subsequence of tau");
      }
      prime_idx.push_back(static_cast<size_t>(it - inp.tau.begin()));
    }
    if (prime_idx.empty() || prime_idx.front() != 0) {
      throw std::invalid_argument("type2_bound_marblr: tau' must start at tau_1 = 1");
    }
    return type2_marblr_at(inp, prime_idx);
  }
  double best = std::numeric_limits<double>::infinity();
  const size_t subsets = size_t{1} << (m - 1);
  for (size_t mask = 0; mask < subsets; ++mask) {
    std::vector<size_t> prime_idx{0};
    for (size_t k = 1; k < m; ++k) {
      if (mask & (size_t{1} << (k - 1))) prime_idx.push_back(k);
    }
    if (inp.alpha == 0.0 && prime_idx.size() > 1) continue;
    best = std::min(best, type2_marblr_at(inp, prime_idx));
  }
  return best;
}

}  // namespace marblr

#include "marblr/simulator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "marblr/logistic.hpp"

namespace marblr {

std::map<std::string, double> default_drift_params() {
  return {
      {"base_intercept", -1.0},
      {"signal_scale", 1.5},
      {"shift_magnitude", 1.0},   // InitialShift intercept jump
      {"amplitude", 1.0},         // Cyclical
      {"period", 40.0},           // Cyclical
      {"decay_angle_deg", 60.0},  // Decay rotation reached at t = T
      {"decay_shrink", 0.3},      // Decay fractional shrink of |b| at t = T
      {"group_jump_a", 1.0},      // scenario 1 intercept drift, group A
      {"group_jump_b", -0.5},     // scenario 1 intercept drift, group B
      {"flip_prob", 0.5},         // scenario 3 label-noise burst
      {"noise_window", 10.0},
      {"noise_at", 100.0},
  };
}

double ScenarioSpec::param(const std::string& name) const {
  if (auto it = drift_params.find(name); it != drift_params.end()) return it->second;
  const auto defaults = default_drift_params();
  const auto it = defaults.find(name);
  if (it == defaults.end()) {
    throw std::invalid_argument("ScenarioSpec: unknown drift parameter " + name);
  }
  return it->second;
}

void ScenarioSpec::validate() const {
  if (scenario < 1 || scenario > 3) throw std::invalid_argument("ScenarioSpec: scenario must be 1..3");
  if (T < 1 || n < 1 || d_x < 1) throw std::invalid_argument("ScenarioSpec: T, n, d_x must be >= 1");
  if (group_prev_a <= 0.0 || group_prev_a >= 1.0) {
    throw std::invalid_argument("ScenarioSpec: group prevalence must lie in (0,1)");
  }
  if (param("period") <= 0.0) throw std::invalid_argument("ScenarioSpec: period must be > 0");
  const double fp = param("flip_prob");
  if (fp < 0.0 || fp > 1.0) throw std::invalid_argument("ScenarioSpec: flip_prob must lie in [0,1]");
  if (tau_grid < 1) throw std::invalid_argument("ScenarioSpec: tau_grid must be >= 1");
}

namespace {

// Fixed coefficient direction and an orthonormal companion for the Decay
// rotation. u has decreasing positive entries.
Vector base_direction(int d_x) {
  Vector u(d_x);
  for (int j = 0; j < d_x; ++j) u[j] = static_cast<double>(d_x - j);
  return u / u.norm();
}

Vector rotation_companion(int d_x, const Vector& u) {
  Vector v(d_x);
  for (int j = 0; j < d_x; ++j) v[j] = (j % 2 == 0) ? 1.0 : -1.0;
  v -= v.dot(u) * u;
  const double norm = v.norm();
  if (norm < 1e-12) return Vector::Zero(d_x);  // d_x = 1: shrink only
  return v / norm;
}

struct DriftModel {
  const ScenarioSpec& spec;
  Vector u, v;
  double base, scale;

  explicit DriftModel(const ScenarioSpec& s)
      : spec(s), u(base_direction(s.d_x)), v(rotation_companion(s.d_x, u)),
        base(s.param("base_intercept")), scale(s.param("signal_scale")) {}

  // t = 0 is the original (pre-drift) model.
  double intercept(int t) const {
    if (t == 0) return base;
    switch (spec.shift) {
      case ShiftKind::InitialShift:
        return base + (spec.scenario == 1 ? 0.0 : spec.param("shift_magnitude"));
      case ShiftKind::Cyclical:
        return base + spec.param("amplitude") *
                          std::sin(2.0 * M_PI * (t - 1) / spec.param("period"));
      case ShiftKind::Decay:
        return base;
    }
    return base;
  }

  Vector coefficients(int t) const {
    if (t == 0 || spec.shift != ShiftKind::Decay) return scale * u;
    const double frac = spec.T > 1 ? static_cast<double>(t - 1) / (spec.T - 1) : 1.0;
    const double angle = spec.param("decay_angle_deg") * M_PI / 180.0 * frac;
    const double shrink = 1.0 - spec.param("decay_shrink") * frac;
    return scale * shrink * (std::cos(angle) * u + std::sin(angle) * v);
  }

  double group_intercept(int t, int group) const {
    if (spec.scenario != 1 || t == 0) return 0.0;
    return group == 0 ? spec.param("group_jump_a") : spec.param("group_jump_b");
  }
};

}  // namespace

std::vector<SimBatch> generate(const ScenarioSpec& spec) {
  spec.validate();
  const DriftModel model(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const bool corrupt = spec.scenario == 3 && spec.subset_refit_corruption;
  const int noise_at = static_cast<int>(spec.param("noise_at"));
  const int noise_window = static_cast<int>(spec.param("noise_window"));
  const double flip_prob = spec.param("flip_prob");

  std::vector<SimBatch> stream;
  stream.reserve(spec.T);
  const Vector beta0 = model.coefficients(0);
  for (int t = 1; t <= spec.T; ++t) {
    SimBatch batch;
    batch.x = Matrix(spec.n, spec.d_x);
    batch.true_prob = Vector(spec.n);
    batch.y = Vector(spec.n);
    batch.original_score = Vector(spec.n);
    if (spec.scenario == 1) batch.group.resize(spec.n);

    const double b0_t = model.intercept(t);
    const Vector beta_t = model.coefficients(t);
    for (int i = 0; i < spec.n; ++i) {
      for (int j = 0; j < spec.d_x; ++j) batch.x(i, j) = gauss(rng);
      int g = -1;
      if (spec.scenario == 1) {
        g = unif(rng) < spec.group_prev_a ? 0 : 1;
        batch.group[i] = g;
      }
      const double xb = beta_t.dot(batch.x.row(i));
      const double true_logit = b0_t + xb + model.group_intercept(t, g);
      batch.true_prob[i] = sigmoid(true_logit);
      batch.y[i] = unif(rng) < batch.true_prob[i] ? 1.0 : 0.0;
      batch.original_score[i] = sigmoid(model.intercept(0) + beta0.dot(batch.x.row(i)));
    }
    batch.y_refit = batch.y;
    if (corrupt && t >= noise_at - noise_window && t < noise_at) {
      for (int i = 0; i < spec.n; ++i) {
        if (unif(rng) < flip_prob) batch.y_refit[i] = 1.0 - batch.y_refit[i];
      }
    }
    stream.push_back(std::move(batch));
  }
  return stream;
}

std::vector<int> oracle_tau(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.scenario == 1 || spec.shift == ShiftKind::InitialShift) return {1};
  std::vector<int> tau;
  if (spec.shift == ShiftKind::Cyclical) {
    const int step = std::max(1, static_cast<int>(std::lround(spec.param("period") / 4.0)));
    for (int t = 1; t <= spec.T; t += step) tau.push_back(t);
    return tau;
  }
  // Decay: every step, down-sampled to tau_grid segments.
  const int grid = std::min(spec.tau_grid, spec.T);
  for (int j = 0; j < grid; ++j) {
    const int t = 1 + j * spec.T / grid;
    if (tau.empty() || t > tau.back()) tau.push_back(t);
  }
  return tau;
}

}  // namespace marblr

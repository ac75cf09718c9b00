#include <cmath>

#include <doctest.h>

#include "marblr/metrics.hpp"
#include "marblr/simulator.hpp"

using namespace marblr;

namespace {

ScenarioSpec spec2(ShiftKind shift, int T, int n, std::uint64_t seed) {
  ScenarioSpec s;
  s.scenario = 2;
  s.shift = shift;
  s.T = T;
  s.n = n;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const ScenarioSpec s = spec2(ShiftKind::Cyclical, 10, 8, 123);
  const auto a = generate(s);
  const auto b = generate(s);
  REQUIRE(a.size() == b.size());
  for (size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].x == b[t].x);
    CHECK(a[t].y == b[t].y);
    CHECK(a[t].original_score == b[t].original_score);
  }
  ScenarioSpec s2 = s;
  s2.seed = 124;
  CHECK(generate(s2)[0].x != a[0].x);
}

TEST_CASE("subgroup prevalence matches the spec") {
  ScenarioSpec s;
  s.scenario = 1;
  s.shift = ShiftKind::InitialShift;
  s.T = 200;
  s.n = 100;
  s.seed = 5;
  const auto stream = generate(s);
  double in_a = 0.0, total = 0.0;
  for (const auto& batch : stream) {
    REQUIRE(batch.group.size() == 100);
    for (int g : batch.group) {
      in_a += g == 0 ? 1.0 : 0.0;
      total += 1.0;
    }
  }
  const double prev = in_a / total;
  CHECK(prev > 0.17);
  CHECK(prev < 0.23);
}

TEST_CASE("the original model is exactly calibrated before drift begins") {
  // cyclical and decay leave t = 1 at the undrifted parameters
  for (const ShiftKind k : {ShiftKind::Cyclical, ShiftKind::Decay}) {
    const auto stream = generate(spec2(k, 3, 50, 7));
    CHECK((stream[0].original_score - stream[0].true_prob).lpNorm<Eigen::Infinity>() <=
          1e-12);
    CHECK((stream[1].original_score - stream[1].true_prob).lpNorm<Eigen::Infinity>() >
          1e-6);
  }
  // an initial shift moves the truth away immediately
  const auto shifted = generate(spec2(ShiftKind::InitialShift, 2, 50, 7));
  CHECK((shifted[0].original_score - shifted[0].true_prob).lpNorm<Eigen::Infinity>() >
        1e-3);
}

TEST_CASE("outcomes are calibrated in the large against the true probabilities") {
  const auto stream = generate(spec2(ShiftKind::Cyclical, 100, 100, 11));
  double resid = 0.0, var = 0.0, count = 0.0;
  for (const auto& batch : stream) {
    resid += (batch.y - batch.true_prob).sum();
    var += (batch.true_prob.array() * (1.0 - batch.true_prob.array())).sum();
    count += static_cast<double>(batch.y.size());
  }
  CHECK(std::abs(resid / count) < 3.0 * std::sqrt(var) / count);
}

TEST_CASE("decay degrades the original model's discrimination") {
  const auto stream = generate(spec2(ShiftKind::Decay, 100, 100, 13));
  std::vector<double> window_aucs;
  for (int w = 0; w < 4; ++w) {
    std::vector<double> p, y;
    for (int t = w * 25; t < (w + 1) * 25; ++t) {
      for (Eigen::Index i = 0; i < stream[t].y.size(); ++i) {
        p.push_back(stream[t].original_score[i]);
        y.push_back(stream[t].y[i]);
      }
    }
    const auto pv = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
    const auto yv = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
    window_aucs.push_back(auc(pv, yv));
  }
  for (size_t w = 1; w < window_aucs.size(); ++w) {
    CHECK(window_aucs[w] < window_aucs[w - 1]);
  }
  CHECK(window_aucs.front() - window_aucs.back() > 0.05);
}

TEST_CASE("the label-noise burst only touches the refit labels") {
  ScenarioSpec s = spec2(ShiftKind::Decay, 100, 50, 17);
  s.scenario = 3;
  s.subset_refit_corruption = true;
  const auto stream = generate(s);
  int flipped_in_window = 0, flipped_outside = 0;
  for (int t = 1; t <= 100; ++t) {
    const auto& b = stream[t - 1];
    const int flips = static_cast<int>((b.y - b.y_refit).cwiseAbs().sum());
    if (t >= 90 && t <= 99) flipped_in_window += flips;
    else flipped_outside += flips;
  }
  CHECK(flipped_outside == 0);
  // about half of 10 * 50 labels flip
  CHECK(flipped_in_window > 150);
  CHECK(flipped_in_window < 350);

  s.subset_refit_corruption = false;
  for (const auto& b : generate(s)) CHECK(b.y == b.y_refit);
}

TEST_CASE("oracle change points per drift kind") {
  ScenarioSpec s = spec2(ShiftKind::InitialShift, 100, 20, 0);
  CHECK(oracle_tau(s) == std::vector<int>{1});

  s.shift = ShiftKind::Cyclical;
  const auto cyc = oracle_tau(s);
  CHECK(cyc.front() == 1);
  CHECK(cyc.size() == 10);  // step = period / 4 = 10
  CHECK(cyc[1] == 11);
  CHECK(cyc.back() == 91);

  s.shift = ShiftKind::Decay;
  s.tau_grid = 10;
  const auto dec = oracle_tau(s);
  CHECK(dec.front() == 1);
  CHECK(dec.size() == 10);

  ScenarioSpec g = s;
  g.scenario = 1;
  CHECK(oracle_tau(g) == std::vector<int>{1});
}

TEST_CASE("spec validation") {
  ScenarioSpec s;
  s.scenario = 4;
  CHECK_THROWS(s.validate());
  s.scenario = 2;
  s.T = 0;
  CHECK_THROWS(s.validate());
  s.T = 10;
  s.drift_params["flip_prob"] = 1.5;
  CHECK_THROWS(s.validate());
  s.drift_params.clear();
  CHECK_THROWS(s.param("no_such_knob"));
  CHECK(s.param("period") == 40.0);
  s.drift_params["period"] = 20.0;
  CHECK(s.param("period") == 20.0);
}

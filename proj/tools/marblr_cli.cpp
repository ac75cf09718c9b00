// Command-line front end: simulate drift streams, run online revision
// methods over them, and check empirical regrets against the bounds.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "marblr/harness.hpp"
#include "marblr/stream_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace marblr;

namespace {

bool log_enabled() {
  const char* v = std::getenv("MARBLR_LOG");
  return v != nullptr && std::string(v) != "" && std::string(v) != "off";
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[marblr] " << msg << "\n";
}

struct StreamFlags {
  std::string input;
  int scenario = 2;
  std::string shift = "initial";
  int T = 100;
  int n = 20;
  int d_x = 10;
  std::uint64_t seed = 0;
  double group_prev_a = 0.2;
  bool corrupt = false;
  int tau_grid = 10;
  std::map<std::string, double> drift;
};

void add_scenario_flags(CLI::App* cmd, StreamFlags& f) {
  cmd->add_option("--scenario", f.scenario, "Scenario 1, 2 or 3");
  cmd->add_option("--shift", f.shift, "initial|cyclical|decay");
  cmd->add_option("--T", f.T, "Number of time steps");
  cmd->add_option("--n", f.n, "Batch size");
  cmd->add_option("--d-x", f.d_x, "Patient-variable count");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--group-prev-a", f.group_prev_a, "Scenario 1 group A prevalence");
  cmd->add_flag("--corrupt", f.corrupt, "Scenario 3 label-noise burst before t=100");
  cmd->add_option("--tau-grid", f.tau_grid, "Decay oracle grid size");
  for (const auto& [name, def] : default_drift_params()) {
    std::string flag = "--" + name;
    for (auto& ch : flag) {
      if (ch == '_') ch = '-';
    }
    cmd->add_option_function<double>(
        flag, [&f, key = name](double v) { f.drift[key] = v; },
        "Drift parameter (default " + format_double(def) + ")");
  }
}

ShiftKind parse_shift(const std::string& s) {
  if (s == "initial") return ShiftKind::InitialShift;
  if (s == "cyclical") return ShiftKind::Cyclical;
  if (s == "decay") return ShiftKind::Decay;
  throw CLI::ValidationError("--shift", "must be initial|cyclical|decay");
}

ScenarioSpec to_spec(const StreamFlags& f) {
  ScenarioSpec spec;
  spec.scenario = f.scenario;
  spec.shift = parse_shift(f.shift);
  spec.T = f.T;
  spec.n = f.n;
  spec.d_x = f.d_x;
  spec.seed = f.seed;
  spec.group_prev_a = f.group_prev_a;
  spec.subset_refit_corruption = f.corrupt;
  spec.tau_grid = f.tau_grid;
  spec.drift_params = f.drift;
  return spec;
}

std::vector<SimBatch> load_stream(const StreamFlags& f,
                                  std::optional<ScenarioSpec>& spec_out) {
  if (!f.input.empty()) {
    std::ifstream is(f.input);
    if (!is) throw std::runtime_error("cannot open stream file " + f.input);
    log_line("replaying stream " + f.input);
    return read_stream_csv(is);
  }
  const ScenarioSpec spec = to_spec(f);
  spec_out = spec;
  log_line("generating scenario stream");
  return generate(spec);
}

struct MethodFlags {
  std::string method = "blr";
  std::string revision = "recalibrate";
  int groups = 2;
  std::string refit = "";
  int window = 20;
  int refit_every = 1;
  double refit_ridge = 1e-6;
  double alpha = 0.1;
  double delta2 = 0.1;
  std::string theta_init = "";
  double sigma_init_scale = 1.0;
  std::string collapse = "paper";
  std::string predictive = "probit";
  int mc_samples = 1000;
  std::uint64_t mc_seed = 0;
  double clip_eps = 1e-4;
};

void add_method_flags(CLI::App* cmd, MethodFlags& m) {
  cmd->add_option("--method", m.method, "locked|blr|marblr|cummle");
  cmd->add_option("--revision", m.revision,
                  "recalibrate|subgroup|subgroup-slope|logistic|ensemble");
  cmd->add_option("--groups", m.groups, "Subgroup count");
  cmd->add_option("--refit", m.refit, "all|subset (ensemble underlying model)");
  cmd->add_option("--window", m.window, "Subset-Refit window in time steps");
  cmd->add_option("--refit-every", m.refit_every, "Refit cadence");
  cmd->add_option("--refit-ridge", m.refit_ridge, "Refit ridge penalty");
  cmd->add_option("--alpha", m.alpha, "MarBLR shift probability");
  cmd->add_option("--delta2", m.delta2, "MarBLR shift variance factor");
  cmd->add_option("--theta-init", m.theta_init, "Comma list; default identity revision");
  cmd->add_option("--sigma-init-scale", m.sigma_init_scale, "Prior covariance scale");
  cmd->add_option("--collapse", m.collapse, "paper|full");
  cmd->add_option("--predictive", m.predictive, "probit|mc");
  cmd->add_option("--mc-samples", m.mc_samples, "Monte Carlo sample count");
  cmd->add_option("--mc-seed", m.mc_seed, "Monte Carlo seed");
  cmd->add_option("--clip-eps", m.clip_eps, "Score clipping epsilon");
}

HarnessConfig to_harness(const MethodFlags& m, const StreamFlags& f) {
  HarnessConfig cfg;
  if (m.method == "locked") cfg.method = Method::Locked;
  else if (m.method == "blr") cfg.method = Method::BLR;
  else if (m.method == "marblr") cfg.method = Method::MarBLR;
  else if (m.method == "cummle") cfg.method = Method::CumulativeMle;
  else throw CLI::ValidationError("--method", "must be locked|blr|marblr|cummle");

  FeatureMap map;
  if (m.revision == "recalibrate") map.variant = FeatureMap::Variant::Recalibrate;
  else if (m.revision == "subgroup") map.variant = FeatureMap::Variant::SubgroupRecalibrate;
  else if (m.revision == "subgroup-slope") map.variant = FeatureMap::Variant::SubgroupPerSlope;
  else if (m.revision == "logistic") map.variant = FeatureMap::Variant::LogisticRevision;
  else if (m.revision == "ensemble") map.variant = FeatureMap::Variant::Ensemble;
  else throw CLI::ValidationError("--revision", "unknown revision variant");
  map.groups = m.groups;
  map.num_vars = f.d_x;
  map.models = 2;
  map.logit_clip_eps = m.clip_eps;
  cfg.map = map;

  cfg.alpha = m.alpha;
  cfg.delta2 = m.delta2;
  cfg.sigma_init_scale = m.sigma_init_scale;
  cfg.collapse = m.collapse == "full" ? CollapseMode::FullMoment
                                      : CollapseMode::PaperFaithful;
  cfg.predictive = m.predictive == "mc"
                       ? PredictiveMethod::monte_carlo(m.mc_samples, m.mc_seed)
                       : PredictiveMethod::probit();
  if (!m.theta_init.empty()) {
    std::vector<double> vals;
    std::stringstream ss(m.theta_init);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    cfg.theta_init = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }
  if (map.variant == FeatureMap::Variant::Ensemble || !m.refit.empty()) {
    const auto strategy = m.refit == "subset" ? RefitManager::Strategy::SubsetRefit
                                              : RefitManager::Strategy::AllRefit;
    cfg.refit = RefitManager(strategy, m.window, m.refit_every, m.refit_ridge, f.d_x);
  }
  return cfg;
}

int cmd_simulate(const StreamFlags& f, const std::string& out) {
  const ScenarioSpec spec = to_spec(f);
  const auto stream = generate(spec);
  std::ofstream os(out);
  if (!os) {
    std::cerr << "error: cannot write " << out << "\n";
    return 1;
  }
  write_stream_csv(os, stream, &spec);
  log_line("wrote " + out);
  return 0;
}

json summary_json(const MethodFlags& m, const RunHistory& history, int eci_bins) {
  const Vector probs = flatten_probs(history);
  const Vector outcomes = flatten_outcomes(history);
  json s;
  s["method"] = m.method;
  s["revision"] = m.revision;
  s["avg_nll"] = cumulative_nll(probs, outcomes);
  const EciResult e = eci(probs, outcomes, EciMethod::binned(eci_bins));
  s["avg_eci"] = e.value;
  s["eci_degenerate"] = e.degenerate;
  s["avg_auc"] = auc(probs, outcomes);
  s["T"] = history.steps.size();
  return s;
}

int cmd_run(const StreamFlags& f, const MethodFlags& m, const std::string& out_dir,
            int metric_window, int eci_bins) {
  std::optional<ScenarioSpec> spec;
  const auto stream = load_stream(f, spec);
  const HarnessConfig cfg = to_harness(m, f);
  const HarnessResult res = run_harness(cfg, stream);
  fs::create_directories(out_dir);

  {
    std::ofstream os(fs::path(out_dir) / "metrics.csv");
    os << "t,eci_window,auc_window,nll\n";
    for (size_t k = 0; k < res.history.steps.size(); ++k) {
      const auto& step = res.history.steps[k];
      const size_t lo = k + 1 >= static_cast<size_t>(metric_window)
                            ? k + 1 - static_cast<size_t>(metric_window)
                            : 0;
      std::vector<double> p, y;
      for (size_t j = lo; j <= k; ++j) {
        const auto& s = res.history.steps[j];
        for (Eigen::Index i = 0; i < s.probs.size(); ++i) {
          p.push_back(s.probs[i]);
          y.push_back(s.outcomes[i]);
        }
      }
      const Vector pv = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
      const Vector yv = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
      os << step.t << ",";
      const double ysum = yv.sum();
      const bool both = ysum > 0.0 && ysum < static_cast<double>(yv.size());
      if (pv.size() >= 20) {
        os << format_double(eci(pv, yv, EciMethod::binned(eci_bins)).value);
      }
      os << ",";
      if (both) os << format_double(auc(pv, yv));
      os << "," << format_double(cumulative_nll(step.probs, step.outcomes)) << "\n";
    }
  }
  {
    std::ofstream os(fs::path(out_dir) / "params.csv");
    const Eigen::Index d = res.history.steps.empty()
                               ? 0
                               : res.history.steps.front().post_mean.size();
    os << "t";
    for (Eigen::Index j = 0; j < d; ++j) os << ",theta" << j;
    os << ",branch_w0,branch_w1\n";
    for (const auto& step : res.history.steps) {
      os << step.t;
      for (Eigen::Index j = 0; j < d; ++j) os << "," << format_double(step.post_mean[j]);
      os << "," << format_double(step.branch_weights[0]) << ","
         << format_double(step.branch_weights[1]) << "\n";
    }
  }
  {
    std::ofstream os(fs::path(out_dir) / "preds.csv");
    os << "t,i,p,y\n";
    for (const auto& step : res.history.steps) {
      for (Eigen::Index i = 0; i < step.probs.size(); ++i) {
        os << step.t << "," << (i + 1) << "," << format_double(step.probs[i]) << ","
           << static_cast<int>(step.outcomes[i]) << "\n";
      }
    }
  }
  {
    std::ofstream os(fs::path(out_dir) / "summary.json");
    os << summary_json(m, res.history, eci_bins).dump(2) << "\n";
  }
  log_line("run outputs in " + out_dir);
  return 0;
}

int cmd_calibration_curve(const std::string& preds_path, int bins,
                          const std::string& out) {
  std::ifstream is(preds_path);
  if (!is) {
    std::cerr << "error: cannot open " << preds_path << "\n";
    return 1;
  }
  std::string line;
  std::getline(is, line);  // header
  struct Pred { int t; double p; double y; };
  std::vector<Pred> preds;
  int t_max = 0;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string tok;
    Pred pr{};
    std::getline(ss, tok, ','); pr.t = std::stoi(tok);
    std::getline(ss, tok, ',');
    std::getline(ss, tok, ','); pr.p = std::stod(tok);
    std::getline(ss, tok, ','); pr.y = std::stod(tok);
    preds.push_back(pr);
    t_max = std::max(t_max, pr.t);
  }
  const int quarter_len = (t_max + 3) / 4;
  std::ofstream os(out);
  os << "# identity reference: observed == predicted\n";
  os << "quarter,bin,predicted,observed,count\n";
  for (int q = 0; q < 4; ++q) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& pr : preds) {
      if ((pr.t - 1) / quarter_len == q) pts.emplace_back(pr.p, pr.y);
    }
    if (pts.empty()) continue;
    std::sort(pts.begin(), pts.end());
    const size_t n = pts.size();
    for (int b = 0; b < bins; ++b) {
      const size_t lo = n * b / bins;
      const size_t hi = n * (b + 1) / bins;
      if (lo == hi) continue;
      double psum = 0.0, ysum = 0.0;
      for (size_t i = lo; i < hi; ++i) {
        psum += pts[i].first;
        ysum += pts[i].second;
      }
      const double cnt = static_cast<double>(hi - lo);
      os << (q + 1) << "," << (b + 1) << "," << format_double(psum / cnt) << ","
         << format_double(ysum / cnt) << "," << (hi - lo) << "\n";
    }
  }
  return 0;
}

std::vector<int> parse_tau(const std::string& s) {
  std::vector<int> tau;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) tau.push_back(std::stoi(tok));
  return tau;
}

int cmd_regret_check(const StreamFlags& f, const MethodFlags& m,
                     const std::string& tau_str, const std::string& tau_prime_str,
                     double c, bool minimize, const std::string& out) {
  std::optional<ScenarioSpec> spec;
  const auto stream = load_stream(f, spec);

  std::vector<int> tau;
  if (!tau_str.empty()) tau = parse_tau(tau_str);
  else if (spec) tau = oracle_tau(*spec);
  else tau = {1};

  HarnessConfig rev_cfg = to_harness(m, f);
  MethodFlags locked_flags = m;
  locked_flags.method = "locked";
  const HarnessConfig locked_cfg = to_harness(locked_flags, f);

  log_line("running reviser");
  const HarnessResult rev = run_harness(rev_cfg, stream);
  log_line("running locked baseline");
  const HarnessResult locked = run_harness(locked_cfg, stream);

  RegretReport rep;
  rep.reviser_nll = nll_series(flatten_probs(rev.history), flatten_outcomes(rev.history));
  rep.locked_nll = nll_series(flatten_probs(locked.history), flatten_outcomes(locked.history));
  rep.type1_empirical = type1_regret(rep.reviser_nll, rep.locked_nll);

  const Type2Result t2 = type2_regret(rev.history, rev.features, tau);
  rep.type2_empirical = t2.regret;

  BoundInputs inp;
  inp.d = static_cast<int>(rev.engine_config.theta_init.size());
  inp.n = static_cast<int>(stream.front().y.size());
  inp.T = static_cast<int>(stream.size());
  inp.c = c;
  inp.R = compute_R(rev.features, tau);
  inp.sigma_init = rev.engine_config.sigma_init;
  inp.trace_sigma = inp.sigma_init.trace();
  inp.alpha = rev.engine_config.alpha;
  inp.delta2 = rev.engine_config.delta2;
  inp.tau = tau;
  inp.tau_prime = tau_prime_str.empty() ? tau : parse_tau(tau_prime_str);
  inp.theta_init = rev.engine_config.theta_init;
  inp.oracle_thetas = t2.oracle_thetas;
  {
    MleResult locked_fit = fit_mle(rev.features, Vector::Zero(inp.d), 0.0);
    if (!locked_fit.converged) locked_fit = fit_mle(rev.features, Vector::Zero(inp.d), 1e-8);
    inp.theta_locked = locked_fit.theta;
  }
  rep.inputs = inp;

  const double n_obs = static_cast<double>(rep.reviser_nll.size());
  rep.type1_bound = type1_bound_marblr(inp);
  rep.type1_pass = rep.type1_empirical <= rep.type1_bound / n_obs;
  rep.type2_bound_blr = type2_bound_blr(inp);
  const bool use_marblr_bound = inp.alpha > 0.0 || inp.delta2 > 0.0;
  double type2_bound = rep.type2_bound_blr;
  if (use_marblr_bound) {
    BoundInputs minp = inp;
    if (minp.alpha == 0.0) minp.tau_prime = {1};
    rep.type2_bound_marblr = type2_bound_marblr(minp, minimize);
    type2_bound = rep.type2_bound_marblr;
  }
  rep.type2_pass = rep.type2_empirical <= type2_bound / n_obs;

  json j;
  j["method"] = m.method;
  j["c"] = c;
  j["R"] = inp.R;
  j["d"] = inp.d;
  j["n"] = inp.n;
  j["T"] = inp.T;
  j["alpha"] = inp.alpha;
  j["delta2"] = inp.delta2;
  j["tau"] = inp.tau;
  j["tau_prime"] = inp.tau_prime;
  j["trace_sigma_init"] = inp.trace_sigma;
  j["n_observations"] = n_obs;
  j["type1"] = {{"empirical_per_obs", rep.type1_empirical},
                {"bound_cumulative", rep.type1_bound},
                {"bound_per_obs", rep.type1_bound / n_obs},
                {"pass", rep.type1_pass}};
  json t2j = {{"empirical_per_obs", rep.type2_empirical},
              {"bound_blr_cumulative", rep.type2_bound_blr},
              {"bound_used_per_obs", type2_bound / n_obs},
              {"pass", rep.type2_pass}};
  if (use_marblr_bound) t2j["bound_marblr_cumulative"] = rep.type2_bound_marblr;
  j["type2"] = t2j;
  j["pass"] = rep.type1_pass && rep.type2_pass;
  json fallback = json::array();
  for (const bool b : t2.ridge_fallback) fallback.push_back(b);
  j["oracle_ridge_fallback"] = fallback;

  std::ofstream os(out);
  if (!os) {
    std::cerr << "error: cannot write " << out << "\n";
    return 1;
  }
  os << j.dump(2) << "\n";
  log_line("wrote " + out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online Bayesian logistic model revision (BLR / MarBLR)"};
  app.require_subcommand(1);

  StreamFlags sim_flags;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Generate a drift stream CSV");
  add_scenario_flags(sim, sim_flags);
  sim->add_option("-o,--out", sim_out, "Output CSV path")->required();

  StreamFlags run_stream_flags;
  MethodFlags run_method_flags;
  std::string run_out = "out";
  int metric_window = 10;
  int eci_bins = 10;
  auto* run = app.add_subcommand("run", "Run a revision method over a stream");
  add_scenario_flags(run, run_stream_flags);
  run->add_option("--input", run_stream_flags.input, "Replay a stream CSV");
  add_method_flags(run, run_method_flags);
  run->add_option("-o,--out-dir", run_out, "Output directory");
  run->add_option("--metric-window", metric_window, "Windowed metric width (steps)");
  run->add_option("--eci-bins", eci_bins, "ECI bin count");

  std::string cal_preds, cal_out = "curve.csv";
  int cal_bins = 10;
  auto* cal = app.add_subcommand("calibration-curve",
                                 "Binned calibration curve per time quarter");
  cal->add_option("--preds", cal_preds, "preds.csv from a completed run")->required();
  cal->add_option("--bins", cal_bins, "Bins per quarter");
  cal->add_option("-o,--out", cal_out, "Output CSV path");

  StreamFlags rc_stream_flags;
  MethodFlags rc_method_flags;
  rc_method_flags.method = "marblr";
  std::string rc_tau, rc_tau_prime, rc_out = "regret.json";
  double rc_c = 1.0;
  bool rc_minimize = false;
  auto* rc = app.add_subcommand("regret-check",
                                "Empirical regrets vs theoretical bounds");
  add_scenario_flags(rc, rc_stream_flags);
  rc->add_option("--input", rc_stream_flags.input, "Replay a stream CSV");
  add_method_flags(rc, rc_method_flags);
  rc->add_option("--tau", rc_tau, "Comma list of shift times (default: generator's)");
  rc->add_option("--tau-prime", rc_tau_prime, "Subsequence of tau for the MarBLR bound");
  rc->add_option("--c", rc_c, "Curvature bound: 1 (paper) or 0.25 (tight)");
  rc->add_flag("--minimize-tau-prime", rc_minimize, "Minimize the bound over tau'");
  rc->add_option("-o,--out", rc_out, "Report JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_flags, sim_out);
    if (run->parsed())
      return cmd_run(run_stream_flags, run_method_flags, run_out, metric_window, eci_bins);
    if (cal->parsed()) return cmd_calibration_curve(cal_preds, cal_bins, cal_out);
    if (rc->parsed())
      return cmd_regret_check(rc_stream_flags, rc_method_flags, rc_tau, rc_tau_prime,
                              rc_c, rc_minimize, rc_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

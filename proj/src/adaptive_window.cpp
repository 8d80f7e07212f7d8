#include "msbm/adaptive_window.hpp"

#include "msbm/error.hpp"
#include "msbm/parallel.hpp"
#include "msbm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace msbm {

ToleranceRule ToleranceRule::inverse_sqrt_drift(double c_tau) {
  return ToleranceRule{c_tau, [](double t) { return 1.0 / std::sqrt(t); }};
}

ToleranceRule ToleranceRule::no_drift(double c_tau) { return ToleranceRule{c_tau, {}}; }

double tolerance(int k, const ToleranceRule& rule, int n, int layers, int t_max) {
  if (t_max < 3) throw UsageError("tolerance: the horizon must be >= 3 so that ln ln T is defined");
  if (k < 1) throw UsageError("tolerance: window must be >= 1");
  if (!(rule.c_tau >= 0.0)) throw UsageError("tolerance: c_tau must be non-negative");
  const double big = static_cast<double>(std::max({n, layers, t_max}));
  const double lt = std::log(static_cast<double>(t_max));
  const double stochastic = std::log(big) * lt * std::log(lt) / static_cast<double>(k);
  double drift = 0.0;
  if (rule.drift) {
    const double v = rule.drift(static_cast<double>(k));
    drift = v * v;
  }
  return rule.c_tau * std::max(stochastic, drift);
}

// ---------------------------------------------------------- loss evaluation

double window_loss(std::int32_t c01, std::int32_t c00, std::int32_t c10, std::int32_t c11, int k,
                   double theta, double delta) {
  theta = std::clamp(theta, kClampEpsilon, 1.0 - kClampEpsilon);
  delta = std::clamp(delta, kClampEpsilon, 1.0 - kClampEpsilon);
  return -(c01 * std::log(theta) + c00 * std::log1p(-theta) + c10 * std::log(delta) +
           c11 * std::log1p(-delta)) /
         static_cast<double>(k);
}

LossEvalContext::LossEvalContext(const GridStore& store, bool skip_degenerate)
    : windows_(store.grid()), skip_degenerate_(skip_degenerate) {
  const int t = store.time();
  if (t < 1) throw UsageError("loss context needs at least one observed transition");
  entries_.reserve(windows_.size());
  for (int k : windows_) {
    const SuffStats& base = store.at(t - k);
    Entry entry{window_counts(store.current(), base), mle_between(store.current(), base), {}, {}, {}, {}};
    const std::size_t edges = entry.mle.theta.size();
    entry.log_theta.resize(edges);
    entry.log_1m_theta.resize(edges);
    entry.log_delta.resize(edges);
    entry.log_1m_delta.resize(edges);
    for (std::size_t e = 0; e < edges; ++e) {
      const double th = std::clamp(entry.mle.theta[e], kClampEpsilon, 1.0 - kClampEpsilon);
      const double de = std::clamp(entry.mle.delta[e], kClampEpsilon, 1.0 - kClampEpsilon);
      entry.log_theta[e] = std::log(th);
      entry.log_1m_theta[e] = std::log1p(-th);
      entry.log_delta[e] = std::log(de);
      entry.log_1m_delta[e] = std::log1p(-de);
    }
    entries_.push_back(std::move(entry));
  }
}

std::size_t LossEvalContext::position(int k) const {
  auto it = std::lower_bound(windows_.begin(), windows_.end(), k);
  if (it == windows_.end() || *it != k) throw UsageError("window " + std::to_string(k) + " is not on the grid");
  return static_cast<std::size_t>(it - windows_.begin());
}

double LossEvalContext::gap(std::size_t small, std::size_t large) const {
  const Entry& a = entries_.at(small);
  const Entry& b = entries_.at(large);
  const WindowCounts& c = a.counts;
  const std::size_t edges = c.c01.size();
  double worst = 0.0;
  for (std::size_t e = 0; e < edges; ++e) {
    if (skip_degenerate_ && (a.mle.theta_degenerate[e] | a.mle.delta_degenerate[e] | b.mle.theta_degenerate[e] |
                             b.mle.delta_degenerate[e])) {
      continue;
    }
    // Terms with a zero count vanish; nested windows guarantee that a
    // degenerate estimate in either window only meets zero counts.
    const double diff = c.c01[e] * (b.log_theta[e] - a.log_theta[e]) +
                        c.c00[e] * (b.log_1m_theta[e] - a.log_1m_theta[e]) +
                        c.c10[e] * (b.log_delta[e] - a.log_delta[e]) +
                        c.c11[e] * (b.log_1m_delta[e] - a.log_1m_delta[e]);
    worst = std::max(worst, std::abs(diff));
  }
  const double result = worst / static_cast<double>(c.k);
  if (!std::isfinite(result)) throw std::runtime_error("loss gap is not finite");
  return result;
}

double loss_gap(int k_small, int k_large, const LossEvalContext& ctx) {
  return ctx.gap(ctx.position(k_small), ctx.position(k_large));
}

// --------------------------------------------------------- window selection

WindowDecision select_window(const LossEvalContext& ctx, const ToleranceRule& rule, int n, int layers,
                             int t_max) {
  const auto& windows = ctx.windows();
  const std::size_t h = windows.size();
  std::vector<double> tau(h);
  for (std::size_t u = 0; u < h; ++u) tau[u] = tolerance(windows[u], rule, n, layers, t_max);

  WindowDecision d;
  d.gap_ratio_trace.push_back(0.0);
  for (std::size_t q = 1; q < h; ++q) {
    bool ok = true;
    double ratio = 0.0;
    for (std::size_t u = 0; u < q; ++u) {
      const double g = ctx.gap(u, q);
      ratio = std::max(ratio, tau[u] > 0.0 ? g / tau[u] : (g > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
      if (g > tau[u]) ok = false;
    }
    d.gap_ratio_trace.push_back(ratio);
    if (!ok) {
      d.brk = true;
      d.k_hat = windows[q - 1];
      return d;
    }
  }
  d.k_hat = windows.back();
  return d;
}

WindowDecision select_window(const GridStore& store, const ToleranceRule& rule, int t_max) {
  const LossEvalContext ctx(store);
  return select_window(ctx, rule, store.current().n, store.current().layers, t_max);
}

double critical_ctau(const LossEvalContext& ctx, const ToleranceRule& rule, int n, int layers, int t_max) {
  ToleranceRule unit = rule;
  unit.c_tau = 1.0;
  const auto& windows = ctx.windows();
  double crit = 0.0;
  for (std::size_t u = 0; u + 1 < windows.size(); ++u) {
    const double tau = tolerance(windows[u], unit, n, layers, t_max);
    for (std::size_t q = u + 1; q < windows.size(); ++q) crit = std::max(crit, ctx.gap(u, q) / tau);
  }
  return crit;
}

// -------------------------------------------------------------- calibration

namespace {

struct Bootstrap {
  int n = 0;
  int layers = 0;
  int t_train = 0;
  EdgeParams params;
};

Bootstrap fit_bootstrap(std::span<const Snapshot> train, const CalibrationConfig& config) {
  if (train.empty()) throw UsageError("calibration needs training data");
  if (static_cast<int>(train.size()) < config.burn_in + 1) {
    throw UsageError("calibration: training length must be at least burn-in + 1");
  }
  if (config.grid.empty() || !std::is_sorted(config.grid.begin(), config.grid.end())) {
    throw UsageError("calibration grid must be non-empty and ascending");
  }
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw UsageError("alpha must lie in [0, 1]");
  if (config.bootstrap < 1) throw UsageError("bootstrap count must be >= 1");
  if (static_cast<int>(train.size()) < 3) throw UsageError("calibration needs T >= 3");

  Bootstrap b;
  b.n = train.front().nodes();
  b.layers = train.front().layers();
  b.t_train = static_cast<int>(train.size());
  SuffStats stats = SuffStats::zero(b.n, b.layers);
  Snapshot prev(b.n, b.layers);
  for (const Snapshot& a : train) {
    update_in_place(stats, prev, a);
    prev = a;
  }
  const EdgeMle mle = full_history_estimate(stats);
  b.params.theta = mle.theta;
  b.params.delta = mle.delta;
  return b;
}

std::vector<Snapshot> bootstrap_trajectory(const Bootstrap& b, const CalibrationConfig& config, int index) {
  return simulate_edges(
      b.n, b.layers, b.t_train, derive_seed(config.seed, static_cast<std::uint64_t>(index)),
      [&](int, EdgeParams& out) { out = b.params; }, InitRule::Zero);
}

ToleranceRule calibration_rule(const CalibrationConfig& config, double c) {
  return ToleranceRule{c, config.drift};
}

}  // namespace

CalibrationResult calibration_curve(std::span<const Snapshot> train, const CalibrationConfig& config) {
  const Bootstrap b = fit_bootstrap(train, config);
  CalibrationResult result;
  result.grid = config.grid;
  result.t_train = b.t_train;
  result.critical_values.assign(static_cast<std::size_t>(config.bootstrap), 0.0);

  parallel_for(config.bootstrap, config.threads, [&](int idx) {
    const auto traj = bootstrap_trajectory(b, config, idx);
    GridStore store(b.n, b.layers);
    double crit = 0.0;
    for (int t = 1; t <= b.t_train; ++t) {
      store.advance(traj[static_cast<std::size_t>(t - 1)], traj[static_cast<std::size_t>(t)]);
      if (t < config.burn_in || store.grid().size() < 2) continue;
      const LossEvalContext ctx(store);
      crit = std::max(crit, critical_ctau(ctx, calibration_rule(config, 1.0), b.n, b.layers, b.t_train));
    }
    result.critical_values[static_cast<std::size_t>(idx)] = crit;
  });

  result.c_tau = std::numeric_limits<double>::quiet_NaN();
  for (double c : config.grid) {
    const auto accepted = std::count_if(result.critical_values.begin(), result.critical_values.end(),
                                        [c](double crit) { return crit <= c; });
    const double rate = static_cast<double>(accepted) / static_cast<double>(config.bootstrap);
    result.acceptance.push_back(rate);
    if (!result.found && rate >= 1.0 - config.alpha - 1e-12) {
      result.found = true;
      result.c_tau = c;
    }
  }
  return result;
}

CalibrationResult calibrate_ctau(std::span<const Snapshot> train, const CalibrationConfig& config) {
  CalibrationResult result = calibration_curve(train, config);
  if (!result.found) {
    const double worst = *std::max_element(result.critical_values.begin(), result.critical_values.end());
    throw CalibrationExhausted("no c_tau in the grid reaches acceptance 1 - alpha; enlarge the grid (largest "
                               "bootstrap critical value " + std::to_string(worst) + ")");
  }
  return result;
}

std::vector<double> acceptance_by_rerun(std::span<const Snapshot> train, const CalibrationConfig& config) {
  const Bootstrap b = fit_bootstrap(train, config);
  std::vector<std::vector<Snapshot>> trajectories;
  for (int idx = 0; idx < config.bootstrap; ++idx) trajectories.push_back(bootstrap_trajectory(b, config, idx));

  std::vector<double> acceptance;
  for (double c : config.grid) {
    const ToleranceRule rule = calibration_rule(config, c);
    int accepted = 0;
    for (const auto& traj : trajectories) {
      GridStore store(b.n, b.layers);
      bool full = true;
      for (int t = 1; t <= b.t_train && full; ++t) {
        store.advance(traj[static_cast<std::size_t>(t - 1)], traj[static_cast<std::size_t>(t)]);
        if (t < config.burn_in) continue;
        full = select_window(store, rule, b.t_train).k_hat == store.grid().back();
      }
      accepted += full ? 1 : 0;
    }
    acceptance.push_back(static_cast<double>(accepted) / static_cast<double>(config.bootstrap));
  }
  return acceptance;
}

}  // namespace msbm

#pragma once

#include "msbm/model.hpp"
#include "msbm/online_stats.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace msbm {

/// tau(k) = c_tau * max{ ln(n v L v T) ln(T) ln ln(T) / k, V(k)^2 }.
struct ToleranceRule {
  double c_tau = 1.0;
  std::function<double(double)> drift;  ///< V; empty means V = 0

  /// V(t) = t^{-1/2}.
  static ToleranceRule inverse_sqrt_drift(double c_tau);
  static ToleranceRule no_drift(double c_tau);
};

double tolerance(int k, const ToleranceRule& rule, int n, int layers, int t_max);

/// Window count aggregates plus clamped log-estimates for every grid window at
/// the store's current time.
class LossEvalContext {
 public:
  /// With `skip_degenerate`, edges whose estimate is degenerate in either
  /// window are left out of the maximum in gap().
  explicit LossEvalContext(const GridStore& store, bool skip_degenerate = true);

  const std::vector<int>& windows() const noexcept { return windows_; }
  std::size_t position(int k) const;  ///< index of window k; throws if absent
  const WindowCounts& counts(std::size_t pos) const { return entries_.at(pos).counts; }
  const EdgeMle& mle(std::size_t pos) const { return entries_.at(pos).mle; }

  /// Averaged negative log-likelihood of window `small` evaluated at the
  /// MLEs of window `large`, minus its value at its own MLEs; max over edges.
  double gap(std::size_t small, std::size_t large) const;

 private:
  struct Entry {
    WindowCounts counts;
    EdgeMle mle;
    std::vector<double> log_theta, log_1m_theta, log_delta, log_1m_delta;
  };
  std::vector<int> windows_;
  std::vector<Entry> entries_;
  bool skip_degenerate_ = true;
};

/// Convenience wrapper over LossEvalContext::gap by window length.
double loss_gap(int k_small, int k_large, const LossEvalContext& ctx);

/// One entry of f^{t,k} from the four window counts.
double window_loss(std::int32_t c01, std::int32_t c00, std::int32_t c10, std::int32_t c11, int k,
                   double theta, double delta);

struct WindowDecision {
  int k_hat = 1;
  bool brk = false;
  /// For each candidate examined, max over shorter windows u of gap / tau(k_u).
  std::vector<double> gap_ratio_trace;
};

WindowDecision select_window(const LossEvalContext& ctx, const ToleranceRule& rule, int n,
                             int layers, int t_max);
WindowDecision select_window(const GridStore& store, const ToleranceRule& rule, int t_max);

/// Smallest c_tau for which select_window keeps the largest grid window:
/// max over u < q of gap(u, q) / tau_1(k_u), where tau_1 uses c_tau = 1.
double critical_ctau(const LossEvalContext& ctx, const ToleranceRule& rule, int n, int layers,
                     int t_max);

struct CalibrationConfig {
  std::vector<double> grid;  ///< ascending candidate constants
  int burn_in = 15;          ///< t0
  double alpha = 0.05;
  int bootstrap = 50;        ///< B
  std::uint64_t seed = 1;
  /// Drift envelope used while calibrating; empty (V = 0) by default.
  std::function<double(double)> drift;
  int threads = 1;
};

struct CalibrationResult {
  bool found = false;
  double c_tau = 0.0;  ///< NaN when no grid value qualifies
  std::vector<double> grid;
  std::vector<double> acceptance;       ///< a-bar(c) for each grid value
  std::vector<double> critical_values;  ///< per bootstrap trajectory
  int t_train = 0;
};

/// Bootstrap acceptance curve over the grid; never throws on exhaustion.
CalibrationResult calibration_curve(std::span<const Snapshot> train, const CalibrationConfig& config);

/// Parametric-bootstrap calibration of c_tau. `train` holds A^1..A^T; the
/// initial state A^0 is taken to be empty. Throws CalibrationExhausted when no
/// grid value reaches acceptance 1 - alpha.
CalibrationResult calibrate_ctau(std::span<const Snapshot> train, const CalibrationConfig& config);

/// Same acceptance curve computed by literally re-running the selection loop
/// for each grid value; quadratic in the grid size, meant for verification.
std::vector<double> acceptance_by_rerun(std::span<const Snapshot> train, const CalibrationConfig& config);

}  // namespace msbm

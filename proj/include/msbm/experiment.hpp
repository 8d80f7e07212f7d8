#pragma once

#include "msbm/adaptive_window.hpp"
#include "msbm/model.hpp"
#include "msbm/parallel.hpp"
#include "msbm/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace msbm {

struct ExperimentConfig {
  std::vector<ScenarioId> scenarios;
  std::vector<std::string> policies;
  int reps = 20;
  std::uint64_t seed = 1;
  int n = 0;      ///< 0 keeps the scenario default
  int t_max = 0;  ///< 0 keeps the scenario default
  int burn_in = 15;
  std::optional<double> c_tau;  ///< calibrated per scenario size when absent
  RefineConfig refine;          ///< ranks; k_rank/r1/r2 of 0 mean "K, L, L"
  int threads = 0;              ///< 0 = MSBM_THREADS or hardware concurrency
  int calibration_bootstrap = 50;
  double calibration_alpha = 0.05;
};

/// Mean and (R - 1)-divisor standard deviation.
struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};
MeanSd mean_sd(std::span<const double> values);

/// Mean of the finite values at t > burn_in.
double post_burn_in_mean(std::span<const StepMetrics> traj, int burn_in, double StepMetrics::*metric);

struct ReplicationRecord {
  std::string scenario;
  std::string policy;
  int rep = 0;
  double err_theta = 0.0;  ///< post-burn-in means
  double err_delta = 0.0;
  double err_z = 0.0;
  std::vector<StepMetrics> trajectory;
};

struct MetricsRow {
  std::string scenario;
  std::string policy;
  std::string metric;  ///< theta_error | delta_error | clustering_error
  double mean = 0.0;
  double sd = 0.0;
  int reps = 0;
};

struct BenchResult {
  std::vector<ReplicationRecord> replications;
  std::vector<MetricsRow> table;
  std::vector<std::pair<std::string, double>> c_tau;  ///< per scenario
};

/// The stationary training model used to calibrate c_tau for a scenario size:
/// regime (W^(1), M^(1)) on balanced communities.
Scenario calibration_scenario(int n, int horizon);

/// Simulates stationary training data and runs the bootstrap calibration.
CalibrationResult calibrate_for_size(int n, int horizon, const CalibrationConfig& config,
                                     std::uint64_t data_seed);

/// Default candidate grid: 120 log-spaced values in [1e-3, 1e2].
std::vector<double> default_ctau_grid();

/// Resolves zero ranks to (K, L, L) for the scenario.
RefineConfig resolve_ranks(RefineConfig cfg, int k, int layers);

BenchResult run_bench(const ExperimentConfig& config);

/// Aggregates replication records into the tidy table.
std::vector<MetricsRow> aggregate(const std::vector<ReplicationRecord>& reps);

/// Writes metrics.csv, replications.csv, trajectories.csv and metadata.txt.
void write_bench(const BenchResult& result, const ExperimentConfig& config, const std::string& out_dir);

/// Per-time CSV: t,k_hat[,err_theta,err_delta,err_z],sizes...,switch_rate.
std::string format_trajectory_csv(std::span<const StepMetrics> traj, bool with_truth);

/// Fixed-precision formatting shared by all CSV writers.
std::string format_number(double v);

}  // namespace msbm

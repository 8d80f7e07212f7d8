#include "msbm/experiment.hpp"

#include "msbm/error.hpp"
#include "msbm/rng.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace msbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Stream tags keep the seeds of unrelated random draws apart.
constexpr std::uint64_t kSimulationStream = 0x5349'4d00;
constexpr std::uint64_t kCalibrationStream = 0x4341'4c00;
constexpr std::uint64_t kClusterStream = 0x434c'5500;

}  // namespace

MeanSd mean_sd(std::span<const double> values) {
  if (values.empty()) return {kNaN, kNaN};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, kNaN};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

double post_burn_in_mean(std::span<const StepMetrics> traj, int burn_in, double StepMetrics::*metric) {
  double sum = 0.0;
  int count = 0;
  for (const StepMetrics& m : traj) {
    const double v = m.*metric;
    if (m.t > burn_in && std::isfinite(v)) {
      sum += v;
      ++count;
    }
  }
  return count > 0 ? sum / count : kNaN;
}

Scenario calibration_scenario(int n, int horizon) {
  // Stationary counterpart of the first regime of the non-stationary scenarios.
  Scenario sc{ScenarioId::Nonstat1, Membership::balanced(n, 2), ParamSchedule(nonstationary_regime(1)), horizon};
  return sc;
}

CalibrationResult calibrate_for_size(int n, int horizon, const CalibrationConfig& config, std::uint64_t data_seed) {
  const Scenario sc = calibration_scenario(n, horizon);
  const auto sims = simulate(sc.membership, sc.schedule, horizon, data_seed, InitRule::Zero);
  return calibrate_ctau(std::span<const Snapshot>(sims).subspan(1), config);
}

std::vector<double> default_ctau_grid() {
  std::vector<double> grid(120);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = std::pow(10.0, -3.0 + 5.0 * static_cast<double>(i) / static_cast<double>(grid.size() - 1));
  return grid;
}

RefineConfig resolve_ranks(RefineConfig cfg, int k, int layers) {
  if (cfg.k_rank == 0) cfg.k_rank = k;
  if (cfg.r1 == 0) cfg.r1 = layers;
  if (cfg.r2 == 0) cfg.r2 = layers;
  return cfg;
}

BenchResult run_bench(const ExperimentConfig& config) {
  if (config.scenarios.empty()) throw UsageError("bench needs at least one scenario");
  if (config.policies.empty()) throw UsageError("bench needs at least one policy");
  if (config.reps < 1) throw UsageError("reps must be >= 1");
  const int threads = resolve_threads(config.threads);

  struct Job {
    std::size_t scenario;
    int rep;
  };
  std::vector<Scenario> scenarios;
  std::vector<double> ctaus;
  BenchResult result;
  for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
    Scenario sc = make_scenario(config.scenarios[s], config.n, config.t_max);
    if (config.burn_in < 0 || config.burn_in >= sc.horizon) throw UsageError("burn-in must lie in [0, T)");
    double c = config.c_tau.value_or(kNaN);
    bool needs_ctau = false;
    for (const auto& p : config.policies) needs_ctau |= EstimatorPolicy::parse(p).variant == Variant::Adaptive;
    if (!config.c_tau && needs_ctau) {
      CalibrationConfig cal;
      cal.grid = default_ctau_grid();
      cal.burn_in = config.burn_in;
      cal.alpha = config.calibration_alpha;
      cal.bootstrap = config.calibration_bootstrap;
      cal.seed = derive_seed(config.seed, kCalibrationStream + s);
      cal.threads = threads;
      c = calibrate_for_size(sc.membership.n, sc.horizon, cal, derive_seed(config.seed, kCalibrationStream + 0x80 + s))
              .c_tau;
    }
    result.c_tau.emplace_back(scenario_name(sc.id), c);
    ctaus.push_back(c);
    scenarios.push_back(std::move(sc));
  }

  std::vector<Job> jobs;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (int r = 0; r < config.reps; ++r) jobs.push_back({s, r});

  const std::size_t np = config.policies.size();
  std::vector<ReplicationRecord> slots(jobs.size() * np);
  parallel_for(static_cast<int>(jobs.size()), threads, [&](int j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    const Scenario& sc = scenarios[job.scenario];
    const std::uint64_t rep_seed =
        derive_seed(derive_seed(config.seed, kSimulationStream + static_cast<std::uint64_t>(sc.id)),
                    static_cast<std::uint64_t>(job.rep));
    const auto sims = simulate(sc.membership, sc.schedule, sc.horizon, rep_seed);
    const Truth truth{sc.membership, sc.schedule};
    for (std::size_t p = 0; p < np; ++p) {
      EstimatorPolicy policy = EstimatorPolicy::parse(config.policies[p]);
      policy.refine = resolve_ranks(config.refine, sc.membership.k, sc.schedule.layers());
      policy.tolerance = ToleranceRule::inverse_sqrt_drift(ctaus[job.scenario]);
      policy.t_max = sc.horizon;
      policy.seed = derive_seed(rep_seed, kClusterStream);
      ReplicationRecord rec;
      rec.scenario = scenario_name(sc.id);
      rec.policy = policy.name();
      rec.rep = job.rep;
      rec.trajectory = run(sims, policy, &truth);
      rec.err_theta = post_burn_in_mean(rec.trajectory, config.burn_in, &StepMetrics::err_theta);
      rec.err_delta = post_burn_in_mean(rec.trajectory, config.burn_in, &StepMetrics::err_delta);
      rec.err_z = post_burn_in_mean(rec.trajectory, config.burn_in, &StepMetrics::err_z);
      // Ordered by scenario, then policy, then replication.
      const std::size_t slot = (job.scenario * np + p) * static_cast<std::size_t>(config.reps) +
                               static_cast<std::size_t>(job.rep);
      slots[slot] = std::move(rec);
    }
  });
  result.replications = std::move(slots);
  result.table = aggregate(result.replications);
  return result;
}

std::vector<MetricsRow> aggregate(const std::vector<ReplicationRecord>& reps) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::array<std::vector<double>, 3>> groups;
  for (const auto& r : reps) {
    const auto key = std::make_pair(r.scenario, r.policy);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second[0].push_back(r.err_theta);
    it->second[1].push_back(r.err_delta);
    it->second[2].push_back(r.err_z);
  }
  static const char* kMetric[3] = {"theta_error", "delta_error", "clustering_error"};
  std::vector<MetricsRow> rows;
  for (const auto& key : order) {
    const auto& g = groups.at(key);
    for (int m = 0; m < 3; ++m) {
      const MeanSd ms = mean_sd(g[static_cast<std::size_t>(m)]);
      rows.push_back({key.first, key.second, kMetric[m], ms.mean, ms.sd, static_cast<int>(g[0].size())});
    }
  }
  return rows;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  if (std::string(buf) == "-0.000000") return "0.000000";
  return buf;
}

namespace {

void trajectory_row(std::ostream& os, const StepMetrics& m, bool with_truth) {
  os << m.t << ',' << m.k_hat;
  if (with_truth) os << ',' << format_number(m.err_theta) << ',' << format_number(m.err_delta) << ',' << format_number(m.err_z);
  for (int s : m.community_sizes) os << ',' << s;
  os << ',' << format_number(m.switch_rate) << '\n';
}

void trajectory_header(std::ostream& os, std::span<const StepMetrics> traj, bool with_truth) {
  os << "t,k_hat";
  if (with_truth) os << ",err_theta,err_delta,err_z";
  const std::size_t k = traj.empty() ? 0 : traj.front().community_sizes.size();
  for (std::size_t c = 1; c <= k; ++c) os << ",size_" << c;
  os << ",switch_rate\n";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_trajectory_csv(std::span<const StepMetrics> traj, bool with_truth) {
  std::ostringstream os;
  trajectory_header(os, traj, with_truth);
  for (const auto& m : traj) trajectory_row(os, m, with_truth);
  return os.str();
}

void write_bench(const BenchResult& result, const ExperimentConfig& config, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);

  std::ostringstream metrics;
  metrics << "scenario,policy,metric,mean,sd,reps\n";
  for (const auto& r : result.table)
    metrics << r.scenario << ',' << r.policy << ',' << r.metric << ',' << format_number(r.mean) << ','
            << format_number(r.sd) << ',' << r.reps << '\n';
  write_file(dir / "metrics.csv", metrics.str());

  std::ostringstream reps;
  reps << "scenario,policy,rep,theta_error,delta_error,clustering_error\n";
  for (const auto& r : result.replications)
    reps << r.scenario << ',' << r.policy << ',' << r.rep + 1 << ',' << format_number(r.err_theta) << ','
         << format_number(r.err_delta) << ',' << format_number(r.err_z) << '\n';
  write_file(dir / "replications.csv", reps.str());

  std::ostringstream traj;
  traj << "scenario,policy,rep,t,k_hat,err_theta,err_delta,err_z,sizes,switch_rate\n";
  for (const auto& r : result.replications) {
    for (const auto& m : r.trajectory) {
      traj << r.scenario << ',' << r.policy << ',' << r.rep + 1 << ',' << m.t << ',' << m.k_hat << ','
           << format_number(m.err_theta) << ',' << format_number(m.err_delta) << ',' << format_number(m.err_z) << ',';
      for (std::size_t c = 0; c < m.community_sizes.size(); ++c) traj << (c ? ";" : "") << m.community_sizes[c];
      traj << ',' << format_number(m.switch_rate) << '\n';
    }
  }
  write_file(dir / "trajectories.csv", traj.str());

  std::ostringstream meta;
  meta << "reps=" << config.reps << "\n";
  meta << "replication_scale=" << config.reps << "/50\n";
  meta << "seed=" << config.seed << "\n";
  meta << "n=" << config.n << "\n";
  meta << "t_max=" << config.t_max << "\n";
  meta << "burn_in=" << config.burn_in << "\n";
  meta << "ranks=" << config.refine.k_rank << ',' << config.refine.r1 << ',' << config.refine.r2 << "\n";
  meta << "hpca_max_iters=" << config.refine.hpca_max_iters << "\n";
  meta << "hpca_tol=" << config.refine.hpca_tol << "\n";
  meta << "unobserved_entries="
       << (config.refine.unobserved == RefineConfig::Unobserved::Zero ? "zero" : "impute") << "\n";
  const KMeansOptions km;
  meta << "kmeans_restarts=" << km.restarts << "\nkmeans_max_iters=" << km.max_iters << "\nkmeans_tol=" << km.tol
       << "\n";
  meta << "calibration_bootstrap=" << config.calibration_bootstrap << "\n";
  meta << "calibration_alpha=" << config.calibration_alpha << "\n";
  for (const auto& [scenario, c] : result.c_tau) meta << "c_tau." << scenario << '=' << format_number(c) << "\n";
  meta << "policies=";
  for (std::size_t i = 0; i < config.policies.size(); ++i) meta << (i ? "," : "") << config.policies[i];
  meta << "\n";
  write_file(dir / "metadata.txt", meta.str());
}

}  // namespace msbm

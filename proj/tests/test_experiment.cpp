#include "doctest.h"

#include "msbm/error.hpp"
#include "msbm/experiment.hpp"
#include "msbm/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace msbm;

TEST_CASE("mean and sd use the R - 1 divisor") {
  const std::vector<double> v{1, 2, 3, 4};
  const MeanSd m = mean_sd(v);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  const std::vector<double> one{7};
  CHECK(std::isnan(mean_sd(one).sd));
}

TEST_CASE("post burn-in mean skips early and non-finite values") {
  std::vector<StepMetrics> traj(5);
  for (int i = 0; i < 5; ++i) {
    traj[i].t = i + 1;
    traj[i].err_theta = i + 1.0;
  }
  traj[4].err_theta = std::numeric_limits<double>::quiet_NaN();
  CHECK(post_burn_in_mean(traj, 2, &StepMetrics::err_theta) == doctest::Approx(3.5));
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.5) == "0.500000");
  CHECK(format_number(-0.0) == "0.000000");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "NA");
}

TEST_CASE("rank resolution and grids") {
  RefineConfig cfg;
  cfg.k_rank = cfg.r1 = cfg.r2 = 0;
  const RefineConfig r = resolve_ranks(cfg, 2, 3);
  CHECK(r.k_rank == 2);
  CHECK(r.r1 == 3);
  CHECK(r.r2 == 3);
  const auto g = default_ctau_grid();
  CHECK(g.size() == 120);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(1e2));
}

TEST_CASE("parallel_for covers every job and respects MSBM_THREADS") {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS(parallel_for(3, 2, [](int i) {
    if (i == 1) throw std::runtime_error("job failed");
  }));
  ::setenv("MSBM_THREADS", "2", 1);
  CHECK(resolve_threads(8) == 2);
  CHECK(resolve_threads(1) == 1);
  ::unsetenv("MSBM_THREADS");
  CHECK(resolve_threads(3) == 3);
}

TEST_CASE("small bench is deterministic and independent of the worker count") {
  ExperimentConfig cfg;
  cfg.scenarios = {ScenarioId::Nonstat1};
  cfg.policies = {"adaptive", "fixed-10"};
  cfg.reps = 2;
  cfg.n = 12;
  cfg.t_max = 30;
  cfg.c_tau = 0.2;
  cfg.refine.k_rank = cfg.refine.r1 = cfg.refine.r2 = 0;
  cfg.threads = 1;
  const BenchResult a = run_bench(cfg);
  cfg.threads = 3;
  const BenchResult b = run_bench(cfg);
  REQUIRE(a.replications.size() == 4);
  CHECK(a.table.size() == 6);
  for (std::size_t i = 0; i < a.replications.size(); ++i) {
    CHECK(a.replications[i].policy == b.replications[i].policy);
    CHECK(a.replications[i].err_theta == b.replications[i].err_theta);
    CHECK(a.replications[i].err_z == b.replications[i].err_z);
  }
  const auto dir = std::filesystem::temp_directory_path() / "msbm_test_bench";
  std::filesystem::remove_all(dir);
  write_bench(a, cfg, dir.string());
  for (const char* f : {"metrics.csv", "replications.csv", "trajectories.csv", "metadata.txt"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream m(dir / "metrics.csv");
  std::string header;
  std::getline(m, header);
  CHECK(header.find("scenario") != std::string::npos);
  std::filesystem::remove_all(dir);
}

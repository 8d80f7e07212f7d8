#pragma once

#include "msbm/adaptive_window.hpp"
#include "msbm/community.hpp"
#include "msbm/model.hpp"
#include "msbm/online_stats.hpp"
#include "msbm/spectral.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msbm {

enum class Variant {
  Stationary,   ///< full-history counts, subspaces refreshed at t = 2^m
  Adaptive,     ///< grid windows with stability-based selection
  FullHistory,  ///< window t, subspaces every step
  FixedWindow,  ///< window min(k, t), subspaces every step
  Static,       ///< marginal baseline on the cumulative-average tensor
  Aggregated,   ///< layer-averaged estimates, L = 1 refinement
};

struct EstimatorPolicy {
  Variant variant = Variant::Stationary;
  int fixed_window = 30;
  RefineConfig refine;
  ToleranceRule tolerance = ToleranceRule::inverse_sqrt_drift(1.0);
  int t_max = 0;  ///< horizon used by the tolerance; 0 = unknown (then t is used)
  std::uint64_t seed = 1;
  KMeansOptions kmeans;

  /// stationary | adaptive | full-history | fixed-<k> | static | aggregated
  static EstimatorPolicy parse(const std::string& name);
  std::string name() const;
};

struct EstimateBundle {
  int t = 0;
  int k_hat = 0;
  bool has_transition_estimates = true;  ///< false for the marginal baseline
  Tensor3 theta_hat, delta_hat;
  Tensor3 theta_tilde, delta_tilde;
  SubspaceSet subspaces;
  Membership z_hat;
  std::size_t degenerate_theta = 0;
  std::size_t degenerate_delta = 0;
  WindowDecision decision;  ///< adaptive variant only
};

/// Streaming estimator. Construct with the initial state A^0, then feed
/// A^1, A^2, ... in order.
class Estimator {
 public:
  Estimator(const Snapshot& initial, EstimatorPolicy policy);

  const EstimateBundle& step(int t, const Snapshot& a_t);
  int time() const noexcept { return t_; }
  const EstimatorPolicy& policy() const noexcept { return policy_; }
  const GridStore& grid_store() const noexcept { return grid_; }

 private:
  void refine_and_cluster(const EdgeMle& mle, bool refresh);
  void cluster();

  EstimatorPolicy policy_;
  int n_;
  int layers_;
  int t_ = 0;
  int power_ = 0;
  Snapshot prev_;
  SuffStats stats_;
  GridStore grid_;
  WindowRing ring_;
  std::vector<std::int32_t> cumulative_;
  SubspaceWarmStart warm_;
  EstimateBundle bundle_;
};

/// Ground truth of a simulated trajectory.
struct Truth {
  Membership z;
  ParamSchedule schedule;
};

struct StepMetrics {
  int t = 0;
  int k_hat = 0;
  double err_theta = 0.0;  ///< NaN when not applicable
  double err_delta = 0.0;
  double err_z = 0.0;
  std::vector<int> community_sizes;
  double switch_rate = 0.0;  ///< share of nodes whose label changed since t-1
};

/// ||est - truth||_F / (n sqrt(L)). A single-layer estimate is compared
/// against every layer of the truth.
double normalized_error(const Tensor3& est, const Tensor3& truth);
double normalized_error(const Tensor3& est, const Membership& z, const Tensor3& block);

using StepVisitor = std::function<void(const EstimateBundle&, const StepMetrics&)>;

/// Streams the estimator over snapshots[1..]; snapshots[0] is A^0. Error
/// columns are NaN when no truth is supplied.
std::vector<StepMetrics> run(std::span<const Snapshot> snapshots, const EstimatorPolicy& policy,
                             const Truth* truth = nullptr, const StepVisitor& visit = {});

}  // namespace msbm

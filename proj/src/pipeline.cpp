#include "msbm/pipeline.hpp"

#include "msbm/error.hpp"
#include "msbm/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace msbm {

EstimatorPolicy EstimatorPolicy::parse(const std::string& name) {
  EstimatorPolicy p;
  if (name == "stationary") {
    p.variant = Variant::Stationary;
  } else if (name == "adaptive") {
    p.variant = Variant::Adaptive;
  } else if (name == "full-history") {
    p.variant = Variant::FullHistory;
  } else if (name == "static") {
    p.variant = Variant::Static;
  } else if (name == "aggregated") {
    p.variant = Variant::Aggregated;
  } else if (name.rfind("fixed-", 0) == 0) {
    const std::string digits = name.substr(6);
    if (digits.empty() || digits.size() > 9 ||
        !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
      throw UsageError("bad fixed-window policy '" + name + "'");
    }
    p.variant = Variant::FixedWindow;
    p.fixed_window = std::stoi(digits);
    if (p.fixed_window < 1) throw UsageError("fixed window length must be >= 1");
  } else {
    throw UsageError("unknown policy '" + name +
                     "' (expected stationary, adaptive, full-history, fixed-<k>, static or aggregated)");
  }
  return p;
}

std::string EstimatorPolicy::name() const {
  switch (variant) {
    case Variant::Stationary: return "stationary";
    case Variant::Adaptive: return "adaptive";
    case Variant::FullHistory: return "full-history";
    case Variant::FixedWindow: return "fixed-" + std::to_string(fixed_window);
    case Variant::Static: return "static";
    case Variant::Aggregated: return "aggregated";
  }
  return "unknown";
}

namespace {

std::size_t count_flags(const std::vector<std::uint8_t>& flags) {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

/// Layer average of an estimate whose missing entries were already filled.
/// An averaged entry stays missing only when it is missing in every layer.
Tensor3 layer_average(const Tensor3& t, const std::vector<std::uint8_t>& missing,
                      std::vector<std::uint8_t>& avg_missing) {
  const int n = t.dim(0);
  const int layers = t.dim(2);
  const std::size_t face = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  Tensor3 out(n, n, 1);
  avg_missing.assign(face, 1);
  for (int l = 0; l < layers; ++l) {
    out.slice(0) += t.slice(l);
    for (std::size_t i = 0; i < face; ++i)
      if (missing[face * static_cast<std::size_t>(l) + i] == 0) avg_missing[i] = 0;
  }
  out *= 1.0 / layers;
  return out;
}

void zero_missing(Tensor3& t, const std::vector<std::uint8_t>& missing) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (missing[i] != 0) t.data()[i] = 0.0;
}

std::vector<int> community_sizes(const Membership& z) {
  std::vector<int> sizes(static_cast<std::size_t>(std::max(z.k, 0)), 0);
  for (int lab : z.labels) ++sizes.at(static_cast<std::size_t>(lab));
  return sizes;
}

}  // namespace

Estimator::Estimator(const Snapshot& initial, EstimatorPolicy policy)
    : policy_(std::move(policy)), n_(initial.nodes()), layers_(initial.layers()), prev_(initial) {
  if (n_ < 2 || layers_ < 1) throw UsageError("estimator needs n >= 2 and L >= 1");
  const int refine_layers = policy_.variant == Variant::Aggregated ? 1 : layers_;
  RefineConfig check = policy_.refine;
  if (policy_.variant == Variant::Aggregated) check.r1 = check.r2 = 1;
  check.validate(n_, refine_layers);
  if (policy_.variant == Variant::FixedWindow && policy_.fixed_window < 1) {
    throw UsageError("fixed window length must be >= 1");
  }

  switch (policy_.variant) {
    case Variant::Adaptive: grid_ = GridStore(n_, layers_); break;
    case Variant::FixedWindow: ring_ = WindowRing(n_, layers_, policy_.fixed_window); break;
    case Variant::Static: cumulative_.assign(initial.edges().size(), 0); break;
    default: stats_ = SuffStats::zero(n_, layers_); break;
  }
}

const EstimateBundle& Estimator::step(int t, const Snapshot& a_t) {
  if (t != t_ + 1) {
    throw UsageError("snapshots must arrive in order: expected t = " + std::to_string(t_ + 1) + ", got " +
                     std::to_string(t));
  }
  if (a_t.nodes() != n_ || a_t.layers() != layers_) throw UsageError("snapshot dimensions changed");
  t_ = t;
  bundle_.t = t;
  bundle_.decision = {};

  bool refresh = true;
  switch (policy_.variant) {
    case Variant::Stationary:
    case Variant::Aggregated: {
      update_in_place(stats_, prev_, a_t);
      refresh = refresh_due(t, power_);
      if (refresh) power_ = static_cast<int>(std::floor(std::log2(static_cast<double>(t)))) + 1;
      bundle_.k_hat = t;
      refine_and_cluster(full_history_estimate(stats_), refresh);
      break;
    }
    case Variant::FullHistory: {
      update_in_place(stats_, prev_, a_t);
      bundle_.k_hat = t;
      refine_and_cluster(full_history_estimate(stats_), true);
      break;
    }
    case Variant::FixedWindow: {
      ring_.advance(prev_, a_t);
      const int k = std::min(policy_.fixed_window, t);
      bundle_.k_hat = k;
      refine_and_cluster(mle_between(ring_.current(), ring_.at(t - k)), true);
      break;
    }
    case Variant::Adaptive: {
      grid_.advance(prev_, a_t);
      const LossEvalContext ctx(grid_);
      const int horizon = std::max(3, policy_.t_max > 0 ? std::max(policy_.t_max, t) : t);
      bundle_.decision = select_window(ctx, policy_.tolerance, n_, layers_, horizon);
      bundle_.k_hat = bundle_.decision.k_hat;
      refine_and_cluster(ctx.mle(ctx.position(bundle_.k_hat)), true);
      break;
    }
    case Variant::Static: {
      const auto& cur = a_t.edges();
      for (std::size_t e = 0; e < cur.size(); ++e) cumulative_[e] += cur[e];
      std::vector<double> avg(cumulative_.size());
      for (std::size_t e = 0; e < avg.size(); ++e) avg[e] = static_cast<double>(cumulative_[e]) / t;
      Tensor3 marginal = edge_vector_to_tensor(avg, n_, layers_);
      if (policy_.refine.unobserved == RefineConfig::Unobserved::Impute) {
        fill_missing_with_layer_mean(marginal, missing_mask({}, n_, layers_));
      }
      refresh = refresh_due(t, power_);
      if (refresh) {
        power_ = static_cast<int>(std::floor(std::log2(static_cast<double>(t)))) + 1;
        bundle_.subspaces.u_z = estimate_node_subspace(marginal, policy_.refine, &warm_.z);
        bundle_.subspaces.refreshed_at = t;
      }
      bundle_.k_hat = t;
      bundle_.has_transition_estimates = false;
      bundle_.theta_hat = std::move(marginal);
      bundle_.delta_hat = Tensor3();
      bundle_.theta_tilde = Tensor3();
      bundle_.delta_tilde = Tensor3();
      bundle_.degenerate_theta = bundle_.degenerate_delta = 0;
      cluster();
      break;
    }
  }
  prev_ = a_t;
  return bundle_;
}

void Estimator::refine_and_cluster(const EdgeMle& mle, bool refresh) {
  bundle_.has_transition_estimates = true;
  bundle_.theta_hat = mle.theta_tensor();
  bundle_.delta_hat = mle.delta_tensor();
  bundle_.degenerate_theta = count_flags(mle.theta_degenerate);
  bundle_.degenerate_delta = count_flags(mle.delta_degenerate);

  RefineConfig cfg = policy_.refine;
  const bool impute = cfg.unobserved == RefineConfig::Unobserved::Impute;
  std::vector<std::uint8_t> theta_missing = mle.theta_missing();
  std::vector<std::uint8_t> delta_missing = mle.delta_missing();
  Tensor3 theta = bundle_.theta_hat;
  Tensor3 delta = bundle_.delta_hat;
  if (impute) {
    fill_missing_with_layer_mean(theta, theta_missing);
    fill_missing_with_layer_mean(delta, delta_missing);
  } else {
    zero_missing(theta, theta_missing);
    zero_missing(delta, delta_missing);
  }

  if (policy_.variant == Variant::Aggregated) {
    std::vector<std::uint8_t> tm, dm;
    theta = layer_average(theta, theta_missing, tm);
    delta = layer_average(delta, delta_missing, dm);
    theta_missing = std::move(tm);
    delta_missing = std::move(dm);
    cfg.r1 = cfg.r2 = 1;
  }

  if (refresh || bundle_.subspaces.u_z.size() == 0) {
    bundle_.subspaces = estimate_subspaces(theta, delta, cfg, &warm_);
    bundle_.subspaces.refreshed_at = t_;
  }
  const SubspaceSet& s = bundle_.subspaces;
  if (impute) {
    bundle_.theta_tilde = impute_and_project(std::move(theta), theta_missing, s.u_z, s.u_w, cfg.impute_passes);
    bundle_.delta_tilde = impute_and_project(std::move(delta), delta_missing, s.u_z, s.u_m, cfg.impute_passes);
  } else {
    bundle_.theta_tilde = project(theta, s.u_z, s.u_w);
    bundle_.delta_tilde = project(delta, s.u_z, s.u_m);
  }
  cluster();
}

void Estimator::cluster() {
  const int k = policy_.refine.k_rank;
  const auto result =
      kmeans_membership(bundle_.subspaces.u_z, k, derive_seed(policy_.seed, static_cast<std::uint64_t>(t_)),
                        policy_.kmeans);
  bundle_.z_hat = extract_membership(result, k);
}

double normalized_error(const Tensor3& est, const Tensor3& truth) {
  const int n = truth.dim(0);
  const int layers = truth.dim(2);
  if (est.dim(0) != n || est.dim(1) != truth.dim(1) || (est.dim(2) != layers && est.dim(2) != 1)) {
    throw UsageError("estimate and truth dimensions differ");
  }
  double sq = 0.0;
  for (int l = 0; l < layers; ++l) {
    const int el = est.dim(2) == 1 ? 0 : l;
    sq += (est.slice(el) - truth.slice(l)).squaredNorm();
  }
  return std::sqrt(sq) / (static_cast<double>(n) * std::sqrt(static_cast<double>(layers)));
}

double normalized_error(const Tensor3& est, const Membership& z, const Tensor3& block) {
  const int layers = block.dim(2);
  Tensor3 truth(z.n, z.n, layers);
  for (int l = 0; l < layers; ++l)
    for (int j = 0; j < z.n; ++j)
      for (int i = 0; i < z.n; ++i)
        truth(i, j, l) = block(z.labels[static_cast<std::size_t>(i)], z.labels[static_cast<std::size_t>(j)], l);
  return normalized_error(est, truth);
}

std::vector<StepMetrics> run(std::span<const Snapshot> snapshots, const EstimatorPolicy& policy, const Truth* truth,
                             const StepVisitor& visit) {
  if (snapshots.empty()) throw UsageError("run needs at least the initial snapshot");
  const Snapshot& first = snapshots.front();
  if (truth != nullptr) {
    if (truth->z.n != first.nodes() || truth->schedule.layers() != first.layers() ||
        truth->schedule.communities() != truth->z.k) {
      throw UsageError("ground truth dimensions do not match the snapshots");
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Estimator est(first, policy);
  std::vector<StepMetrics> out;
  out.reserve(snapshots.size() - 1);
  Membership previous;
  for (std::size_t t = 1; t < snapshots.size(); ++t) {
    const EstimateBundle& b = est.step(static_cast<int>(t), snapshots[t]);
    StepMetrics m;
    m.t = b.t;
    m.k_hat = b.k_hat;
    m.err_theta = m.err_delta = m.err_z = nan;
    if (truth != nullptr) {
      if (b.has_transition_estimates) {
        const Connectivity c = truth->schedule.at(b.t);
        m.err_theta = normalized_error(b.theta_tilde, truth->z, c.w);
        m.err_delta = normalized_error(b.delta_tilde, truth->z, c.m);
      }
      m.err_z = 1.0 - adjusted_rand_index(b.z_hat, truth->z);
    }
    m.community_sizes = community_sizes(b.z_hat);
    m.switch_rate = previous.labels.empty() ? 0.0 : hamming_loss(b.z_hat, previous);
    previous = b.z_hat;
    if (visit) visit(b, m);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace msbm

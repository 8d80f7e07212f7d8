#include "msbm/online_stats.hpp"

#include "msbm/error.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace msbm {

SuffStats SuffStats::zero(int n, int layers) {
  const std::size_t edges = pair_count(n) * static_cast<std::size_t>(layers);
  return SuffStats{0, n, layers, std::vector<std::int32_t>(edges, 0), std::vector<std::int32_t>(edges, 0),
                   std::vector<std::int32_t>(edges, 0)};
}

void update_in_place(SuffStats& stats, const Snapshot& a_prev, const Snapshot& a_cur) {
  if (a_prev.nodes() != stats.n || a_cur.nodes() != stats.n || a_prev.layers() != stats.layers ||
      a_cur.layers() != stats.layers) {
    throw UsageError("update: snapshot dimensions do not match the statistics");
  }
  const auto& prev = a_prev.edges();
  const auto& cur = a_cur.edges();
  for (std::size_t e = 0; e < prev.size(); ++e) {
    const std::int32_t p = prev[e];
    const std::int32_t c = cur[e];
    stats.n01[e] += c & (1 - p);
    stats.n10[e] += (1 - c) & p;
    stats.nact[e] += p;
  }
  ++stats.t;
}

SuffStats update(SuffStats stats, const Snapshot& a_prev, const Snapshot& a_cur) {
  update_in_place(stats, a_prev, a_cur);
  return stats;
}

std::vector<int> dynamic_grid(int t) {
  if (t < 1) throw UsageError("dynamic_grid: t must be >= 1");
  std::vector<int> grid{1};
  if (t == 1) return grid;
  const long x = t - 1;
  // floor(log2(x / 3)) + 1, and no left terms when x < 3.
  int left_max = 0;
  if (x >= 3) {
    int j = 0;
    while (3L * (1L << (j + 1)) <= x) ++j;
    left_max = j + 1;
  }
  int log2x = 0;
  while ((1L << (log2x + 1)) <= x) ++log2x;
  const int right_max = log2x - 1;

  auto left = [x](int j) { return (1L << j) + x % (1L << (j - 1)); };
  for (int j = 1; j <= left_max; ++j) grid.push_back(static_cast<int>(left(j)));
  for (int j = 1; j <= right_max; ++j) grid.push_back(static_cast<int>(left(j) + (1L << (j - 1))));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// -------------------------------------------------------------- GridStore

GridStore::GridStore(int n, int layers) : current_(SuffStats::zero(n, layers)), zero_(current_) {}

const SuffStats& GridStore::at(int s) const {
  if (s == current_.t) return current_;
  if (s == 0) return zero_;
  auto it = checkpoints_.find(s);
  if (it == checkpoints_.end()) {
    throw UsageError("no checkpoint retained for time " + std::to_string(s) + " at t = " +
                     std::to_string(current_.t));
  }
  return it->second;
}

void GridStore::advance(const Snapshot& a_prev, const Snapshot& a_cur) {
  SuffStats previous = current_;
  update_in_place(current_, a_prev, a_cur);
  const int t = current_.t;
  grid_ = dynamic_grid(t);

  std::map<int, SuffStats> kept;
  for (int k : grid_) {
    const int s = t - k;
    if (s == t - 1) {
      kept.emplace(s, previous);
    } else if (s == 0) {
      kept.emplace(s, zero_);
    } else {
      auto it = checkpoints_.find(s);
      if (it == checkpoints_.end()) {
        throw std::logic_error("grid nesting violated: checkpoint " + std::to_string(s) + " was discarded");
      }
      kept.emplace(s, std::move(it->second));
    }
  }
  checkpoints_ = std::move(kept);
}

// ------------------------------------------------------------- WindowRing

WindowRing::WindowRing(int n, int layers, int max_window) : max_window_(max_window) {
  if (max_window < 1) throw UsageError("fixed window length must be >= 1");
  history_.push_back(SuffStats::zero(n, layers));
}

const SuffStats& WindowRing::at(int s) const {
  const int first = history_.front().t;
  if (s < first || s > time()) throw UsageError("window ring does not hold time " + std::to_string(s));
  return history_[static_cast<std::size_t>(s - first)];
}

void WindowRing::advance(const Snapshot& a_prev, const Snapshot& a_cur) {
  history_.push_back(update(history_.back(), a_prev, a_cur));
  if (history_.size() > static_cast<std::size_t>(max_window_) + 1) history_.erase(history_.begin());
}

// ------------------------------------------------------------ Estimators

WindowCounts window_counts(const SuffStats& now, const SuffStats& base) {
  if (now.edge_count() != base.edge_count()) throw UsageError("window_counts: statistics differ in shape");
  const int k = now.t - base.t;
  if (k < 1) throw UsageError("window_counts: window must be >= 1");
  WindowCounts w;
  w.k = k;
  const std::size_t edges = now.edge_count();
  w.c01.resize(edges);
  w.c00.resize(edges);
  w.c10.resize(edges);
  w.c11.resize(edges);
  for (std::size_t e = 0; e < edges; ++e) {
    const std::int32_t d01 = now.n01[e] - base.n01[e];
    const std::int32_t d10 = now.n10[e] - base.n10[e];
    const std::int32_t act = now.nact[e] - base.nact[e];
    w.c01[e] = d01;
    w.c00[e] = k - act - d01;
    w.c10[e] = d10;
    w.c11[e] = act - d10;
  }
  return w;
}

EdgeMle mle_between(const SuffStats& now, const SuffStats& base) {
  if (now.edge_count() != base.edge_count()) throw UsageError("mle: statistics differ in shape");
  const int k = now.t - base.t;
  if (k < 1) throw UsageError("mle: window must be >= 1");
  EdgeMle out;
  out.n = now.n;
  out.layers = now.layers;
  out.window = k;
  const std::size_t edges = now.edge_count();
  out.theta.resize(edges);
  out.delta.resize(edges);
  out.theta_degenerate.assign(edges, 0);
  out.delta_degenerate.assign(edges, 0);
  for (std::size_t e = 0; e < edges; ++e) {
    const std::int32_t act = now.nact[e] - base.nact[e];
    const std::int32_t idle = k - act;
    if (idle > 0) {
      out.theta[e] = static_cast<double>(now.n01[e] - base.n01[e]) / idle;
    } else {
      out.theta[e] = kDegenerateEstimate;
      out.theta_degenerate[e] = 1;
    }
    if (act > 0) {
      out.delta[e] = static_cast<double>(now.n10[e] - base.n10[e]) / act;
    } else {
      out.delta[e] = kDegenerateEstimate;
      out.delta_degenerate[e] = 1;
    }
  }
  return out;
}

EdgeMle windowed_mle(const GridStore& store, int k) {
  const int t = store.time();
  if (k < 1 || k > t) throw UsageError("windowed_mle: window " + std::to_string(k) + " outside [1, t]");
  return mle_between(store.current(), store.at(t - k));
}

EdgeMle full_history_estimate(const SuffStats& stats) {
  return mle_between(stats, SuffStats::zero(stats.n, stats.layers));
}

Tensor3 edge_vector_to_tensor(const std::vector<double>& values, int n, int layers, double diagonal) {
  if (values.size() != pair_count(n) * static_cast<std::size_t>(layers)) {
    throw UsageError("edge vector length does not match n and L");
  }
  Tensor3 t(n, n, layers);
  std::size_t e = 0;
  for (int l = 0; l < layers; ++l) {
    for (int i = 0; i < n; ++i) {
      t(i, i, l) = diagonal;
      for (int j = i + 1; j < n; ++j, ++e) {
        t(i, j, l) = values[e];
        t(j, i, l) = values[e];
      }
    }
  }
  return t;
}

std::vector<std::uint8_t> missing_mask(const std::vector<std::uint8_t>& flags, int n, int layers) {
  Tensor3 shape(n, n, layers);
  std::vector<std::uint8_t> mask(shape.size(), 0);
  std::size_t e = 0;
  for (int l = 0; l < layers; ++l) {
    for (int i = 0; i < n; ++i) {
      mask[shape.index(i, i, l)] = 1;
      for (int j = i + 1; j < n; ++j, ++e) {
        if (!flags.empty() && flags[e] != 0) {
          mask[shape.index(i, j, l)] = 1;
          mask[shape.index(j, i, l)] = 1;
        }
      }
    }
  }
  return mask;
}

Tensor3 EdgeMle::theta_tensor() const { return edge_vector_to_tensor(theta, n, layers); }
Tensor3 EdgeMle::delta_tensor() const { return edge_vector_to_tensor(delta, n, layers); }
std::vector<std::uint8_t> EdgeMle::theta_missing() const { return missing_mask(theta_degenerate, n, layers); }
std::vector<std::uint8_t> EdgeMle::delta_missing() const { return missing_mask(delta_degenerate, n, layers); }

}  // namespace msbm

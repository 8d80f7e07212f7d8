#pragma once

#include "msbm/model.hpp"
#include "msbm/tensor.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace msbm {

/// Cumulative transition counts up to time t, per edge (Snapshot layout).
///   n01  = sum_{s<=t} A^s (1 - A^{s-1})
///   n10  = sum_{s<=t} (1 - A^s) A^{s-1}
///   nact = sum_{s<=t} A^{s-1}
struct SuffStats {
  int t = 0;
  int n = 0;
  int layers = 0;
  std::vector<std::int32_t> n01;
  std::vector<std::int32_t> n10;
  std::vector<std::int32_t> nact;

  static SuffStats zero(int n, int layers);
  std::size_t edge_count() const noexcept { return n01.size(); }
  friend bool operator==(const SuffStats&, const SuffStats&) = default;
};

/// Advances `stats` from time t-1 to t with the transition a_prev -> a_cur.
void update_in_place(SuffStats& stats, const Snapshot& a_prev, const Snapshot& a_cur);
SuffStats update(SuffStats stats, const Snapshot& a_prev, const Snapshot& a_cur);

/// Dynamic geometric grid of candidate look-back windows at time t, sorted.
std::vector<int> dynamic_grid(int t);

/// Retains the current counts plus checkpoints at {t - k : k in grid(t)}.
class GridStore {
 public:
  GridStore() = default;
  GridStore(int n, int layers);

  int time() const noexcept { return current_.t; }
  const SuffStats& current() const noexcept { return current_; }
  const std::vector<int>& grid() const noexcept { return grid_; }
  const std::map<int, SuffStats>& checkpoints() const noexcept { return checkpoints_; }

  /// Counts at time s; s = 0 always resolves to the zero baseline.
  const SuffStats& at(int s) const;

  void advance(const Snapshot& a_prev, const Snapshot& a_cur);

 private:
  SuffStats current_;
  SuffStats zero_;
  std::vector<int> grid_{1};
  std::map<int, SuffStats> checkpoints_;
};

/// Keeps the last `max_window + 1` count states so fixed-length windows can
/// be differenced at every step.
class WindowRing {
 public:
  WindowRing() = default;
  WindowRing(int n, int layers, int max_window);

  int time() const noexcept { return history_.back().t; }
  const SuffStats& current() const { return history_.back(); }
  /// Counts at time s, which must lie in [time() - max_window, time()].
  const SuffStats& at(int s) const;
  void advance(const Snapshot& a_prev, const Snapshot& a_cur);

 private:
  int max_window_ = 0;
  std::vector<SuffStats> history_;  // oldest first
};

/// Transition counts inside the window (t - k, t] for every edge.
struct WindowCounts {
  int k = 0;
  std::vector<std::int32_t> c01, c00, c10, c11;
};
WindowCounts window_counts(const SuffStats& now, const SuffStats& base);

/// Closed-form windowed MLE per edge. An entry whose denominator is zero is
/// degenerate: its value is 0.5 and its flag is set.
struct EdgeMle {
  int n = 0;
  int layers = 0;
  int window = 0;
  std::vector<double> theta;
  std::vector<double> delta;
  std::vector<std::uint8_t> theta_degenerate;
  std::vector<std::uint8_t> delta_degenerate;

  Tensor3 theta_tensor() const;  ///< symmetric, zero diagonal
  Tensor3 delta_tensor() const;
  /// Unobserved entries of theta_tensor(): the diagonal and degenerate edges.
  std::vector<std::uint8_t> theta_missing() const;
  std::vector<std::uint8_t> delta_missing() const;
};

inline constexpr double kDegenerateEstimate = 0.5;
inline constexpr double kClampEpsilon = 1e-6;

EdgeMle mle_between(const SuffStats& now, const SuffStats& base);
EdgeMle windowed_mle(const GridStore& store, int k);
EdgeMle full_history_estimate(const SuffStats& stats);

/// Expands an edge vector into a symmetric n x n x L tensor with `diagonal`
/// on the diagonal.
Tensor3 edge_vector_to_tensor(const std::vector<double>& values, int n, int layers, double diagonal = 0.0);

/// Missing-entry mask (1 = missing) for the tensor built from an edge vector:
/// the diagonal plus every flagged edge.
std::vector<std::uint8_t> missing_mask(const std::vector<std::uint8_t>& flags, int n, int layers);

}  // namespace msbm

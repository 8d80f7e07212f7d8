#pragma once

#include "msbm/tensor.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace msbm {

/// Number of unordered node pairs i < j.
constexpr std::size_t pair_count(int n) noexcept {
  return static_cast<std::size_t>(n) * static_cast<std::size_t>(n > 0 ? n - 1 : 0) / 2;
}

/// Index of pair (i, j), i < j, in row-major upper-triangular order.
constexpr std::size_t pair_index(int n, int i, int j) noexcept {
  const auto ii = static_cast<std::size_t>(i);
  return ii * (2 * static_cast<std::size_t>(n) - ii - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

/// One binary symmetric multilayer network with zero diagonal.
///
/// Only the strict upper triangle is stored: entry (p, l) lives at
/// l * pair_count(n) + p. Per-edge vectors elsewhere in the library use the
/// same layout.
class Snapshot {
 public:
  Snapshot() = default;
  Snapshot(int n, int layers);

  int nodes() const noexcept { return n_; }
  int layers() const noexcept { return layers_; }
  std::size_t pairs() const noexcept { return pair_count(n_); }

  bool get(int i, int j, int l) const;
  void set(int i, int j, int l, bool value);

  std::vector<std::uint8_t>& edges() noexcept { return edges_; }
  const std::vector<std::uint8_t>& edges() const noexcept { return edges_; }

  /// Fraction of present edges among all off-diagonal pairs.
  double density() const;

  Tensor3 to_tensor() const;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;

 private:
  int n_ = 0;
  int layers_ = 0;
  std::vector<std::uint8_t> edges_;
};

struct Membership {
  int n = 0;
  int k = 0;
  std::vector<int> labels;  ///< 0-based community of each node

  /// Contiguous balanced blocks: the first ceil(n / k) nodes in community 0...
  static Membership balanced(int n, int k);

  void validate(bool require_nonempty = false) const;
  Matrix matrix() const;  ///< n x k one-hot membership matrix
};

struct Connectivity {
  Tensor3 w;  ///< formation, K x K x L
  Tensor3 m;  ///< dissolution, K x K x L
  double c_min = 0.0;

  int communities() const { return w.dim(0); }
  int layers() const { return w.dim(2); }
  void validate() const;
};

/// Piecewise rules for time-varying connectivity.
struct ConstantPiece {
  Connectivity params;
};
/// (1 - s_t) from + s_t to with s_t = (t - origin) / span.
struct InterpolatedPiece {
  Connectivity from;
  Connectivity to;
  int origin = 0;
  int span = 1;
};
/// `even` when floor((t - origin) / period) is even, else `odd`.
struct AlternatingPiece {
  Connectivity even;
  Connectivity odd;
  int origin = 0;
  int period = 2;
};
using PieceRule = std::variant<ConstantPiece, InterpolatedPiece, AlternatingPiece>;

class ParamSchedule {
 public:
  ParamSchedule() = default;
  explicit ParamSchedule(Connectivity constant);

  /// Pieces must be appended with strictly increasing start times, the first at 1.
  void add_piece(int start_time, PieceRule rule);

  Connectivity at(int t) const;
  int communities() const;
  int layers() const;
  bool empty() const noexcept { return pieces_.empty(); }
  /// Start times of the pieces.
  std::vector<int> change_points() const;

 private:
  struct Piece {
    int start;
    PieceRule rule;
  };
  std::vector<Piece> pieces_;
};

/// Theta_{i,j,l} = W_{z(i), z(j), l} and the same for Delta.
struct TransitionTensors {
  Tensor3 theta;
  Tensor3 delta;
};
TransitionTensors expand(const Membership& z, const Connectivity& c);

/// Pi = Theta / (Theta + Delta), entrywise.
Tensor3 stationary_marginal(const Tensor3& theta, const Tensor3& delta);

/// Per-edge transition probabilities in the Snapshot edge layout.
struct EdgeParams {
  std::vector<double> theta;
  std::vector<double> delta;
};
EdgeParams edge_params(const Membership& z, const Connectivity& c);

enum class InitRule {
  StationaryMarginal,  ///< A^0 ~ Bernoulli(Theta^1 / (Theta^1 + Delta^1))
  Zero,                ///< A^0 = 0
};

/// Simulates A^0, ..., A^{t_max}; element t of the result is A^t. The draw for
/// every (edge, time) comes from a counter-based stream keyed by `seed`.
std::vector<Snapshot> simulate(const Membership& z, const ParamSchedule& schedule, int t_max,
                               std::uint64_t seed, InitRule init = InitRule::StationaryMarginal);

/// Edge-level simulator used by the block-model simulator and the parametric
/// bootstrap. `params_at(t, out)` fills the transition probabilities in force
/// for the transition into A^t.
using EdgeParamsFn = std::function<void(int t, EdgeParams& out)>;
std::vector<Snapshot> simulate_edges(int n, int layers, int t_max, std::uint64_t seed,
                                     const EdgeParamsFn& params_at, InitRule init);

enum class ScenarioId {
  Stat1, Stat2, Stat3, Stat4,
  Nonstat1, Nonstat2, Nonstat3, Nonstat4,
};

ScenarioId parse_scenario(std::string_view name);
std::string scenario_name(ScenarioId id);
bool is_stationary(ScenarioId id);

struct Scenario {
  ScenarioId id;
  Membership membership;
  ParamSchedule schedule;
  int horizon = 0;
};

/// Builds a simulation scenario; `n` and `horizon` of 0 keep the defaults
/// (n = 100, horizon 300 for stationary and 175 for non-stationary scenarios).
Scenario make_scenario(ScenarioId id, int n = 0, int horizon = 0);

/// The four non-stationary regimes (W^(i), M^(i)), i in 1..4, for `layers` layers.
Connectivity nonstationary_regime(int index, int layers = 2);

}  // namespace msbm

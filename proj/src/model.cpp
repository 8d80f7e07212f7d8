#include "msbm/model.hpp"

#include "msbm/error.hpp"
#include "msbm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace msbm {

// ---------------------------------------------------------------- Snapshot

Snapshot::Snapshot(int n, int layers) : n_(n), layers_(layers) {
  if (n < 1 || layers < 1) throw UsageError("snapshot needs n >= 1 and L >= 1");
  edges_.assign(pair_count(n) * static_cast<std::size_t>(layers), 0);
}

bool Snapshot::get(int i, int j, int l) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return edges_[static_cast<std::size_t>(l) * pairs() + pair_index(n_, i, j)] != 0;
}

void Snapshot::set(int i, int j, int l, bool value) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || l < 0 || l >= layers_) {
    throw UsageError("snapshot index out of range");
  }
  if (i == j) throw UsageError("snapshots have a zero diagonal");
  if (i > j) std::swap(i, j);
  edges_[static_cast<std::size_t>(l) * pairs() + pair_index(n_, i, j)] = value ? 1 : 0;
}

double Snapshot::density() const {
  if (edges_.empty()) return 0.0;
  std::size_t on = 0;
  for (auto e : edges_) on += e;
  return static_cast<double>(on) / static_cast<double>(edges_.size());
}

Tensor3 Snapshot::to_tensor() const {
  Tensor3 t(n_, n_, layers_);
  std::size_t e = 0;
  for (int l = 0; l < layers_; ++l)
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j, ++e) {
        const double v = edges_[e];
        t(i, j, l) = v;
        t(j, i, l) = v;
      }
  return t;
}

// -------------------------------------------------------------- Membership

Membership Membership::balanced(int n, int k) {
  if (n < 1 || k < 1 || k > n) throw UsageError("balanced membership needs 1 <= k <= n");
  Membership z{n, k, std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) z.labels[static_cast<std::size_t>(i)] = static_cast<int>(static_cast<long>(i) * k / n);
  return z;
}

void Membership::validate(bool require_nonempty) const {
  if (n < 1 || k < 1) throw UsageError("membership needs n >= 1 and k >= 1");
  if (labels.size() != static_cast<std::size_t>(n)) throw UsageError("membership label count differs from n");
  std::vector<int> seen(static_cast<std::size_t>(k), 0);
  for (int lab : labels) {
    if (lab < 0 || lab >= k) throw UsageError("membership label out of range");
    ++seen[static_cast<std::size_t>(lab)];
  }
  if (require_nonempty && std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw UsageError("membership has an empty community");
  }
}

Matrix Membership::matrix() const {
  Matrix z = Matrix::Zero(n, k);
  for (int i = 0; i < n; ++i) z(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  return z;
}

// ------------------------------------------------------------ Connectivity

void Connectivity::validate() const {
  if (w.dims() != m.dims()) throw UsageError("connectivity tensors W and M differ in shape");
  if (w.dim(0) != w.dim(1)) throw UsageError("connectivity tensors must be K x K x L");
  if (!(c_min > 0.0 && c_min < 0.5)) throw UsageError("c_min must lie in (0, 1/2)");
  const double lo = c_min - 1e-12;
  const double hi = 1.0 - c_min + 1e-12;
  for (const Tensor3* t : {&w, &m}) {
    for (int l = 0; l < t->dim(2); ++l)
      for (int a = 0; a < t->dim(0); ++a)
        for (int b = 0; b < t->dim(1); ++b) {
          const double v = (*t)(a, b, l);
          if (v < lo || v > hi) throw UsageError("connectivity entry outside [c_min, 1 - c_min]");
          if (std::abs(v - (*t)(b, a, l)) > 1e-12) throw UsageError("connectivity must be symmetric");
        }
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w.data()[i] + m.data()[i] > 1.0 + 1e-12) throw UsageError("W + M must not exceed 1");
  }
}

// ------------------------------------------------------------- Schedule

ParamSchedule::ParamSchedule(Connectivity constant) { add_piece(1, ConstantPiece{std::move(constant)}); }

void ParamSchedule::add_piece(int start_time, PieceRule rule) {
  if (pieces_.empty() && start_time != 1) throw UsageError("the first schedule piece must start at t = 1");
  if (!pieces_.empty() && start_time <= pieces_.back().start) {
    throw UsageError("schedule start times must be strictly increasing");
  }
  pieces_.push_back({start_time, std::move(rule)});
}

namespace {

Connectivity blend(const Connectivity& a, const Connectivity& b, double s) {
  Connectivity out = a;
  for (std::size_t i = 0; i < out.w.size(); ++i) {
    out.w.data()[i] = (1.0 - s) * a.w.data()[i] + s * b.w.data()[i];
    out.m.data()[i] = (1.0 - s) * a.m.data()[i] + s * b.m.data()[i];
  }
  out.c_min = std::min(a.c_min, b.c_min);
  return out;
}

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Connectivity ParamSchedule::at(int t) const {
  if (pieces_.empty()) throw UsageError("empty parameter schedule");
  if (t < 1) throw UsageError("schedule queried before t = 1");
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](int tt, const Piece& p) { return tt < p.start; });
  const Piece& piece = *std::prev(it);
  return std::visit(
      [t](const auto& rule) -> Connectivity {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, ConstantPiece>) {
          return rule.params;
        } else if constexpr (std::is_same_v<R, InterpolatedPiece>) {
          const double s = static_cast<double>(t - rule.origin) / static_cast<double>(rule.span);
          return blend(rule.from, rule.to, std::clamp(s, 0.0, 1.0));
        } else {
          const long phase = floor_div(t - rule.origin, rule.period);
          return (phase % 2 == 0) ? rule.even : rule.odd;
        }
      },
      piece.rule);
}

int ParamSchedule::communities() const { return at(1).communities(); }
int ParamSchedule::layers() const { return at(1).layers(); }

std::vector<int> ParamSchedule::change_points() const {
  std::vector<int> out;
  for (const auto& p : pieces_) out.push_back(p.start);
  return out;
}

// ------------------------------------------------------------- Expansion

TransitionTensors expand(const Membership& z, const Connectivity& c) {
  if (c.w.dim(0) != z.k || c.w.dim(1) != z.k || c.m.dims() != c.w.dims()) {
    throw UsageError("expand: connectivity is not K x K x L for the membership's K");
  }
  const int layers = c.w.dim(2);
  TransitionTensors out{Tensor3(z.n, z.n, layers), Tensor3(z.n, z.n, layers)};
  for (int l = 0; l < layers; ++l)
    for (int j = 0; j < z.n; ++j)
      for (int i = 0; i < z.n; ++i) {
        const int a = z.labels[static_cast<std::size_t>(i)];
        const int b = z.labels[static_cast<std::size_t>(j)];
        out.theta(i, j, l) = c.w(a, b, l);
        out.delta(i, j, l) = c.m(a, b, l);
      }
  return out;
}

Tensor3 stationary_marginal(const Tensor3& theta, const Tensor3& delta) {
  if (theta.dims() != delta.dims()) throw UsageError("stationary_marginal: dimension mismatch");
  Tensor3 pi(theta.dims());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double den = theta.data()[i] + delta.data()[i];
    if (!(den > 0.0)) throw UsageError("stationary_marginal: Theta + Delta must be positive");
    pi.data()[i] = theta.data()[i] / den;
  }
  return pi;
}

EdgeParams edge_params(const Membership& z, const Connectivity& c) {
  const int layers = c.w.dim(2);
  const std::size_t pairs = pair_count(z.n);
  EdgeParams out;
  out.theta.resize(pairs * static_cast<std::size_t>(layers));
  out.delta.resize(out.theta.size());
  std::size_t e = 0;
  for (int l = 0; l < layers; ++l)
    for (int i = 0; i < z.n; ++i)
      for (int j = i + 1; j < z.n; ++j, ++e) {
        const int a = z.labels[static_cast<std::size_t>(i)];
        const int b = z.labels[static_cast<std::size_t>(j)];
        out.theta[e] = c.w(a, b, l);
        out.delta[e] = c.m(a, b, l);
      }
  return out;
}

// ------------------------------------------------------------- Simulation

std::vector<Snapshot> simulate_edges(int n, int layers, int t_max, std::uint64_t seed,
                                     const EdgeParamsFn& params_at, InitRule init) {
  if (t_max < 1) throw UsageError("simulate: t_max must be >= 1");
  const CounterRng rng(seed);
  std::vector<Snapshot> out;
  out.reserve(static_cast<std::size_t>(t_max) + 1);
  out.emplace_back(n, layers);

  EdgeParams params;
  params_at(1, params);
  const std::size_t edges = out.front().edges().size();
  if (params.theta.size() != edges || params.delta.size() != edges) {
    throw UsageError("simulate: edge parameter vector has the wrong length");
  }
  if (init == InitRule::StationaryMarginal) {
    auto& a0 = out.front().edges();
    for (std::size_t e = 0; e < edges; ++e) {
      const double pi = params.theta[e] / (params.theta[e] + params.delta[e]);
      a0[e] = rng.uniform(0, e) < pi ? 1 : 0;
    }
  }

  for (int t = 1; t <= t_max; ++t) {
    if (t > 1) params_at(t, params);
    Snapshot next = out.back();
    auto& a = next.edges();
    for (std::size_t e = 0; e < edges; ++e) {
      // E = 1 with prob theta, E = -1 with prob delta, E = 0 otherwise.
      const double u = rng.uniform(static_cast<std::uint64_t>(t), e);
      if (u < params.theta[e]) {
        a[e] = 1;
      } else if (u < params.theta[e] + params.delta[e]) {
        a[e] = 0;
      }
    }
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<Snapshot> simulate(const Membership& z, const ParamSchedule& schedule, int t_max,
                               std::uint64_t seed, InitRule init) {
  z.validate();
  if (schedule.empty()) throw UsageError("simulate: schedule does not cover [1, t_max]");
  if (schedule.communities() != z.k) throw UsageError("simulate: schedule K differs from membership K");
  return simulate_edges(
      z.n, schedule.layers(), t_max, seed,
      [&](int t, EdgeParams& out) { out = edge_params(z, schedule.at(t)); }, init);
}

// -------------------------------------------------------------- Scenarios

namespace {

Connectivity make_connectivity(int layers, double c_min, auto&& fill) {
  Connectivity c{Tensor3(2, 2, layers), Tensor3(2, 2, layers), c_min};
  for (int l = 0; l < layers; ++l) {
    fill(l, c);
    c.w(1, 0, l) = c.w(0, 1, l);
    c.m(1, 0, l) = c.m(0, 1, l);
  }
  c.validate();
  return c;
}

void set_block(Connectivity& c, int a, int b, int l, double w, double m) {
  c.w(a, b, l) = w;
  c.m(a, b, l) = m;
}

Connectivity stationary_params(ScenarioId id) {
  constexpr double kMin = 0.01;
  switch (id) {
    case ScenarioId::Stat1:
      return make_connectivity(2, kMin, [](int l, Connectivity& c) {
        set_block(c, 0, 0, l, 0.10, 0.20);
        set_block(c, 1, 1, l, 0.08, 0.20);
        set_block(c, 0, 1, l, 0.05, 0.20);
      });
    case ScenarioId::Stat2:
      return make_connectivity(2, kMin, [](int l, Connectivity& c) {
        set_block(c, 0, 0, l, 0.4, 0.4);
        set_block(c, 1, 1, l, 0.2, 0.2);
        set_block(c, 0, 1, l, 0.3, 0.3);
      });
    case ScenarioId::Stat3:
      return make_connectivity(2, kMin, [](int l, Connectivity& c) {
        if (l == 0) {
          set_block(c, 0, 0, l, 0.4, 0.4);
          set_block(c, 1, 1, l, 0.4, 0.4);
          set_block(c, 0, 1, l, 0.05, 0.45);
        } else {
          set_block(c, 0, 0, l, 0.05, 0.45);
          set_block(c, 1, 1, l, 0.05, 0.45);
          set_block(c, 0, 1, l, 0.4, 0.4);
        }
      });
    default:
      return make_connectivity(2, kMin, [](int l, Connectivity& c) {
        if (l == 0) {
          set_block(c, 0, 0, l, 0.015, 0.09);
          set_block(c, 1, 1, l, 0.015, 0.09);
          set_block(c, 0, 1, l, 0.010, 0.10);
        } else {
          set_block(c, 0, 0, l, 0.15, 0.35);
          set_block(c, 1, 1, l, 0.15, 0.35);
          set_block(c, 0, 1, l, 0.15, 0.35);
        }
      });
  }
}

}  // namespace

Connectivity nonstationary_regime(int index, int layers) {
  static constexpr double kDiag[4][2] = {{0.10, 0.20}, {0.15, 0.25}, {0.35, 0.45}, {0.50, 0.50}};
  if (index < 1 || index > 4) throw UsageError("non-stationary regime index must be 1..4");
  const auto& d = kDiag[index - 1];
  return make_connectivity(layers, 0.05, [&](int l, Connectivity& c) {
    set_block(c, 0, 0, l, d[0], d[1]);
    set_block(c, 1, 1, l, d[0], d[1]);
    set_block(c, 0, 1, l, 0.05, 0.05);
  });
}

ScenarioId parse_scenario(std::string_view name) {
  static constexpr std::pair<std::string_view, ScenarioId> kNames[] = {
      {"stat-1", ScenarioId::Stat1},       {"stat-2", ScenarioId::Stat2},
      {"stat-3", ScenarioId::Stat3},       {"stat-4", ScenarioId::Stat4},
      {"nonstat-1", ScenarioId::Nonstat1}, {"nonstat-2", ScenarioId::Nonstat2},
      {"nonstat-3", ScenarioId::Nonstat3}, {"nonstat-4", ScenarioId::Nonstat4},
  };
  for (const auto& [n, id] : kNames)
    if (n == name) return id;
  throw UsageError("unknown scenario '" + std::string(name) + "'");
}

std::string scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::Stat1: return "stat-1";
    case ScenarioId::Stat2: return "stat-2";
    case ScenarioId::Stat3: return "stat-3";
    case ScenarioId::Stat4: return "stat-4";
    case ScenarioId::Nonstat1: return "nonstat-1";
    case ScenarioId::Nonstat2: return "nonstat-2";
    case ScenarioId::Nonstat3: return "nonstat-3";
    case ScenarioId::Nonstat4: return "nonstat-4";
  }
  return "unknown";
}

bool is_stationary(ScenarioId id) {
  return id == ScenarioId::Stat1 || id == ScenarioId::Stat2 || id == ScenarioId::Stat3 || id == ScenarioId::Stat4;
}

Scenario make_scenario(ScenarioId id, int n, int horizon) {
  if (n == 0) n = 100;
  if (n < 2) throw UsageError("scenarios need n >= 2");
  Scenario sc{id, Membership::balanced(n, 2), {}, 0};
  if (is_stationary(id)) {
    sc.horizon = horizon > 0 ? horizon : 300;
    sc.schedule = ParamSchedule(stationary_params(id));
    return sc;
  }
  sc.horizon = horizon > 0 ? horizon : 175;
  const Connectivity r1 = nonstationary_regime(1);
  const Connectivity r2 = nonstationary_regime(2);
  const Connectivity r3 = nonstationary_regime(3);
  const Connectivity r4 = nonstationary_regime(4);
  sc.schedule.add_piece(1, ConstantPiece{r1});
  switch (id) {
    case ScenarioId::Nonstat1: sc.schedule.add_piece(51, ConstantPiece{r2}); break;
    case ScenarioId::Nonstat2: sc.schedule.add_piece(51, ConstantPiece{r3}); break;
    case ScenarioId::Nonstat3: sc.schedule.add_piece(51, InterpolatedPiece{r1, r4, 51, 49}); break;
    default: sc.schedule.add_piece(51, AlternatingPiece{r2, r3, 51, 2}); break;
  }
  sc.schedule.add_piece(101, ConstantPiece{r4});
  return sc;
}

}  // namespace msbm

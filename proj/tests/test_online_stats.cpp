#include "doctest.h"
#include "oracles.hpp"

#include "msbm/error.hpp"
#include "msbm/online_stats.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace msbm;

namespace {

Snapshot edge_state(bool on) {
  Snapshot s(2, 1);
  s.set(0, 1, 0, on);
  return s;
}

}  // namespace

TEST_CASE("update counts transitions") {
  SuffStats s = SuffStats::zero(2, 1);
  s = update(s, edge_state(false), edge_state(true));
  s = update(s, edge_state(true), edge_state(false));
  CHECK(s.t == 2);
  CHECK(s.n01[0] == 1);
  CHECK(s.n10[0] == 1);
  CHECK(s.nact[0] == 1);

  const SuffStats before = s;
  update_in_place(s, edge_state(false), edge_state(false));
  CHECK(s.n01 == before.n01);
  CHECK(s.n10 == before.n10);

  Snapshot full(4, 2);
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) full.set(i, j, l, true);
  SuffStats f = SuffStats::zero(4, 2);
  update_in_place(f, full, full);
  for (auto v : f.nact) CHECK(v == 1);
  CHECK_THROWS_AS(update(f, full, Snapshot(3, 2)), UsageError);
}

TEST_CASE("dynamic grid") {
  CHECK(dynamic_grid(8) == std::vector<int>{1, 2, 3, 5});
  CHECK(dynamic_grid(1) == std::vector<int>{1});
  CHECK(dynamic_grid(2) == std::vector<int>{1});
  CHECK_THROWS_AS(dynamic_grid(0), UsageError);
  for (int t = 1; t <= 10000; ++t) {
    const auto g = dynamic_grid(t);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(g.front() == 1);
    CHECK(g.back() <= std::max(1, t));
    const auto next = dynamic_grid(t + 1);
    std::set<int> allowed{t};
    for (int k : g) allowed.insert(t - k);
    for (int k : next)
      if (!allowed.count(t + 1 - k)) FAIL("nesting fails at t=" << t << " k=" << k);
  }
}

TEST_CASE("grid store keeps checkpoints at t - k") {
  GridStore store(2, 1);
  Snapshot prev = edge_state(false);
  for (int t = 1; t <= 8; ++t) {
    Snapshot cur = edge_state(t % 3 == 0);
    store.advance(prev, cur);
    prev = cur;
  }
  CHECK(store.time() == 8);
  CHECK(store.grid() == std::vector<int>{1, 2, 3, 5});
  std::set<int> kept;
  for (const auto& [s, st] : store.checkpoints()) kept.insert(s);
  CHECK(kept == std::set<int>{3, 5, 6, 7});
  CHECK(store.at(0).t == 0);
  CHECK_THROWS_AS(store.at(4), UsageError);
  CHECK_THROWS_AS(windowed_mle(store, 4), UsageError);
}

TEST_CASE("windowed MLE example (0,1,1,0,1), k = 4") {
  WindowRing ring(2, 1, 4);
  const bool hist[5] = {false, true, true, false, true};
  for (int t = 1; t < 5; ++t) ring.advance(edge_state(hist[t - 1]), edge_state(hist[t]));
  const EdgeMle m = mle_between(ring.current(), ring.at(0));
  CHECK(m.window == 4);
  CHECK(m.theta[0] == doctest::Approx(1.0));
  CHECK(m.delta[0] == doctest::Approx(0.5));
  CHECK_FALSE(m.theta_degenerate[0]);

  // A permanently absent edge has no 1 -> x transitions.
  WindowRing empty(2, 1, 2);
  empty.advance(edge_state(false), edge_state(false));
  const EdgeMle d = mle_between(empty.current(), empty.at(0));
  CHECK(d.delta_degenerate[0]);
  CHECK(d.delta[0] == kDegenerateEstimate);
  CHECK(d.theta[0] == 0.0);
}

TEST_CASE("windowed MLE equals a raw recount for every grid window") {
  std::mt19937_64 gen(123);
  std::uniform_int_distribution<int> nd(2, 6), ld(1, 2), td(1, 64);
  std::uniform_real_distribution<double> fd(0.05, 0.6);
  for (int inst = 0; inst < 60; ++inst) {
    const int n = nd(gen), layers = ld(gen), t_max = td(gen);
    const auto snaps = oracle::random_snapshots(n, layers, t_max, fd(gen), gen);
    GridStore store(n, layers);
    for (int t = 1; t <= t_max; ++t) {
      store.advance(snaps[t - 1], snaps[t]);
      for (int k : store.grid()) {
        const EdgeMle m = windowed_mle(store, k);
        for (int l = 0; l < layers; ++l)
          for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
              const auto ref = oracle::recount(snaps, t, k, i, j, l);
              const std::size_t e = l * pair_count(n) + pair_index(n, i, j);
              REQUIRE(std::abs(m.theta[e] - ref.theta) <= 1e-12);
              REQUIRE(std::abs(m.delta[e] - ref.delta) <= 1e-12);
              REQUIRE(bool(m.theta_degenerate[e]) == ref.theta_degenerate);
            }
      }
    }
  }
}

TEST_CASE("tensors built from edge vectors") {
  const std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const Tensor3 t = edge_vector_to_tensor(v, 3, 2, -1.0);
  CHECK(t(0, 1, 0) == 0.1);
  CHECK(t(2, 1, 1) == 0.6);
  CHECK(t(1, 1, 1) == -1.0);
  const auto mask = missing_mask({0, 1, 0, 0, 0, 0}, 3, 2);
  REQUIRE(mask.size() == 18);
  CHECK(mask[t.index(0, 2, 0)] == 1);
  CHECK(mask[t.index(2, 0, 0)] == 1);
  CHECK(mask[t.index(1, 1, 1)] == 1);
  CHECK(mask[t.index(0, 1, 1)] == 0);
  CHECK_THROWS_AS(edge_vector_to_tensor(v, 4, 2), UsageError);
}

#include "msbm/community.hpp"

#include "msbm/error.hpp"
#include "msbm/rng.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

namespace msbm {

namespace {

double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

int pick_index(std::mt19937_64& gen, int count) {
  return std::min(count - 1, static_cast<int>(unit(gen) * count));
}

struct Run {
  std::vector<int> labels;
  Matrix centers;
  double inertia = std::numeric_limits<double>::infinity();
};

Matrix seed_plus_plus(const Matrix& x, int k, std::mt19937_64& gen) {
  const int n = static_cast<int>(x.rows());
  Matrix centers(k, x.cols());
  centers.row(0) = x.row(pick_index(gen, n));
  Vector d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    int chosen = 0;
    if (total > 0.0) {
      const double target = unit(gen) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick_index(gen, n);
    }
    centers.row(c) = x.row(chosen);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

double assign(const Matrix& x, const Matrix& centers, std::vector<int>& labels, Vector& dist) {
  const int n = static_cast<int>(x.rows());
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int c = 0; c < centers.rows(); ++c) {
      const double d = (x.row(i) - centers.row(c)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist(i) = bd;
    inertia += bd;
  }
  return inertia;
}

Run lloyd(const Matrix& x, int k, std::mt19937_64& gen, const KMeansOptions& opts) {
  const int n = static_cast<int>(x.rows());
  Run run;
  run.centers = seed_plus_plus(x, k, gen);
  run.labels.assign(static_cast<std::size_t>(n), 0);
  Vector dist(n);
  for (int it = 0; it < opts.max_iters; ++it) {
    assign(x, run.centers, run.labels, dist);
    Matrix next = Matrix::Zero(k, x.cols());
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      next.row(run.labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++sizes[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= sizes[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: move the point farthest from its center here.
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      next.row(c) = x.row(far);
      dist(far) = 0.0;
    }
    const double moved = (next - run.centers).rowwise().norm().maxCoeff();
    run.centers = std::move(next);
    if (moved <= opts.tol) break;
  }
  run.inertia = assign(x, run.centers, run.labels, dist);
  return run;
}

}  // namespace

ClusterResult kmeans_membership(const Matrix& rows, int k, std::uint64_t seed, const KMeansOptions& opts) {
  if (k < 1) throw UsageError("kmeans: k must be >= 1");
  if (rows.rows() < k) throw UsageError("kmeans: need at least k rows");
  if (!rows.allFinite()) throw UsageError("kmeans: rows must be finite");
  Run best;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    std::mt19937_64 gen(derive_seed(seed, static_cast<std::uint64_t>(r)));
    Run run = lloyd(rows, k, gen, opts);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return ClusterResult{std::move(best.labels), std::move(best.centers), std::max(0.0, best.inertia)};
}

Membership canonical_membership(const std::vector<int>& labels, int k) {
  std::map<int, int> renumber;
  Membership z{static_cast<int>(labels.size()), k, {}};
  z.labels.reserve(labels.size());
  for (int lab : labels) {
    auto [it, inserted] = renumber.try_emplace(lab, static_cast<int>(renumber.size()));
    z.labels.push_back(it->second);
  }
  if (static_cast<int>(renumber.size()) > k) throw UsageError("more distinct labels than communities");
  return z;
}

Membership extract_membership(const ClusterResult& cluster, int k) { return canonical_membership(cluster.labels, k); }

std::vector<int> min_cost_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw UsageError("assignment needs a square cost matrix");
  // Potentials-based Hungarian method, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

double hamming_loss(const Membership& z_hat, const Membership& z) {
  if (z_hat.n != z.n || z_hat.labels.size() != z.labels.size()) throw UsageError("hamming_loss: sizes differ");
  if (z_hat.k != z.k) throw UsageError("hamming_loss: community counts differ");
  z_hat.validate();
  z.validate();
  const int k = z.k;
  Matrix agree = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < z.labels.size(); ++i) agree(z_hat.labels[i], z.labels[i]) += 1.0;

  double best = 0.0;
  if (k <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double s = 0.0;
      for (int a = 0; a < k; ++a) s += agree(a, perm[static_cast<std::size_t>(a)]);
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const auto match = min_cost_assignment(-agree);
    for (int a = 0; a < k; ++a) best += agree(a, match[static_cast<std::size_t>(a)]);
  }
  return (static_cast<double>(z.n) - best) / static_cast<double>(z.n);
}

double adjusted_rand_index(const std::vector<int>& u, const std::vector<int>& v) {
  if (u.size() != v.size()) throw UsageError("adjusted_rand_index: partitions differ in size");
  if (u.size() < 2) throw UsageError("adjusted_rand_index: need n >= 2");
  std::map<std::pair<int, int>, long long> cells;
  std::map<int, long long> rows, cols;
  for (std::size_t i = 0; i < u.size(); ++i) {
    ++cells[{u[i], v[i]}];
    ++rows[u[i]];
    ++cols[v[i]];
  }
  auto choose2 = [](long long m) { return static_cast<double>(m) * static_cast<double>(m - 1) / 2.0; };
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& [key, cnt] : cells) a += choose2(cnt);
  for (const auto& [key, cnt] : rows) b += choose2(cnt);
  for (const auto& [key, cnt] : cols) c += choose2(cnt);
  const double n2 = choose2(static_cast<long long>(u.size()));
  const double expected = b * c / n2;
  const double denom = (b + c) / 2.0 - expected;
  if (denom == 0.0) return 1.0;
  return (a - expected) / denom;
}

double adjusted_rand_index(const Membership& u, const Membership& v) {
  return adjusted_rand_index(u.labels, v.labels);
}

}  // namespace msbm

#pragma once

#include "msbm/model.hpp"
#include "msbm/tensor.hpp"

#include <cstdint>

namespace msbm {

struct ClusterResult {
  std::vector<int> labels;  ///< 0-based cluster of each row
  Matrix centers;           ///< k x d
  double inertia = 0.0;     ///< within-cluster sum of squares
};

struct KMeansOptions {
  int restarts = 20;
  int max_iters = 100;
  double tol = 1e-9;
};

/// Lloyd's algorithm with k-means++ seeding; best restart by inertia.
ClusterResult kmeans_membership(const Matrix& rows, int k, std::uint64_t seed,
                                const KMeansOptions& opts = {});

/// Renumbers labels by first occurrence.
Membership extract_membership(const ClusterResult& cluster, int k);
Membership canonical_membership(const std::vector<int>& labels, int k);

/// (1/n) min over label permutations of the mismatch count.
double hamming_loss(const Membership& z_hat, const Membership& z);

/// Minimum-cost assignment for a square cost matrix (Hungarian method).
/// Returns assignment[row] = column.
std::vector<int> min_cost_assignment(const Matrix& cost);

double adjusted_rand_index(const Membership& u, const Membership& v);
double adjusted_rand_index(const std::vector<int>& u, const std::vector<int>& v);

}  // namespace msbm

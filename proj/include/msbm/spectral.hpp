#pragma once

#include "msbm/linalg.hpp"
#include "msbm/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace msbm {

struct RefineConfig {
  int k_rank = 2;  ///< K, node mode
  int r1 = 2;      ///< layer rank of Theta
  int r2 = 2;      ///< layer rank of Delta
  int hpca_max_iters = 50;
  double hpca_tol = 1e-9;
  /// How the refinement treats entries without data (the diagonal and
  /// degenerate MLEs): Zero reads them as 0, the value of an empty count
  /// ratio; Impute fills them with the layer mean and re-imputes them from
  /// the low-rank projection `impute_passes` times.
  enum class Unobserved { Zero, Impute };
  Unobserved unobserved = Unobserved::Zero;
  int impute_passes = 2;

  void validate(int n, int layers) const;
};

struct HpcaReport {
  Matrix u;             ///< n x r, orthonormal
  int iterations = 0;   ///< diagonal updates performed
  bool converged = false;
};

/// Heteroskedastic PCA: zero the diagonal, then alternate a rank-r
/// approximation with copying its diagonal back until the diagonal settles.
/// `warm` may carry an eigen-block from a previous, similar call.
///
/// The rank-r approximation takes the r largest singular values by default.
/// Callers that pass a Gram matrix use EigenOrder::Algebraic instead: after
/// the diagonal is deleted, a negative eigenvalue of large magnitude is an
/// artifact of the deletion and never part of the positive semidefinite signal.
HpcaReport hpca(const Matrix& sigma, int r, int max_iters = 50, double tol = 1e-9,
                Matrix* warm = nullptr, EigenOrder order = EigenOrder::Magnitude);

/// True when the geometric refresh fires at time t: t >= 2^power.
bool refresh_due(int t, int power);

struct SubspaceSet {
  Matrix u_z;  ///< n x K
  Matrix u_w;  ///< L x r1
  Matrix u_m;  ///< L x r2
  int refreshed_at = 0;
};

/// Warm-start blocks carried between successive subspace estimates.
struct SubspaceWarmStart {
  std::optional<Matrix> z, w, m;
};

/// Node subspace from the mode-1 Gram of theta + delta, layer subspaces from
/// the mode-3 Grams of theta and delta, each via hpca.
SubspaceSet estimate_subspaces(const Tensor3& theta_hat, const Tensor3& delta_hat,
                               const RefineConfig& cfg, SubspaceWarmStart* warm = nullptr);

/// Node subspace of a single tensor (used for the marginal baseline).
Matrix estimate_node_subspace(const Tensor3& t, const RefineConfig& cfg, std::optional<Matrix>* warm = nullptr);

/// t x1 UU^T x2 UU^T x3 VV^T.
Tensor3 project(const Tensor3& t, const Matrix& u_node, const Matrix& u_layer);

struct RefinedPair {
  Tensor3 theta;
  Tensor3 delta;
};
RefinedPair project_lowrank(const Tensor3& theta_hat, const Tensor3& delta_hat, const SubspaceSet& s);

/// Replaces entries flagged in `missing` (1 = missing) by the mean of the
/// observed entries of their layer.
void fill_missing_with_layer_mean(Tensor3& t, const std::vector<std::uint8_t>& missing);

/// Projects, then repeatedly overwrites the missing entries with the projected
/// values and projects again (`passes` rounds).
Tensor3 impute_and_project(Tensor3 t, const std::vector<std::uint8_t>& missing, const Matrix& u_node,
                           const Matrix& u_layer, int passes);

}  // namespace msbm

#pragma once

#include "msbm/tensor.hpp"

namespace msbm {

struct SvdResult {
  Matrix u;  ///< left singular vectors (columns), orthonormal
  Vector s;  ///< non-increasing, non-negative
  Matrix v;  ///< right singular vectors (columns), orthonormal
};

/// Thin SVD. Each left singular vector is sign-normalized so that its
/// largest-magnitude entry is positive (the matching right vector flips too).
SvdResult svd(const Matrix& a);

/// Flip column signs so the largest-magnitude entry of each column is positive.
void normalize_column_signs(Matrix& u);

/// True when ||u^T u - I||_max <= tol.
bool has_orthonormal_columns(const Matrix& u, double tol = 1e-8);

/// min over orthogonal O of ||u1 - u2 O||_2 for orthonormal bases of equal
/// shape. Equals sqrt(2 - 2 cos(theta_max)) with theta_max the largest
/// principal angle.
double sin_theta_distance(const Matrix& u1, const Matrix& u2);

/// Orthogonal projector u u^T.
Matrix projector(const Matrix& u);

/// Ranking of eigenpairs: by |eigenvalue|, i.e. the leading singular triplets
/// of a symmetric matrix, or by signed eigenvalue.
enum class EigenOrder { Magnitude, Algebraic };

struct SymmetricEigenpairs {
  Vector values;   ///< signed eigenvalues in the requested order
  Matrix vectors;  ///< n x r, orthonormal
  int sweeps = 0;  ///< subspace-iteration sweeps used (0 for a dense solve)
};

/// Computes the top-r eigenpairs of `s` in the order `how`.
///
/// With a warm-start block (n x b, b >= r) the routine runs block subspace
/// iteration with Rayleigh-Ritz extraction from that block and falls back to
/// a dense symmetric eigensolver if the residual does not reach `residual_tol`
/// (relative to the leading eigenvalue) within `max_sweeps`. Without one it
/// uses the dense solver. On return `warm` holds the refined block so the
/// caller can chain solves on slowly varying matrices.
SymmetricEigenpairs top_eigenpairs(const Matrix& s, int r, Matrix* warm = nullptr,
                                   double residual_tol = 1e-11, int max_sweeps = 40,
                                   EigenOrder how = EigenOrder::Magnitude);

}  // namespace msbm

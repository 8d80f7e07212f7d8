#include "msbm/linalg.hpp"

#include "msbm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace msbm {

void normalize_column_signs(Matrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      if (std::abs(u(r, c)) > best + 1e-14) {
        best = std::abs(u(r, c));
        arg = r;
      }
    }
    if (u.rows() > 0 && u(arg, c) < 0.0) u.col(c) *= -1.0;
  }
}

SvdResult svd(const Matrix& a) {
  if (!a.allFinite()) throw UsageError("svd: input has non-finite entries");
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  for (Eigen::Index c = 0; c < out.u.cols(); ++c) {
    Eigen::Index arg = 0;
    out.u.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.u(arg, c) < 0.0) {
      out.u.col(c) *= -1.0;
      out.v.col(c) *= -1.0;
    }
  }
  return out;
}

bool has_orthonormal_columns(const Matrix& u, double tol) {
  const Matrix g = u.transpose() * u;
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

double sin_theta_distance(const Matrix& u1, const Matrix& u2) {
  if (u1.rows() != u2.rows() || u1.cols() != u2.cols()) {
    throw UsageError("sin_theta_distance: bases must have the same shape");
  }
  if (u1.cols() == 0) return 0.0;
  if (!has_orthonormal_columns(u1) || !has_orthonormal_columns(u2)) {
    throw UsageError("sin_theta_distance: inputs must have orthonormal columns");
  }
  // Orthogonal Procrustes: the optimal rotation is the polar factor of u2^T u1.
  Eigen::JacobiSVD<Matrix> dec(u2.transpose() * u1, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix rotation = dec.matrixU() * dec.matrixV().transpose();
  const Matrix diff = u1 - u2 * rotation;
  Eigen::JacobiSVD<Matrix> norm(diff);
  return norm.singularValues()(0);
}

Matrix projector(const Matrix& u) { return u * u.transpose(); }

namespace {

/// Order of eigenvalues by decreasing magnitude (ties prefer the positive
/// one) or by decreasing signed value.
std::vector<Eigen::Index> eigen_order(const Vector& values, EigenOrder how) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (how == EigenOrder::Magnitude) {
      const double ma = std::abs(values(a));
      const double mb = std::abs(values(b));
      if (ma != mb) return ma > mb;
    }
    return values(a) > values(b);
  });
  return idx;
}

int block_size(Eigen::Index n, int r) {
  return static_cast<int>(std::min<Eigen::Index>(n, std::max(2 * r, r + 4)));
}

SymmetricEigenpairs dense_eigenpairs(const Matrix& s, int r, Matrix* warm, EigenOrder how) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const auto order = eigen_order(es.eigenvalues(), how);
  SymmetricEigenpairs out;
  out.values.resize(r);
  out.vectors.resize(s.rows(), r);
  for (int c = 0; c < r; ++c) {
    out.values(c) = es.eigenvalues()(order[static_cast<std::size_t>(c)]);
    out.vectors.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
  }
  if (warm != nullptr) {
    const int b = block_size(s.rows(), r);
    warm->resize(s.rows(), b);
    for (int c = 0; c < b; ++c) warm->col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
  }
  return out;
}

Matrix orthonormal_basis(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

}  // namespace

SymmetricEigenpairs top_eigenpairs(const Matrix& s, int r, Matrix* warm, double residual_tol,
                                   int max_sweeps, EigenOrder how) {
  const Eigen::Index n = s.rows();
  if (s.cols() != n) throw UsageError("top_eigenpairs: matrix must be square");
  if (r < 1 || r > n) throw UsageError("top_eigenpairs: rank must lie in [1, n]");
  if (!s.allFinite()) throw UsageError("top_eigenpairs: input has non-finite entries");

  const int b = block_size(n, r);
  const bool iterate = warm != nullptr && warm->rows() == n && warm->cols() == b && b < n && n > 16;
  if (!iterate) {
    auto out = dense_eigenpairs(s, r, warm, how);
    normalize_column_signs(out.vectors);
    return out;
  }

  Matrix q = orthonormal_basis(*warm);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    const Matrix sq = s * q;
    Matrix h = q.transpose() * sq;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const auto order = eigen_order(es.eigenvalues(), how);
    Matrix e(b, b);
    Vector theta(b);
    for (int c = 0; c < b; ++c) {
      e.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
      theta(c) = es.eigenvalues()(order[static_cast<std::size_t>(c)]);
    }
    const Matrix v = q * e;
    const Matrix sv = sq * e;
    const double scale = std::max(std::abs(theta(0)), std::numeric_limits<double>::min());
    bool converged = true;
    for (int c = 0; c < r && converged; ++c) {
      converged = (sv.col(c) - theta(c) * v.col(c)).norm() <= residual_tol * scale;
    }
    if (converged || theta(0) == 0.0) {
      SymmetricEigenpairs out;
      out.values = theta.head(r);
      out.vectors = v.leftCols(r);
      out.sweeps = sweep;
      *warm = v;
      normalize_column_signs(out.vectors);
      return out;
    }
    q = orthonormal_basis(sv);
  }
  auto out = dense_eigenpairs(s, r, warm, how);
  out.sweeps = max_sweeps;
  normalize_column_signs(out.vectors);
  return out;
}

}  // namespace msbm

#include "msbm/spectral.hpp"

#include "msbm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace msbm {

void RefineConfig::validate(int n, int layers) const {
  if (k_rank < 1 || k_rank > n) throw UsageError("node rank K must lie in [1, n]");
  if (r1 < 1 || r1 > layers) throw UsageError("layer rank r1 must lie in [1, L]");
  if (r2 < 1 || r2 > layers) throw UsageError("layer rank r2 must lie in [1, L]");
  if (hpca_max_iters < 1) throw UsageError("hpca_max_iters must be >= 1");
  if (impute_passes < 0) throw UsageError("impute_passes must be >= 0");
}

HpcaReport hpca(const Matrix& sigma, int r, int max_iters, double tol, Matrix* warm, EigenOrder order) {
  const Eigen::Index n = sigma.rows();
  if (sigma.cols() != n) throw UsageError("hpca: input must be square");
  if (r < 1 || r > n) throw UsageError("hpca: rank " + std::to_string(r) + " outside [1, n]");
  if (!sigma.allFinite()) throw UsageError("hpca: input has non-finite entries");
  const double scale = 1.0 + sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw UsageError("hpca: input must be symmetric");
  }

  Matrix local_block;
  Matrix* block = warm != nullptr ? warm : &local_block;
  Matrix current = sigma;
  current.diagonal().setZero();

  HpcaReport report;
  for (int it = 0; it < max_iters; ++it) {
    const SymmetricEigenpairs ep = top_eigenpairs(current, r, block, 1e-11, 40, order);
    // diag of sum_c lambda_c v_c v_c^T
    const Vector diag = ep.vectors.array().square().matrix() * ep.values;
    const double change = (diag - current.diagonal()).cwiseAbs().maxCoeff();
    current.diagonal() = diag;
    ++report.iterations;
    if (change <= tol) {
      report.converged = true;
      break;
    }
  }
  report.u = top_eigenpairs(current, r, block, 1e-11, 40, order).vectors;
  return report;
}

bool refresh_due(int t, int power) {
  if (power < 0) return true;
  if (power >= 62) return false;
  return static_cast<long long>(t) >= (1LL << power);
}

namespace {

void check_pair(const Tensor3& theta, const Tensor3& delta) {
  if (theta.dims() != delta.dims()) throw UsageError("theta and delta estimates differ in shape");
  if (theta.dim(0) != theta.dim(1)) throw UsageError("estimates must be n x n x L");
}

/// M_1(t) M_1(t)^T = sum_l X_l X_l^T.
Matrix node_gram(const Tensor3& t) {
  Matrix g = Matrix::Zero(t.dim(0), t.dim(0));
  for (int l = 0; l < t.dim(2); ++l) g.noalias() += t.slice(l) * t.slice(l).transpose();
  return g;
}

/// M_3(t) M_3(t)^T, entries <X_l, X_m>.
Matrix layer_gram(const Tensor3& t) {
  const Eigen::Index face = static_cast<Eigen::Index>(t.dim(0)) * t.dim(1);
  Eigen::Map<const Matrix> unfolded(t.data().data(), face, t.dim(2));
  return unfolded.transpose() * unfolded;
}

Matrix run_hpca(const Matrix& gram, int r, const RefineConfig& cfg, std::optional<Matrix>* warm) {
  Matrix* block = nullptr;
  if (warm != nullptr) {
    if (!warm->has_value()) warm->emplace();
    block = &warm->value();
  }
  return hpca(gram, r, cfg.hpca_max_iters, cfg.hpca_tol, block, EigenOrder::Algebraic).u;
}

}  // namespace

SubspaceSet estimate_subspaces(const Tensor3& theta_hat, const Tensor3& delta_hat, const RefineConfig& cfg,
                               SubspaceWarmStart* warm) {
  check_pair(theta_hat, delta_hat);
  cfg.validate(theta_hat.dim(0), theta_hat.dim(2));
  SubspaceSet s;
  s.u_z = run_hpca(node_gram(theta_hat + delta_hat), cfg.k_rank, cfg, warm ? &warm->z : nullptr);
  s.u_w = run_hpca(layer_gram(theta_hat), cfg.r1, cfg, warm ? &warm->w : nullptr);
  s.u_m = run_hpca(layer_gram(delta_hat), cfg.r2, cfg, warm ? &warm->m : nullptr);
  return s;
}

Matrix estimate_node_subspace(const Tensor3& t, const RefineConfig& cfg, std::optional<Matrix>* warm) {
  if (cfg.k_rank < 1 || cfg.k_rank > t.dim(0)) throw UsageError("node rank K must lie in [1, n]");
  return run_hpca(node_gram(t), cfg.k_rank, cfg, warm);
}

Tensor3 project(const Tensor3& t, const Matrix& u_node, const Matrix& u_layer) {
  const int n = t.dim(0);
  if (t.dim(1) != n || u_node.rows() != n || u_layer.rows() != t.dim(2)) {
    throw UsageError("project: subspace dimensions do not match the tensor");
  }
  // Modes 1 and 2 slice by slice: U (U^T X_l U) U^T.
  Tensor3 out(t.dims());
  for (int l = 0; l < t.dim(2); ++l) {
    const Matrix core = u_node.transpose() * t.slice(l) * u_node;
    out.slice(l).noalias() = u_node * core * u_node.transpose();
  }
  return mode_product(out, projector(u_layer), 3);
}

RefinedPair project_lowrank(const Tensor3& theta_hat, const Tensor3& delta_hat, const SubspaceSet& s) {
  check_pair(theta_hat, delta_hat);
  return {project(theta_hat, s.u_z, s.u_w), project(delta_hat, s.u_z, s.u_m)};
}

void fill_missing_with_layer_mean(Tensor3& t, const std::vector<std::uint8_t>& missing) {
  if (missing.size() != t.size()) throw UsageError("missing-entry mask has the wrong size");
  const std::size_t face = static_cast<std::size_t>(t.dim(0)) * t.dim(1);
  for (int l = 0; l < t.dim(2); ++l) {
    const std::size_t begin = face * static_cast<std::size_t>(l);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = begin; i < begin + face; ++i) {
      if (missing[i] == 0) {
        sum += t.data()[i];
        ++count;
      }
    }
    const double fill = count > 0 ? sum / static_cast<double>(count) : 0.5;
    for (std::size_t i = begin; i < begin + face; ++i)
      if (missing[i] != 0) t.data()[i] = fill;
  }
}

Tensor3 impute_and_project(Tensor3 t, const std::vector<std::uint8_t>& missing, const Matrix& u_node,
                           const Matrix& u_layer, int passes) {
  if (missing.size() != t.size()) throw UsageError("missing-entry mask has the wrong size");
  Tensor3 proj = project(t, u_node, u_layer);
  for (int pass = 0; pass < passes; ++pass) {
    for (std::size_t i = 0; i < t.size(); ++i)
      if (missing[i] != 0) t.data()[i] = proj.data()[i];
    proj = project(t, u_node, u_layer);
  }
  return proj;
}

}  // namespace msbm

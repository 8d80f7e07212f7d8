#include "msbm/tensor.hpp"

#include "msbm/error.hpp"
#include "msbm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace msbm {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw UsageError("mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

}  // namespace

Tensor3::Tensor3(int n1, int n2, int n3, double fill) : dims_{n1, n2, n3} {
  if (n1 < 0 || n2 < 0 || n3 < 0) throw UsageError("tensor dimensions must be non-negative");
  data_.assign(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2) * static_cast<std::size_t>(n3), fill);
}

Eigen::Map<Matrix> Tensor3::slice(int l) {
  return {data_.data() + static_cast<std::size_t>(dims_[0]) * dims_[1] * l, dims_[0], dims_[1]};
}

Eigen::Map<const Matrix> Tensor3::slice(int l) const {
  return {data_.data() + static_cast<std::size_t>(dims_[0]) * dims_[1] * l, dims_[0], dims_[1]};
}

bool Tensor3::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  if (dims_ != other.dims_) throw UsageError("tensor dimension mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  if (dims_ != other.dims_) throw UsageError("tensor dimension mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix matricize(const Tensor3& t, int mode) {
  check_mode(mode);
  const auto [n1, n2, n3] = t.dims();
  Matrix m;
  switch (mode) {
    case 1:
      m.resize(n1, static_cast<Eigen::Index>(n2) * n3);
      for (int l = 0; l < n3; ++l)
        for (int j = 0; j < n2; ++j)
          for (int i = 0; i < n1; ++i) m(i, static_cast<Eigen::Index>(j) * n3 + l) = t(i, j, l);
      break;
    case 2:
      m.resize(n2, static_cast<Eigen::Index>(n3) * n1);
      for (int l = 0; l < n3; ++l)
        for (int j = 0; j < n2; ++j)
          for (int i = 0; i < n1; ++i) m(j, static_cast<Eigen::Index>(l) * n1 + i) = t(i, j, l);
      break;
    default:
      m.resize(n3, static_cast<Eigen::Index>(n1) * n2);
      for (int l = 0; l < n3; ++l)
        for (int j = 0; j < n2; ++j)
          for (int i = 0; i < n1; ++i) m(l, static_cast<Eigen::Index>(i) * n2 + j) = t(i, j, l);
      break;
  }
  return m;
}

Tensor3 fold(const Matrix& m, int mode, const Tensor3::Dims& dims) {
  check_mode(mode);
  const auto [n1, n2, n3] = dims;
  const Eigen::Index rows = dims[static_cast<std::size_t>(mode - 1)];
  const Eigen::Index cols = static_cast<Eigen::Index>(n1) * n2 * n3 / std::max<Eigen::Index>(rows, 1);
  if (m.rows() != rows || m.cols() != cols) throw UsageError("fold: matrix shape does not match tensor dims");
  Tensor3 t(dims);
  for (int l = 0; l < n3; ++l)
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i) {
        switch (mode) {
          case 1: t(i, j, l) = m(i, static_cast<Eigen::Index>(j) * n3 + l); break;
          case 2: t(i, j, l) = m(j, static_cast<Eigen::Index>(l) * n1 + i); break;
          default: t(i, j, l) = m(l, static_cast<Eigen::Index>(i) * n2 + j); break;
        }
      }
  return t;
}

Tensor3 mode_product(const Tensor3& t, const Matrix& u, int mode) {
  check_mode(mode);
  const auto [n1, n2, n3] = t.dims();
  const int along = t.dims()[static_cast<std::size_t>(mode - 1)];
  if (u.cols() != along) {
    throw UsageError("mode_product: matrix has " + std::to_string(u.cols()) + " columns, mode " +
                     std::to_string(mode) + " has dimension " + std::to_string(along));
  }
  const int q = static_cast<int>(u.rows());
  switch (mode) {
    case 1: {
      Tensor3 out(q, n2, n3);
      for (int l = 0; l < n3; ++l) out.slice(l).noalias() = u * t.slice(l);
      return out;
    }
    case 2: {
      Tensor3 out(n1, q, n3);
      for (int l = 0; l < n3; ++l) out.slice(l).noalias() = t.slice(l) * u.transpose();
      return out;
    }
    default: {
      // Storage is a column-major (n1 n2) x n3 matrix.
      Tensor3 out(n1, n2, q);
      const Eigen::Index face = static_cast<Eigen::Index>(n1) * n2;
      Eigen::Map<const Matrix> in(t.data().data(), face, n3);
      Eigen::Map<Matrix> res(out.data().data(), face, q);
      res.noalias() = in * u.transpose();
      return out;
    }
  }
}

double frobenius_norm(const Tensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

double spectral_norm(const Tensor3& t) {
  double best = 0.0;
  for (int mode = 1; mode <= 3; ++mode) {
    const Matrix m = matricize(t, mode);
    if (m.size() == 0) continue;
    Eigen::JacobiSVD<Matrix> svd(m);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

double sigma_min(const Tensor3& t) {
  double best = 0.0;
  bool any = false;
  for (int mode = 1; mode <= 3; ++mode) {
    const Matrix m = matricize(t, mode);
    if (m.size() == 0) continue;
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    const double cutoff = static_cast<double>(std::max(m.rows(), m.cols())) *
                          std::numeric_limits<double>::epsilon() * s(0);
    for (Eigen::Index i = s.size() - 1; i >= 0; --i) {
      if (s(i) > cutoff && s(i) > 0.0) {
        best = any ? std::min(best, s(i)) : s(i);
        any = true;
        break;
      }
    }
  }
  return any ? best : 0.0;
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  if (a.dims() != b.dims()) throw UsageError("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace msbm

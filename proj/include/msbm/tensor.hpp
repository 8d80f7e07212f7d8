#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <vector>

namespace msbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense order-3 tensor of doubles.
///
/// Indices are 0-based. Storage is layer-major with each frontal slice
/// (:, :, l) held column-major, so a slice can be viewed as an Eigen matrix
/// without copying. Matricizations follow the cyclic convention:
///   mode 1: rows i, column j * n3 + l
///   mode 2: rows j, column l * n1 + i
///   mode 3: rows l, column i * n2 + j
class Tensor3 {
 public:
  using Dims = std::array<int, 3>;

  Tensor3() = default;
  Tensor3(int n1, int n2, int n3, double fill = 0.0);
  explicit Tensor3(Dims dims, double fill = 0.0) : Tensor3(dims[0], dims[1], dims[2], fill) {}

  const Dims& dims() const noexcept { return dims_; }
  int dim(int axis) const { return dims_.at(static_cast<std::size_t>(axis)); }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int i, int j, int l) { return data_[index(i, j, l)]; }
  double operator()(int i, int j, int l) const { return data_[index(i, j, l)]; }

  std::size_t index(int i, int j, int l) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(l));
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  Eigen::Map<Matrix> slice(int l);
  Eigen::Map<const Matrix> slice(int l) const;

  bool all_finite() const;

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims dims_{0, 0, 0};
  std::vector<double> data_;
};

/// Mode-s unfolding, `mode` in {1, 2, 3}.
Matrix matricize(const Tensor3& t, int mode);

/// Inverse of matricize for a tensor of the given dimensions.
Tensor3 fold(const Matrix& m, int mode, const Tensor3::Dims& dims);

/// t x_mode u. Requires u.cols() == t.dims()[mode - 1].
Tensor3 mode_product(const Tensor3& t, const Matrix& u, int mode);

double frobenius_norm(const Tensor3& t);

/// Largest spectral norm over the three matricizations.
double spectral_norm(const Tensor3& t);

/// Smallest non-zero singular value over the three matricizations; 0 for the
/// zero tensor.
double sigma_min(const Tensor3& t);

/// max |a - b| over all entries. Dimensions must agree.
double max_abs_diff(const Tensor3& a, const Tensor3& b);

}  // namespace msbm

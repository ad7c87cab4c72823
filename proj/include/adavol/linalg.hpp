#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adavol {

/// Small dense square matrix, row-major. Used for d x d Hessians with d <= p+q+1.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

  void fill(double value);
  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double scale);

  /// Largest |a_ij - a_ji|.
  [[nodiscard]] double asymmetry() const;

  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& a);

}  // namespace adavol

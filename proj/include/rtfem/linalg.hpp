#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <memory>
#include <vector>

#include "rtfem/core.hpp"

namespace rtfem {

/// Square sparse matrix in compressed-row storage. Column indices are sorted
/// and unique within each row; duplicate triplets are summed on construction.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_offsets;  // size rows+1
  std::vector<int> col_indices;  // size nnz
  std::vector<double> values;    // size nnz

  int nnz() const { return static_cast<int>(col_indices.size()); }

  static SparseMatrix from_triplets(int rows, int cols,
                                    std::vector<Eigen::Triplet<double>> triplets);

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;

  /// Replaces row i by the unit row e_i. The diagonal entry must exist in the
  /// pattern (always true for FEM adjacency patterns).
  void set_unit_row(int i);

  void check_consistent() const;  // throws on malformed storage
};

/// LU factorization of a SparseMatrix, reusable across right-hand sides.
class SparseFactorization {
 public:
  explicit SparseFactorization(const SparseMatrix& a);
  ~SparseFactorization();
  SparseFactorization(SparseFactorization&&) noexcept;
  SparseFactorization& operator=(SparseFactorization&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  int dimension() const { return dim_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int dim_ = 0;
};

/// Direct solve with a relative-residual contract; throws NumericalError with
/// the measured residual when the contract cannot be met.
Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b,
                             double tol = 1e-10);

/// Dense LU, built once and reused for many right-hand sides.
class DenseFactorization {
 public:
  explicit DenseFactorization(const Eigen::MatrixXd& a);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  double reciprocal_condition() const { return rcond_; }
  int dimension() const { return static_cast<int>(lu_.rows()); }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double rcond_ = 0.0;
};

inline DenseFactorization dense_factor(const Eigen::MatrixXd& a) {
  return DenseFactorization(a);
}

}  // namespace rtfem

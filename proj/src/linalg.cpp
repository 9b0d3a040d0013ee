#include "rtfem/linalg.hpp"

#include <algorithm>
#include <sstream>

namespace rtfem {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols,
                                         std::vector<Eigen::Triplet<double>> triplets) {
  std::sort(triplets.begin(), triplets.end(),
            [](const auto& a, const auto& b) {
              return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
            });
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_offsets.assign(static_cast<size_t>(rows) + 1, 0);
  m.col_indices.reserve(triplets.size());
  m.values.reserve(triplets.size());
  for (size_t k = 0; k < triplets.size();) {
    const int r = triplets[k].row();
    const int c = triplets[k].col();
    double v = 0.0;
    while (k < triplets.size() && triplets[k].row() == r && triplets[k].col() == c) {
      v += triplets[k].value();
      ++k;
    }
    m.col_indices.push_back(c);
    m.values.push_back(v);
    m.row_offsets[static_cast<size_t>(r) + 1] = static_cast<int>(m.col_indices.size());
  }
  // rows without entries inherit the previous offset
  for (size_t r = 1; r < m.row_offsets.size(); ++r) {
    m.row_offsets[r] = std::max(m.row_offsets[r], m.row_offsets[r - 1]);
  }
  return m;
}

Eigen::VectorXd SparseMatrix::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != cols) throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      acc += values[k] * x[col_indices[k]];
    }
    y[r] = acc;
  }
  return y;
}

void SparseMatrix::set_unit_row(int i) {
  bool diagonal_found = false;
  for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
    if (col_indices[k] == i) {
      values[k] = 1.0;
      diagonal_found = true;
    } else {
      values[k] = 0.0;
    }
  }
  if (!diagonal_found) {
    throw NumericalError("set_unit_row: diagonal entry missing from sparsity pattern");
  }
}

void SparseMatrix::check_consistent() const {
  if (static_cast<int>(row_offsets.size()) != rows + 1 ||
      col_indices.size() != values.size() ||
      row_offsets.front() != 0 || row_offsets.back() != nnz()) {
    throw NumericalError("SparseMatrix: inconsistent storage sizes");
  }
  for (int r = 0; r < rows; ++r) {
    for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      if (col_indices[k] < 0 || col_indices[k] >= cols) {
        throw NumericalError("SparseMatrix: column index out of range");
      }
      if (k > row_offsets[r] && col_indices[k] <= col_indices[k - 1]) {
        throw NumericalError("SparseMatrix: unsorted or duplicate column indices");
      }
    }
  }
}

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  Eigen::SparseMatrix<double> m(a.rows, a.cols);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a.values.size());
  for (int r = 0; r < a.rows; ++r) {
    for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
      trips.emplace_back(r, a.col_indices[k], a.values[k]);
    }
  }
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace

struct SparseFactorization::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

SparseFactorization::SparseFactorization(const SparseMatrix& a)
    : impl_(std::make_unique<Impl>()), dim_(a.rows) {
  if (a.rows != a.cols) throw std::invalid_argument("SparseFactorization: matrix must be square");
  impl_->lu.compute(to_eigen(a));
  if (impl_->lu.info() != Eigen::Success) {
    throw NumericalError("sparse factorization failed (matrix singular or structurally deficient)");
  }
}

SparseFactorization::~SparseFactorization() = default;
SparseFactorization::SparseFactorization(SparseFactorization&&) noexcept = default;
SparseFactorization& SparseFactorization::operator=(SparseFactorization&&) noexcept = default;

Eigen::VectorXd SparseFactorization::solve(const Eigen::VectorXd& b) const {
  if (b.size() != dim_) throw std::invalid_argument("SparseFactorization::solve: size mismatch");
  Eigen::VectorXd x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success) {
    throw NumericalError("sparse solve failed after successful factorization");
  }
  return x;
}

Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b, double tol) {
  SparseFactorization fact(a);
  Eigen::VectorXd x = fact.solve(b);
  const double bnorm = b.norm();
  const double resid = (a.multiply(x) - b).norm();
  const double rel = bnorm > 0.0 ? resid / bnorm : resid;
  if (!(rel <= tol)) {
    std::ostringstream msg;
    msg << "sparse_solve: relative residual " << rel << " exceeds tolerance " << tol;
    throw NumericalError(msg.str());
  }
  return x;
}

DenseFactorization::DenseFactorization(const Eigen::MatrixXd& a) : lu_(a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("DenseFactorization: matrix must be square");
  rcond_ = lu_.rcond();
  // rcond() alone is unreliable on exactly singular input; the pivots are not
  const auto pivots = lu_.matrixLU().diagonal().cwiseAbs();
  const double pivot_max = pivots.maxCoeff();
  const double pivot_min = pivots.minCoeff();
  if (!(pivot_min > 1e-14 * std::max(1.0, pivot_max)) || !(rcond_ > 1e-16)) {
    std::ostringstream msg;
    msg << "dense factorization: matrix is singular to working precision (rcond = "
        << rcond_ << ", pivot ratio = " << pivot_min / std::max(pivot_max, 1e-300) << ")";
    throw NumericalError(msg.str());
  }
}

Eigen::VectorXd DenseFactorization::solve(const Eigen::VectorXd& b) const {
  if (b.size() != lu_.rows()) throw std::invalid_argument("DenseFactorization::solve: size mismatch");
  return lu_.solve(b);
}

}  // namespace rtfem

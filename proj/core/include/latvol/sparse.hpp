#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

namespace latvol {

// Symmetric matrix of 3x3 blocks. Only blocks (I, J) with I <= J are stored,
// grouped by block column J with increasing I.
class BlockSparseMatrix {
 public:
  BlockSparseMatrix() = default;
  // rows_of_col[J] lists the block rows I <= J present in column J.
  BlockSparseMatrix(int num_blocks, const std::vector<std::vector<int>>& rows_of_col);

  int num_blocks() const { return n_; }
  int rows() const { return 3 * n_; }
  std::size_t num_stored_blocks() const { return row_.size(); }
  const std::vector<int>& col_ptr() const { return ptr_; }
  const std::vector<int>& row_index() const { return row_; }
  const std::vector<double>& values() const { return val_; }

  void set_zero();
  // Adds m at (I, J); for I > J the transpose is added at (J, I).
  void add(int i, int j, const Eigen::Matrix3d& m);
  Eigen::Matrix3d block(int i, int j) const;

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;
  double max_abs() const;
  double max_diagonal() const;
  bool same_pattern(const BlockSparseMatrix& o) const { return n_ == o.n_ && ptr_ == o.ptr_ && row_ == o.row_; }

 private:
  int position(int i, int j) const;

  int n_ = 0;
  std::vector<int> ptr_;
  std::vector<int> row_;
  std::vector<double> val_;
};

// Collects the block pattern before allocation.
class PatternBuilder {
 public:
  explicit PatternBuilder(int num_blocks) : cols_(num_blocks) {}
  void add(int i, int j) {
    if (i > j) std::swap(i, j);
    cols_[j].push_back(i);
  }
  BlockSparseMatrix build();

 private:
  std::vector<std::vector<int>> cols_;
};

// Sparse Cholesky factorization (CHOLMOD, supernodal). The symbolic analysis
// is reused while the pattern stays the same.
class SparseCholesky {
 public:
  SparseCholesky();
  ~SparseCholesky();
  SparseCholesky(const SparseCholesky&) = delete;
  SparseCholesky& operator=(const SparseCholesky&) = delete;

  // Returns true iff the matrix is numerically positive definite.
  bool factorize(const BlockSparseMatrix& h);
  // Smallest pivot (squared diagonal of L) of the last successful
  // factorization, relative to the largest diagonal entry of the matrix.
  double relative_min_pivot() const { return rel_min_pivot_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double rel_min_pivot_ = 0.0;
};

}  // namespace latvol

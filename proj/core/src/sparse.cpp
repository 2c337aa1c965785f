#include "latvol/sparse.hpp"

#include <cholmod.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latvol {

BlockSparseMatrix::BlockSparseMatrix(int num_blocks, const std::vector<std::vector<int>>& rows_of_col)
    : n_(num_blocks), ptr_(num_blocks + 1, 0) {
  for (int j = 0; j < n_; ++j) ptr_[j + 1] = ptr_[j] + static_cast<int>(rows_of_col[j].size());
  row_.reserve(ptr_.back());
  for (int j = 0; j < n_; ++j) {
    for (int i : rows_of_col[j]) {
      if (i > j) throw std::invalid_argument("BlockSparseMatrix: lower block in pattern");
      row_.push_back(i);
    }
  }
  val_.assign(9 * row_.size(), 0.0);
}

BlockSparseMatrix PatternBuilder::build() {
  const int n = static_cast<int>(cols_.size());
  for (int j = 0; j < n; ++j) {
    auto& c = cols_[j];
    c.push_back(j);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  BlockSparseMatrix m(n, cols_);
  cols_.clear();
  return m;
}

void BlockSparseMatrix::set_zero() { std::fill(val_.begin(), val_.end(), 0.0); }

int BlockSparseMatrix::position(int i, int j) const {
  auto first = row_.begin() + ptr_[j];
  auto last = row_.begin() + ptr_[j + 1];
  auto it = std::lower_bound(first, last, i);
  if (it == last || *it != i) return -1;
  return static_cast<int>(it - row_.begin());
}

void BlockSparseMatrix::add(int i, int j, const Eigen::Matrix3d& m) {
  bool transpose = false;
  if (i > j) {
    std::swap(i, j);
    transpose = true;
  }
  const int p = position(i, j);
  if (p < 0) throw std::out_of_range("BlockSparseMatrix::add: block not in pattern");
  Eigen::Map<Eigen::Matrix3d> dst(&val_[9 * static_cast<std::size_t>(p)]);
  if (transpose) {
    dst += m.transpose();
  } else {
    dst += m;
  }
}

Eigen::Matrix3d BlockSparseMatrix::block(int i, int j) const {
  bool transpose = false;
  if (i > j) {
    std::swap(i, j);
    transpose = true;
  }
  const int p = position(i, j);
  if (p < 0) return Eigen::Matrix3d::Zero();
  Eigen::Map<const Eigen::Matrix3d> b(&val_[9 * static_cast<std::size_t>(p)]);
  if (i == j) {
    // Only the upper triangle of a diagonal block is meaningful.
    Eigen::Matrix3d s = b.triangularView<Eigen::Upper>();
    s.triangularView<Eigen::StrictlyLower>() = s.transpose().triangularView<Eigen::StrictlyLower>();
    return s;
  }
  return transpose ? Eigen::Matrix3d(b.transpose()) : Eigen::Matrix3d(b);
}

Eigen::VectorXd BlockSparseMatrix::multiply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows());
  for (int j = 0; j < n_; ++j) {
    for (int p = ptr_[j]; p < ptr_[j + 1]; ++p) {
      const int i = row_[p];
      if (i == j) {
        y.segment<3>(3 * j) += block(j, j) * x.segment<3>(3 * j);
        continue;
      }
      Eigen::Map<const Eigen::Matrix3d> b(&val_[9 * static_cast<std::size_t>(p)]);
      y.segment<3>(3 * i) += b * x.segment<3>(3 * j);
      y.segment<3>(3 * j) += b.transpose() * x.segment<3>(3 * i);
    }
  }
  return y;
}

Eigen::MatrixXd BlockSparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows(), rows());
  for (int j = 0; j < n_; ++j) {
    for (int p = ptr_[j]; p < ptr_[j + 1]; ++p) {
      const int i = row_[p];
      Eigen::Matrix3d b = block(i, j);
      d.block<3, 3>(3 * i, 3 * j) = b;
      d.block<3, 3>(3 * j, 3 * i) = b.transpose();
    }
  }
  return d;
}

double BlockSparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : val_) m = std::max(m, std::abs(v));
  return m;
}

double BlockSparseMatrix::max_diagonal() const {
  double m = 0.0;
  for (int j = 0; j < n_; ++j) {
    Eigen::Matrix3d b = block(j, j);
    for (int a = 0; a < 3; ++a) m = std::max(m, std::abs(b(a, a)));
  }
  return m;
}

struct SparseCholesky::Impl {
  cholmod_common common;
  cholmod_sparse* a = nullptr;
  cholmod_factor* l = nullptr;
  BlockSparseMatrix pattern;
  bool analyzed = false;

  Impl() {
    cholmod_start(&common);
    common.supernodal = CHOLMOD_SUPERNODAL;
    common.final_ll = 1;
    common.quick_return_if_not_posdef = 1;
    common.print = 0;
    common.error_handler = nullptr;
  }
  ~Impl() {
    if (l) cholmod_free_factor(&l, &common);
    if (a) cholmod_free_sparse(&a, &common);
    cholmod_finish(&common);
  }
};

SparseCholesky::SparseCholesky() : impl_(std::make_unique<Impl>()) {}
SparseCholesky::~SparseCholesky() = default;

bool SparseCholesky::factorize(const BlockSparseMatrix& h) {
  Impl& s = *impl_;
  cholmod_common* c = &s.common;
  if (!s.analyzed || !s.pattern.same_pattern(h)) {
    if (s.l) cholmod_free_factor(&s.l, c);
    if (s.a) cholmod_free_sparse(&s.a, c);
    const int n = h.rows();
    std::size_t nnz = 0;
    for (int j = 0; j < h.num_blocks(); ++j)
      for (int p = h.col_ptr()[j]; p < h.col_ptr()[j + 1]; ++p) nnz += (h.row_index()[p] == j) ? 6 : 9;
    s.a = cholmod_allocate_sparse(n, n, nnz, 1, 1, 1, CHOLMOD_REAL, c);
    if (!s.a) throw std::runtime_error("SparseCholesky: allocation failed");
    int* ap = static_cast<int*>(s.a->p);
    int* ai = static_cast<int*>(s.a->i);
    std::size_t k = 0;
    for (int j = 0; j < h.num_blocks(); ++j) {
      for (int b = 0; b < 3; ++b) {
        ap[3 * j + b] = static_cast<int>(k);
        for (int p = h.col_ptr()[j]; p < h.col_ptr()[j + 1]; ++p) {
          const int i = h.row_index()[p];
          const int amax = (i == j) ? b : 2;
          for (int a = 0; a <= amax; ++a) ai[k++] = 3 * i + a;
        }
      }
    }
    ap[n] = static_cast<int>(k);
    s.l = cholmod_analyze(s.a, c);
    if (!s.l) throw std::runtime_error("SparseCholesky: symbolic analysis failed");
    s.pattern = BlockSparseMatrix(h.num_blocks(), [&] {
      std::vector<std::vector<int>> cols(h.num_blocks());
      for (int j = 0; j < h.num_blocks(); ++j)
        for (int p = h.col_ptr()[j]; p < h.col_ptr()[j + 1]; ++p) cols[j].push_back(h.row_index()[p]);
      return cols;
    }());
    s.analyzed = true;
  }

  double* ax = static_cast<double*>(s.a->x);
  std::size_t k = 0;
  const std::vector<double>& v = h.values();
  for (int j = 0; j < h.num_blocks(); ++j) {
    for (int b = 0; b < 3; ++b) {
      for (int p = h.col_ptr()[j]; p < h.col_ptr()[j + 1]; ++p) {
        const int i = h.row_index()[p];
        const int amax = (i == j) ? b : 2;
        for (int a = 0; a <= amax; ++a) ax[k++] = v[9 * static_cast<std::size_t>(p) + a + 3 * b];
      }
    }
  }

  cholmod_factorize(s.a, s.l, c);
  if (c->status == CHOLMOD_NOT_POSDEF || s.l->minor < s.l->n) {
    rel_min_pivot_ = 0.0;
    return false;
  }
  if (c->status < CHOLMOD_OK) throw std::runtime_error("SparseCholesky: factorization failed");

  double min_pivot = INFINITY;
  const double* lx = static_cast<const double*>(s.l->x);
  if (s.l->is_super) {
    const int* super = static_cast<const int*>(s.l->super);
    const int* pi = static_cast<const int*>(s.l->pi);
    const int* px = static_cast<const int*>(s.l->px);
    for (std::size_t sn = 0; sn < s.l->nsuper; ++sn) {
      const int ncol = super[sn + 1] - super[sn];
      const int nrow = pi[sn + 1] - pi[sn];
      for (int jj = 0; jj < ncol; ++jj) {
        const double d = lx[px[sn] + jj + static_cast<std::size_t>(jj) * nrow];
        min_pivot = std::min(min_pivot, d * d);
      }
    }
  } else {
    const int* lp = static_cast<const int*>(s.l->p);
    for (std::size_t j = 0; j < s.l->n; ++j) {
      const double d = lx[lp[j]];
      min_pivot = std::min(min_pivot, s.l->is_ll ? d * d : d);
    }
  }
  const double scale = h.max_diagonal();
  rel_min_pivot_ = scale > 0 ? min_pivot / scale : 0.0;
  return true;
}

Eigen::VectorXd SparseCholesky::solve(const Eigen::VectorXd& b) const {
  Impl& s = *impl_;
  cholmod_common* c = &s.common;
  if (!s.l) throw std::logic_error("SparseCholesky::solve: no factorization");
  cholmod_dense* rhs = cholmod_allocate_dense(b.size(), 1, b.size(), CHOLMOD_REAL, c);
  std::copy(b.data(), b.data() + b.size(), static_cast<double*>(rhs->x));
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, s.l, rhs, c);
  Eigen::VectorXd out(b.size());
  std::copy(static_cast<double*>(x->x), static_cast<double*>(x->x) + b.size(), out.data());
  cholmod_free_dense(&rhs, c);
  cholmod_free_dense(&x, c);
  return out;
}

}  // namespace latvol

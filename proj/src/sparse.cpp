#include "spaqr/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spaqr {

const char* to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::bad_input: return "bad-input";
    case ErrorClass::singular_pivot: return "singular-pivot";
    case ErrorClass::ill_conditioned: return "ill-conditioned";
  }
  return "unknown";
}

namespace {
std::string pivot_message(int index, double value, const std::string& context) {
  std::ostringstream os;
  os << "singular pivot at index " << index << " (|R_ii| = " << value << ")";
  if (!context.empty()) os << " in " << context;
  return os.str();
}
}  // namespace

SingularPivot::SingularPivot(int index, double value, const std::string& context)
    : Error(ErrorClass::singular_pivot, pivot_message(index, value, context)),
      index_(index),
      value_(value) {}

SparseMat::SparseMat(int nrows, int ncols)
    : nrows_(nrows), ncols_(ncols), colptr_(static_cast<size_t>(ncols) + 1, 0) {
  if (nrows < 0 || ncols < 0) throw BadInput("negative matrix dimension");
}

SparseMat SparseMat::from_triplets(int nrows, int ncols, const std::vector<Triplet>& t) {
  SparseMat A(nrows, ncols);
  for (const auto& e : t) {
    if (e.row < 0 || e.row >= nrows || e.col < 0 || e.col >= ncols)
      throw BadInput("triplet index out of range");
    A.colptr_[e.col + 1]++;
  }
  for (int j = 0; j < ncols; ++j) A.colptr_[j + 1] += A.colptr_[j];
  std::vector<std::int64_t> next(A.colptr_.begin(), A.colptr_.end() - 1);
  std::vector<int> ri(t.size());
  std::vector<double> va(t.size());
  for (const auto& e : t) {
    auto k = next[e.col]++;
    ri[k] = e.row;
    va[k] = e.value;
  }
  // sort each column and sum duplicates
  A.rowind_.reserve(t.size());
  A.values_.reserve(t.size());
  std::vector<std::int64_t> newptr(static_cast<size_t>(ncols) + 1, 0);
  std::vector<int> order;
  for (int j = 0; j < ncols; ++j) {
    auto b = A.colptr_[j], e = A.colptr_[j + 1];
    order.resize(static_cast<size_t>(e - b));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return ri[b + x] < ri[b + y]; });
    for (size_t k = 0; k < order.size(); ++k) {
      int r = ri[b + order[k]];
      double v = va[b + order[k]];
      if (!A.rowind_.empty() && static_cast<std::int64_t>(A.rowind_.size()) > newptr[j] &&
          A.rowind_.back() == r) {
        A.values_.back() += v;
      } else {
        A.rowind_.push_back(r);
        A.values_.push_back(v);
      }
    }
    newptr[j + 1] = static_cast<std::int64_t>(A.rowind_.size());
  }
  A.colptr_ = std::move(newptr);
  return A;
}

SparseMat SparseMat::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, t);
}

SparseMat SparseMat::from_dense(const Matrix& D, double drop_tol) {
  std::vector<Triplet> t;
  for (int j = 0; j < D.cols(); ++j)
    for (int i = 0; i < D.rows(); ++i)
      if (std::abs(D(i, j)) > drop_tol) t.push_back({i, j, D(i, j)});
  return from_triplets(static_cast<int>(D.rows()), static_cast<int>(D.cols()), t);
}

double SparseMat::coeff(int i, int j) const {
  auto b = rowind_.begin() + colptr_[j];
  auto e = rowind_.begin() + colptr_[j + 1];
  auto it = std::lower_bound(b, e, i);
  if (it != e && *it == i) return values_[it - rowind_.begin()];
  return 0.0;
}

void SparseMat::compress(double drop_tol) {
  std::int64_t w = 0;
  std::int64_t start = 0;
  for (int j = 0; j < ncols_; ++j) {
    auto end = colptr_[j + 1];
    for (auto k = start; k < end; ++k) {
      if (std::abs(values_[k]) > drop_tol) {
        rowind_[w] = rowind_[k];
        values_[w] = values_[k];
        ++w;
      }
    }
    start = end;
    colptr_[j + 1] = w;
  }
  rowind_.resize(w);
  values_.resize(w);
}

void SparseMat::multiply(const double* x, double* y) const {
  std::fill(y, y + nrows_, 0.0);
  for (int j = 0; j < ncols_; ++j) {
    double xj = x[j];
    if (xj == 0.0) continue;
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) y[rowind_[k]] += values_[k] * xj;
  }
}

Vector SparseMat::operator*(const Vector& x) const {
  if (x.size() != ncols_) throw BadInput("matvec dimension mismatch");
  Vector y(nrows_);
  multiply(x.data(), y.data());
  return y;
}

Vector SparseMat::transpose_times(const Vector& x) const {
  if (x.size() != nrows_) throw BadInput("matvec dimension mismatch");
  Vector y(ncols_);
#pragma omp parallel for schedule(static) if (ncols_ > 20000)
  for (int j = 0; j < ncols_; ++j) {
    double s = 0;
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) s += values_[k] * x[rowind_[k]];
    y[j] = s;
  }
  return y;
}

SparseMat SparseMat::transpose() const {
  std::vector<Triplet> t;
  t.reserve(rowind_.size());
  for (int j = 0; j < ncols_; ++j)
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) t.push_back({j, rowind_[k], values_[k]});
  return from_triplets(ncols_, nrows_, t);
}

SparseMat SparseMat::permuted(const std::vector<int>& row_perm,
                              const std::vector<int>& col_perm) const {
  if (static_cast<int>(row_perm.size()) != nrows_ || static_cast<int>(col_perm.size()) != ncols_)
    throw BadInput("permutation size mismatch");
  std::vector<int> rinv(nrows_, -1);
  for (int i = 0; i < nrows_; ++i) rinv[row_perm[i]] = i;
  std::vector<Triplet> t;
  t.reserve(rowind_.size());
  for (int jn = 0; jn < ncols_; ++jn) {
    int j = col_perm[jn];
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) t.push_back({rinv[rowind_[k]], jn, values_[k]});
  }
  return from_triplets(nrows_, ncols_, t);
}

Matrix SparseMat::to_dense() const {
  Matrix D = Matrix::Zero(nrows_, ncols_);
  for (int j = 0; j < ncols_; ++j)
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) D(rowind_[k], j) = values_[k];
  return D;
}

std::vector<Triplet> SparseMat::triplets() const {
  std::vector<Triplet> t;
  t.reserve(rowind_.size());
  for (int j = 0; j < ncols_; ++j)
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) t.push_back({rowind_[k], j, values_[k]});
  return t;
}

double SparseMat::norm_fro() const {
  double s = 0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

Vector SparseMat::column_norms() const {
  Vector n(ncols_);
  for (int j = 0; j < ncols_; ++j) {
    double s = 0;
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) s += values_[k] * values_[k];
    n[j] = std::sqrt(s);
  }
  return n;
}

void SparseMat::scale_columns(const Vector& s) {
  for (int j = 0; j < ncols_; ++j)
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) values_[k] *= s[j];
}

bool SparseMat::pattern_symmetric() const {
  if (nrows_ != ncols_) return false;
  for (int j = 0; j < ncols_; ++j)
    for (auto k = colptr_[j]; k < colptr_[j + 1]; ++k) {
      int i = rowind_[k];
      auto b = rowind_.begin() + colptr_[i];
      auto e = rowind_.begin() + colptr_[i + 1];
      if (!std::binary_search(b, e, j)) return false;
    }
  return true;
}

namespace {

void check_indices(const IndexSet& idx, int bound, const char* what) {
  for (int i : idx)
    if (i < 0 || i >= bound) {
      std::ostringstream os;
      os << what << " index " << i << " out of range [0, " << bound << ")";
      throw BadInput(os.str());
    }
}

// (global index, position) pairs sorted by index, for lookups inside a column.
std::vector<std::pair<int, int>> sorted_positions(const IndexSet& idx) {
  std::vector<std::pair<int, int>> p(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) p[k] = {idx[k], static_cast<int>(k)};
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

Matrix gather_block(const SparseMat& A, const IndexSet& rows, const IndexSet& cols) {
  check_indices(rows, A.rows(), "row");
  check_indices(cols, A.cols(), "column");
  Matrix B = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  auto pos = sorted_positions(rows);
  const auto& ri = A.rowind();
  const auto& va = A.values();
  for (size_t c = 0; c < cols.size(); ++c) {
    int j = cols[c];
    auto k = A.col_begin(j), e = A.col_end(j);
    auto p = pos.begin();
    // merge the sorted column against the sorted row positions
    while (k < e && p != pos.end()) {
      if (ri[k] < p->first) {
        ++k;
      } else if (p->first < ri[k]) {
        ++p;
      } else {
        int r = ri[k];
        for (auto q = p; q != pos.end() && q->first == r; ++q) B(q->second, c) = va[k];
        ++k;
      }
    }
  }
  return B;
}

void scatter_block(SparseMat& A, const IndexSet& rows, const IndexSet& cols, const Matrix& B,
                   double drop_tol) {
  check_indices(rows, A.rows(), "row");
  check_indices(cols, A.cols(), "column");
  if (B.rows() != static_cast<Eigen::Index>(rows.size()) ||
      B.cols() != static_cast<Eigen::Index>(cols.size()))
    throw BadInput("scatter_block: block shape does not match index sets");
  // last writer wins for repeated column indices
  std::vector<int> col_src(A.cols(), -1);
  for (size_t c = 0; c < cols.size(); ++c) col_src[cols[c]] = static_cast<int>(c);
  auto pos = sorted_positions(rows);
  // collapse duplicate row indices to the last position
  std::vector<std::pair<int, int>> upos;
  for (auto& p : pos) {
    if (!upos.empty() && upos.back().first == p.first) upos.back().second = std::max(upos.back().second, p.second);
    else upos.push_back(p);
  }

  std::vector<std::int64_t> ptr(static_cast<size_t>(A.cols()) + 1, 0);
  std::vector<int> ri;
  std::vector<double> va;
  ri.reserve(A.rowind_.size() + static_cast<size_t>(B.size()));
  va.reserve(ri.capacity());
  for (int j = 0; j < A.cols(); ++j) {
    auto k = A.colptr_[j], e = A.colptr_[j + 1];
    int c = col_src[j];
    if (c < 0) {
      ri.insert(ri.end(), A.rowind_.begin() + k, A.rowind_.begin() + e);
      va.insert(va.end(), A.values_.begin() + k, A.values_.begin() + e);
    } else {
      auto p = upos.begin();
      while (k < e || p != upos.end()) {
        if (p == upos.end() || (k < e && A.rowind_[k] < p->first)) {
          ri.push_back(A.rowind_[k]);
          va.push_back(A.values_[k]);
          ++k;
        } else {
          if (k < e && A.rowind_[k] == p->first) ++k;  // overwritten
          double v = B(p->second, c);
          if (std::abs(v) > drop_tol) {
            ri.push_back(p->first);
            va.push_back(v);
          }
          ++p;
        }
      }
    }
    ptr[j + 1] = static_cast<std::int64_t>(ri.size());
  }
  A.colptr_ = std::move(ptr);
  A.rowind_ = std::move(ri);
  A.values_ = std::move(va);
}

Equilibrated equilibrate_columns(const SparseMat& A) {
  Equilibrated out{A, A.column_norms()};
  for (int j = 0; j < A.cols(); ++j)
    if (!(out.scale[j] > 0.0)) {
      std::ostringstream os;
      os << "column " << j << " is zero; matrix cannot have full rank";
      throw BadInput(os.str());
    }
  out.A.scale_columns(out.scale.cwiseInverse());
  return out;
}

void write_triplet_csv(const SparseMat& A, std::ostream& out) {
  out << "row,col,value\n";
  out.precision(17);
  for (const auto& t : A.triplets()) out << t.row << ',' << t.col << ',' << t.value << '\n';
}

Graph ata_graph(const SparseMat& A, int row_cap, std::vector<int>* heavy_rows) {
  SparseMat At = A.transpose();  // row access
  Graph g;
  g.adj.resize(A.cols());
  std::vector<int> mark(A.cols(), -1);
  if (heavy_rows) heavy_rows->clear();
  for (int i = 0; i < At.cols(); ++i)
    if (At.col_end(i) - At.col_begin(i) > row_cap && heavy_rows) heavy_rows->push_back(i);
  for (int j = 0; j < A.cols(); ++j) {
    mark[j] = j;
    auto& nb = g.adj[j];
    for (auto k = A.col_begin(j); k < A.col_end(j); ++k) {
      int i = A.rowind()[k];
      if (At.col_end(i) - At.col_begin(i) > row_cap) continue;
      for (auto q = At.col_begin(i); q < At.col_end(i); ++q) {
        int c = At.rowind()[q];
        if (mark[c] != j) {
          mark[c] = j;
          nb.push_back(c);
        }
      }
    }
    std::sort(nb.begin(), nb.end());
  }
  return g;
}

Graph ata_graph(const SparseMat& A) { return ata_graph(A, A.cols() + 1, nullptr); }

}  // namespace spaqr

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spaqr/error.hpp"

namespace spaqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Ordered list of global row or column indices.
using IndexSet = std::vector<int>;

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed sparse column matrix.
class SparseMat {
 public:
  SparseMat() = default;
  SparseMat(int nrows, int ncols);

  // Duplicates are summed; entries that sum to exactly zero are kept until compress().
  static SparseMat from_triplets(int nrows, int ncols, const std::vector<Triplet>& t);
  static SparseMat identity(int n);
  static SparseMat from_dense(const Matrix& D, double drop_tol = 0.0);

  int rows() const { return nrows_; }
  int cols() const { return ncols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(rowind_.size()); }

  const std::vector<std::int64_t>& colptr() const { return colptr_; }
  const std::vector<int>& rowind() const { return rowind_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  std::int64_t col_begin(int j) const { return colptr_[j]; }
  std::int64_t col_end(int j) const { return colptr_[j + 1]; }
  double coeff(int i, int j) const;

  // Removes entries with |v| <= drop_tol (explicit zeros for drop_tol = 0).
  void compress(double drop_tol = 0.0);

  Vector operator*(const Vector& x) const;
  void multiply(const double* x, double* y) const;
  Vector transpose_times(const Vector& x) const;
  SparseMat transpose() const;
  // B(i, j) = A(row_perm[i], col_perm[j]).
  SparseMat permuted(const std::vector<int>& row_perm, const std::vector<int>& col_perm) const;
  Matrix to_dense() const;
  std::vector<Triplet> triplets() const;

  double norm_fro() const;
  Vector column_norms() const;
  void scale_columns(const Vector& s);  // column j multiplied by s[j]

  bool pattern_symmetric() const;

 private:
  friend void scatter_block(SparseMat&, const IndexSet&, const IndexSet&, const Matrix&, double);
  int nrows_ = 0;
  int ncols_ = 0;
  std::vector<std::int64_t> colptr_{0};
  std::vector<int> rowind_;
  std::vector<double> values_;
};

Matrix gather_block(const SparseMat& A, const IndexSet& rows, const IndexSet& cols);
void scatter_block(SparseMat& A, const IndexSet& rows, const IndexSet& cols, const Matrix& B,
                   double drop_tol = 0.0);

struct Equilibrated {
  SparseMat A;   // original with every column divided by its 2-norm
  Vector scale;  // the 2-norms; x = y ./ scale recovers the unscaled solution
};
Equilibrated equilibrate_columns(const SparseMat& A);

SparseMat read_matrix_market(const std::string& path);
SparseMat read_matrix_market(std::istream& in);
void write_matrix_market(const SparseMat& A, const std::string& path);
void write_matrix_market(const SparseMat& A, std::ostream& out);
void write_triplet_csv(const SparseMat& A, std::ostream& out);

// Symbolic pattern of A^T A as adjacency lists (no self loops). Rows with
// more than row_cap entries are skipped and returned in `heavy_rows`.
struct Graph {
  std::vector<std::vector<int>> adj;
  int size() const { return static_cast<int>(adj.size()); }
};
Graph ata_graph(const SparseMat& A, int row_cap, std::vector<int>* heavy_rows = nullptr);
Graph ata_graph(const SparseMat& A);

}  // namespace spaqr

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "spaqr/error.hpp"
#include "spaqr/sparse.hpp"

using namespace spaqr;

namespace {

SparseMat random_pattern(std::mt19937_64& g, int m, int n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0), v(-1.0, 1.0);
  std::vector<Triplet> t;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      if (u(g) < density) t.push_back({i, j, v(g)});
  return SparseMat::from_triplets(m, n, t);
}

IndexSet random_subset(std::mt19937_64& g, int n) {
  std::uniform_int_distribution<int> coin(0, 1);
  IndexSet s;
  for (int i = 0; i < n; ++i)
    if (coin(g)) s.push_back(i);
  return s;
}

}  // namespace

TEST_CASE("mtx: 3x3 identity") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "3 3 3\n1 1 1.0\n2 2 1.0\n3 3 1.0\n");
  SparseMat A = read_matrix_market(in);
  CHECK(A.rows() == 3);
  CHECK(A.nnz() == 3);
  for (double v : A.values()) CHECK(v == 1.0);
  CHECK(A.to_dense() == Matrix::Identity(3, 3));
}

TEST_CASE("mtx: duplicate entries are summed") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "2 2 3\n1 1 0.5\n1 1 0.5\n2 1 -2\n");
  SparseMat A = read_matrix_market(in);
  CHECK(A.nnz() == 2);
  CHECK(A.coeff(0, 0) == 1.0);
  CHECK(A.coeff(1, 0) == -2.0);
}

TEST_CASE("mtx: empty coordinate section") {
  std::istringstream in("%%MatrixMarket matrix coordinate real general\n2 2 0\n");
  SparseMat A = read_matrix_market(in);
  CHECK(A.rows() == 2);
  CHECK(A.cols() == 2);
  CHECK(A.nnz() == 0);
  CHECK(A.to_dense().isZero(0.0));
}

TEST_CASE("mtx: unsupported fields and bad lines") {
  std::istringstream cplx("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
  CHECK_THROWS_AS(read_matrix_market(cplx), BadInput);
  std::istringstream pat("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n");
  CHECK_THROWS_AS(read_matrix_market(pat), BadInput);
  std::istringstream bad("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3\n");
  try {
    read_matrix_market(bad);
    FAIL("expected a parse error");
  } catch (const BadInput& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("mtx: symmetric storage is expanded") {
  std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2\n2 1 3\n");
  SparseMat A = read_matrix_market(in);
  CHECK(A.coeff(0, 1) == 3.0);
  CHECK(A.coeff(1, 0) == 3.0);
}

TEST_CASE("mtx: write/read round trip") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> e(-30.0, 30.0);
  SparseMat A = random_pattern(g, 20, 17, 0.3);
  for (double& v : A.values()) v *= std::pow(10.0, e(g));
  std::stringstream s;
  write_matrix_market(A, s);
  SparseMat B = read_matrix_market(s);
  REQUIRE(B.nnz() == A.nnz());
  REQUIRE(B.rowind() == A.rowind());
  for (size_t k = 0; k < A.values().size(); ++k)
    CHECK(std::abs(B.values()[k] - A.values()[k]) <= 1e-15 * std::abs(A.values()[k]));
}

TEST_CASE("equilibrate: diagonal") {
  SparseMat A = SparseMat::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 4.0}});
  Equilibrated e = equilibrate_columns(A);
  CHECK(e.A.to_dense() == Matrix::Identity(2, 2));
  CHECK(e.scale[0] == 2.0);
  CHECK(e.scale[1] == 4.0);
}

TEST_CASE("equilibrate: 3-4-5 column") {
  SparseMat A = SparseMat::from_triplets(2, 1, {{0, 0, 3.0}, {1, 0, 4.0}});
  Equilibrated e = equilibrate_columns(A);
  CHECK(e.scale[0] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(e.A.coeff(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(e.A.coeff(1, 0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("equilibrate: unit columns stay put") {
  SparseMat A = SparseMat::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
  Equilibrated e = equilibrate_columns(A);
  CHECK(e.A.to_dense() == A.to_dense());
  CHECK(e.scale == Vector::Ones(2));
}

TEST_CASE("equilibrate: zero column names its index") {
  SparseMat A = SparseMat::from_triplets(3, 3, {{0, 0, 1.0}, {2, 2, 1.0}});
  try {
    equilibrate_columns(A);
    FAIL("expected an error");
  } catch (const BadInput& e) {
    CHECK(std::string(e.what()).find("column 1") != std::string::npos);
  }
}

TEST_CASE("equilibrate: column norms within 1e-14 of one") {
  std::mt19937_64 g(3);
  SparseMat A = random_pattern(g, 60, 60, 0.1);
  for (int j = 0; j < 60; ++j) scatter_block(A, {j}, {j}, Matrix::Constant(1, 1, 5.0 + j));
  Equilibrated e = equilibrate_columns(A);
  Vector n = e.A.column_norms();
  CHECK((n.array() - 1.0).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("gather: small cases") {
  SparseMat D = SparseMat::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}});
  Matrix G = gather_block(D, {0, 1}, {0, 1});
  CHECK(G == (Matrix(2, 2) << 1, 0, 0, 2).finished());
  CHECK(gather_block(D, {0}, {1}).isZero(0.0));
  CHECK_THROWS_AS(gather_block(D, {0, 2}, {0}), BadInput);
}

TEST_CASE("gather: arrow matrix against triplet scan") {
  std::vector<Triplet> t;
  for (int i = 0; i < 4; ++i) {
    t.push_back({i, i, 10.0 + i});
    if (i > 0) {
      t.push_back({0, i, 1.0 + i});
      t.push_back({i, 0, -1.0 - i});
    }
  }
  SparseMat A = SparseMat::from_triplets(4, 4, t);
  IndexSet rows{0, 3}, cols{1, 2};
  Matrix G = gather_block(A, rows, cols);
  Matrix ref = Matrix::Zero(2, 2);
  for (const auto& e : t)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (e.row == rows[a] && e.col == cols[b]) ref(a, b) += e.value;
  CHECK(G == ref);
}

TEST_CASE("scatter: zeros empty the block, tiny entries are dropped") {
  SparseMat A = SparseMat::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 1, 3.0}});
  scatter_block(A, {1, 2}, {1}, Matrix::Zero(2, 1), 0.0);
  CHECK(A.nnz() == 1);
  CHECK(gather_block(A, {1, 2}, {1}).isZero(0.0));

  SparseMat B = SparseMat::from_triplets(2, 2, {{0, 0, 1.0}});
  Matrix blk(2, 2);
  blk << 2.0, 1e-18, 0.5, 3.0;
  scatter_block(B, {0, 1}, {0, 1}, blk, 1e-16);
  CHECK(B.nnz() == 3);
  CHECK(B.coeff(0, 1) == 0.0);
  CHECK(B.coeff(0, 0) == 2.0);
}

TEST_CASE("scatter/gather round trip on random matrices") {
  std::mt19937_64 g(2024);
  std::uniform_int_distribution<int> dim(1, 50);
  std::uniform_real_distribution<double> d(0.0, 0.4);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = dim(g), n = dim(g);
    SparseMat A = random_pattern(g, m, n, d(g));
    IndexSet rows = random_subset(g, m), cols = random_subset(g, n);
    SparseMat blkpat = random_pattern(g, static_cast<int>(rows.size()), static_cast<int>(cols.size()), 0.5);
    Matrix B = blkpat.to_dense();
    Matrix before = A.to_dense();
    scatter_block(A, rows, cols, B, 0.0);
    REQUIRE(gather_block(A, rows, cols) == B);
    // untouched outside the block
    Matrix after = A.to_dense();
    std::set<int> rs(rows.begin(), rows.end()), cs(cols.begin(), cols.end());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (!rs.count(i) || !cs.count(j)) REQUIRE(after(i, j) == before(i, j));
    // no explicit zeros stored
    for (double v : A.values()) REQUIRE(v != 0.0);
  }
}

TEST_CASE("compress keeps row indices strictly increasing") {
  SparseMat A = SparseMat::from_triplets(3, 2, {{2, 0, 1.0}, {0, 0, 1.0}, {1, 0, 0.0}, {1, 1, 4.0}, {1, 1, -4.0}});
  A.compress();
  CHECK(A.nnz() == 2);
  for (int j = 0; j < A.cols(); ++j)
    for (auto k = A.col_begin(j) + 1; k < A.col_end(j); ++k) CHECK(A.rowind()[k - 1] < A.rowind()[k]);
}

TEST_CASE("matvec, transpose and permutation agree with dense") {
  std::mt19937_64 g(5);
  SparseMat A = random_pattern(g, 13, 9, 0.3);
  Matrix D = A.to_dense();
  Vector x = Vector::LinSpaced(9, -1.0, 2.0), y = Vector::LinSpaced(13, 0.5, -0.5);
  CHECK((A * x - D * x).norm() <= 1e-14);
  CHECK((A.transpose_times(y) - D.transpose() * y).norm() <= 1e-14);
  CHECK(A.transpose().to_dense() == D.transpose());
  std::vector<int> rp(13), cp(9);
  for (int i = 0; i < 13; ++i) rp[i] = (i * 5) % 13;
  for (int j = 0; j < 9; ++j) cp[j] = 8 - j;
  Matrix P = A.permuted(rp, cp).to_dense();
  for (int i = 0; i < 13; ++i)
    for (int j = 0; j < 9; ++j) CHECK(P(i, j) == D(rp[i], cp[j]));
}

TEST_CASE("symbolic AtA pattern matches dense product") {
  std::mt19937_64 g(9);
  SparseMat A = random_pattern(g, 30, 30, 0.08);
  Matrix P = A.to_dense().cwiseAbs();
  Matrix G = P.transpose() * P;
  Graph gr = ata_graph(A);
  for (int i = 0; i < 30; ++i) {
    std::set<int> nb(gr.adj[i].begin(), gr.adj[i].end());
    for (int j = 0; j < 30; ++j)
      if (j != i) CHECK((G(i, j) != 0.0) == (nb.count(j) == 1));
  }
}

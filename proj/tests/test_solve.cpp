#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "spaqr/driver.hpp"
#include "spaqr/error.hpp"

using namespace spaqr;

namespace {

struct Built {
  Problem p;
  Equilibrated eq;
  Factorization F;
};

Built build(const std::string& gen, double tol, bool sparsify = true, int skip = 2) {
  Built b;
  RunConfig cfg;
  cfg.gen = gen;
  cfg.tol = tol;
  cfg.sparsify = sparsify;
  cfg.skip = skip;
  b.p = load_problem(cfg);
  b.eq = equilibrate_columns(b.p.A);
  ClusterTree t = build_cluster_tree(Problem{b.p.spec, b.eq.A, b.p.grid}, cfg);
  b.F = spaqr_factor(b.eq.A, t, factor_options(cfg));
  return b;
}

Vector randvec(std::mt19937_64& g, int n) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (auto& x : v) x = d(g);
  return v;
}

}  // namespace

TEST_CASE("identity factorization leaves vectors unchanged") {
  SparseMat I = SparseMat::identity(64);
  ClusterTree t = partition_geometric({8, 8}, 2);
  set_rows(t, assign_rows(I, t, RowHeuristic::cols));
  neighbor_lists(I, t);
  Factorization F = spaqr_factor(I, t, FactorOptions{});
  std::mt19937_64 g(1);
  Vector v = randvec(g, 64);
  CHECK(apply_qt(F, v) == v);
  CHECK(solve_w(F, v) == v);
  CHECK(apply_w(F, v) == v);
}

TEST_CASE("apply_qt is an isometry and solve_w inverts apply_w") {
  for (auto mode : {"scaled", "unscaled"}) {
    RunConfig cfg;
    cfg.gen = "ad2d:n=32,q=1";
    cfg.tol = 1e-2;
    cfg.skip = 0;
    cfg.mode = parse_mode(mode);
    Problem p = load_problem(cfg);
    Equilibrated eq = equilibrate_columns(p.A);
    ClusterTree t = build_cluster_tree(Problem{p.spec, eq.A, p.grid}, cfg);
    Factorization F = spaqr_factor(eq.A, t, factor_options(cfg));
    std::mt19937_64 g(2);
    double iso = 0.0, inv = 0.0;
    for (int k = 0; k < 100; ++k) {
      Vector v = randvec(g, F.N);
      iso = std::max(iso, std::abs(apply_qt(F, v).norm() - v.norm()) / v.norm());
      inv = std::max(inv, (solve_w(F, apply_w(F, v)) - v).norm() / v.norm());
    }
    CHECK(iso <= 1e-13);
    CHECK(inv <= 1e-12);
  }
}

TEST_CASE("exact factorization: Q^T A equals W, direct solve, one GMRES step") {
  Built b = build("rand:n=300,k=4,seed=9", 0.0, false);
  std::mt19937_64 g(3);
  double chain = 0.0;
  for (int k = 0; k < 10; ++k) {
    Vector x = randvec(g, b.F.N);
    chain = std::max(chain, (apply_qt(b.F, b.eq.A * x) - apply_w(b.F, x)).norm() / x.norm());
  }
  CHECK(chain <= 1e-12);

  Vector rhs = make_rhs(b.p.A, 4);
  Preconditioner M{&b.F, b.eq.scale};
  Vector x = M.solve_w(M.apply_qt(rhs));
  CHECK((b.p.A * x - rhs).norm() / rhs.norm() <= 1e-11);

  SolveReport rep;
  gmres(b.p.A, rhs, M, GmresOptions{}, rep);
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
}

TEST_CASE("Laplacian 32x32 at eps = 1e-2 matches a dense solve") {
  Built b = build("ad2d:n=32", 1e-2, true, 0);
  Vector rhs = make_rhs(b.p.A, 5);
  Preconditioner M{&b.F, b.eq.scale};
  SolveReport rep;
  Vector x = gmres(b.p.A, rhs, M, GmresOptions{}, rep);
  CHECK(rep.converged);
  Vector xs = b.p.A.to_dense().partialPivLu().solve(rhs);
  CHECK((x - xs).norm() / xs.norm() <= 1e-9);
}

TEST_CASE("residual history") {
  for (double tol : {1e-1, 1e-3}) {
    Built b = build("ad2d:n=48,a=hc(rho=10,seed=2),q=1", tol);
    SolveReport rep;
    gmres(b.p.A, make_rhs(b.p.A, 6), Preconditioner{&b.F, b.eq.scale}, GmresOptions{}, rep);
    CHECK(rep.converged);
    REQUIRE(rep.history.size() == static_cast<size_t>(rep.iterations + 1));
    CHECK(rep.history.front() == 1.0);
    for (size_t i = 1; i < rep.history.size(); ++i) CHECK(rep.history[i] <= rep.history[i - 1] * (1 + 1e-14) + 1e-14);
    CHECK(rep.history.back() <= 1e-12);
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  Built b = build("ad2d:n=48,q=1", 0.5);
  GmresOptions o;
  o.maxit = 2;
  SolveReport rep;
  gmres(b.p.A, make_rhs(b.p.A, 7), Preconditioner{&b.F, b.eq.scale}, o, rep);
  CHECK(!rep.converged);
  CHECK(rep.iterations == 2);
  CHECK(rep.history.size() == 3);
  CHECK(rep.history.back() > o.tol);
}

TEST_CASE("restarted GMRES also converges") {
  Built b = build("ad2d:n=48,q=1", 1e-1);
  GmresOptions o;
  o.restart = 5;
  SolveReport full, rest;
  Vector rhs = make_rhs(b.p.A, 8);
  Preconditioner M{&b.F, b.eq.scale};
  gmres(b.p.A, rhs, M, GmresOptions{}, full);
  gmres(b.p.A, rhs, M, o, rest);
  CHECK(rest.converged);
  CHECK(rest.iterations >= full.iterations);
}

TEST_CASE("iterations do not increase as eps decreases") {
  int prev = 1 << 30;
  for (double tol : {1e-1, 1e-2, 1e-4}) {
    Built b = build("ad2d:n=63,q=1", tol);
    SolveReport rep;
    gmres(b.p.A, make_rhs(b.p.A, 0), Preconditioner{&b.F, b.eq.scale}, GmresOptions{}, rep);
    CHECK(rep.converged);
    CHECK(rep.iterations <= prev);
    prev = rep.iterations;
  }
}

TEST_CASE("dimension and option errors") {
  Built b = build("ad2d:n=8", 1e-2);
  CHECK_THROWS_AS(apply_qt(b.F, Vector::Zero(5)), BadInput);
  CHECK_THROWS_AS(solve_w(b.F, Vector::Zero(65)), BadInput);
  SolveReport rep;
  GmresOptions o;
  o.tol = 0.0;
  CHECK_THROWS_AS(gmres(b.p.A, Vector::Ones(64), b.F, o, rep), BadInput);
  CHECK_THROWS_AS(gmres(b.p.A, Vector::Ones(63), b.F, GmresOptions{}, rep), BadInput);
}

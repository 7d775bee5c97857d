#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "spaqr/factor.hpp"
#include "spaqr/probgen.hpp"
#include "spaqr/solve.hpp"

namespace spaqr {

struct RunConfig {
  std::string gen;   // generator spec, or
  std::string mtx;   // Matrix Market path
  double tol = 1e-3;
  int levels = 0;    // 0: default_levels(N)
  int skip = 2;
  bool sparsify = true;
  bool scaling = true;
  int scale_every = 1;
  SparsifyMode mode = SparsifyMode::scaled;
  std::optional<RowHeuristic> rows;  // default: cols for generators, matching for files
  std::string partition = "auto";    // auto, geometric, algebraic
  bool equilibrate = true;
  double gmres_tol = 1e-12;
  int maxit = 300;
  std::uint64_t seed = 0;

  std::string echo() const;  // one-line description for CSV headers
};

struct RunResult {
  int N = 0;
  long long nnz = 0;
  int L = 0;
  double t_partition = 0.0;
  double t_factor = 0.0;
  double t_solve = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double memory_bytes = 0.0;
  Factorization F;
  SolveReport report;
};

Problem load_problem(const RunConfig& cfg);
// Builds the cluster tree with rows and neighbor lists for A.
ClusterTree build_cluster_tree(const Problem& p, const RunConfig& cfg);
FactorOptions factor_options(const RunConfig& cfg);
// b = A x with x uniform in [-1, 1]
Vector make_rhs(const SparseMat& A, std::uint64_t seed);

// partition -> rows -> equilibrate -> factor -> GMRES
RunResult run_solve(const RunConfig& cfg);
RunResult run_solve(const Problem& p, const RunConfig& cfg);

}  // namespace spaqr

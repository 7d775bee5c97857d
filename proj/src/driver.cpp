#include "spaqr/driver.hpp"

#include <chrono>
#include <sstream>

#include "spaqr/report.hpp"

namespace spaqr {

namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string RunConfig::echo() const {
  std::ostringstream os;
  os << (gen.empty() ? "mtx=" + mtx : "gen=" + gen) << " tol=" << fmt(tol) << " levels=" << levels
     << " skip=" << skip << " sparsify=" << sparsify << " scaling=" << scaling << " scale_every=" << scale_every
     << " mode=" << to_string(mode) << " rows=" << (rows ? to_string(*rows) : "default")
     << " partition=" << partition << " gmres_tol=" << fmt(gmres_tol) << " maxit=" << maxit << " seed=" << seed;
  return os.str();
}

Problem load_problem(const RunConfig& cfg) {
  if (cfg.gen.empty() == cfg.mtx.empty()) throw BadInput("exactly one of --gen or --mtx is required");
  if (!cfg.gen.empty()) return make_problem(cfg.gen);
  Problem p;
  p.spec = cfg.mtx;
  p.A = read_matrix_market(cfg.mtx);
  if (p.A.rows() != p.A.cols()) throw BadInput("matrix is not square");
  return p;
}

ClusterTree build_cluster_tree(const Problem& p, const RunConfig& cfg) {
  const int N = p.A.rows();
  const int L = cfg.levels > 0 ? cfg.levels : default_levels(N);
  std::string how = cfg.partition;
  if (how == "auto") how = p.grid.empty() ? "algebraic" : "geometric";
  ClusterTree tree;
  if (how == "geometric") {
    if (p.grid.empty()) throw BadInput("geometric partitioning needs a grid problem");
    tree = partition_geometric(p.grid, L);
  } else if (how == "algebraic") {
    tree = partition_algebraic(p.A, L);
  } else {
    throw BadInput("unknown partitioner '" + how + "' (auto, geometric, algebraic)");
  }
  RowHeuristic h = cfg.rows ? *cfg.rows : (cfg.mtx.empty() ? RowHeuristic::cols : RowHeuristic::matching);
  set_rows(tree, assign_rows(p.A, tree, h));
  neighbor_lists(p.A, tree);
  return tree;
}

FactorOptions factor_options(const RunConfig& cfg) {
  FactorOptions o;
  o.tol = cfg.tol;
  o.sparsify = cfg.sparsify;
  o.skip = cfg.skip;
  o.mode = cfg.mode;
  if (!cfg.scaling && o.mode == SparsifyMode::scaled) o.mode = SparsifyMode::unscaled;
  o.scale_every = cfg.scale_every;
  return o;
}

Vector make_rhs(const SparseMat& A, std::uint64_t seed) {
  auto rng = make_rng(seed, 3);
  Vector x(A.cols());
  for (auto& v : x) v = 2.0 * uniform01(rng) - 1.0;
  return A * x;
}

RunResult run_solve(const Problem& p, const RunConfig& cfg) {
  if (!(cfg.tol >= 0.0 && cfg.tol < 1.0)) throw BadInput("--tol must lie in [0, 1)");
  RunResult res;
  res.N = p.A.rows();
  res.nnz = p.A.nnz();
  auto t0 = std::chrono::steady_clock::now();
  Equilibrated eq;
  if (cfg.equilibrate) {
    eq = equilibrate_columns(p.A);
  } else {
    eq.A = p.A;
  }
  Problem scaled{p.spec, eq.A, p.grid};
  ClusterTree tree = build_cluster_tree(scaled, cfg);
  res.L = tree.L;
  res.t_partition = since(t0);

  res.F = spaqr_factor(eq.A, tree, factor_options(cfg));
  res.t_factor = res.F.factor_seconds;
  res.memory_bytes = res.F.memory_bytes();

  Preconditioner M{&res.F, eq.scale};
  GmresOptions go;
  go.tol = cfg.gmres_tol;
  go.maxit = cfg.maxit;
  Vector b = make_rhs(p.A, cfg.seed);
  t0 = std::chrono::steady_clock::now();
  gmres(p.A, b, M, go, res.report);
  res.t_solve = since(t0);
  res.iterations = res.report.iterations;
  res.residual = res.report.history.back();
  res.converged = res.report.converged;
  return res;
}

RunResult run_solve(const RunConfig& cfg) { return run_solve(load_problem(cfg), cfg); }

}  // namespace spaqr

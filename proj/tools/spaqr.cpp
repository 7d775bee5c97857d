#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "spaqr/audit.hpp"
#include "spaqr/driver.hpp"
#include "spaqr/report.hpp"

using namespace spaqr;

namespace {

enum Exit { ok = 0, internal = 1, not_converged = 2, singular = 3, bad_input = 4 };

struct Common {
  RunConfig cfg;
  std::string rows, mode = "scaled";
  bool no_scaling = false, no_sparsify = false, no_equilibrate = false;

  RunConfig resolve() const {
    RunConfig c = cfg;
    c.scaling = !no_scaling;
    c.sparsify = !no_sparsify;
    c.equilibrate = !no_equilibrate;
    c.mode = parse_mode(mode);
    if (!rows.empty()) c.rows = parse_row_heuristic(rows);
    if (c.skip < 0) throw BadInput("--skip must be >= 0");
    if (c.scale_every < 1) throw BadInput("--scale-every must be >= 1");
    if (!(c.gmres_tol > 0.0)) throw BadInput("--gmres-tol must be positive");
    if (c.maxit < 1) throw BadInput("--maxit must be >= 1");
    return c;
  }
};

// everything except the problem source and tol, which sweep takes as lists
void add_knobs(CLI::App* app, Common& o) {
  app->add_option("--levels", o.cfg.levels, "tree levels (0: automatic)");
  app->add_option("--skip", o.cfg.skip, "levels eliminated before sparsifying");
  app->add_flag("--no-scaling", o.no_scaling, "skip interface scaling");
  app->add_flag("--no-sparsify", o.no_sparsify, "plain nested dissection QR");
  app->add_flag("--no-equilibrate", o.no_equilibrate, "keep the original column norms");
  app->add_option("--scale-every", o.cfg.scale_every, "scale on every k-th stage");
  app->add_option("--mode", o.mode, "scaled, unscaled, variant1, variant2");
  app->add_option("--rows", o.rows, "cols, maxweight, matching");
  app->add_option("--partition", o.cfg.partition, "auto, geometric, algebraic");
  app->add_option("--gmres-tol", o.cfg.gmres_tol, "relative residual target");
  app->add_option("--maxit", o.cfg.maxit, "GMRES iteration cap");
  app->add_option("--seed", o.cfg.seed, "right-hand side seed");
}

void add_source(CLI::App* app, Common& o) {
  auto* g = app->add_option("--gen", o.cfg.gen, "generator spec, e.g. ad2d:n=127,q=1");
  auto* m = app->add_option("--mtx", o.cfg.mtx, "Matrix Market file");
  g->excludes(m);
  app->add_option("--tol", o.cfg.tol, "sparsification tolerance in [0, 1)");
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw BadInput("cannot open " + path + " for writing");
  body(f);
}

void print_summary(const RunConfig& c, const RunResult& r) {
  std::printf("N=%d nnz=%lld eps=%s levels=%d t_partition=%.3f t_factor=%.3f t_solve=%.3f iterations=%d "
              "residual=%.3e converged=%d memory_mb=%.2f\n",
              r.N, r.nnz, fmt(c.tol).c_str(), r.L, r.t_partition, r.t_factor, r.t_solve, r.iterations, r.residual,
              r.converged ? 1 : 0, r.memory_bytes / 1048576.0);
}

int cmd_solve(const Common& o, const std::string& stats, const std::string& hist) {
  RunConfig c = o.resolve();
  RunResult r = run_solve(c);
  print_summary(c, r);
  write_file(stats, [&](std::ostream& f) { write_stats_csv(f, r.F, c.echo()); });
  write_file(hist, [&](std::ostream& f) { write_history_csv(f, r.report, c.echo()); });
  if (!r.converged) {
    std::fprintf(stderr, "error: class=not-converged iterations=%d residual=%.3e\n", r.iterations, r.residual);
    return not_converged;
  }
  return ok;
}

int cmd_sweep(const Common& o, const std::vector<std::string>& gens, const std::vector<double>& tols,
              bool compare_scaling, const std::string& out) {
  if (gens.empty() || tols.empty()) throw BadInput("sweep needs at least one --gen and one --tol");
  RunConfig base = o.resolve();
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw BadInput("cannot open " + out + " for writing");
  }
  std::ostream& os = out.empty() ? std::cout : file;
  RunConfig shown = base;
  for (const auto& g : gens) shown.gen += (shown.gen.empty() ? "" : ";") + g;
  os << "# " << shown.echo() << '\n';
  os << "gen,tol,scaling,N,nnz,levels,iterations,converged,residual,t_partition,t_factor,t_solve,memory_bytes,error\n";
  std::vector<bool> scalings{base.scaling};
  if (compare_scaling) scalings = {true, false};
  for (const auto& g : gens)
    for (double t : tols)
      for (bool s : scalings) {
        RunConfig c = base;
        c.gen = g;
        c.mtx.clear();
        c.tol = t;
        c.scaling = s;
        os << '"' << g << "\"," << fmt(t) << ',' << s << ',';
        try {
          RunResult r = run_solve(c);
          os << r.N << ',' << r.nnz << ',' << r.L << ',' << r.iterations << ',' << r.converged << ','
             << fmt(r.residual) << ',' << fmt(r.t_partition) << ',' << fmt(r.t_factor) << ',' << fmt(r.t_solve)
             << ',' << fmt(r.memory_bytes) << ",\n";
        } catch (const Error& e) {
          os << ",,,,,,,,,," << to_string(e.error_class()) << '\n';
        }
        os.flush();
      }
  return ok;
}

int cmd_audit(const Common& o, const std::string& stats) {
  RunConfig c = o.resolve();
  Problem p = load_problem(c);
  if (p.A.rows() > kAuditMaxN)
    throw BadInput("audit refuses N = " + std::to_string(p.A.rows()) + " > " + std::to_string(kAuditMaxN));
  SparseMat A = p.A;
  if (c.equilibrate) A = equilibrate_columns(p.A).A;
  ClusterTree tree = build_cluster_tree(Problem{p.spec, A, p.grid}, c);
  Factorization F;
  AuditReport a = run_audit(A, tree, factor_options(c), &F);
  std::printf("N=%d eps=%s levels=%d dev_fro=%.3e dev_2=%.3e kappa=%.6g kappa_bound=%.6g kappa_ok=%d "
              "max_unrelated=%.3e a_norm2=%.6g sparsifications=%d nofill_checks=%lld nofill_violations=%lld\n",
              a.N, fmt(c.tol).c_str(), tree.L, a.dev_fro, a.dev_2, a.kappa, a.kappa_bound,
              a.kappa <= a.kappa_bound * (1 + 1e-10) ? 1 : 0, a.max_unrelated, a.a_norm2, a.sparsifications,
              a.nofill_checks, a.nofill_violations);
  write_file(stats, [&](std::ostream& f) { write_stats_csv(f, F, c.echo()); });
  return ok;
}

int cmd_partition(const Common& o, const std::string& out) {
  RunConfig c = o.resolve();
  Problem p = load_problem(c);
  ClusterTree tree = build_cluster_tree(p, c);
  std::fprintf(stderr, "N=%d levels=%d separator_violations=%lld\n", p.A.rows(), tree.L,
               separator_violations(p.A, tree));
  if (out.empty()) {
    write_tree_json(tree, std::cout);
  } else {
    write_file(out, [&](std::ostream& f) { write_tree_json(tree, f); });
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spaqr: sparsified nested dissection QR preconditioner with GMRES"};
  app.require_subcommand(1);

  Common so, wo, ao, po;
  std::string stats, hist, audit_stats, tree_out, sweep_out;
  std::vector<std::string> sweep_gens;
  std::vector<double> sweep_tols;
  bool compare_scaling = false;

  auto* solve = app.add_subcommand("solve", "factor and run GMRES");
  add_source(solve, so);
  add_knobs(solve, so);
  solve->add_option("--stats", stats, "per-stage statistics CSV");
  solve->add_option("--hist", hist, "residual history CSV");

  auto* sweep = app.add_subcommand("sweep", "grid of generators x tolerances");
  sweep->add_option("--gen", sweep_gens, "generator spec (repeatable)")->required();
  sweep->add_option("--tol", sweep_tols, "tolerance (repeatable)")->required();
  sweep->add_flag("--compare-scaling", compare_scaling, "run each cell with and without scaling");
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");
  add_knobs(sweep, wo);

  auto* audit = app.add_subcommand("audit", "dense check of a small factorization");
  add_source(audit, ao);
  add_knobs(audit, ao);
  audit->add_option("--stats", audit_stats, "per-stage statistics CSV");

  auto* part = app.add_subcommand("partition", "print the cluster tree as JSON");
  add_source(part, po);
  add_knobs(part, po);
  part->add_option("--out", tree_out, "JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? ok : bad_input;
  }

  try {
    if (*solve) return cmd_solve(so, stats, hist);
    if (*sweep) return cmd_sweep(wo, sweep_gens, sweep_tols, compare_scaling, sweep_out);
    if (*audit) return cmd_audit(ao, audit_stats);
    if (*part) return cmd_partition(po, tree_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: class=%s message=%s\n", to_string(e.error_class()), e.what());
    return e.error_class() == ErrorClass::bad_input ? bad_input : singular;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: class=internal message=%s\n", e.what());
    return internal;
  }
  return ok;
}

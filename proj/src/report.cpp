#include "spaqr/report.hpp"

#include <charconv>
#include <ostream>

namespace spaqr {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_stats_csv(std::ostream& out, const Factorization& F, const std::string& config) {
  out << "# " << config << '\n';
  out << "stage,level,eliminated,eliminated_cols,interfaces,"
         "size_min,size_q1,size_median,size_q3,size_max,"
         "rank_min,rank_q1,rank_median,rank_q3,rank_max,"
         "fine,block_nnz,active_cols,t_factor,t_scale,t_sparsify,t_merge,"
         "max_dropped,max_dropped_rel,unrelated_fill,max_unrelated_drop\n";
  for (const auto& s : F.stats) {
    Quartiles b = quartiles(s.sizes_before), a = quartiles(s.sizes_after);
    out << s.stage << ',' << s.level << ',' << s.eliminated << ',' << s.eliminated_cols << ',' << s.interfaces;
    for (double v : {b.min, b.q1, b.median, b.q3, b.max, a.min, a.q1, a.median, a.q3, a.max}) out << ',' << fmt(v);
    out << ',' << s.fine << ',' << s.block_nnz << ',' << s.active_cols;
    for (double v : {s.t_factor, s.t_scale, s.t_sparsify, s.t_merge, s.max_dropped, s.max_dropped_rel})
      out << ',' << fmt(v);
    out << ',' << s.unrelated_fill << ',' << fmt(s.max_unrelated_drop) << '\n';
  }
}

void write_history_csv(std::ostream& out, const SolveReport& rep, const std::string& config) {
  out << "# " << config << '\n';
  out << "iteration,relative_residual\n";
  for (size_t i = 0; i < rep.history.size(); ++i) out << i << ',' << fmt(rep.history[i]) << '\n';
}

}  // namespace spaqr

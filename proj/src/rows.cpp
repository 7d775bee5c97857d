#include <algorithm>
#include <map>
#include <numeric>

#include "spaqr/ordering.hpp"

namespace spaqr {

RowHeuristic parse_row_heuristic(const std::string& s) {
  if (s == "cols") return RowHeuristic::cols;
  if (s == "maxweight") return RowHeuristic::maxweight;
  if (s == "matching") return RowHeuristic::matching;
  throw BadInput("unknown row heuristic '" + s + "' (cols, maxweight, matching)");
}

const char* to_string(RowHeuristic h) {
  switch (h) {
    case RowHeuristic::cols: return "cols";
    case RowHeuristic::maxweight: return "maxweight";
    case RowHeuristic::matching: return "matching";
  }
  return "?";
}

namespace {

// Per row: (cluster, sum of squares) pairs sorted by cluster.
std::vector<std::vector<std::pair<int, double>>> row_weights(const SparseMat& A, const std::vector<int>& col_cluster) {
  SparseMat At = A.transpose();
  std::vector<std::vector<std::pair<int, double>>> w(A.rows());
  std::map<int, double> acc;
  for (int i = 0; i < At.cols(); ++i) {
    acc.clear();
    for (auto k = At.col_begin(i); k < At.col_end(i); ++k) {
      double v = At.values()[k];
      acc[col_cluster[At.rowind()[k]]] += v * v;
    }
    w[i].assign(acc.begin(), acc.end());
  }
  return w;
}

double weight_in(const std::vector<std::pair<int, double>>& w, int c) {
  auto it = std::lower_bound(w.begin(), w.end(), std::make_pair(c, -1.0));
  return (it != w.end() && it->first == c) ? it->second : 0.0;
}

}  // namespace

std::vector<int> max_weight_rows(const SparseMat& A, const ClusterTree& tree) {
  auto col_cluster = tree.leaf_cluster_of_cols();
  auto w = row_weights(A, col_cluster);
  std::vector<int> out(A.rows(), -1);
  for (int i = 0; i < A.rows(); ++i) {
    double best = -1.0;
    for (auto [c, s] : w[i])
      if (s > best) {
        best = s;
        out[i] = c;
      }
    if (out[i] < 0) throw BadInput("matrix is structurally singular: row " + std::to_string(i) + " is empty");
  }
  return out;
}

std::vector<int> match_columns(const SparseMat& A) {
  if (A.rows() != A.cols()) throw BadInput("match_columns: matrix must be square");
  const int n = A.cols();
  std::vector<int> row_of(n, -1), col_of(n, -1);
  // greedy pass on entries by decreasing magnitude
  std::vector<std::int64_t> idx(A.nnz());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> colid(A.nnz());
  for (int j = 0; j < n; ++j)
    for (auto k = A.col_begin(j); k < A.col_end(j); ++k) colid[k] = j;
  std::stable_sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
    return std::abs(A.values()[a]) > std::abs(A.values()[b]);
  });
  for (auto k : idx) {
    if (A.values()[k] == 0.0) continue;
    int i = A.rowind()[k], j = colid[k];
    if (row_of[j] < 0 && col_of[i] < 0) {
      row_of[j] = i;
      col_of[i] = j;
    }
  }
  // augmenting paths for the remaining columns
  std::vector<int> visited(n, -1);
  std::vector<std::pair<int, std::int64_t>> stack;
  std::vector<int> via(n, -1);  // column from which a row was reached
  int deficiency = 0;
  for (int j0 = 0; j0 < n; ++j0) {
    if (row_of[j0] >= 0) continue;
    stack.assign(1, {j0, A.col_begin(j0)});
    int found = -1;
    while (!stack.empty() && found < 0) {
      auto& [j, k] = stack.back();
      if (k == A.col_end(j)) {
        stack.pop_back();
        continue;
      }
      int i = A.rowind()[k++];
      if (visited[i] == j0) continue;
      visited[i] = j0;
      via[i] = j;
      if (col_of[i] < 0) found = i;
      else stack.push_back({col_of[i], A.col_begin(col_of[i])});
    }
    if (found < 0) {
      ++deficiency;
      continue;
    }
    for (int i = found; i >= 0;) {
      int j = via[i];
      int prev = row_of[j];
      row_of[j] = i;
      col_of[i] = j;
      i = (j == j0) ? -1 : prev;
    }
  }
  if (deficiency > 0)
    throw BadInput("matrix is structurally singular: no perfect matching (structural rank deficiency " +
                   std::to_string(deficiency) + ")");
  return row_of;
}

RowAssignment assign_rows(const SparseMat& A, const ClusterTree& tree, RowHeuristic h) {
  if (A.rows() != tree.N || A.cols() != tree.N) throw BadInput("assign_rows: matrix does not match tree");
  auto col_cluster = tree.leaf_cluster_of_cols();
  RowAssignment ra;
  ra.order.resize(tree.N);
  std::iota(ra.order.begin(), ra.order.end(), 0);
  if (h == RowHeuristic::cols) {
    ra.cluster = col_cluster;
    return ra;
  }
  if (h == RowHeuristic::matching) {
    auto row_of = match_columns(A);
    ra.cluster.assign(tree.N, -1);
    for (int j = 0; j < tree.N; ++j) {
      ra.cluster[row_of[j]] = col_cluster[j];
      ra.order[row_of[j]] = j;
    }
    return ra;
  }

  ra.cluster = max_weight_rows(A, tree);
  auto w = row_weights(A, col_cluster);
  const auto& leaf = tree.leaf_stage().clusters;
  const int nc = static_cast<int>(leaf.size());
  std::vector<int> count(nc, 0), cap(nc);
  for (int c = 0; c < nc; ++c) cap[c] = static_cast<int>(leaf[c].cols.size());
  for (int c : ra.cluster) count[c]++;
  std::vector<std::vector<int>> members(nc);
  for (int i = 0; i < tree.N; ++i) members[ra.cluster[i]].push_back(i);
  bool moved = true;
  while (moved) {
    moved = false;
    for (int c = 0; c < nc; ++c) {
      if (count[c] <= cap[c]) continue;
      auto& m = members[c];
      std::stable_sort(m.begin(), m.end(), [&](int a, int b) { return weight_in(w[a], c) < weight_in(w[b], c); });
      int excess = count[c] - cap[c];
      std::vector<int> evicted(m.begin(), m.begin() + excess);
      m.erase(m.begin(), m.begin() + excess);
      for (int i : evicted) {
        int to = -1;
        double best = 0.0;
        for (auto [d, s] : w[i])
          if (d != c && count[d] < cap[d] && s > best) {
            best = s;
            to = d;
          }
        if (to < 0)
          for (int nb : leaf[c].neighbors)
            if (count[nb] < cap[nb]) {
              to = nb;
              break;
            }
        if (to < 0)
          for (int d = 0; d < nc; ++d)
            if (count[d] < cap[d]) {
              to = d;
              break;
            }
        count[c]--;
        count[to]++;
        ra.cluster[i] = to;
        members[to].push_back(i);
      }
      moved = true;
    }
  }
  return ra;
}

}  // namespace spaqr

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <queue>

#include "spaqr/ordering.hpp"

namespace spaqr {

namespace {

struct Split {
  std::vector<int> left, sep, right;
};

using Bisector = std::function<Split(const std::vector<int>& I, TreeNode node)>;

// Modified nested dissection: recursion on interior I with the boundary B of
// previously chosen separator nodes that border I.
class Dissection {
 public:
  Dissection(const Graph& g, int L, Bisector bisect)
      : g_(g), L_(L), bisect_(std::move(bisect)), keys_(g.size()), stamp_(g.size(), -1), side_(g.size(), 0) {}

  std::vector<ClusterKey> run(std::vector<int> I, const std::vector<int>& forced_root_sep) {
    recurse({1, 0}, std::move(I), {}, forced_root_sep);
    return std::move(keys_);
  }

 private:
  void recurse(TreeNode node, std::vector<int> I, std::vector<int> B, const std::vector<int>& forced) {
    if (node.level == L_) {
      for (int j : I) keys_[j] = {node, node, node};
      return;
    }
    Split s = bisect_(I, node);
    s.sep.insert(s.sep.end(), forced.begin(), forced.end());
    const TreeNode c0 = node.child(0), c1 = node.child(1);
    const int id = ++call_;
    for (int j : s.left) mark(j, id, 0);
    for (int j : s.right) mark(j, id, 1);
    for (int j : s.sep) {
      mark(j, id, 2);
      keys_[j] = {node, c0, c1};
    }
    std::vector<int> BL, BR;
    for (int b : B) {
      auto [adj_l, adj_r] = touches(b, id);
      TreeNode target = adj_l && !adj_r ? c0 : (!adj_l && adj_r ? c1 : node);
      ClusterKey& k = keys_[b];
      if (k.left == node) k.left = target;
      else if (k.right == node) k.right = target;
      if (target == c0) BL.push_back(b);
      if (target == c1) BR.push_back(b);
    }
    for (int j : s.sep) {
      auto [adj_l, adj_r] = touches(j, id);
      if (adj_l) BL.push_back(j);
      if (adj_r) BR.push_back(j);
    }
    recurse(c0, std::move(s.left), std::move(BL), {});
    recurse(c1, std::move(s.right), std::move(BR), {});
  }

  void mark(int j, int id, int side) {
    stamp_[j] = id;
    side_[j] = side;
  }

  std::pair<bool, bool> touches(int j, int id) const {
    bool l = false, r = false;
    for (int k : g_.adj[j]) {
      if (stamp_[k] != id) continue;
      if (side_[k] == 0) l = true;
      else if (side_[k] == 1) r = true;
    }
    return {l, r};
  }

  const Graph& g_;
  int L_;
  Bisector bisect_;
  std::vector<ClusterKey> keys_;
  std::vector<int> stamp_, side_;
  int call_ = 0;
};

// Moves left nodes that touch the right part into the separator.
void close_separator(const Graph& g, Split& s, std::vector<int>& side) {
  for (int j : s.right) side[j] = 1;
  std::vector<int> keep;
  for (int j : s.left) {
    bool bad = false;
    for (int k : g.adj[j])
      if (side[k] == 1) bad = true;
    (bad ? s.sep : keep).push_back(j);
  }
  s.left = std::move(keep);
  for (int j : s.right) side[j] = 0;
  std::sort(s.sep.begin(), s.sep.end());
}

}  // namespace

ClusterTree partition_geometric(const std::vector<int>& dims, int L) {
  if (dims.empty() || dims.size() > 3) throw BadInput("partition_geometric: grid must be 1D, 2D or 3D");
  for (int d : dims)
    if (d < 1) throw BadInput("partition_geometric: grid dimensions must be positive");
  if (L < 1) throw BadInput("partition_geometric: L must be >= 1");
  SparseMat P = stencil_pattern(dims);
  Graph g = ata_graph(P);
  const int N = P.cols();
  const int D = static_cast<int>(dims.size());
  auto coord = [&](int j) {
    std::array<int, 3> c{0, 0, 0};
    c[0] = j % dims[0];
    if (D > 1) c[1] = (j / dims[0]) % dims[1];
    if (D > 2) c[2] = j / (dims[0] * dims[1]);
    return c;
  };
  std::vector<int> scratch(N, 0);
  auto bisect = [&](const std::vector<int>& I, TreeNode node) {
    if (I.empty()) throw BadInput("partition_geometric: too many levels, domain at level " +
                                  std::to_string(node.level) + " is empty");
    std::array<int, 3> lo{1 << 30, 1 << 30, 1 << 30}, hi{-1, -1, -1};
    for (int j : I) {
      auto c = coord(j);
      for (int d = 0; d < D; ++d) {
        lo[d] = std::min(lo[d], c[d]);
        hi[d] = std::max(hi[d], c[d]);
      }
    }
    int best = 0;
    for (int d = 1; d < D; ++d)
      if (hi[d] - lo[d] > hi[best] - lo[best]) best = d;
    int extent = hi[best] - lo[best] + 1;
    int m = lo[best] + (extent - 2) / 2;
    if (extent < 4)
      throw BadInput("partition_geometric: too many levels, a domain of extent " + std::to_string(extent) +
                     " at level " + std::to_string(node.level) + " would leave an empty leaf");
    Split s;
    for (int j : I) {
      int x = coord(j)[best];
      if (x < m) s.left.push_back(j);
      else if (x > m + 1) s.right.push_back(j);
      else s.sep.push_back(j);
    }
    close_separator(g, s, scratch);
    return s;
  };
  std::vector<int> all(N);
  std::iota(all.begin(), all.end(), 0);
  Dissection nd(g, L, bisect);
  ClusterTree tree = build_tree(N, L, nd.run(std::move(all), {}));
  tree.dims = dims;
  return tree;
}

namespace {

// BFS levels of the subgraph induced by `in` (local ids) from `start`.
std::vector<std::vector<int>> bfs_levels(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<std::vector<int>> levels;
  std::vector<int> dist(adj.size(), -1);
  std::vector<int> frontier{start};
  dist[start] = 0;
  while (!frontier.empty()) {
    levels.push_back(frontier);
    std::vector<int> next;
    for (int u : frontier)
      for (int v : adj[u])
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          next.push_back(v);
        }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  return levels;
}

Split bisect_algebraic(const Graph& g, const std::vector<int>& I, std::vector<int>& local) {
  Split s;
  const int n = static_cast<int>(I.size());
  if (n == 0) return s;
  for (int a = 0; a < n; ++a) local[I[a]] = a;
  std::vector<std::vector<int>> adj(n);
  for (int a = 0; a < n; ++a)
    for (int k : g.adj[I[a]])
      if (local[k] >= 0) adj[a].push_back(local[k]);

  // connected components
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> comps;
  for (int a = 0; a < n; ++a) {
    if (comp[a] >= 0) continue;
    std::vector<int> members{a};
    comp[a] = static_cast<int>(comps.size());
    for (size_t q = 0; q < members.size(); ++q)
      for (int v : adj[members[q]])
        if (comp[v] < 0) {
          comp[v] = comp[a];
          members.push_back(v);
        }
    comps.push_back(std::move(members));
  }
  auto finish = [&]() {
    for (int j : I) local[j] = -1;
    std::sort(s.left.begin(), s.left.end());
    std::sort(s.right.begin(), s.right.end());
    std::sort(s.sep.begin(), s.sep.end());
    return s;
  };
  if (comps.size() > 1) {
    std::stable_sort(comps.begin(), comps.end(), [](const auto& x, const auto& y) { return x.size() > y.size(); });
    for (auto& c : comps) {
      auto& dst = s.left.size() <= s.right.size() ? s.left : s.right;
      for (int a : c) dst.push_back(I[a]);
    }
    return finish();
  }

  // pseudo-peripheral start node
  int start = 0;
  auto levels = bfs_levels(adj, start);
  for (int it = 0; it < 8; ++it) {
    const auto& last = levels.back();
    int cand = last.front();
    for (int v : last)
      if (adj[v].size() < adj[cand].size()) cand = v;
    auto lv = bfs_levels(adj, cand);
    if (lv.size() <= levels.size()) break;
    levels = std::move(lv);
    start = cand;
  }
  const int nl = static_cast<int>(levels.size());
  if (nl < 3) {
    for (int a = 0; a < n; ++a) s.left.push_back(I[a]);
    return finish();
  }
  std::vector<int> prefix(nl + 1, 0);
  for (int k = 0; k < nl; ++k) prefix[k + 1] = prefix[k] + static_cast<int>(levels[k].size());
  int best = 1;
  long best_cost = -1;
  for (int k = 1; k < nl - 1; ++k) {
    long before = prefix[k], after = n - prefix[k + 1];
    long cost = std::abs(before - after);
    if (best_cost < 0 || cost < best_cost) {
      best_cost = cost;
      best = k;
    }
  }
  std::vector<int> side(n, 0);  // 0 left, 1 right, 2 sep
  for (int k = 0; k < nl; ++k)
    for (int v : levels[k]) side[v] = k < best ? 0 : (k == best ? 2 : 1);
  // release separator nodes that only touch one side
  std::vector<int> cnt(2, 0);
  for (int a = 0; a < n; ++a)
    if (side[a] < 2) cnt[side[a]]++;
  std::vector<int> sep_nodes = levels[best];
  for (int v : sep_nodes) {
    bool l = false, r = false;
    for (int w : adj[v]) {
      if (side[w] == 0) l = true;
      if (side[w] == 1) r = true;
    }
    if (l && r) continue;
    int to = (!l && !r) ? (cnt[0] <= cnt[1] ? 0 : 1) : (l ? 0 : 1);
    side[v] = to;
    cnt[to]++;
  }
  for (int a = 0; a < n; ++a) (side[a] == 0 ? s.left : side[a] == 1 ? s.right : s.sep).push_back(I[a]);
  return finish();
}

}  // namespace

ClusterTree partition_algebraic(const SparseMat& A, int L) {
  if (A.rows() != A.cols()) throw BadInput("partition_algebraic: matrix must be square");
  if (L < 1) throw BadInput("partition_algebraic: L must be >= 1");
  const int N = A.cols();
  double avg = N > 0 ? static_cast<double>(A.nnz()) / A.rows() : 0.0;
  int cap = std::max(1, static_cast<int>(std::ceil(10.0 * avg)));
  std::vector<int> heavy;
  Graph g = ata_graph(A, cap, &heavy);

  std::vector<char> forced_mark(N, 0);
  std::vector<int> forced;
  if (L > 1 && !heavy.empty()) {
    SparseMat At = A.transpose();
    for (int i : heavy)
      for (auto k = At.col_begin(i); k < At.col_end(i); ++k) forced_mark[At.rowind()[k]] = 1;
    for (int j = 0; j < N; ++j)
      if (forced_mark[j]) forced.push_back(j);
  }
  std::vector<int> I;
  for (int j = 0; j < N; ++j)
    if (!forced_mark[j]) I.push_back(j);
  std::vector<int> local(N, -1);
  auto bisect = [&](const std::vector<int>& dom, TreeNode) { return bisect_algebraic(g, dom, local); };
  Dissection nd(g, L, bisect);
  return build_tree(N, L, nd.run(std::move(I), forced));
}

}  // namespace spaqr

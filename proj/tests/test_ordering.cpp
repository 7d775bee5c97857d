#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spaqr/error.hpp"
#include "spaqr/ordering.hpp"
#include "spaqr/probgen.hpp"

using namespace spaqr;

namespace {

// dense symbolic AtA, diagonal excluded
std::vector<std::vector<bool>> ata_dense(const SparseMat& A) {
  Matrix P = A.to_dense().cwiseAbs();
  P = (P.array() != 0.0).cast<double>().matrix();
  Matrix G = P.transpose() * P;
  std::vector<std::vector<bool>> adj(A.cols(), std::vector<bool>(A.cols(), false));
  for (int i = 0; i < A.cols(); ++i)
    for (int j = 0; j < A.cols(); ++j) adj[i][j] = i != j && G(i, j) != 0.0;
  return adj;
}

// vertices reachable from `from` without entering `blocked`
std::set<int> reach(const std::vector<std::vector<bool>>& adj, const std::vector<int>& from, const std::set<int>& blocked) {
  std::set<int> seen(from.begin(), from.end());
  std::queue<int> q;
  for (int v : from) q.push(v);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w = 0; w < static_cast<int>(adj.size()); ++w)
      if (adj[v][w] && !blocked.count(w) && seen.insert(w).second) q.push(w);
  }
  return seen;
}

// columns whose key lies in the subtree of node
std::vector<int> subtree_cols(const ClusterTree& t, TreeNode node) {
  std::vector<int> out;
  for (int j = 0; j < t.N; ++j)
    if (node.ancestor_of(t.col_key[j].self)) out.push_back(j);
  return out;
}

void check_root_split(const SparseMat& A, const ClusterTree& t) {
  auto adj = ata_dense(A);
  std::set<int> sep;
  for (int j = 0; j < t.N; ++j)
    if (t.col_key[j].self.level == 1) sep.insert(j);
  auto a = subtree_cols(t, {2, 0}), b = subtree_cols(t, {2, 1});
  CHECK(a.size() + b.size() + sep.size() == static_cast<size_t>(t.N));
  if (a.empty() || b.empty()) return;
  std::set<int> r = reach(adj, a, sep);
  for (int v : b) CHECK(r.count(v) == 0);
}

ClusterTree full_tree(const SparseMat& A, ClusterTree t, RowHeuristic h = RowHeuristic::cols) {
  set_rows(t, assign_rows(A, t, h));
  neighbor_lists(A, t);
  return t;
}

}  // namespace

TEST_CASE("geometric 4x4, L = 1: one interior") {
  ClusterTree t = partition_geometric({4, 4}, 1);
  REQUIRE(t.stages.size() == 1);
  REQUIRE(t.stages[0].clusters.size() == 1);
  CHECK(t.stages[0].clusters[0].cols.size() == 16);
  CHECK(t.stages[0].clusters[0].kind == ClusterKind::interior);
  CHECK(t.separator_sizes() == std::vector<int>{0});
}

TEST_CASE("geometric 4x4, L = 2: separator disconnects AtA") {
  ClusterTree t = partition_geometric({4, 4}, 2);
  SparseMat A = stencil_pattern({4, 4});
  CHECK(t.separator_sizes()[0] == 8);
  CHECK(subtree_cols(t, {2, 0}).size() == 4);
  CHECK(subtree_cols(t, {2, 1}).size() == 4);
  check_root_split(A, t);
  CHECK(separator_violations(A, t) == 0);
}

TEST_CASE("geometric: too many levels is an error") {
  CHECK_THROWS_AS(partition_geometric({4, 4}, 4), BadInput);
}

TEST_CASE("default level count") {
  CHECK(default_levels(127LL * 127) == 8);
  CHECK(default_levels(255LL * 255) == 10);
  CHECK(default_levels(64) == 1);
}

TEST_CASE("algebraic: diagonal matrix gives an empty separator") {
  SparseMat A = SparseMat::identity(16);
  ClusterTree t = partition_algebraic(A, 2);
  CHECK(t.separator_sizes()[0] == 0);
  CHECK(subtree_cols(t, {2, 0}).size() == 8);
  CHECK(subtree_cols(t, {2, 1}).size() == 8);
}

TEST_CASE("algebraic: tridiagonal 16 splits at the middle") {
  std::vector<Triplet> tr;
  for (int i = 0; i < 16; ++i) {
    tr.push_back({i, i, 4.0});
    if (i > 0) tr.push_back({i, i - 1, -1.0});
    if (i < 15) tr.push_back({i, i + 1, -1.0});
  }
  SparseMat A = SparseMat::from_triplets(16, 16, tr);
  ClusterTree t = partition_algebraic(A, 2);
  const int s = t.separator_sizes()[0];
  CHECK(s >= 1);
  CHECK(s <= 2);
  CHECK(subtree_cols(t, {2, 0}).size() <= 8);
  CHECK(subtree_cols(t, {2, 1}).size() <= 8);
  for (int j = 0; j < 16; ++j)
    if (t.col_key[j].self.level == 1) {
      CHECK(j >= 6);
      CHECK(j <= 9);
    }
  check_root_split(A, t);
}

TEST_CASE("algebraic vs geometric on the 8x8 Laplacian") {
  SparseMat A = stencil_pattern({8, 8});
  ClusterTree g = partition_geometric({8, 8}, 2), a = partition_algebraic(A, 2);
  const int sg = g.separator_sizes()[0], sa = a.separator_sizes()[0];
  CHECK(sa > 0);
  CHECK(sa <= 2 * sg);
  CHECK(sg <= 2 * sa);
  check_root_split(A, g);
  check_root_split(A, a);
  CHECK(separator_violations(A, a) == 0);
}

TEST_CASE("separator property on generated trees") {
  for (auto dims : {std::vector<int>{16, 16}, {32, 32}, {12, 9}, {8, 8, 8}}) {
    SparseMat A = stencil_pattern(dims);
    int N = A.rows();
    for (int L = 1; L <= default_levels(N) + 1; ++L) {
      ClusterTree t;
      try {
        t = partition_geometric(dims, L);
      } catch (const BadInput&) {
        break;
      }
      CHECK(separator_violations(A, t) == 0);
      ClusterTree ta = partition_algebraic(A, L);
      CHECK(separator_violations(A, ta) == 0);
    }
  }
  SparseMat R = random_sparse(400, 4, 3);
  for (int L = 1; L <= 4; ++L) CHECK(separator_violations(R, partition_algebraic(R, L)) == 0);
}

TEST_CASE("stages: columns partition and rows match cols") {
  SparseMat A = stencil_pattern({32, 32});
  for (auto h : {RowHeuristic::cols, RowHeuristic::maxweight, RowHeuristic::matching}) {
    ClusterTree t = full_tree(A, partition_geometric({32, 32}, 4), h);
    for (const auto& st : t.stages) {
      std::vector<int> cc(t.N, 0), rc(t.N, 0);
      for (const auto& c : st.clusters) {
        CHECK(c.rows.size() == c.cols.size());
        for (int j : c.cols) cc[j]++;
        for (int i : c.rows) rc[i]++;
      }
      int nc = 0, nr = 0;
      for (int j = 0; j < t.N; ++j) {
        CHECK(cc[j] <= 1);
        CHECK(rc[j] <= 1);
        nc += cc[j];
        nr += rc[j];
      }
      CHECK(nc == nr);
    }
    // leaf stage covers everything
    std::vector<int> seen(t.N, 0);
    for (const auto& c : t.leaf_stage().clusters)
      for (int i : c.rows) seen[i]++;
    for (int v : seen) CHECK(v == 1);
  }
}

TEST_CASE("merge hierarchy: every interface reaches its separator") {
  ClusterTree t = partition_geometric({32, 32}, 4);
  for (size_t s = 0; s < t.stages.size(); ++s) {
    const auto& st = t.stages[s];
    std::set<int> elim(st.eliminate.begin(), st.eliminate.end());
    for (int c = 0; c < static_cast<int>(st.clusters.size()); ++c) {
      const Cluster& cl = st.clusters[c];
      if (elim.count(c)) {
        CHECK(cl.parent == -1);
        CHECK(cl.key.self.level == st.level);
        continue;
      }
      REQUIRE(cl.parent >= 0);
      REQUIRE(s + 1 < t.stages.size());
      const Cluster& p = t.stages[s + 1].clusters[cl.parent];
      CHECK(p.key.self == cl.key.self);
      CHECK(std::includes(p.cols.begin(), p.cols.end(), cl.cols.begin(), cl.cols.end()));
    }
    // parents are exactly the union of their children
    if (s + 1 < t.stages.size()) {
      std::map<int, size_t> got;
      for (const auto& cl : st.clusters)
        if (cl.parent >= 0) got[cl.parent] += cl.cols.size();
      const auto& next = t.stages[s + 1].clusters;
      CHECK(got.size() == next.size());
      for (auto [p, n] : got) CHECK(next[p].cols.size() == n);
    }
  }
  CHECK(t.stages.back().clusters.size() == t.stages.back().eliminate.size());
}

TEST_CASE("8x8 grid, L = 3 hierarchy counts") {
  ClusterTree t = partition_geometric({8, 8}, 3);
  REQUIRE(t.stages.size() == 3);
  CHECK(t.stages[0].level == 3);
  int interiors = 0;
  for (int c : t.stages[0].eliminate) interiors += t.stages[0].clusters[c].kind == ClusterKind::interior;
  CHECK(interiors == 4);
  CHECK(t.stages[2].eliminate.size() == 1);
  CHECK(t.stages[1].eliminate.size() == 2);
  CHECK(t.separator_sizes() == std::vector<int>{16, 12, 0});
  CHECK(!t.stages[0].sparsify.empty());
}

TEST_CASE("assign_rows: same-as-columns") {
  SparseMat A = stencil_pattern({8, 8});
  ClusterTree t = partition_geometric({8, 8}, 3);
  RowAssignment ra = assign_rows(A, t, RowHeuristic::cols);
  auto lc = t.leaf_cluster_of_cols();
  for (int i = 0; i < t.N; ++i) CHECK(ra.cluster[i] == lc[i]);
}

TEST_CASE("assign_rows: max-weight follows the arg-max sum") {
  ClusterTree t = partition_geometric({8, 8}, 2);
  auto lc = t.leaf_cluster_of_cols();
  SparseMat A = SparseMat::identity(64);
  // push row 5's mass into the cluster of some column far from 5
  int target = -1, col = -1;
  for (int j = 0; j < 64; ++j)
    if (lc[j] != lc[5]) {
      target = lc[j];
      col = j;
      break;
    }
  REQUIRE(col >= 0);
  scatter_block(A, {5}, {col}, Matrix::Constant(1, 1, 3.0));
  std::vector<int> w = max_weight_rows(A, t);
  // oracle: direct arg-max of the per-cluster squared sums
  Matrix D = A.to_dense();
  for (int i = 0; i < 64; ++i) {
    std::map<int, double> s;
    for (int j = 0; j < 64; ++j) s[lc[j]] += D(i, j) * D(i, j);
    int best = -1;
    double bv = -1.0;
    for (auto [c, v] : s)
      if (v > bv) best = c, bv = v;
    CHECK(w[i] == best);
  }
  CHECK(w[5] == target);
  RowAssignment ra = assign_rows(A, t, RowHeuristic::maxweight);
  std::vector<int> cnt(t.leaf_stage().clusters.size(), 0);
  for (int c : ra.cluster) cnt[c]++;
  for (size_t c = 0; c < cnt.size(); ++c) CHECK(cnt[c] == static_cast<int>(t.leaf_stage().clusters[c].cols.size()));
}

TEST_CASE("matching: permutation matrix and structural singularity") {
  std::vector<int> p{3, 0, 4, 1, 5, 2};
  std::vector<Triplet> tr;
  for (int j = 0; j < 6; ++j) tr.push_back({p[j], j, 1.0 + j});
  SparseMat P = SparseMat::from_triplets(6, 6, tr);
  CHECK(match_columns(P) == p);

  SparseMat S = SparseMat::from_triplets(3, 3, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {0, 2, 1.0}});
  CHECK(match_columns(S).size() == 3);
  SparseMat Z = SparseMat::from_triplets(3, 3, {{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}, {2, 2, 1.0}});
  CHECK_THROWS_AS(match_columns(Z), BadInput);
}

TEST_CASE("matching: rows follow their matched column") {
  Problem pr = make_problem("rand:n=300,k=4,seed=5");
  ClusterTree t = partition_algebraic(pr.A, 3);
  RowAssignment ra = assign_rows(pr.A, t, RowHeuristic::matching);
  std::vector<int> m = match_columns(pr.A);
  auto lc = t.leaf_cluster_of_cols();
  for (int j = 0; j < t.N; ++j) CHECK(ra.cluster[m[j]] == lc[j]);
  for (int j = 0; j < t.N; ++j) CHECK(pr.A.coeff(m[j], j) != 0.0);
}

TEST_CASE("neighbor lists match dense symbolic AtA") {
  auto check = [](const SparseMat& A, const ClusterTree& t) {
    auto adj = ata_dense(A);
    for (const auto& st : t.stages) {
      const int n = static_cast<int>(st.clusters.size());
      for (int p = 0; p < n; ++p) {
        std::set<int> want;
        for (int m = 0; m < n; ++m) {
          if (m == p) continue;
          for (int i : st.clusters[p].cols)
            for (int j : st.clusters[m].cols)
              if (adj[i][j]) want.insert(m);
        }
        std::set<int> got(st.clusters[p].neighbors.begin(), st.clusters[p].neighbors.end());
        CHECK(got == want);
      }
    }
  };

  SUBCASE("block diagonal") {
    std::vector<Triplet> tr;
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) tr.push_back({8 * b + i, 8 * b + j, i == j ? 10.0 : 1.0});
    SparseMat A = SparseMat::from_triplets(16, 16, tr);
    ClusterTree t = full_tree(A, partition_algebraic(A, 2));
    CHECK(t.separator_sizes()[0] == 0);
    for (const auto& c : t.leaf_stage().clusters) CHECK(c.neighbors.empty());
    check(A, t);
  }
  SUBCASE("tridiagonal path of 4 leaves") {
    std::vector<Triplet> tr;
    for (int i = 0; i < 32; ++i) {
      tr.push_back({i, i, 4.0});
      if (i > 0) tr.push_back({i, i - 1, -1.0});
      if (i < 31) tr.push_back({i, i + 1, -1.0});
    }
    SparseMat A = SparseMat::from_triplets(32, 32, tr);
    ClusterTree t = full_tree(A, partition_algebraic(A, 3));
    check(A, t);
    // leaf interiors touch only separator/interface clusters
    const auto& st = t.leaf_stage();
    for (int c : st.eliminate)
      if (st.clusters[c].kind == ClusterKind::interior)
        for (int m : st.clusters[c].neighbors) CHECK(st.clusters[m].kind != ClusterKind::interior);
  }
  SUBCASE("8x8 Laplacian") {
    SparseMat A = stencil_pattern({8, 8});
    ClusterTree t = full_tree(A, partition_geometric({8, 8}, 3));
    check(A, t);
    const auto& st = t.leaf_stage();
    for (int c = 0; c < static_cast<int>(st.clusters.size()); ++c) {
      if (st.clusters[c].kind != ClusterKind::interior) continue;
      TreeNode d = st.clusters[c].key.self;
      for (int m : st.clusters[c].neighbors) {
        const ClusterKey& k = st.clusters[m].key;
        CHECK(st.clusters[m].kind != ClusterKind::interior);
        CHECK((k.left == d || k.right == d));
      }
    }
  }
}

TEST_CASE("tree json has one entry per stage") {
  SparseMat A = stencil_pattern({8, 8});
  ClusterTree t = full_tree(A, partition_geometric({8, 8}, 3));
  std::ostringstream os;
  write_tree_json(t, os);
  auto j = nlohmann::json::parse(os.str());
  CHECK(j["N"] == 64);
  CHECK(j["stages"].size() == 3);
}

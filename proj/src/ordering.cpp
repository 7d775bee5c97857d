#include "spaqr/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <json.hpp>

namespace spaqr {

ClusterKey coarsen(ClusterKey k, int max_level) {
  while (k.left.level > max_level) k.left = k.left.parent();
  while (k.right.level > max_level) k.right = k.right.parent();
  while (k.self.level > max_level) k.self = k.self.parent();
  return k;
}

const char* to_string(ClusterKind k) {
  switch (k) {
    case ClusterKind::interior: return "interior";
    case ClusterKind::separator: return "separator";
    case ClusterKind::interface: return "interface";
  }
  return "?";
}

int default_levels(long long N) {
  if (N <= 128) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(static_cast<double>(N) / 64.0) / std::log(2.0))));
}

SparseMat stencil_pattern(const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 3) throw BadInput("stencil_pattern: need 1 to 3 dimensions");
  int nx = dims[0];
  int ny = dims.size() > 1 ? dims[1] : 1;
  int nz = dims.size() > 2 ? dims[2] : 1;
  int N = nx * ny * nz;
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(N) * 7);
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        int i = x + nx * (y + ny * z);
        t.push_back({i, i, 1.0});
        if (x > 0) t.push_back({i, i - 1, 1.0});
        if (x + 1 < nx) t.push_back({i, i + 1, 1.0});
        if (y > 0) t.push_back({i, i - nx, 1.0});
        if (y + 1 < ny) t.push_back({i, i + nx, 1.0});
        if (z > 0) t.push_back({i, i - nx * ny, 1.0});
        if (z + 1 < nz) t.push_back({i, i + nx * ny, 1.0});
      }
  return SparseMat::from_triplets(N, N, t);
}

ClusterTree build_tree(int N, int L, std::vector<ClusterKey> keys) {
  if (static_cast<int>(keys.size()) != N) throw BadInput("build_tree: key count differs from N");
  if (L < 1) throw BadInput("build_tree: L must be >= 1");
  ClusterTree tree;
  tree.N = N;
  tree.L = L;
  tree.col_key = std::move(keys);
  tree.stages.resize(L);

  // stage 0: group columns by leaf key
  std::map<ClusterKey, std::vector<int>> groups;
  for (int j = 0; j < N; ++j) groups[tree.col_key[j]].push_back(j);
  std::vector<Cluster> current;
  for (auto& [k, cols] : groups) {
    Cluster c;
    c.key = k;
    c.cols = std::move(cols);
    current.push_back(std::move(c));
  }

  for (int t = 0; t < L; ++t) {
    Stage& st = tree.stages[t];
    st.level = L - t;
    st.clusters = std::move(current);
    current.clear();
    std::map<ClusterKey, int> next_index;
    for (int c = 0; c < static_cast<int>(st.clusters.size()); ++c) {
      Cluster& cl = st.clusters[c];
      const ClusterKey& k = cl.key;
      if (k.self.level == st.level) {
        cl.kind = (t == 0 && k.left == k.self && k.right == k.self) ? ClusterKind::interior
                                                                     : ClusterKind::separator;
        st.eliminate.push_back(c);
        continue;
      }
      cl.kind = ClusterKind::interface;
      if (k.left.level == st.level && k.right.level == st.level) st.sparsify.push_back(c);
      ClusterKey pk = coarsen(k, st.level - 1);
      auto it = next_index.find(pk);
      if (it == next_index.end()) {
        it = next_index.emplace(pk, static_cast<int>(current.size())).first;
        Cluster p;
        p.key = pk;
        current.push_back(std::move(p));
      }
      cl.parent = it->second;
      auto& pc = current[it->second].cols;
      pc.insert(pc.end(), cl.cols.begin(), cl.cols.end());
    }
    for (auto& p : current) std::sort(p.cols.begin(), p.cols.end());
  }
  if (!current.empty()) throw BadInput("build_tree: columns left after the root stage");
  return tree;
}

std::vector<int> ClusterTree::leaf_cluster_of_cols() const {
  std::vector<int> out(N, -1);
  const auto& cl = stages.front().clusters;
  for (int c = 0; c < static_cast<int>(cl.size()); ++c)
    for (int j : cl[c].cols) out[j] = c;
  return out;
}

std::vector<int> ClusterTree::separator_sizes() const {
  std::vector<int> out(L, 0);
  for (const auto& k : col_key)
    if (!(k.left == k.self && k.right == k.self && k.self.level == L)) out[k.self.level - 1]++;
  return out;
}

void set_rows(ClusterTree& tree, const RowAssignment& ra) {
  const auto& row_cluster = ra.cluster;
  if (static_cast<int>(row_cluster.size()) != tree.N || static_cast<int>(ra.order.size()) != tree.N)
    throw BadInput("set_rows: size mismatch");
  auto order = [&](IndexSet& rows) {
    std::sort(rows.begin(), rows.end(), [&](int a, int b) {
      return ra.order[a] != ra.order[b] ? ra.order[a] < ra.order[b] : a < b;
    });
  };
  for (auto& st : tree.stages)
    for (auto& c : st.clusters) c.rows.clear();
  auto& leaf = tree.stages.front().clusters;
  for (int i = 0; i < tree.N; ++i) {
    int c = row_cluster[i];
    if (c < 0 || c >= static_cast<int>(leaf.size())) throw BadInput("set_rows: row " + std::to_string(i) + " unassigned");
    leaf[c].rows.push_back(i);
  }
  for (size_t t = 0; t < tree.stages.size(); ++t) {
    auto& st = tree.stages[t];
    for (auto& c : st.clusters) order(c.rows);
    if (t + 1 == tree.stages.size()) break;
    for (auto& c : st.clusters) {
      if (c.parent < 0) continue;
      auto& pr = tree.stages[t + 1].clusters[c.parent].rows;
      pr.insert(pr.end(), c.rows.begin(), c.rows.end());
    }
  }
  tree.has_rows = true;
}

void neighbor_lists(const SparseMat& A, ClusterTree& tree) {
  SparseMat At = A.transpose();  // columns of At are rows of A
  for (auto& st : tree.stages) {
    std::vector<int> owner(tree.N, -1);
    for (int c = 0; c < static_cast<int>(st.clusters.size()); ++c)
      for (int j : st.clusters[c].cols) owner[j] = c;
    std::vector<std::vector<int>> nb(st.clusters.size());
    std::vector<int> seen;
    for (int i = 0; i < At.cols(); ++i) {
      seen.clear();
      for (auto k = At.col_begin(i); k < At.col_end(i); ++k) {
        int c = owner[At.rowind()[k]];
        if (c >= 0) seen.push_back(c);
      }
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (size_t a = 0; a < seen.size(); ++a)
        for (size_t b = 0; b < seen.size(); ++b)
          if (a != b) nb[seen[a]].push_back(seen[b]);
    }
    for (int c = 0; c < static_cast<int>(st.clusters.size()); ++c) {
      auto& v = nb[c];
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      st.clusters[c].neighbors = std::move(v);
    }
  }
}

long long separator_violations(const SparseMat& A, const ClusterTree& tree) {
  SparseMat At = A.transpose();
  long long bad = 0;
  std::vector<TreeNode> nodes;
  for (int i = 0; i < At.cols(); ++i) {
    nodes.clear();
    for (auto k = At.col_begin(i); k < At.col_end(i); ++k) nodes.push_back(tree.col_key[At.rowind()[k]].self);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (size_t a = 0; a < nodes.size(); ++a)
      for (size_t b = a + 1; b < nodes.size(); ++b)
        if (!nodes[a].ancestor_of(nodes[b]) && !nodes[b].ancestor_of(nodes[a])) ++bad;
  }
  return bad;
}

void write_tree_json(const ClusterTree& tree, std::ostream& out) {
  using nlohmann::json;
  auto node = [](TreeNode n) { return json::array({n.level, n.index}); };
  json j;
  j["N"] = tree.N;
  j["L"] = tree.L;
  j["dims"] = tree.dims;
  j["separator_sizes"] = tree.separator_sizes();
  json stages = json::array();
  for (const auto& st : tree.stages) {
    json s;
    s["level"] = st.level;
    s["eliminate"] = st.eliminate;
    s["sparsify"] = st.sparsify;
    json cls = json::array();
    for (const auto& c : st.clusters) {
      json cj;
      cj["self"] = node(c.key.self);
      cj["left"] = node(c.key.left);
      cj["right"] = node(c.key.right);
      cj["kind"] = to_string(c.kind);
      cj["cols"] = c.cols;
      if (tree.has_rows) cj["rows"] = c.rows;
      cj["parent"] = c.parent;
      cj["neighbors"] = c.neighbors;
      cls.push_back(std::move(cj));
    }
    s["clusters"] = std::move(cls);
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  out << j.dump(1) << '\n';
}

}  // namespace spaqr

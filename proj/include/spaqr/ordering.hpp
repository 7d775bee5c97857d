#pragma once

#include <compare>
#include <iosfwd>
#include <string>
#include <vector>

#include "spaqr/sparse.hpp"

namespace spaqr {

// Node of the bisection tree. Level 1 is the root; node (l, i) has children
// (l+1, 2i) and (l+1, 2i+1).
struct TreeNode {
  int level = 1;
  int index = 0;

  TreeNode parent() const { return {level - 1, index / 2}; }
  TreeNode child(int side) const { return {level + 1, 2 * index + side}; }
  // true when this node equals d or lies on d's path to the root
  bool ancestor_of(TreeNode d) const {
    return d.level >= level && (d.index >> (d.level - level)) == index;
  }
  auto operator<=>(const TreeNode&) const = default;
};

// Cluster identity of a column: `self` is the domain whose separator holds
// it (or the leaf domain), `left`/`right` the deepest domains it borders.
// Leaf interiors have left == right == self.
struct ClusterKey {
  TreeNode self;
  TreeNode left;
  TreeNode right;
  auto operator<=>(const ClusterKey&) const = default;
};

// Key as seen after the tree levels deeper than max_level were merged away.
ClusterKey coarsen(ClusterKey k, int max_level);

enum class ClusterKind { interior, separator, interface };
const char* to_string(ClusterKind k);

struct Cluster {
  ClusterKey key;
  ClusterKind kind = ClusterKind::interface;
  IndexSet cols;
  IndexSet rows;
  int parent = -1;              // index in the next stage, -1 when eliminated here
  std::vector<int> neighbors;   // same-stage clusters coupled in A^T A
};

// Stage t eliminates tree level L - t; its clusters are the leaf clusters
// merged t times.
struct Stage {
  int level = 0;
  std::vector<Cluster> clusters;
  std::vector<int> eliminate;   // interiors and separators factored at this stage
  std::vector<int> sparsify;    // interfaces whose two sides are both at this level
};

struct ClusterTree {
  int N = 0;
  int L = 1;
  std::vector<ClusterKey> col_key;  // per column, leaf-stage key
  std::vector<int> dims;            // grid dimensions for geometric trees
  std::vector<Stage> stages;        // L stages
  bool has_rows = false;

  const Stage& leaf_stage() const { return stages.front(); }
  // Leaf cluster of each column.
  std::vector<int> leaf_cluster_of_cols() const;
  // Number of separator columns at each tree level (root first).
  std::vector<int> separator_sizes() const;
};

int default_levels(long long N);  // ceil(log2(N / 64)), at least 1

// Pattern of the 5-point (2D) or 7-point (3D) stencil, row-major ordering
// index = x + nx (y + ny z).
SparseMat stencil_pattern(const std::vector<int>& dims);

ClusterTree partition_geometric(const std::vector<int>& dims, int L);
ClusterTree partition_algebraic(const SparseMat& A, int L);
// Builds the stage hierarchy from per-column keys (used by both partitioners).
ClusterTree build_tree(int N, int L, std::vector<ClusterKey> keys);

enum class RowHeuristic { cols, maxweight, matching };
RowHeuristic parse_row_heuristic(const std::string& s);
const char* to_string(RowHeuristic h);

struct RowAssignment {
  std::vector<int> cluster;  // leaf cluster per row
  std::vector<int> order;    // sort key of each row inside its cluster
};
// |rows| == |cols| for every leaf cluster.
RowAssignment assign_rows(const SparseMat& A, const ClusterTree& tree, RowHeuristic h);
// Unbalanced arg-max assignment (before rebalancing).
std::vector<int> max_weight_rows(const SparseMat& A, const ClusterTree& tree);
// Row matched to each column; throws BadInput when A is structurally singular.
std::vector<int> match_columns(const SparseMat& A);
// Fills row sets of every stage from a leaf-cluster row assignment.
void set_rows(ClusterTree& tree, const RowAssignment& rows);

// Neighbor lists for all stages from the pattern of A^T A.
void neighbor_lists(const SparseMat& A, ClusterTree& tree);

// Pairs of columns in unrelated subtrees that share a row of A (each such
// pair is an A^T A edge crossing a separator). Empty for a valid tree.
long long separator_violations(const SparseMat& A, const ClusterTree& tree);

void write_tree_json(const ClusterTree& tree, std::ostream& out);

}  // namespace spaqr

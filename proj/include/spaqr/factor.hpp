#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "spaqr/ordering.hpp"
#include "spaqr/transform.hpp"

namespace spaqr {

enum class SparsifyMode { scaled, unscaled, variant1, variant2 };
SparsifyMode parse_mode(const std::string& s);
const char* to_string(SparsifyMode m);

class Engine;

struct SparsifyRecord {
  int stage = 0;
  int cluster = 0;      // index in the stage
  int size = 0;         // |p| before
  int rank = 0;         // |c| after
  int width = 0;        // columns of the compressed block
  SparsifyMode mode = SparsifyMode::scaled;
  double r11 = 0.0;     // |R_11| of the compressed block
  double block_norm = 0.0;  // ||compressed block||_2 (audit_norms only)
  double dropped = 0.0;     // largest dropped block 2-norm (audit_norms only)
  double trailing = 0.0;    // 2-norm of the RRQR remainder (audit_norms only)
  double sigma = 0.0;       // unscaled mode weight 1 / sigma_min([A_pp; A_np])
};

struct Auditor {
  std::function<void(const Engine&, int stage, int cluster)> before_sparsify;
  std::function<void(const Engine&, const SparsifyRecord&)> after_sparsify;
  std::function<void(const Engine&, int stage)> after_stage;
};

struct FactorOptions {
  double tol = 1e-3;
  bool sparsify = true;
  int skip = 2;             // first stage that sparsifies
  SparsifyMode mode = SparsifyMode::scaled;
  int scale_every = 1;      // scaled mode: scale on every k-th sparsifying stage
  bool audit_norms = false; // compute 2-norms of compressed and dropped blocks
  bool drop_unrelated = true;  // discard fill between clusters in disjoint subtrees
  const Auditor* auditor = nullptr;
};

struct StageStats {
  int stage = 0;
  int level = 0;
  int eliminated = 0;           // clusters factored
  int eliminated_cols = 0;
  int interfaces = 0;           // clusters sparsified
  std::vector<int> sizes_before;  // interface sizes before sparsification
  std::vector<int> sizes_after;
  int fine = 0;                 // columns retired by sparsification
  long long block_nnz = 0;      // stored block entries after the stage
  int active_cols = 0;          // columns left after the stage
  double t_factor = 0, t_scale = 0, t_sparsify = 0, t_merge = 0;
  double max_dropped = 0.0;
  double max_dropped_rel = 0.0;  // dropped / compressed block norm
  long long unrelated_fill = 0;  // updated columns in a subtree unrelated to the eliminated cluster
  double max_unrelated_drop = 0.0;  // largest discarded fill block (Frobenius)
};

struct Quartiles {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
Quartiles quartiles(std::vector<int> v);

struct Factorization {
  int N = 0;
  std::vector<Transform> ops;  // in factorization order, ending with the permutation
  std::vector<StageStats> stats;
  FactorOptions opts;
  int L = 0;
  double factor_seconds = 0.0;

  std::size_t payload_scalars() const;
  double memory_bytes() const { return 8.0 * static_cast<double>(payload_scalars()); }
};

// Working trailing matrix: dense blocks between row and column clusters.
class Engine {
 public:
  Engine(const SparseMat& A, const ClusterTree& tree, const FactorOptions& opts);

  void run();  // all stages
  Factorization take();

  // introspection for audits
  int stage() const { return stage_; }
  const ClusterTree& tree() const { return tree_; }
  const IndexSet& cols(int c) const { return cl_[c].cols; }
  const IndexSet& rows(int c) const { return cl_[c].rows; }
  bool active(int c) const { return cl_[c].active; }
  int clusters() const { return static_cast<int>(cl_.size()); }
  const ClusterKey& key(int c) const;
  // block (row cluster r, column cluster c), nullptr when structurally zero
  const Matrix* block(int r, int c) const;
  const std::map<int, Matrix>& column_blocks(int c) const { return blocks_[c]; }
  // dense trailing matrix over active rows/cols (rows x cols in slot order)
  Matrix dense_trailing(IndexSet* row_slots = nullptr, IndexSet* col_slots = nullptr,
                        std::vector<int>* col_cluster = nullptr) const;

  // single operations (stage-local cluster ids)
  // keep_all_couplings = false drops the coupling row R_sn except towards keep_only
  void eliminate(int s, bool keep_all_couplings = true, int keep_only = -1);
  void scale(int p);
  SparsifyRecord sparsify(int p, SparsifyMode mode);
  void merge();

 private:
  struct Slot {
    IndexSet cols, rows;
    bool active = true;
  };
  void set_block(int r, int c, Matrix B);
  void erase_block(int r, int c);
  Matrix stack_column(int c, const std::vector<int>& row_clusters, int nrows) const;

  const ClusterTree& tree_;
  FactorOptions opts_;
  int stage_ = 0;
  std::vector<Slot> cl_;
  std::vector<std::map<int, Matrix>> blocks_;  // per column cluster: row cluster -> block
  std::vector<std::set<int>> row_nz_;          // per row cluster: column clusters with a block
  std::vector<Transform> ops_;
  std::vector<StageStats> stats_;
  IndexSet perm_from_, perm_to_;
  StageStats* cur_ = nullptr;
  std::map<int, int> split_parent_;  // fine cluster -> interface it was split from
  double dropped_coupling_ = 0.0;
  double unrelated_drop_ = 0.0;
};

// Runs every stage; tree must carry rows (set_rows).
Factorization spaqr_factor(const SparseMat& A, const ClusterTree& tree, const FactorOptions& opts);

}  // namespace spaqr

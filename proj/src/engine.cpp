#include <algorithm>
#include <chrono>
#include <sstream>

#include "spaqr/factor.hpp"

namespace spaqr {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string describe(const ClusterKey& k, int stage) {
  std::ostringstream os;
  os << "stage " << stage << ", cluster self=(" << k.self.level << "," << k.self.index << ") left=("
     << k.left.level << "," << k.left.index << ") right=(" << k.right.level << "," << k.right.index << ")";
  return os.str();
}

}  // namespace

Engine::Engine(const SparseMat& A, const ClusterTree& tree, const FactorOptions& opts)
    : tree_(tree), opts_(opts) {
  if (A.rows() != A.cols()) throw BadInput("factorization needs a square matrix");
  if (A.rows() != tree.N) throw BadInput("matrix size does not match the cluster tree");
  if (!tree.has_rows) throw BadInput("cluster tree has no row assignment");
  if (!(opts.tol >= 0.0 && opts.tol < 1.0)) throw BadInput("tolerance must lie in [0, 1)");
  if (opts.scale_every < 1) throw BadInput("scale_every must be >= 1");
  const auto& leaf = tree.leaf_stage().clusters;
  const int nc = static_cast<int>(leaf.size());
  cl_.resize(nc);
  blocks_.resize(nc);
  row_nz_.resize(nc);
  std::vector<int> rowc(tree.N, -1), rowpos(tree.N, -1);
  for (int c = 0; c < nc; ++c) {
    cl_[c].cols = leaf[c].cols;
    cl_[c].rows = leaf[c].rows;
    if (leaf[c].cols.size() != leaf[c].rows.size())
      throw BadInput("cluster " + std::to_string(c) + " has " + std::to_string(leaf[c].rows.size()) + " rows and " +
                     std::to_string(leaf[c].cols.size()) + " columns");
    for (size_t q = 0; q < leaf[c].rows.size(); ++q) {
      rowc[leaf[c].rows[q]] = c;
      rowpos[leaf[c].rows[q]] = static_cast<int>(q);
    }
  }
  for (int c = 0; c < nc; ++c) {
    const auto& cols = cl_[c].cols;
    for (size_t q = 0; q < cols.size(); ++q) {
      int j = cols[q];
      for (auto k = A.col_begin(j); k < A.col_end(j); ++k) {
        int i = A.rowind()[k];
        int r = rowc[i];
        auto it = blocks_[c].find(r);
        if (it == blocks_[c].end()) {
          it = blocks_[c].emplace(r, Matrix::Zero(cl_[r].rows.size(), cols.size())).first;
          row_nz_[r].insert(c);
        }
        it->second(rowpos[i], static_cast<Eigen::Index>(q)) += A.values()[k];
      }
    }
  }
}

const ClusterKey& Engine::key(int c) const {
  const auto& st = tree_.stages[stage_].clusters;
  return c < static_cast<int>(st.size()) ? st[c].key : st[split_parent_.at(c)].key;
}

const Matrix* Engine::block(int r, int c) const {
  auto it = blocks_[c].find(r);
  return it == blocks_[c].end() ? nullptr : &it->second;
}

void Engine::set_block(int r, int c, Matrix B) {
  auto [it, fresh] = blocks_[c].insert_or_assign(r, std::move(B));
  (void)it;
  if (fresh) row_nz_[r].insert(c);
}

void Engine::erase_block(int r, int c) {
  blocks_[c].erase(r);
  row_nz_[r].erase(c);
}

Matrix Engine::stack_column(int c, const std::vector<int>& row_clusters, int nrows) const {
  Matrix out = Matrix::Zero(nrows, cl_[c].cols.size());
  Eigen::Index off = 0;
  for (int r : row_clusters) {
    const Eigen::Index h = static_cast<Eigen::Index>(cl_[r].rows.size());
    if (const Matrix* b = block(r, c)) out.middleRows(off, h) = *b;
    off += h;
  }
  return out;
}

Matrix Engine::dense_trailing(IndexSet* row_slots, IndexSet* col_slots, std::vector<int>* col_cluster) const {
  std::vector<int> roff(cl_.size(), -1), coff(cl_.size(), -1);
  int nr = 0, nc = 0;
  IndexSet rs, cs;
  std::vector<int> cc;
  for (int c = 0; c < clusters(); ++c) {
    if (!cl_[c].active) continue;
    roff[c] = nr;
    coff[c] = nc;
    nr += static_cast<int>(cl_[c].rows.size());
    nc += static_cast<int>(cl_[c].cols.size());
    rs.insert(rs.end(), cl_[c].rows.begin(), cl_[c].rows.end());
    cs.insert(cs.end(), cl_[c].cols.begin(), cl_[c].cols.end());
    cc.insert(cc.end(), cl_[c].cols.size(), c);
  }
  Matrix D = Matrix::Zero(nr, nc);
  for (int c = 0; c < clusters(); ++c) {
    if (!cl_[c].active) continue;
    for (const auto& [r, B] : blocks_[c])
      if (cl_[r].active) D.block(roff[r], coff[c], B.rows(), B.cols()) = B;
  }
  if (row_slots) *row_slots = std::move(rs);
  if (col_slots) *col_slots = std::move(cs);
  if (col_cluster) *col_cluster = std::move(cc);
  return D;
}

void Engine::eliminate(int s, bool keep_all_couplings, int keep_only) {
  Slot& S = cl_[s];
  const int k = static_cast<int>(S.cols.size());
  if (k == 0) {
    S.active = false;
    return;
  }
  unrelated_drop_ = 0.0;
  std::vector<int> stack{s};
  int nrows = static_cast<int>(S.rows.size());
  for (const auto& [r, B] : blocks_[s])
    if (r != s) {
      stack.push_back(r);
      nrows += static_cast<int>(cl_[r].rows.size());
    }
  QRFactor qr = qr_house(stack_column(s, stack, nrows));
  try {
    check_pivots(qr.R, "eliminating " + describe(key(s), stage_));
  } catch (const SingularPivot& e) {
    throw SingularPivot(e.index(), e.value(), "eliminating " + describe(key(s), stage_));
  }

  std::set<int> upd_set;
  for (int r : stack)
    for (int c : row_nz_[r])
      if (c != s) upd_set.insert(c);
  std::vector<int> upd(upd_set.begin(), upd_set.end());
  std::vector<int> off(upd.size() + 1, 0);
  for (size_t u = 0; u < upd.size(); ++u) off[u + 1] = off[u] + static_cast<int>(cl_[upd[u]].cols.size());
  Matrix U(nrows, off.back());
  for (size_t u = 0; u < upd.size(); ++u) U.middleCols(off[u], off[u + 1] - off[u]) = stack_column(upd[u], stack, nrows);
  apply_panel_left(qr.panel, U, true);

  BlockHouseholder h;
  h.cols = S.cols;
  h.R = qr.R;
  for (int r : stack) h.rows.insert(h.rows.end(), cl_[r].rows.begin(), cl_[r].rows.end());
  // coupling row of s and the updated blocks below it
  std::vector<int> kept, dropped;
  for (size_t u = 0; u < upd.size(); ++u) {
    const int c = upd[u];
    const int w = off[u + 1] - off[u];
    const bool unrelated = !key(c).self.ancestor_of(key(s).self) && !key(s).self.ancestor_of(key(c).self);
    const bool keep = (keep_all_couplings || c == keep_only) && !(unrelated && opts_.drop_unrelated);
    if (!U.block(0, off[u], k, w).isZero(0.0)) {
      (keep ? kept : dropped).push_back(static_cast<int>(u));
      if (unrelated) {
        if (cur_) cur_->unrelated_fill += w;
        if (opts_.drop_unrelated) unrelated_drop_ = std::max(unrelated_drop_, U.block(0, off[u], k, w).norm());
      }
    }
    Eigen::Index ro = k;
    for (size_t q = 1; q < stack.size(); ++q) {
      const int r = stack[q];
      const Eigen::Index hgt = static_cast<Eigen::Index>(cl_[r].rows.size());
      Matrix B = U.block(ro, off[u], hgt, w);
      if (block(r, c)) {
        set_block(r, c, std::move(B));
      } else if (!B.isZero(0.0)) {
        if (unrelated && opts_.drop_unrelated) unrelated_drop_ = std::max(unrelated_drop_, B.norm());
        else set_block(r, c, std::move(B));
      }
      ro += hgt;
    }
  }
  int nk = 0;
  for (int u : kept) nk += off[u + 1] - off[u];
  h.Rsn.resize(k, nk);
  int pos = 0;
  for (int u : kept) {
    const int c = upd[u];
    const int w = off[u + 1] - off[u];
    h.Rsn.middleCols(pos, w) = U.block(0, off[u], k, w);
    h.ncols.insert(h.ncols.end(), cl_[c].cols.begin(), cl_[c].cols.end());
    pos += w;
  }
  h.panel = std::move(qr.panel);
  dropped_coupling_ = 0.0;
  if (!dropped.empty()) {
    int nd = 0;
    for (int u : dropped) nd += off[u + 1] - off[u];
    Matrix D(k, nd);
    pos = 0;
    for (int u : dropped) {
      D.middleCols(pos, off[u + 1] - off[u]) = U.block(0, off[u], k, off[u + 1] - off[u]);
      pos += off[u + 1] - off[u];
    }
    dropped_coupling_ = opts_.audit_norms ? norm2(D) : D.norm();
  }
  if (cur_) cur_->max_unrelated_drop = std::max(cur_->max_unrelated_drop, unrelated_drop_);

  for (int c : std::vector<int>(row_nz_[s].begin(), row_nz_[s].end())) erase_block(s, c);
  for (int r : std::vector<int>(stack.begin() + 1, stack.end())) erase_block(r, s);
  erase_block(s, s);
  ops_.push_back(std::move(h));
  for (int i = 0; i < k; ++i) {
    perm_from_.push_back(S.rows[i]);
    perm_to_.push_back(S.cols[i]);
  }
  S.active = false;
}

void Engine::scale(int p) {
  Slot& P = cl_[p];
  const int k = static_cast<int>(P.cols.size());
  if (k == 0) return;
  const Matrix* app = block(p, p);
  Matrix Apq = app ? *app : Matrix::Zero(k, k);
  QRFactor qr = qr_house(Apq);
  try {
    check_pivots(qr.R);
  } catch (const SingularPivot& e) {
    throw SingularPivot(e.index(), e.value(), "scaling " + describe(key(p), stage_));
  }
  for (int c : row_nz_[p])
    if (c != p) apply_panel_left(qr.panel, blocks_[c][p], true);
  for (auto& [r, B] : blocks_[p])
    if (r != p) tri_solve_inplace(qr.R, B, Side::right);
  set_block(p, p, Matrix::Identity(k, k));
  ops_.push_back(InterfaceScaling{P.rows, P.cols, std::move(qr.panel), std::move(qr.R)});
}

SparsifyRecord Engine::sparsify(int p, SparsifyMode mode) {
  SparsifyRecord rec;
  rec.stage = stage_;
  rec.cluster = p;
  rec.mode = mode;
  Slot& P = cl_[p];
  const int k = static_cast<int>(P.cols.size());
  rec.size = rec.rank = k;
  if (k == 0) return rec;

  std::vector<int> n1, n2;  // row neighbors (blocks in column p), column neighbors (blocks in row p)
  for (const auto& [r, B] : blocks_[p])
    if (r != p) n1.push_back(r);
  for (int c : row_nz_[p])
    if (c != p) n2.push_back(c);
  std::vector<int> o1(n1.size() + 1, 0), o2(n2.size() + 1, 0);
  for (size_t i = 0; i < n1.size(); ++i) o1[i + 1] = o1[i] + static_cast<int>(cl_[n1[i]].rows.size());
  for (size_t i = 0; i < n2.size(); ++i) o2[i + 1] = o2[i] + static_cast<int>(cl_[n2[i]].cols.size());
  Matrix Anp(o1.back(), k), Apn(k, o2.back());
  for (size_t i = 0; i < n1.size(); ++i) Anp.middleRows(o1[i], o1[i + 1] - o1[i]) = *block(n1[i], p);
  for (size_t i = 0; i < n2.size(); ++i) Apn.middleCols(o2[i], o2[i + 1] - o2[i]) = *block(p, n2[i]);
  const Matrix* app = block(p, p);
  Matrix App = app ? *app : Matrix::Zero(k, k);

  Matrix C;
  switch (mode) {
    case SparsifyMode::scaled:
      C.resize(k, Anp.rows() + Apn.cols());
      C << Anp.transpose(), Apn;
      break;
    case SparsifyMode::unscaled: {
      Matrix Ap(k + Anp.rows(), k);
      Ap << App, Anp;
      Eigen::BDCSVD<Matrix> svd(Ap);
      const auto& sv = svd.singularValues();
      const double smin = sv(sv.size() - 1);
      if (!(smin > kPivotFloor * sv(0)))
        throw IllConditioned("sigma_min of the interface block is " + std::to_string(smin) + " while sparsifying " +
                             describe(key(p), stage_));
      rec.sigma = 1.0 / smin;
      C.resize(k, Anp.rows() + Apn.cols());
      C << Anp.transpose(), rec.sigma * (App.transpose() * Apn);
      break;
    }
    case SparsifyMode::variant1:
      C = Anp.transpose();
      break;
    case SparsifyMode::variant2: {
      C = Matrix::Zero(k, o2.back());
      for (size_t i = 0; i < n2.size(); ++i) {
        const int m = n2[i];
        auto Cm = C.middleCols(o2[i], o2[i + 1] - o2[i]);
        for (const auto& [r, Brp] : blocks_[p])
          if (const Matrix* Brm = block(r, m)) Cm.noalias() += Brp.transpose() * *Brm;
      }
      break;
    }
  }
  if (opts_.auditor && opts_.auditor->before_sparsify) opts_.auditor->before_sparsify(*this, stage_, p);

  rec.width = static_cast<int>(C.cols());
  RRQRResult rr = rrqr_threshold(C, opts_.tol);
  const int r = rr.rank;
  rec.r11 = rr.r11;
  rec.trailing = rr.trailing.size() ? rr.trailing.norm() : 0.0;
  rec.dropped = rec.trailing;
  if (opts_.audit_norms) {
    rec.block_norm = norm2(C);
    rec.trailing = norm2(rr.trailing);
  }
  if (r >= k) {
    rec.dropped = 0.0;
    if (opts_.auditor && opts_.auditor->after_sparsify) opts_.auditor->after_sparsify(*this, rec);
    return rec;
  }
  rec.rank = r;
  const int f = k - r;

  if (mode == SparsifyMode::scaled) {
    Matrix QtC = rr.qtm();
    if (opts_.audit_norms) {
      double e1 = Anp.rows() ? norm2(QtC.bottomLeftCorner(f, Anp.rows())) : 0.0;
      double e2 = Apn.cols() ? norm2(QtC.bottomRightCorner(f, Apn.cols())) : 0.0;
      rec.dropped = std::max(e1, e2);
    }
    for (size_t i = 0; i < n1.size(); ++i)
      set_block(n1[i], p, QtC.block(0, o1[i], r, o1[i + 1] - o1[i]).transpose());
    for (size_t i = 0; i < n2.size(); ++i)
      set_block(p, n2[i], QtC.block(0, Anp.rows() + o2[i], r, o2[i + 1] - o2[i]));
    set_block(p, p, Matrix::Identity(r, r));
    ops_.push_back(Sparsifier{P.cols, std::move(rr.Q), P.rows, f});
    for (int i = r; i < k; ++i) {
      perm_from_.push_back(P.rows[i]);
      perm_to_.push_back(P.cols[i]);
    }
    P.cols.resize(r);
    P.rows.resize(r);
  } else {
    // change of basis on the columns of p
    for (auto& [rc, B] : blocks_[p]) apply_panel_right(rr.Q, B, false);
    ops_.push_back(Sparsifier{P.cols, std::move(rr.Q), {}, f});
    // split p into coarse (p) and fine (new cluster fc)
    const int fc = static_cast<int>(cl_.size());
    cl_.push_back(Slot{});
    blocks_.emplace_back();
    row_nz_.emplace_back();
    split_parent_[fc] = p;
    Slot& F = cl_[fc];
    Slot& Pc = cl_[p];
    F.cols.assign(Pc.cols.begin() + r, Pc.cols.end());
    F.rows.assign(Pc.rows.begin(), Pc.rows.begin() + f);
    IndexSet coarse_cols(Pc.cols.begin(), Pc.cols.begin() + r);
    IndexSet coarse_rows(Pc.rows.begin() + f, Pc.rows.end());
    Pc.cols = std::move(coarse_cols);
    Pc.rows = std::move(coarse_rows);

    double e1 = 0.0;
    std::map<int, Matrix> colp = std::move(blocks_[p]);
    blocks_[p].clear();
    for (auto& [rc, B] : colp) row_nz_[rc].erase(p);
    std::vector<int> rowp(row_nz_[p].begin(), row_nz_[p].end());
    for (auto& [rc, B] : colp) {
      if (rc == p) {
        set_block(fc, fc, B.block(0, r, f, f));
        set_block(p, fc, B.block(f, r, r, f));
        set_block(fc, p, B.block(0, 0, f, r));
        set_block(p, p, B.block(f, 0, r, r));
        continue;
      }
      Matrix fine = B.rightCols(f);
      if (mode == SparsifyMode::variant2) set_block(rc, fc, std::move(fine));
      else e1 = std::max(e1, opts_.audit_norms ? norm2(fine) : fine.norm());
      set_block(rc, p, B.leftCols(r));
    }
    for (int c : rowp) {
      if (c == p) continue;
      Matrix B = std::move(blocks_[c][p]);
      blocks_[c].erase(p);
      set_block(fc, c, B.topRows(f));
      set_block(p, c, B.bottomRows(k - f));
    }
    eliminate(fc, mode == SparsifyMode::variant1, p);
    rec.dropped = std::max(e1, dropped_coupling_);
  }
  if (opts_.auditor && opts_.auditor->after_sparsify) opts_.auditor->after_sparsify(*this, rec);
  return rec;
}

void Engine::merge() {
  const int t = stage_;
  const auto& cur = tree_.stages[t].clusters;
  const auto& nxt = tree_.stages[t + 1].clusters;
  const int nold = static_cast<int>(cur.size());
  std::vector<Slot> ncl(nxt.size());
  std::vector<int> to(nold, -1), coff(nold, 0), roff(nold, 0);
  for (int c = 0; c < nold; ++c) {
    if (!cl_[c].active || cur[c].parent < 0) continue;
    const int q = cur[c].parent;
    to[c] = q;
    coff[c] = static_cast<int>(ncl[q].cols.size());
    roff[c] = static_cast<int>(ncl[q].rows.size());
    ncl[q].cols.insert(ncl[q].cols.end(), cl_[c].cols.begin(), cl_[c].cols.end());
    ncl[q].rows.insert(ncl[q].rows.end(), cl_[c].rows.begin(), cl_[c].rows.end());
  }
  std::vector<std::map<int, Matrix>> nb(nxt.size());
  std::vector<std::set<int>> nr(nxt.size());
  for (int c = 0; c < nold; ++c) {
    if (to[c] < 0) continue;
    for (auto& [r, B] : blocks_[c]) {
      if (r >= nold || to[r] < 0) continue;
      const int R = to[r], Cc = to[c];
      auto it = nb[Cc].find(R);
      if (it == nb[Cc].end()) {
        it = nb[Cc].emplace(R, Matrix::Zero(ncl[R].rows.size(), ncl[Cc].cols.size())).first;
        nr[R].insert(Cc);
      }
      it->second.block(roff[r], coff[c], B.rows(), B.cols()) = B;
    }
  }
  cl_ = std::move(ncl);
  blocks_ = std::move(nb);
  row_nz_ = std::move(nr);
  split_parent_.clear();
  stage_ = t + 1;
}

void Engine::run() {
  using clock = std::chrono::steady_clock;
  const int L = tree_.L;
  for (int t = 0; t < L; ++t) {
    stage_ = t;
    const Stage& st = tree_.stages[t];
    stats_.emplace_back();
    StageStats& ss = stats_.back();
    cur_ = &ss;
    ss.stage = t;
    ss.level = st.level;

    auto t0 = clock::now();
    for (int s : st.eliminate) {
      ss.eliminated++;
      ss.eliminated_cols += static_cast<int>(cl_[s].cols.size());
      eliminate(s);
    }
    ss.t_factor = seconds_since(t0);

    if (opts_.sparsify && t >= opts_.skip && !st.sparsify.empty()) {
      SparsifyMode mode = opts_.mode;
      if (mode == SparsifyMode::scaled && (t - opts_.skip) % opts_.scale_every != 0) mode = SparsifyMode::unscaled;
      if (mode == SparsifyMode::scaled) {
        t0 = clock::now();
        for (int p : st.sparsify) scale(p);
        ss.t_scale = seconds_since(t0);
      }
      t0 = clock::now();
      for (int p : st.sparsify) {
        if (cl_[p].cols.empty()) continue;
        ss.interfaces++;
        ss.sizes_before.push_back(static_cast<int>(cl_[p].cols.size()));
        SparsifyRecord rec = sparsify(p, mode);
        ss.sizes_after.push_back(rec.rank);
        ss.fine += rec.size - rec.rank;
        ss.max_dropped = std::max(ss.max_dropped, rec.dropped);
        if (rec.block_norm > 0) ss.max_dropped_rel = std::max(ss.max_dropped_rel, rec.dropped / rec.block_norm);
      }
      ss.t_sparsify = seconds_since(t0);
    }
    if (opts_.auditor && opts_.auditor->after_stage) opts_.auditor->after_stage(*this, t);
    for (int c = 0; c < clusters(); ++c) {
      if (!cl_[c].active) continue;
      ss.active_cols += static_cast<int>(cl_[c].cols.size());
      for (const auto& [r, B] : blocks_[c]) ss.block_nnz += B.size();
    }
    if (t + 1 < L) {
      t0 = clock::now();
      merge();
      ss.t_merge = seconds_since(t0);
    }
  }
  cur_ = nullptr;
  ops_.push_back(Permutation{perm_from_, perm_to_});
}

Factorization Engine::take() {
  Factorization F;
  F.N = tree_.N;
  F.L = tree_.L;
  F.ops = std::move(ops_);
  F.stats = std::move(stats_);
  F.opts = opts_;
  F.opts.auditor = nullptr;
  return F;
}

}  // namespace spaqr

#include "spaqr/audit.hpp"

#include <cmath>
#include <limits>

#include "spaqr/solve.hpp"

namespace spaqr {

Matrix materialize(const SparseMat& A, const Factorization& F) {
  const int n = F.N;
  Matrix M(n, n);
  Vector e = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    M.col(j) = apply_qt(F, A * solve_w(F, e));
    e[j] = 0.0;
  }
  return M;
}

namespace {

using BlockMap = std::map<std::pair<int, int>, Matrix>;

// Every stored block outside row and column p (and clusters split off during the call).
BlockMap snapshot(const Engine& e, int p, int limit) {
  BlockMap out;
  for (int c = 0; c < limit; ++c) {
    if (c == p || !e.active(c)) continue;
    for (const auto& [r, B] : e.column_blocks(c))
      if (r != p && r < limit) out.emplace(std::make_pair(r, c), B);
  }
  return out;
}

bool same(const BlockMap& a, const BlockMap& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    const Matrix& x = ia->second;
    const Matrix& y = ib->second;
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    for (Eigen::Index k = 0; k < x.size(); ++k)
      if (x.data()[k] != y.data()[k]) return false;
  }
  return true;
}

}  // namespace

AuditReport run_audit(const SparseMat& A, const ClusterTree& tree, FactorOptions opts, Factorization* out) {
  if (A.rows() > kAuditMaxN)
    throw BadInput("audit refuses N = " + std::to_string(A.rows()) + " > " + std::to_string(kAuditMaxN));
  AuditReport rep;
  rep.N = A.rows();
  rep.a_norm2 = norm2(A.to_dense());

  BlockMap before;
  int limit = 0;
  Auditor aud;
  aud.before_sparsify = [&](const Engine& e, int, int p) {
    limit = e.clusters();
    before = snapshot(e, p, limit);
  };
  aud.after_sparsify = [&](const Engine& e, const SparsifyRecord& rec) {
    rep.nofill_checks++;
    if (!same(before, snapshot(e, rec.cluster, limit))) rep.nofill_violations++;
    if (rec.rank < rec.size) rep.sparsifications++;
  };
  aud.after_stage = [&](const Engine& e, int) {
    std::vector<int> cc;
    Matrix D = e.dense_trailing(nullptr, nullptr, &cc);
    if (D.cols() == 0) return;
    Matrix G = D.transpose() * D;
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      for (Eigen::Index j = 0; j < G.cols(); ++j) {
        const ClusterKey& ki = e.key(cc[i]);
        const ClusterKey& kj = e.key(cc[j]);
        if (ki.self.ancestor_of(kj.self) || kj.self.ancestor_of(ki.self)) continue;
        rep.max_unrelated = std::max(rep.max_unrelated, std::abs(G(i, j)));
      }
  };
  opts.auditor = &aud;
  Factorization F = spaqr_factor(A, tree, opts);

  Matrix M = materialize(A, F);
  Matrix E = M - Matrix::Identity(rep.N, rep.N);
  rep.dev_fro = E.norm();
  Eigen::BDCSVD<Matrix> se(E);
  rep.dev_2 = rep.N ? se.singularValues()(0) : 0.0;
  Eigen::BDCSVD<Matrix> sm(M);
  const auto& sv = sm.singularValues();
  rep.kappa = rep.N ? sv(0) / sv(sv.size() - 1) : 1.0;
  rep.kappa_bound = rep.dev_2 < 1.0 ? (1.0 + rep.dev_2) / (1.0 - rep.dev_2) : std::numeric_limits<double>::infinity();
  if (out) *out = std::move(F);
  return rep;
}

}  // namespace spaqr

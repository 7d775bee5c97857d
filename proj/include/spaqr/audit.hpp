#pragma once

#include "spaqr/factor.hpp"

namespace spaqr {

// Q^T A W^{-1} as a dense matrix (column by column).
Matrix materialize(const SparseMat& A, const Factorization& F);

struct AuditReport {
  int N = 0;
  double dev_fro = 0.0;        // ||Q^T A W^{-1} - I||_F
  double dev_2 = 0.0;          // ||E||_2
  double kappa = 0.0;          // condition number of Q^T A W^{-1}
  double kappa_bound = 0.0;    // (1 + ||E||)/(1 - ||E||), infinite when ||E|| >= 1
  double max_unrelated = 0.0;  // max |(A^T A)_{lm}| over trailing clusters in disjoint subtrees
  double a_norm2 = 0.0;        // ||A||_2
  long long nofill_checks = 0;      // sparsifications checked
  long long nofill_violations = 0;  // blocks outside row/column p that changed
  int sparsifications = 0;
};

constexpr int kAuditMaxN = 5000;

// Factors A with an auditor attached and materializes the result densely.
AuditReport run_audit(const SparseMat& A, const ClusterTree& tree, FactorOptions opts, Factorization* out = nullptr);

}  // namespace spaqr

#pragma once

#include <vector>

#include "spaqr/factor.hpp"

namespace spaqr {

Vector apply_qt(const Factorization& F, const Vector& b);
// x = W^{-1} y
Vector solve_w(const Factorization& F, const Vector& y);
// y = W x
Vector apply_w(const Factorization& F, const Vector& x);

// Factorization of an equilibrated matrix A D^{-1}, applied to the original A.
struct Preconditioner {
  const Factorization* F = nullptr;
  Vector scale;  // D; empty for none

  Vector apply_qt(const Vector& b) const { return spaqr::apply_qt(*F, b); }
  Vector solve_w(const Vector& y) const;  // D^{-1} W^{-1} y
};

struct GmresOptions {
  double tol = 1e-12;
  int maxit = 300;
  int restart = 0;  // 0: full GMRES
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> history;  // true relative residual, entry 0 is the initial guess
  bool converged = false;
  double t_apply_qt = 0, t_solve_w = 0, t_matvec = 0, t_total = 0;
};

// Split-preconditioned GMRES on y -> Q^T A W^{-1} y with x = W^{-1} y.
Vector gmres(const SparseMat& A, const Vector& b, const Preconditioner& M, const GmresOptions& opts,
             SolveReport& report);
Vector gmres(const SparseMat& A, const Vector& b, const Factorization& F, const GmresOptions& opts,
             SolveReport& report);

}  // namespace spaqr

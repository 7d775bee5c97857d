#include "spaqr/solve.hpp"

#include <chrono>
#include <cmath>

namespace spaqr {

namespace {

using clock_type = std::chrono::steady_clock;

double since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void check_dim(const Factorization& F, const Vector& v, const char* what) {
  if (v.size() != F.N)
    throw BadInput(std::string(what) + ": vector has length " + std::to_string(v.size()) + ", expected " +
                   std::to_string(F.N));
}

}  // namespace

Vector apply_qt(const Factorization& F, const Vector& b) {
  check_dim(F, b, "apply_qt");
  Vector x = b;
  for (const auto& t : F.ops) apply_qt(t, x);
  return x;
}

Vector solve_w(const Factorization& F, const Vector& y) {
  check_dim(F, y, "solve_w");
  Vector x = y;
  for (auto it = F.ops.rbegin(); it != F.ops.rend(); ++it) solve_w(*it, x);
  return x;
}

Vector apply_w(const Factorization& F, const Vector& x) {
  check_dim(F, x, "apply_w");
  Vector y = x;
  for (const auto& t : F.ops) apply_w(t, y);
  return y;
}

Vector Preconditioner::solve_w(const Vector& y) const {
  Vector x = spaqr::solve_w(*F, y);
  if (scale.size()) x.array() /= scale.array();
  return x;
}

Vector gmres(const SparseMat& A, const Vector& b, const Preconditioner& M, const GmresOptions& opts,
             SolveReport& rep) {
  if (!(opts.tol > 0.0)) throw BadInput("gmres: tolerance must be positive");
  if (A.rows() != b.size() || A.cols() != b.size()) throw BadInput("gmres: dimension mismatch");
  const auto t_start = clock_type::now();
  const int n = static_cast<int>(b.size());
  rep = SolveReport{};
  Vector x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.history.push_back(0.0);
    rep.converged = true;
    return x;
  }
  auto timed = [](double& acc, auto&& f) {
    auto t0 = clock_type::now();
    auto out = f();
    acc += since(t0);
    return out;
  };
  auto true_residual = [&](const Vector& xx) {
    Vector r = timed(rep.t_matvec, [&] { return Vector(A * xx); });
    return (b - r).norm() / bnorm;
  };
  rep.history.push_back(1.0);
  const int m_max = opts.restart > 0 ? opts.restart : opts.maxit;

  while (rep.iterations < opts.maxit && !rep.converged) {
    Vector r0 = b - timed(rep.t_matvec, [&] { return Vector(A * x); });
    Vector z = timed(rep.t_apply_qt, [&] { return M.apply_qt(r0); });
    const double beta = z.norm();
    if (beta == 0.0) {
      rep.converged = true;
      break;
    }
    const int m = std::min(m_max, opts.maxit - rep.iterations);
    Matrix V = Matrix::Zero(n, m + 1);
    Matrix H = Matrix::Zero(m + 1, m);
    Vector cs = Vector::Zero(m), sn = Vector::Zero(m), g = Vector::Zero(m + 1);
    V.col(0) = z / beta;
    g[0] = beta;
    Vector xbase = x;
    int k = 0;
    for (; k < m; ++k) {
      Vector u = timed(rep.t_solve_w, [&] { return M.solve_w(V.col(k)); });
      Vector w = timed(rep.t_matvec, [&] { return Vector(A * u); });
      w = timed(rep.t_apply_qt, [&] { return M.apply_qt(w); });
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j <= k; ++j) {
          double h = V.col(j).dot(w);
          H(j, k) += h;
          w.noalias() -= h * V.col(j);
        }
        const double wn = w.norm();
        if (wn == 0.0) break;
        double loss = (V.leftCols(k + 1).transpose() * w).cwiseAbs().maxCoeff() / wn;
        if (loss <= 1e-8) break;
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) > 0.0) V.col(k + 1) = w / H(k + 1, k);
      for (int j = 0; j < k; ++j) {
        double t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
        H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
        H(j, k) = t;
      }
      double rr = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = rr > 0.0 ? H(k, k) / rr : 1.0;
      sn[k] = rr > 0.0 ? H(k + 1, k) / rr : 0.0;
      H(k, k) = rr;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];

      // current iterate and its true residual
      Vector y = H.topLeftCorner(k + 1, k + 1).triangularView<Eigen::Upper>().solve(g.head(k + 1));
      Vector dy = V.leftCols(k + 1) * y;
      x = xbase + timed(rep.t_solve_w, [&] { return M.solve_w(dy); });
      rep.iterations++;
      const double res = true_residual(x);
      rep.history.push_back(res);
      if (res <= opts.tol) {
        rep.converged = true;
        break;
      }
      if (H(k, k) == 0.0 || std::abs(g[k + 1]) == 0.0) break;  // breakdown
    }
    if (!rep.converged && k < m) break;  // breakdown without convergence
  }
  rep.t_total = since(t_start);
  return x;
}

Vector gmres(const SparseMat& A, const Vector& b, const Factorization& F, const GmresOptions& opts,
             SolveReport& report) {
  Preconditioner M{&F, {}};
  return gmres(A, b, M, opts, report);
}

}  // namespace spaqr

#include "spaqr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spaqr {

namespace {
constexpr int kBlock = 32;
constexpr Eigen::Index kParallelCols = 256;
}  // namespace

HouseholderPanel HouseholderPanel::identity(int m) {
  HouseholderPanel H;
  H.V = Matrix::Zero(m, 0);
  H.tau = Vector::Zero(0);
  H.T = Matrix::Zero(0, 0);
  return H;
}

namespace detail {

double make_reflector(double* x, int n, double& beta) {
  double x0 = x[0];
  double sigma = 0.0;
  for (int i = 1; i < n; ++i) sigma += x[i] * x[i];
  if (sigma == 0.0) {
    beta = x0;
    x[0] = 1.0;
    return 0.0;
  }
  const double mu = std::sqrt(x0 * x0 + sigma);
  beta = x0 >= 0.0 ? -mu : mu;
  const double v0 = x0 - beta;
  for (int i = 1; i < n; ++i) x[i] /= v0;
  x[0] = 1.0;
  return (beta - x0) / beta;
}

void positive_diagonal(Matrix& R, HouseholderPanel& H) {
  H.sign = Vector::Ones(R.rows());
  for (Eigen::Index j = 0; j < R.rows(); ++j)
    if (R(j, j) < 0.0) {
      H.sign[j] = -1.0;
      R.row(j) *= -1.0;
    }
}

Matrix build_t(const Matrix& V, const Vector& tau) {
  const Eigen::Index k = V.cols();
  Matrix T = Matrix::Zero(k, k);
  if (k == 0) return T;
  Matrix G = Matrix::Zero(k, k);
  G.triangularView<Eigen::StrictlyUpper>() = V.transpose() * V;
  for (Eigen::Index i = 0; i < k; ++i) {
    T(i, i) = tau[i];
    if (i > 0 && tau[i] != 0.0) {
      Vector g = G.col(i).head(i);
      Vector tg = T.topLeftCorner(i, i).triangularView<Eigen::Upper>() * g;
      T.col(i).head(i) = -tau[i] * tg;
    }
  }
  return T;
}

}  // namespace detail

namespace {

// Unit lower trapezoidal V from the reflector storage in A (below the diagonal).
Matrix extract_v(const Matrix& A, Eigen::Index k) {
  const Eigen::Index m = A.rows();
  Matrix V = Matrix::Zero(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    V(j, j) = 1.0;
    if (j + 1 < m) V.col(j).tail(m - j - 1) = A.col(j).tail(m - j - 1);
  }
  return V;
}

// Apply I - V T^(T) V^T from the left to a column block.
void apply_wy_left(const Eigen::Ref<const Matrix>& V, const Matrix& T, Eigen::Ref<Matrix> C,
                   bool transpose) {
  Matrix W = V.transpose() * C;
  if (transpose) W = T.transpose().triangularView<Eigen::Lower>() * W;
  else W = T.triangularView<Eigen::Upper>() * W;
  C.noalias() -= V * W;
}

template <class M>
void flip_rows(const Vector& sign, M&& C) {
  for (Eigen::Index j = 0; j < sign.size(); ++j)
    if (sign[j] < 0.0) C.row(j) *= -1.0;
}

template <class M>
void flip_cols(const Vector& sign, M&& C) {
  for (Eigen::Index j = 0; j < sign.size(); ++j)
    if (sign[j] < 0.0) C.col(j) *= -1.0;
}

}  // namespace

QRFactor qr_house(const Matrix& B) {
  const Eigen::Index m = B.rows(), k = B.cols();
  if (m < k) throw BadInput("qr_house requires rows >= cols");
  Matrix A = B;
  Vector tau = Vector::Zero(k);
  for (Eigen::Index j0 = 0; j0 < k; j0 += kBlock) {
    Eigen::Index jb = std::min<Eigen::Index>(kBlock, k - j0);
    for (Eigen::Index j = j0; j < j0 + jb; ++j) {
      double beta;
      tau[j] = detail::make_reflector(&A(j, j), static_cast<int>(m - j), beta);
      Eigen::Index rest = j0 + jb - j - 1;
      if (rest > 0 && tau[j] != 0.0) {
        auto v = A.col(j).tail(m - j);
        auto blk = A.block(j, j + 1, m - j, rest);
        Eigen::RowVectorXd w = v.transpose() * blk;
        blk.noalias() -= (tau[j] * v) * w;
      }
      A(j, j) = beta;  // reflector head is implicit from here on
    }
    Eigen::Index trail = k - j0 - jb;
    if (trail > 0) {
      Matrix Vp = Matrix::Zero(m - j0, jb);
      for (Eigen::Index j = 0; j < jb; ++j) {
        Vp(j, j) = 1.0;
        Vp.col(j).tail(m - j0 - j - 1) = A.col(j0 + j).tail(m - j0 - j - 1);
      }
      Matrix Tp = detail::build_t(Vp, tau.segment(j0, jb));
      apply_wy_left(Vp, Tp, A.block(j0, j0 + jb, m - j0, trail), true);
    }
  }
  QRFactor out;
  out.R = A.topRows(k).triangularView<Eigen::Upper>();
  out.panel.V = extract_v(A, k);
  out.panel.tau = tau;
  out.panel.T = detail::build_t(out.panel.V, tau);
  detail::positive_diagonal(out.R, out.panel);
  return out;
}

void apply_panel_left(const HouseholderPanel& H, Eigen::Ref<Matrix> C, bool transpose) {
  if (C.rows() != H.rows()) throw BadInput("apply_panel_left: dimension mismatch");
  if (H.size() == 0 || C.cols() == 0) return;
  if (!transpose) flip_rows(H.sign, C);
  const Eigen::Index n = C.cols();
  if (n < 2 * kParallelCols) {
    apply_wy_left(H.V, H.T, C, transpose);
  } else {
    const Eigen::Index chunks = (n + kParallelCols - 1) / kParallelCols;
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index c = 0; c < chunks; ++c) {
      Eigen::Index b = c * kParallelCols;
      Eigen::Index w = std::min(kParallelCols, n - b);
      apply_wy_left(H.V, H.T, C.middleCols(b, w), transpose);
    }
  }
  if (transpose) flip_rows(H.sign, C);
}

Matrix panel_product(const HouseholderPanel& H, const Matrix& C, bool transpose) {
  Matrix out = C;
  apply_panel_left(H, Eigen::Ref<Matrix>(out), transpose);
  return out;
}

void apply_panel_right(const HouseholderPanel& H, Eigen::Ref<Matrix> C, bool transpose) {
  if (C.cols() != H.rows()) throw BadInput("apply_panel_right: dimension mismatch");
  if (H.size() == 0 || C.rows() == 0) return;
  if (transpose) flip_cols(H.sign, C);
  Matrix W = C * H.V;
  if (transpose) W = W * H.T.transpose().triangularView<Eigen::Lower>();
  else W = W * H.T.triangularView<Eigen::Upper>();
  C.noalias() -= W * H.V.transpose();
  if (!transpose) flip_cols(H.sign, C);
}

void apply_panel_vec(const HouseholderPanel& H, double* x, bool transpose) {
  if (H.size() == 0) return;
  Eigen::Map<Vector> v(x, H.rows());
  if (!transpose) flip_rows(H.sign, v);
  Vector w = H.V.transpose() * v;
  if (transpose) w = H.T.transpose().triangularView<Eigen::Lower>() * w;
  else w = H.T.triangularView<Eigen::Upper>() * w;
  v.noalias() -= H.V * w;
  if (transpose) flip_rows(H.sign, v);
}

Matrix panel_dense(const HouseholderPanel& H) {
  Matrix Q = Matrix::Identity(H.rows(), H.rows());
  apply_panel_left(H, Q, false);
  return Q;
}

Matrix RRQRResult::qtm() const {
  const Eigen::Index m = Q.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(perm.size());
  Matrix P = Matrix::Zero(m, k);
  if (rank > 0) P.topRows(rank) = R;
  if (m > rank && k > rank) P.bottomRightCorner(m - rank, k - rank) = trailing;
  Matrix out(m, k);
  for (Eigen::Index j = 0; j < k; ++j) out.col(perm[j]) = P.col(j);
  return out;
}

RRQRResult rrqr_threshold(const Matrix& M, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw BadInput("rrqr_threshold: eps must lie in [0, 1)");
  const Eigen::Index m = M.rows(), n = M.cols();
  const Eigen::Index kmax = std::min(m, n);
  Matrix A = M;
  RRQRResult res;
  res.perm.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) res.perm[j] = static_cast<int>(j);
  Vector vn1(n), vn2(n);
  for (Eigen::Index j = 0; j < n; ++j) vn1[j] = vn2[j] = A.col(j).norm();
  Vector tau = Vector::Zero(kmax);
  const double tol3z = std::sqrt(std::numeric_limits<double>::epsilon());

  Eigen::Index i = 0;  // accepted reflectors
  bool stop = (kmax == 0);
  while (!stop && i < kmax) {
    const Eigen::Index nb = std::min<Eigen::Index>(kBlock, kmax - i);
    Matrix F = Matrix::Zero(n - i, nb);
    Eigen::Index kb = 0;
    bool recompute = false;  // a downdated norm lost accuracy
    while (kb < nb) {
      const Eigen::Index c = i + kb;
      Eigen::Index p = c;
      for (Eigen::Index j = c + 1; j < n; ++j)
        if (vn1[j] > vn1[p] || (vn1[j] == vn1[p] && res.perm[j] < res.perm[p])) p = j;
      if (p != c) {
        A.col(p).swap(A.col(c));
        F.row(p - i).swap(F.row(c - i));
        std::swap(res.perm[p], res.perm[c]);
        std::swap(vn1[p], vn1[c]);
        std::swap(vn2[p], vn2[c]);
      }
      if (kb > 0)
        A.col(c).tail(m - c).noalias() -=
            A.block(c, i, m - c, kb) * F.row(c - i).head(kb).transpose();
      const double alpha = A.col(c).tail(m - c).norm();
      if (c == 0) {
        res.r11 = alpha;
        if (alpha == 0.0) { stop = true; break; }
      }
      if (alpha < eps * res.r11) { stop = true; break; }
      double beta;
      tau[c] = detail::make_reflector(&A(c, c), static_cast<int>(m - c), beta);
      auto v = A.col(c).tail(m - c);
      // F(c+1:n, kb) = tau A(c:m, c+1:n)^T v - tau F(:, 0:kb) (V_prev^T v)
      if (c + 1 < n)
        F.col(kb).tail(n - c - 1).noalias() = tau[c] * (A.block(c, c + 1, m - c, n - c - 1).transpose() * v);
      if (kb > 0) {
        Vector aux = A.block(c, i, m - c, kb).transpose() * v;
        F.col(kb).noalias() -= tau[c] * (F.leftCols(kb) * aux);
      }
      // pivot row update; A(c, c) still holds the unit reflector head
      if (c + 1 < n)
        A.row(c).tail(n - c - 1).noalias() -=
            A.row(c).segment(i, kb + 1) * F.block(c + 1 - i, 0, n - c - 1, kb + 1).transpose();
      A(c, c) = beta;
      for (Eigen::Index j = c + 1; j < n; ++j) {
        if (vn1[j] == 0.0) continue;
        double t = std::abs(A(c, j)) / vn1[j];
        t = std::max(0.0, (1.0 + t) * (1.0 - t));
        double t2 = t * (vn1[j] / vn2[j]) * (vn1[j] / vn2[j]);
        if (t2 <= tol3z) {
          recompute = true;
        } else {
          vn1[j] *= std::sqrt(t);
        }
      }
      ++kb;
      if (recompute) break;
    }
    // deferred trailing update for the kb reflectors of this block
    const Eigen::Index r0 = i + kb;
    const Eigen::Index c0 = stop ? r0 + 1 : r0;  // a rejected column already carries the update
    if (kb > 0 && r0 < m && c0 < n)
      A.block(r0, c0, m - r0, n - c0).noalias() -=
          A.block(r0, i, m - r0, kb) * F.block(c0 - i, 0, n - c0, kb).transpose();
    i = r0;
    // exact norms at every block boundary keep the pivot order reliable
    for (Eigen::Index j = i; j < n; ++j) vn1[j] = vn2[j] = (i < m) ? A.col(j).tail(m - i).norm() : 0.0;
  }

  res.rank = static_cast<int>(i);
  // below-diagonal entries of the first `rank` columns hold reflector data
  res.R = Matrix::Zero(i, n);
  for (Eigen::Index r = 0; r < i; ++r) res.R.row(r).tail(n - r) = A.row(r).tail(n - r);
  res.trailing = A.bottomRightCorner(m - i, n - i);
  res.Q.V = extract_v(A, i);
  res.Q.tau = tau.head(i);
  res.Q.T = detail::build_t(res.Q.V, res.Q.tau);
  return res;
}

void check_pivots(const Matrix& R, const std::string& context) {
  const Eigen::Index k = std::min(R.rows(), R.cols());
  if (k == 0) return;
  double r11 = std::abs(R(0, 0));
  double dmax = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) dmax = std::max(dmax, std::abs(R(i, i)));
  for (Eigen::Index i = 0; i < k; ++i) {
    double d = std::abs(R(i, i));
    if (!(d > kPivotFloor * std::max(r11, dmax)) || !std::isfinite(d))
      throw SingularPivot(static_cast<int>(i), d, context);
  }
}

void tri_solve_inplace(const Matrix& R, Eigen::Ref<Matrix> C, Side side) {
  check_pivots(R);
  if (side == Side::left) {
    if (C.rows() != R.rows()) throw BadInput("tri_solve: dimension mismatch");
    R.triangularView<Eigen::Upper>().solveInPlace(C);
  } else {
    if (C.cols() != R.rows()) throw BadInput("tri_solve: dimension mismatch");
    R.triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(C);
  }
}

Matrix tri_solve(const Matrix& R, const Matrix& C, Side side) {
  Matrix X = C;
  tri_solve_inplace(R, X, side);
  return X;
}

double norm2(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() > 2 * M.cols() || M.cols() > 2 * M.rows()) {
    Matrix G = M.rows() > M.cols() ? Matrix(M.transpose() * M) : Matrix(M * M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

}  // namespace spaqr

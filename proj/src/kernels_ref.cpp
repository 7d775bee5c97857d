#include "spaqr/kernels_ref.hpp"

#include <cmath>

namespace spaqr::ref {

namespace {

void reflect(const double* v, double tau, Eigen::Ref<Matrix> C, Eigen::Index r0) {
  // C(r0:, :) -= tau v (v^T C(r0:, :))
  const Eigen::Index m = C.rows() - r0;
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += v[i] * C(r0 + i, j);
    s *= tau;
    for (Eigen::Index i = 0; i < m; ++i) C(r0 + i, j) -= s * v[i];
  }
}

HouseholderPanel panel_from(const Matrix& A, const Vector& tau, Eigen::Index k) {
  HouseholderPanel H;
  const Eigen::Index m = A.rows();
  H.V = Matrix::Zero(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    H.V(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < m; ++i) H.V(i, j) = A(i, j);
  }
  H.tau = tau.head(k);
  H.T = detail::build_t(H.V, H.tau);
  return H;
}

}  // namespace

QRFactor qr_house(const Matrix& B) {
  const Eigen::Index m = B.rows(), k = B.cols();
  if (m < k) throw BadInput("qr_house requires rows >= cols");
  Matrix A = B;
  Vector tau = Vector::Zero(k);
  std::vector<double> v(m);
  for (Eigen::Index j = 0; j < k; ++j) {
    double beta;
    tau[j] = detail::make_reflector(&A(j, j), static_cast<int>(m - j), beta);
    for (Eigen::Index i = j; i < m; ++i) v[i - j] = A(i, j);
    if (j + 1 < k) reflect(v.data(), tau[j], A.rightCols(k - j - 1), j);
    A(j, j) = beta;
  }
  QRFactor out;
  out.R = A.topRows(k).triangularView<Eigen::Upper>();
  out.panel = panel_from(A, tau, k);
  detail::positive_diagonal(out.R, out.panel);
  return out;
}

void apply_panel_left(const HouseholderPanel& H, Eigen::Ref<Matrix> C, bool transpose) {
  if (C.rows() != H.rows()) throw BadInput("apply_panel_left: dimension mismatch");
  const Eigen::Index k = H.size();
  auto flip = [&] {
    for (Eigen::Index j = 0; j < H.sign.size(); ++j)
      if (H.sign[j] < 0.0) C.row(j) *= -1.0;
  };
  if (!transpose) flip();
  // H^T = H_k ... H_1 applied H_1 first; H = H_1 ... H_k applied H_k first
  for (Eigen::Index s = 0; s < k; ++s) {
    Eigen::Index j = transpose ? s : k - 1 - s;
    reflect(H.V.col(j).data() + j, H.tau[j], C, j);
  }
  if (transpose) flip();
}

RRQRResult rrqr_threshold(const Matrix& M, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw BadInput("rrqr_threshold: eps must lie in [0, 1)");
  const Eigen::Index m = M.rows(), n = M.cols(), kmax = std::min(m, n);
  Matrix A = M;
  RRQRResult res;
  res.perm.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) res.perm[j] = static_cast<int>(j);
  Vector tau = Vector::Zero(kmax);
  std::vector<double> v(m);
  Eigen::Index i = 0;
  for (; i < kmax; ++i) {
    Eigen::Index p = i;
    double best = -1.0;
    for (Eigen::Index j = i; j < n; ++j) {
      double nj = A.col(j).tail(m - i).norm();
      if (nj > best || (nj == best && res.perm[j] < res.perm[p])) {
        best = nj;
        p = j;
      }
    }
    if (i == 0) {
      res.r11 = best;
      if (best == 0.0) break;
    }
    if (best < eps * res.r11) break;
    if (p != i) {
      A.col(p).swap(A.col(i));
      std::swap(res.perm[p], res.perm[i]);
    }
    double beta;
    tau[i] = detail::make_reflector(&A(i, i), static_cast<int>(m - i), beta);
    for (Eigen::Index r = i; r < m; ++r) v[r - i] = A(r, i);
    if (i + 1 < n) reflect(v.data(), tau[i], A.rightCols(n - i - 1), i);
    A(i, i) = beta;
  }
  res.rank = static_cast<int>(i);
  res.R = Matrix::Zero(i, n);
  for (Eigen::Index r = 0; r < i; ++r) res.R.row(r).tail(n - r) = A.row(r).tail(n - r);
  res.trailing = A.bottomRightCorner(m - i, n - i);
  res.Q = panel_from(A, tau, i);
  return res;
}

}  // namespace spaqr::ref

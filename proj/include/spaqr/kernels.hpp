#pragma once

#include <string>
#include <vector>

#include "spaqr/sparse.hpp"

namespace spaqr {

// Product of k Householder reflectors H = H_1 ... H_k = I - V T V^T
// (compact WY). V is m x k unit lower trapezoidal with explicit ones/zeros.
struct HouseholderPanel {
  Matrix V;
  Vector tau;
  Matrix T;
  Vector sign;  // Q = H diag(sign); empty for plain reflector products

  int rows() const { return static_cast<int>(V.rows()); }
  int size() const { return static_cast<int>(V.cols()); }
  std::size_t payload() const { return static_cast<std::size_t>(V.size() + tau.size() + T.size() + sign.size()); }
  static HouseholderPanel identity(int m);
};

struct QRFactor {
  HouseholderPanel panel;
  Matrix R;  // k x k, nonnegative diagonal
};

// H^T B = [R; 0].
QRFactor qr_house(const Matrix& B);

// H^T C (transpose) or H C, in place.
void apply_panel_left(const HouseholderPanel& H, Eigen::Ref<Matrix> C, bool transpose);
Matrix panel_product(const HouseholderPanel& H, const Matrix& C, bool transpose);  // copy of the above
// C H^T (transpose) or C H, in place.
void apply_panel_right(const HouseholderPanel& H, Eigen::Ref<Matrix> C, bool transpose);
void apply_panel_vec(const HouseholderPanel& H, double* x, bool transpose);
Matrix panel_dense(const HouseholderPanel& H);  // H as an m x m matrix

struct RRQRResult {
  HouseholderPanel Q;      // `rank` reflectors acting on m rows
  Matrix R;                // rank x k rows of Q^T M P
  Matrix trailing;         // (m - rank) x (k - rank) remainder of Q^T M P
  std::vector<int> perm;   // column j of M P is column perm[j] of M
  int rank = 0;
  double r11 = 0.0;

  // Q^T M in the original column order (m x k).
  Matrix qtm() const;
  Matrix dense_q() const { return panel_dense(Q); }
};

// Column-pivoted QR stopped at r = max{i : |R_ii| / |R_11| >= eps}.
RRQRResult rrqr_threshold(const Matrix& M, double eps);

enum class Side { left, right };

constexpr double kPivotFloor = 1e-14;

// Throws SingularPivot when |R_ii| <= kPivotFloor * |R_11|.
void check_pivots(const Matrix& R, const std::string& context = "");
// R^{-1} C (left) or C R^{-1} (right) for upper-triangular R.
Matrix tri_solve(const Matrix& R, const Matrix& C, Side side);
void tri_solve_inplace(const Matrix& R, Eigen::Ref<Matrix> C, Side side);

double norm2(const Matrix& M);  // spectral norm via SVD

namespace detail {
// Reflector for x (length n), beta = -sign(x_0) ||x||; x becomes v with v_0 = 1.
double make_reflector(double* x, int n, double& beta);
Matrix build_t(const Matrix& V, const Vector& tau);
// flips rows of R to a nonnegative diagonal, recording the signs in H
void positive_diagonal(Matrix& R, HouseholderPanel& H);
}  // namespace detail

}  // namespace spaqr

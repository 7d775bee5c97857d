#pragma once

// Unblocked, single-threaded versions of the dense kernels. Kept as the
// reference the blocked kernels are tested and benchmarked against.

#include "spaqr/kernels.hpp"

namespace spaqr::ref {

QRFactor qr_house(const Matrix& B);
void apply_panel_left(const HouseholderPanel& H, Eigen::Ref<Matrix> C, bool transpose);
RRQRResult rrqr_threshold(const Matrix& M, double eps);

}  // namespace spaqr::ref

#pragma once

#include <variant>
#include <vector>

#include "spaqr/kernels.hpp"

namespace spaqr {

// Elimination of a cluster s: H^T acts on `rows` (s rows first, then the
// coupled rows); W gets [R_ss R_sn] on columns (cols, ncols).
struct BlockHouseholder {
  IndexSet rows;
  HouseholderPanel panel;
  IndexSet cols;
  Matrix R;       // |cols| x |cols|
  IndexSet ncols;
  Matrix Rsn;     // |cols| x |ncols|
};

// U^T on the rows of an interface, R^{-1} on its columns.
struct InterfaceScaling {
  IndexSet rows;
  IndexSet cols;
  HouseholderPanel U;
  Matrix R;
};

// Orthogonal change of basis of an interface: Q on its columns, and Q^T on
// its rows when `rows` is non-empty (scaled mode). The last `fine` entries
// are the discarded directions.
struct Sparsifier {
  IndexSet cols;
  HouseholderPanel Q;
  IndexSet rows;
  int fine = 0;
};

// Moves entry from[i] to to[i].
struct Permutation {
  IndexSet from;
  IndexSet to;
};

using Transform = std::variant<BlockHouseholder, InterfaceScaling, Sparsifier, Permutation>;

std::size_t payload(const Transform& t);

// Q-side action (Q^T applied to a vector).
void apply_qt(const Transform& t, Vector& x);
// W-side inverse (x <- W_t^{-1} x) and forward (x <- W_t x).
void solve_w(const Transform& t, Vector& x);
void apply_w(const Transform& t, Vector& x);

}  // namespace spaqr

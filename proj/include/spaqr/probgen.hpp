#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spaqr/sparse.hpp"

namespace spaqr {

// mt19937_64 seeded from (seed, stream) through splitmix64.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);
double uniform01(std::mt19937_64& g);  // 53-bit uniform in [0, 1)

struct FieldSpec {
  int dims = 2;
  int n = 0;                 // interior nodes per axis
  bool high_contrast = false;
  double a = 1.0;            // constant coefficient
  double rho = 1.0;
  std::uint64_t seed = 0;
  bool b_exp = false;        // b = e^{x+y(+z)} instead of constant
  double b = 1.0;
  double q = 0.0;
};

// Node values in {rho, 1/rho}, index x + n (y + n z).
std::vector<double> high_contrast_field(int n, int dims, double rho, std::uint64_t seed);

// -div(a grad u) + q div(b (1,..,1) u) on the unit square/cube, Dirichlet
// boundary, h = 1/(n+1).
SparseMat advection_diffusion(const FieldSpec& spec);

// Random sparse n x n matrix: k off-diagonal entries per column, diagonal
// equal to the absolute row sum plus one.
SparseMat random_sparse(int n, int k, std::uint64_t seed);

struct Problem {
  std::string spec;
  SparseMat A;
  std::vector<int> grid;  // empty for non-grid problems
};

// "ad2d:n=127,a=hc(rho=10,seed=7),b=1,q=1", "ad3d:...", "rand:n=400,k=4,seed=1"
FieldSpec parse_field_spec(const std::string& spec);
Problem make_problem(const std::string& spec);

}  // namespace spaqr

#include <algorithm>
#include <chrono>

#include "spaqr/factor.hpp"

namespace spaqr {

SparsifyMode parse_mode(const std::string& s) {
  if (s == "scaled") return SparsifyMode::scaled;
  if (s == "unscaled") return SparsifyMode::unscaled;
  if (s == "variant1") return SparsifyMode::variant1;
  if (s == "variant2") return SparsifyMode::variant2;
  throw BadInput("unknown sparsification mode '" + s + "' (scaled, unscaled, variant1, variant2)");
}

const char* to_string(SparsifyMode m) {
  switch (m) {
    case SparsifyMode::scaled: return "scaled";
    case SparsifyMode::unscaled: return "unscaled";
    case SparsifyMode::variant1: return "variant1";
    case SparsifyMode::variant2: return "variant2";
  }
  return "?";
}

Quartiles quartiles(std::vector<int> v) {
  Quartiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double f) {
    double pos = f * static_cast<double>(v.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q.min = v.front();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  q.max = v.back();
  return q;
}

std::size_t Factorization::payload_scalars() const {
  std::size_t n = 0;
  for (const auto& t : ops) n += payload(t);
  return n;
}

Factorization spaqr_factor(const SparseMat& A, const ClusterTree& tree, const FactorOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  Engine e(A, tree, opts);
  e.run();
  Factorization F = e.take();
  F.factor_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return F;
}

}  // namespace spaqr

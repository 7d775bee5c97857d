#include "spaqr/probgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace spaqr {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int reflect(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

// key=value pairs; values may contain parenthesized groups with commas
std::map<std::string, std::string> split_args(const std::string& s) {
  std::map<std::string, std::string> out;
  int depth = 0;
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    auto eq = cur.find('=');
    if (eq == std::string::npos) throw BadInput("problem spec: expected key=value, got '" + cur + "'");
    out[cur.substr(0, eq)] = cur.substr(eq + 1);
    cur.clear();
  };
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) flush();
    else cur += ch;
  }
  flush();
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw BadInput("problem spec: '" + key + "' expects a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d != std::floor(d)) throw BadInput("problem spec: '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<long>(d);
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  std::uint64_t a = splitmix64(s), b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::vector<double> high_contrast_field(int n, int dims, double rho, std::uint64_t seed) {
  if (n < 2) throw BadInput("high_contrast_field: n must be >= 2");
  if (dims < 1 || dims > 3) throw BadInput("high_contrast_field: dims must be 1, 2 or 3");
  if (!(rho >= 1.0)) throw BadInput("high_contrast_field: rho must be >= 1");
  size_t total = 1;
  for (int d = 0; d < dims; ++d) total *= static_cast<size_t>(n);
  auto rng = make_rng(seed, 1);
  std::vector<double> f(total);
  for (auto& v : f) v = uniform01(rng);

  constexpr int radius = 3;
  double w[2 * radius + 1];
  double wsum = 0.0;
  for (int k = -radius; k <= radius; ++k) wsum += w[k + radius] = std::exp(-0.5 * k * k);
  for (auto& x : w) x /= wsum;

  std::vector<double> tmp(total);
  size_t stride = 1;
  for (int d = 0; d < dims; ++d) {
    for (size_t idx = 0; idx < total; ++idx) {
      int c = static_cast<int>((idx / stride) % n);
      size_t base = idx - static_cast<size_t>(c) * stride;
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += w[k + radius] * f[base + static_cast<size_t>(reflect(c + k, n)) * stride];
      tmp[idx] = s;
    }
    f.swap(tmp);
    stride *= static_cast<size_t>(n);
  }
  for (auto& v : f) v = v > 0.5 ? rho : 1.0 / rho;
  return f;
}

SparseMat advection_diffusion(const FieldSpec& s) {
  if (s.dims != 2 && s.dims != 3) throw BadInput("advection_diffusion: dims must be 2 or 3");
  if (s.n < 2) throw BadInput("advection_diffusion: n must be >= 2");
  const int n = s.n, D = s.dims;
  const double h = 1.0 / (n + 1);
  size_t N = static_cast<size_t>(n) * n * (D == 3 ? n : 1);
  if (N > static_cast<size_t>(std::numeric_limits<int>::max())) throw BadInput("advection_diffusion: grid too large");
  std::vector<double> a;
  if (s.high_contrast) a = high_contrast_field(n, D, s.rho, s.seed);
  else a.assign(N, s.a);
  for (double v : a)
    if (!(v > 0.0)) throw BadInput("advection_diffusion: coefficient a must be positive");

  auto bval = [&](const int* c) {
    if (!s.b_exp) return s.b;
    double x = 0.0;
    for (int d = 0; d < D; ++d) x += (c[d] + 1) * h;
    return std::exp(x);
  };
  const double ih2 = 1.0 / (h * h), adv = s.q / (2.0 * h);
  std::vector<Triplet> t;
  t.reserve(N * (2 * D + 1));
  int stride[3] = {1, n, n * n};
  for (size_t idx = 0; idx < N; ++idx) {
    int c[3] = {static_cast<int>(idx % n), static_cast<int>((idx / n) % n), D == 3 ? static_cast<int>(idx / (static_cast<size_t>(n) * n)) : 0};
    const int i = static_cast<int>(idx);
    const double ai = a[idx];
    double diag = 0.0;
    for (int d = 0; d < D; ++d)
      for (int dir = -1; dir <= 1; dir += 2) {
        int cn = c[d] + dir;
        if (cn < 0 || cn >= n) {
          diag += ai * ih2;
          continue;
        }
        int j = i + dir * stride[d];
        double aj = a[j];
        double face = 2.0 * ai * aj / (ai + aj);
        diag += face * ih2;
        int cc[3] = {c[0], c[1], c[2]};
        cc[d] = cn;
        double v = -face * ih2 + dir * adv * bval(cc);
        t.push_back({i, j, v});
      }
    t.push_back({i, i, diag});
  }
  return SparseMat::from_triplets(static_cast<int>(N), static_cast<int>(N), t);
}

SparseMat random_sparse(int n, int k, std::uint64_t seed) {
  if (n < 1 || k < 0) throw BadInput("random_sparse: need n >= 1, k >= 0");
  auto rng = make_rng(seed, 2);
  std::vector<Triplet> t;
  std::vector<double> rowsum(n, 0.0);
  for (int j = 0; j < n; ++j) {
    std::set<int> rows;
    int want = std::min(k, n - 1);
    while (static_cast<int>(rows.size()) < want) {
      int i = static_cast<int>(uniform01(rng) * n);
      if (i != j) rows.insert(i);
    }
    for (int i : rows) {
      double v = 2.0 * uniform01(rng) - 1.0;
      t.push_back({i, j, v});
      rowsum[i] += std::abs(v);
    }
  }
  for (int i = 0; i < n; ++i) t.push_back({i, i, rowsum[i] + 1.0});
  return SparseMat::from_triplets(n, n, t);
}

FieldSpec parse_field_spec(const std::string& spec) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  if (kind != "ad2d" && kind != "ad3d") throw BadInput("unknown generator '" + kind + "' (ad2d, ad3d, rand)");
  FieldSpec f;
  f.dims = kind == "ad2d" ? 2 : 3;
  auto args = split_args(colon == std::string::npos ? "" : spec.substr(colon + 1));
  for (const auto& [key, v] : args) {
    if (key == "n") {
      f.n = static_cast<int>(to_long(key, v));
    } else if (key == "a") {
      if (v.rfind("hc(", 0) == 0 && v.back() == ')') {
        f.high_contrast = true;
        for (const auto& [hk, hv] : split_args(v.substr(3, v.size() - 4))) {
          if (hk == "rho") f.rho = to_double(hk, hv);
          else if (hk == "seed") f.seed = static_cast<std::uint64_t>(to_long(hk, hv));
          else throw BadInput("problem spec: unknown field option '" + hk + "'");
        }
      } else {
        f.a = to_double(key, v);
      }
    } else if (key == "b") {
      if (v == "exp") f.b_exp = true;
      else f.b = to_double(key, v);
    } else if (key == "q") {
      f.q = to_double(key, v);
    } else if (key == "rho") {
      f.high_contrast = true;
      f.rho = to_double(key, v);
    } else if (key == "seed") {
      f.seed = static_cast<std::uint64_t>(to_long(key, v));
    } else {
      throw BadInput("problem spec: unknown key '" + key + "'");
    }
  }
  if (f.n < 2) throw BadInput("problem spec: n must be given and >= 2");
  if (f.high_contrast && !(f.rho >= 1.0)) throw BadInput("problem spec: rho must be >= 1");
  return f;
}

Problem make_problem(const std::string& spec) {
  Problem p;
  p.spec = spec;
  if (spec.rfind("rand", 0) == 0) {
    auto colon = spec.find(':');
    auto args = split_args(colon == std::string::npos ? "" : spec.substr(colon + 1));
    int n = 0, k = 4;
    std::uint64_t seed = 0;
    for (const auto& [key, v] : args) {
      if (key == "n") n = static_cast<int>(to_long(key, v));
      else if (key == "k") k = static_cast<int>(to_long(key, v));
      else if (key == "seed") seed = static_cast<std::uint64_t>(to_long(key, v));
      else throw BadInput("problem spec: unknown key '" + key + "'");
    }
    p.A = random_sparse(n, k, seed);
    return p;
  }
  FieldSpec f = parse_field_spec(spec);
  p.A = advection_diffusion(f);
  p.grid.assign(f.dims, f.n);
  return p;
}

}  // namespace spaqr

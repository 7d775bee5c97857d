#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "spaqr/sparse.hpp"

namespace spaqr {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_error(long line, const std::string& msg) {
  std::ostringstream os;
  os << "Matrix Market parse error at line " << line << ": " << msg;
  throw BadInput(os.str());
}

}  // namespace

SparseMat read_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) parse_error(1, "empty file");
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket") parse_error(lineno, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") parse_error(lineno, "object '" + object + "' is not 'matrix'");
  if (format != "coordinate") throw BadInput("unsupported Matrix Market format '" + format + "' (need coordinate)");
  if (field == "complex" || field == "pattern")
    throw BadInput("unsupported Matrix Market field '" + field + "' (need real)");
  if (field != "real" && field != "integer" && field != "double")
    parse_error(lineno, "unknown field '" + field + "'");
  bool sym = symmetry == "symmetric";
  bool skew = symmetry == "skew-symmetric";
  if (!sym && !skew && symmetry != "general")
    throw BadInput("unsupported Matrix Market symmetry '" + symmetry + "'");

  long m = -1, n = -1, nz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> m >> n >> nz)) parse_error(lineno, "bad size line");
    break;
  }
  if (m < 0 || n < 0 || nz < 0) parse_error(lineno, "missing size line");

  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(sym || skew ? 2 * nz : nz));
  long read = 0;
  while (read < nz && std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    std::istringstream ss(line);
    long i, j;
    double v;
    if (!(ss >> i >> j >> v)) parse_error(lineno, "bad entry line");
    if (i < 1 || i > m || j < 1 || j > n) parse_error(lineno, "entry index out of range");
    t.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
    if ((sym || skew) && i != j) t.push_back({static_cast<int>(j - 1), static_cast<int>(i - 1), skew ? -v : v});
    ++read;
  }
  if (read < nz) parse_error(lineno, "expected " + std::to_string(nz) + " entries, found " + std::to_string(read));
  return SparseMat::from_triplets(static_cast<int>(m), static_cast<int>(n), t);
}

SparseMat read_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw BadInput("cannot open " + path);
  return read_matrix_market(f);
}

void write_matrix_market(const SparseMat& A, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
  out.precision(17);
  for (const auto& t : A.triplets()) out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
}

void write_matrix_market(const SparseMat& A, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw BadInput("cannot write " + path);
  write_matrix_market(A, f);
}

}  // namespace spaqr

#pragma once

#include <iosfwd>
#include <string>

#include "spaqr/factor.hpp"
#include "spaqr/solve.hpp"

namespace spaqr {

// Every CSV starts with a "# ..." config echo line, then a header row.
void write_stats_csv(std::ostream& out, const Factorization& F, const std::string& config);
void write_history_csv(std::ostream& out, const SolveReport& rep, const std::string& config);

// Shortest round-trip representation of a double.
std::string fmt(double v);

}  // namespace spaqr

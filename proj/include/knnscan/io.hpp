#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "knnscan/window.hpp"

namespace knnscan {

/// Reads a stream of observations, one per line: either a CSV row of d floats
/// or a JSON object {"t": int, "y": [floats]}. The format is detected per
/// line; dimension must be constant and "t", when present, strictly
/// increasing. Throws std::runtime_error with the offending line number.
///
/// `startIndex` numbers CSV rows (and JSON rows without "t") sequentially.
std::vector<Observation> readObservations(std::istream& in, long startIndex = 1);
std::vector<Observation> readObservationsFile(const std::string& path, long startIndex = 1);

void writeObservationsCsv(std::ostream& out, const std::vector<Observation>& obs);
void writeObservationsJsonl(std::ostream& out, const std::vector<Observation>& obs);

/// Canonical shortest-round-trip formatting used in all text outputs.
std::string formatDouble(double v);

}  // namespace knnscan

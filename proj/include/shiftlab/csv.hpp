#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shiftlab/point.hpp"

namespace shiftlab {

/// Point-set CSV: one row per point, comma separated, optional final label
/// column in {+1, -1}. Values are written with %.17g so that a write/read
/// round trip is exact.

std::vector<Point> read_points_csv(const std::string& path);
std::vector<LabeledExample> read_labeled_csv(const std::string& path);

void write_points_csv(const std::string& path, const std::vector<Point>& pts);
void write_labeled_csv(const std::string& path,
                       const std::vector<LabeledExample>& examples);

}  // namespace shiftlab

#pragma once

#include "ebt/measure.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ebt {

// CSV: header `x,weight` or `x,y,weight`, one atom per row.
// JSON: {"dim": 1|2, "points": [[x] | [x, y], ...], "weights": [...]}

void write_measure_csv(std::ostream &out, const AtomicMeasure &mu);
AtomicMeasure read_measure_csv(std::istream &in);

std::string measure_to_json(const AtomicMeasure &mu);
AtomicMeasure measure_from_json(const std::string &text);

/// Format is chosen by extension (.json, anything else is CSV).
void save_measure(const std::filesystem::path &path, const AtomicMeasure &mu);
AtomicMeasure load_measure(const std::filesystem::path &path);

} // namespace ebt

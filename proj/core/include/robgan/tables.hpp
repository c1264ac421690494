#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "robgan/experiment.hpp"

namespace robgan {

enum class TableFormat { Csv, Markdown };
TableFormat table_format_from_string(std::string_view name);

/// "mean (sd)" with four decimals.
std::string format_cell(double mean, double sd);

/// Writes into `dir`, creating it if needed:
///   <name>_cells.csv   one row per cell with every per-seed error (always)
///   <name>_table.csv   or <name>_table.md: axis rows by estimator columns
/// Each file starts with a comment header holding the resolved config and the
/// build fingerprint. Runtimes are kept out of these files so re-runs with
/// the same seeds are byte-identical; they go to <name>_summary.json.
/// Throws std::runtime_error if a file cannot be written.
std::vector<std::filesystem::path> emit_tables(const ExperimentResult& res, TableFormat fmt,
                                               const std::filesystem::path& dir);

} // namespace robgan

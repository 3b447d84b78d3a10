#pragma once

#include <exception>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ubkde/experiment.hpp"

namespace ubkde {

/// One output file held in memory until it is written. Volatile files
/// (timings, worker count) are listed in the manifest without a digest.
struct OutputFile {
  std::string name;
  std::string content;
  bool is_volatile = false;
};

enum class OutputFormat { csv, json, both };

OutputFormat parse_format(const std::string& s);

std::string sha256_hex(std::string_view bytes);

/// Writes to `<path>.tmp` and renames over `path`.
void write_atomic(const std::string& path, std::string_view content);

/// Drops JSON files for csv and CSV files for json (config.cfg and volatile
/// files always stay), writes the rest plus manifest.json. Returns the
/// manifest.
nlohmann::json write_results(std::vector<OutputFile> files, const std::string& dir,
                             OutputFormat format);

/// quantiles.csv, raw.csv, summary.json, config.cfg and, when present,
/// quantiles_fixed.csv and paths.csv.
std::vector<OutputFile> experiment_files(const ExperimentResult& result,
                                         const ExperimentConfig& cfg);

OutputFile config_file(const ExperimentConfig& cfg);
OutputFile run_info_file(const ExperimentConfig& cfg, const std::string& command,
                         double wall_clock_seconds);

/// error.json with kind, message and exit code. Best effort, never throws.
void write_error(const std::string& dir, const std::exception& e, int exit_code);

/// Shortest decimal that round-trips.
std::string format_double(double v);

}  // namespace ubkde

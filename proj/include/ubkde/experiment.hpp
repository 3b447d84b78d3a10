#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ubkde/bandwidth.hpp"
#include "ubkde/conditions.hpp"
#include "ubkde/config.hpp"
#include "ubkde/density_model.hpp"
#include "ubkde/kernel.hpp"

namespace ubkde {

/// Objects named by a configuration.
struct Setup {
  DensityModel model;
  WeightFunction weight;
  Kernel kernel;
  BandwidthWindow window;
};

DensityModel resolve_model(const ExperimentConfig& cfg);
Setup resolve(const ExperimentConfig& cfg);

/// Type-7 (linear interpolation) sample quantile; `sorted` ascending.
double quantile(const std::vector<double>& sorted, double p);

/// Least-squares slope of y against x; nullopt for fewer than two points.
std::optional<double> ls_slope(const std::vector<double>& x, const std::vector<double>& y);

struct QuantileRow {
  std::size_t n = 0;
  std::size_t count = 0;
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
};

QuantileRow quantile_row(std::size_t n, std::vector<double> values);

/// One replication (or one path step) of an experiment.
struct RawRecord {
  std::size_t n = 0;
  std::size_t replication = 0;  // path id for path runs
  double value = 0.0;           // Delta_n, or the selector ratio
  double h_at_max = 0.0;        // maximizing bandwidth (fixed or selected)
  double value_fixed = 0.0;     // rates: ratio at h = a_n
  double running_max = 0.0;     // path runs
  bool h_in_window = true;      // rates: every h_used in [a_n, b_n]
};

struct PathSummary {
  std::size_t path = 0;
  double relative_increase = 0.0;
  bool stabilized = true;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<QuantileRow> quantiles;
  std::vector<QuantileRow> quantiles_fixed;  // rates only
  std::optional<double> slope;
  std::optional<double> slope_fixed;
  bool pass = false;
  std::string note;
  std::vector<RawRecord> raw;
  std::vector<PathSummary> paths;
  std::optional<ConditionReport> tail_report;
  nlohmann::json config_echo;
  double wall_clock_seconds = 0.0;
};

nlohmann::json summary_json(const ExperimentResult& r);

/// n_list geometric with ratio 2 and every n at or above the window's n_min.
void validate_n_list(const ExperimentConfig& cfg, const BandwidthWindow& window);

/// Quantiles of Delta_n over replications and the slope of log median
/// against log n; PASS iff the slope is at most 0.05. Refuses to run when
/// the tail condition audit reports a violation, unless overridden.
ExperimentResult run_boundedness(const ExperimentConfig& cfg);

/// Independent nested sample paths grown along n_list; PASS iff each path's
/// running maximum of Delta_n grows by at most 10% over the last half.
ExperimentResult run_path(const ExperimentConfig& cfg);

/// Selector-driven and h = a_n sup-norm deviations divided by
/// sqrt(|log a_n| / (n a_n)); PASS iff both median sequences have slope
/// at most 0.05.
ExperimentResult run_rate_comparison(const ExperimentConfig& cfg);

/// The boundedness pipeline without the refusal, looking for growth (slope
/// >= 0.1). Illustrative: always reports success.
ExperimentResult run_necessity_demo(const ExperimentConfig& cfg);

}  // namespace ubkde

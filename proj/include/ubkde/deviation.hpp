#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ubkde/bandwidth.hpp"
#include "ubkde/density_model.hpp"
#include "ubkde/kde.hpp"
#include "ubkde/kernel.hpp"

namespace ubkde {

/// Evaluation points for sup-norm statistics. The first `regular_count`
/// points form a uniform grid already restricted to A_n = {psi <= b_n^{-r}};
/// any sample locations follow, flagged by membership in A_n.
struct EvalGrid {
  PointSet points;
  std::vector<double> psi;        // 0 outside B_f
  std::vector<char> in_region;    // t in A_n
  std::size_t regular_count = 0;
  double spacing = 0.0;           // largest per-axis spacing actually used
  bool capped = false;
  bool includes_data_points = false;
  double region_r_used = 0.0;
  double region_threshold = 0.0;  // b_n^{-r}
  std::size_t n = 0;
  std::uint64_t grid_id = 0;

  std::size_t size() const noexcept { return points.size(); }
};

std::string grid_id_hex(std::uint64_t id);

/// Uniform grid over the model's bounding box with spacing at most
/// a_n^{1/d} / 2 * refine, unless that needs more than max_points points
/// (then the cap wins and `capped` is set). Filtered to A_n; throws
/// degenerate_region when nothing survives.
EvalGrid build_eval_grid(const DensityModel& model, const WeightFunction& weight,
                         const BandwidthWindow& window, std::size_t n,
                         std::size_t max_points, const PointSet* sample = nullptr,
                         double refine = 1.0);

/// Copy of a regular grid with the sample locations appended.
EvalGrid attach_sample(const EvalGrid& regular, const DensityModel& model,
                       const WeightFunction& weight, const PointSet& sample);

struct DeviationRecord {
  std::size_t n = 0;
  double h = 0.0;
  double sup_weighted_dev = 0.0;
  double rescaled = 0.0;
  std::vector<double> argsup;
  std::uint64_t grid_id = 0;
};

/// E f_{n,h} on the regular part of a grid for a list of bandwidths. Does not
/// depend on the sample, so experiments share one table per n.
struct CenteringTable {
  std::vector<double> h;
  std::vector<std::vector<double>> values;  // [h index][regular point]
  std::uint64_t grid_id = 0;
};

CenteringTable build_centering_table(const DensityModel& model, const Kernel& kernel,
                                     const EvalGrid& grid, const std::vector<double>& hs,
                                     std::size_t quad_points_per_axis = 8);

/// Reduction shared by the deviation entry points: sup over in-region points
/// of psi |fhat - ef|, first maximizer in grid order.
DeviationRecord deviation_from_values(std::size_t n, double h, const EvalGrid& grid,
                                      const std::vector<double>& fhat,
                                      const std::vector<double>& ef);

DeviationRecord weighted_deviation(const PointSet& sample, const DensityModel& model,
                                   const WeightFunction& weight, const Kernel& kernel,
                                   double h, const EvalGrid& grid,
                                   std::size_t quad_points_per_axis = 8);

struct UniformDeviation {
  double delta_n = 0.0;
  std::size_t argmax = 0;  // index into profile
  std::vector<DeviationRecord> profile;
};

/// Delta_n approximated on h_subgrid(window, n, subgrid_k). `table`, when
/// given, must hold the same bandwidths for this grid's regular points.
UniformDeviation uniform_deviation(const PointSet& sample, const DensityModel& model,
                                   const WeightFunction& weight, const Kernel& kernel,
                                   const BandwidthWindow& window, int subgrid_k,
                                   const EvalGrid& grid,
                                   const CenteringTable* table = nullptr,
                                   std::size_t quad_points_per_axis = 8);

/// Same statistic over an explicit bandwidth list.
UniformDeviation uniform_deviation_over(const PointSet& sample, const DensityModel& model,
                                        const WeightFunction& weight, const Kernel& kernel,
                                        const std::vector<double>& hs, const EvalGrid& grid,
                                        const CenteringTable* table = nullptr,
                                        std::size_t quad_points_per_axis = 8);

struct RefinementGap {
  double coarse = 0.0;
  double fine = 0.0;
  double gap = 0.0;  // fine - coarse
};

/// Re-evaluates the weighted deviation on a grid of half the spacing.
RefinementGap refinement_gap(const PointSet& sample, const DensityModel& model,
                             const WeightFunction& weight, const Kernel& kernel,
                             const BandwidthWindow& window, double h,
                             std::size_t max_points);

enum class RegionLabel { A1, A2, both, neither, outside_region };
const char* to_string(RegionLabel label);

struct RegionSplit {
  std::vector<RegionLabel> labels;  // one per grid point
  std::size_t a1_only = 0;
  std::size_t a2_only = 0;
  std::size_t both = 0;
  double h = 0.0;        // h_{n,j+1}
  double epsilon = 0.0;  // 1 / log n
};

/// Labels A_n points by membership in A^1_{n,j} and A^2_{n,j}. A point in
/// neither throws InvariantViolation carrying the point.
RegionSplit region_split(const DensityModel& model, const WeightFunction& weight,
                         const BandwidthWindow& window, std::size_t n, std::size_t j,
                         const EvalGrid& grid);

struct CenteringBound {
  std::size_t n = 0;
  double tau = 0.0;
  /// max of kappa sqrt(nh/|log h|) psi(t) sup_window f 1{f(t) <= h^tau}
  double split_term = 0.0;
  /// max of sqrt(nh/|log h|) psi E f - 2 kappa sqrt(nh/|log h|) f psi, or 0
  double residual = 0.0;
  /// Additive margin: max(split_term, residual).
  double gamma = 0.0;
  std::size_t audited = 0;
  std::vector<double> witness_t;
  double witness_h = 0.0;
};

/// Diagnostic for the centering bound
///   sqrt(nh/|log h|) psi(t) E f_{n,h}(t) <= gamma + 2 kappa sqrt(nh/|log h|) f(t) psi(t)
/// over the regular A_n points of `grid` and h in h_subgrid(window, n, k).
CenteringBound centering_bound(const DensityModel& model, const WeightFunction& weight,
                               const Kernel& kernel, const BandwidthWindow& window,
                               std::size_t n, const EvalGrid& grid, int subgrid_k = 8,
                               std::size_t quad_points_per_axis = 8);

/// CSV header and rows: n,h,sup_weighted_dev,rescaled,argsup_coords,grid_id
void write_deviation_csv_header(std::ostream& out);
void write_deviation_csv_row(std::ostream& out, const DeviationRecord& r);

}  // namespace ubkde

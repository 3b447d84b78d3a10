#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ubkde/bandwidth.hpp"
#include "ubkde/density_model.hpp"

namespace ubkde {

enum class ConditionId { D_i, D_ii, W_ii, W_iii, WD_i, WD_ii, tail_1_1, tail_1_2 };
enum class Verdict { no_violation_found, violated, indeterminate };

const char* to_string(ConditionId id);
const char* to_string(Verdict verdict);

/// Where a condition was checked: x and offset y (regularity conditions)
/// together with h, or a single t (tail conditions).
struct Witness {
  std::vector<double> x;
  std::vector<double> y;
  std::optional<double> h;
  std::optional<double> t;
};

struct ConditionReport {
  ConditionId condition_id = ConditionId::D_i;
  Verdict verdict = Verdict::no_violation_found;
  std::optional<Witness> witness;
  std::string audited_grid_spec;
  double numeric_margin = 0.0;
  /// Per-parameter detail: delta for the constant checks, r for the sup checks.
  std::optional<double> parameter;
  /// The sup series along h_sweep for the limit conditions.
  std::vector<double> series;
};

nlohmann::json to_json(const ConditionReport& report);

struct AuditGridSpec {
  std::size_t points_per_axis = 201;
  double probability_mass = 1.0 - 1e-6;
  std::vector<double> r_list = {0.5, 1.0, 2.0, 4.0};
};

/// Grid certificates for (D.i), (W.ii) per delta, (D.ii), (W.iii), (WD.ii)
/// per r, and (WD.i). Offsets y range over the sup-norm stencil
/// {-1, 0, 1}^d \ {0} scaled by h/2 and h.
std::vector<ConditionReport> check_regularity(const DensityModel& model,
                                              const WeightFunction& weight,
                                              const std::vector<double>& delta_list,
                                              const std::vector<double>& h_sweep,
                                              const AuditGridSpec& grid = {});

enum class TailMode { limsup, integral };

/// Geometric grid 1, ratio, ratio^2, ... up to t_max (inclusive).
std::vector<double> geometric_t_grid(double t_max, double ratio = 2.0);

/// Audits t P{psi(X) > lambda(t)} (limsup) or int P{psi(X) > lambda(t)} dt
/// (integral) over t_grid. Analytic where the weight/model pair allows it,
/// otherwise Monte Carlo with 99% Wilson bands.
ConditionReport check_tail_condition(const DensityModel& model,
                                     const WeightFunction& weight,
                                     const BandwidthWindow& window,
                                     const std::vector<double>& t_grid,
                                     TailMode mode, std::size_t mc_samples = 0,
                                     std::uint64_t mc_seed = 0);

/// P{psi(X) > lambda(t)} with a 99% band; lo == hi for analytic values.
struct TailEstimate {
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for k successes out of n at normal quantile z.
TailEstimate wilson_interval(std::size_t k, std::size_t n, double z = 2.5758293035489);

}  // namespace ubkde

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ubkde/kernel.hpp"
#include "ubkde/point_set.hpp"
#include "ubkde/rng.hpp"

namespace ubkde {

enum class ModelFamily {
  gaussian,
  laplace,
  cauchy,
  polynomial_bump,
  uniform_box,
  custom
};

const char* to_string(ModelFamily family);

using Sampler = std::function<void(Stream&, std::size_t, PointSet&)>;

/// Everything needed to describe a density that is not one of the shipped
/// families. Used by tests for step densities and deliberately broken models.
struct CustomModelSpec {
  std::size_t dim = 1;
  std::string name = "custom";
  std::function<double(Point)> pdf;
  std::function<bool(Point)> in_positivity_set;  // defaults to pdf > 0
  double sup_f = 0.0;
  Box bounding_box;
  std::vector<std::vector<double>> breakpoints;  // per axis, may be empty
  Sampler sampler;                               // optional
};

/// Analytic density with an exact, prefix-stable sampler.
///
/// Shipped families: standard gaussian (product, any d), laplace (d = 1),
/// cauchy (d = 1), polynomial bump c(1 - |t|^2)^k on the unit ball and the
/// uniform density on an open box. Copies share immutable state.
class DensityModel {
 public:
  static DensityModel gaussian(std::size_t dim = 1);
  static DensityModel laplace();
  static DensityModel cauchy();
  static DensityModel polynomial_bump(std::size_t dim = 1, int power = 2);
  static DensityModel uniform_box(Box box);
  static DensityModel custom(CustomModelSpec spec);

  std::size_t dim() const noexcept;
  ModelFamily family() const noexcept;
  const std::string& name() const noexcept;

  double pdf(Point t) const;
  bool in_positivity_set(Point t) const;
  double sup_f() const noexcept;

  /// Region used for evaluation grids and integrals; carries at least
  /// 1 - 1e-6 of the probability mass.
  const Box& bounding_box() const noexcept;
  /// Centered box with P{X in box} >= mass.
  Box probability_box(double mass) const;
  /// Coordinates along `axis` where the pdf is not smooth.
  const std::vector<double>& breakpoints(std::size_t axis) const;

  bool has_sampler() const noexcept;
  /// Appends n draws to `out`; consumes the stream sequentially, so a longer
  /// draw from the same stream extends a shorter one.
  void sample(Stream& stream, std::size_t n, PointSet& out) const;

  /// P{f(X) < level} when known in closed form.
  std::optional<double> pdf_level_tail(double level) const;
  /// sup of f over the closed cube of half side `half_side` around `center`.
  double box_sup(Point center, double half_side) const;

  struct Impl;

 private:
  explicit DensityModel(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

enum class WeightMode { inverse_density_power, custom };

/// Weight function psi on the positivity set, paired with its exponent beta.
class WeightFunction {
 public:
  /// psi = scale * f^{-beta}; then f^beta psi == scale exactly.
  static WeightFunction inverse_density_power(const DensityModel& model,
                                              double beta, double scale = 1.0);
  /// psi == value.
  static WeightFunction constant(const DensityModel& model, double beta,
                                 double value = 1.0);
  /// Arbitrary positive psi; wd_bound is measured on the audit grid.
  static WeightFunction custom(const DensityModel& model, double beta,
                               std::function<double(Point)> psi,
                               std::string name);

  double operator()(Point t) const { return psi_(t); }
  double beta() const noexcept { return beta_; }
  WeightMode mode() const noexcept { return mode_; }
  double scale() const noexcept { return scale_; }
  /// sup of f^beta psi (exact for the built-in modes, grid value otherwise).
  double wd_bound() const noexcept { return wd_bound_; }
  const std::string& name() const noexcept { return name_; }
  /// P{psi(X) > lambda} when the model supports it analytically.
  std::optional<double> tail_probability(double lambda) const;

 private:
  WeightFunction() = default;

  DensityModel model_ = DensityModel::gaussian();
  std::function<double(Point)> psi_;
  WeightMode mode_ = WeightMode::custom;
  double beta_ = 0.0;
  double scale_ = 1.0;
  double wd_bound_ = 0.0;
  bool constant_ = false;
  std::string name_;
};

struct Sample {
  PointSet points;
  StreamId lineage;

  std::size_t n() const noexcept { return points.size(); }
};

/// n iid draws from stream `id`. Same lineage, larger n: prefix extension.
Sample draw_sample(const DensityModel& model, std::size_t n, const StreamId& id);

/// E f_{n,h}(t) = int_{[-1/2,1/2]^d} K(u) f(t + u h^{1/d}) du, by tensor
/// Gauss-Legendre with `quad_points_per_axis` and twice that many points per
/// panel; panels are split at the model's breakpoints. Throws AccuracyError
/// when the two resolutions differ by more than 1e-6. The gaussian model with a
/// constant kernel is done in closed form.
double expected_kde(const DensityModel& model, const Kernel& kernel, double h,
                    Point t, std::size_t quad_points_per_axis = 8);

/// expected_kde at every point, in parallel.
std::vector<double> expected_kde_many(const DensityModel& model,
                                      const Kernel& kernel, double h,
                                      const PointSet& points,
                                      std::size_t quad_points_per_axis = 8);

}  // namespace ubkde

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "ubkde/bandwidth.hpp"
#include "ubkde/kernel.hpp"
#include "ubkde/point_set.hpp"

namespace ubkde {

/// f_{n,h}(t) = (1/(n h)) sum_i K((X_i - t) / h^{1/d}) by a double loop.
/// Serial reference implementation.
std::vector<double> kde_brute(const PointSet& sample, const Kernel& kernel, double h,
                              const PointSet& points);

/// Below this many kernel evaluations kde_fast defers to kde_brute.
inline constexpr std::size_t kBruteForceThreshold = 10000;

/// Same values as kde_brute (up to summation order). The sample is indexed
/// once: sorted in 1-d, spatially binned otherwise. Evaluation is parallel
/// over points.
class KdeEvaluator {
 public:
  KdeEvaluator(const PointSet& sample, const Kernel& kernel);

  std::size_t n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Evaluation at one point. In d >= 2 this may rebuild the spatial bins;
  /// call prepare() with the largest bandwidth before concurrent use.
  double at(Point t, double h) const;
  void prepare(double max_h) const;
  std::vector<double> operator()(double h, const PointSet& points, int threads = 0) const;

  /// Sup-norm distance from t to its k-th nearest sample point (k >= 1).
  double kth_neighbor_distance(Point t, std::size_t k) const;

 private:
  double at_1d(double t, double h) const;
  double at_binned(Point t, double h) const;

  const PointSet* sample_;
  Kernel kernel_;
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> sorted_;  // 1-d only
  // d >= 2: bins keyed by integer cell coordinates at side bin_side_.
  mutable double bin_side_ = 0.0;
  mutable std::map<std::vector<long long>, std::vector<std::size_t>> bins_;
  void rebin(double side) const;
};

std::vector<double> kde_fast(const PointSet& sample, const Kernel& kernel, double h,
                             const PointSet& points, int threads = 0);

struct VariableKdeValue {
  double value = 0.0;
  double h_used = 0.0;
};

/// Per-point bandwidth from the selector, then the estimate at that bandwidth.
std::vector<VariableKdeValue> kde_variable(const PointSet& sample, const Kernel& kernel,
                                           const BandwidthSelector& selector,
                                           const BandwidthWindow& window,
                                           const PointSet& points, int threads = 0);

/// Midpoint-rule integral of f_{n,h} over `box` with `cells_per_axis` cells
/// per axis.
double kde_grid_mass(const PointSet& sample, const Kernel& kernel, double h,
                     const Box& box, std::size_t cells_per_axis);

}  // namespace ubkde

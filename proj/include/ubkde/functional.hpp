#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "json.hpp"
#include "ubkde/bandwidth.hpp"
#include "ubkde/density_model.hpp"
#include "ubkde/kernel.hpp"
#include "ubkde/point_set.hpp"

namespace ubkde {

struct LipschitzFunctional {
  std::function<double(double)> phi;
  double lipschitz_D = 1.0;
  std::string name;

  double operator()(double x) const { return phi(x); }

  static LipschitzFunctional identity();
  /// min(x, c)
  static LipschitzFunctional clamp(double c);
  /// Soft version of min(x, c) with sharpness k, shifted so that phi(0) = 0.
  static LipschitzFunctional smooth_min(double c, double k = 50.0);
};

LipschitzFunctional make_functional(const std::string& spec);

/// Largest |phi(x) - phi(y)| / |x - y| over random pairs in [0, range_hi].
double observed_lipschitz(const LipschitzFunctional& phi, double range_hi,
                          std::size_t pairs, std::uint64_t seed);

/// int phi(f_{n,h}(t)) dt over `region`. The estimate is polynomial between
/// the breakpoints X_i +- h^{1/d}/2, so the region is cut into those cells
/// and each cell gets a tensor Gauss-Legendre rule with quad_points and
/// 2 quad_points nodes per axis (one node for the uniform kernel). Throws
/// AccuracyError when the two disagree by more than 1e-5.
double plugin_functional(const PointSet& sample, const Kernel& kernel, double h,
                         const LipschitzFunctional& phi, const Box& region,
                         std::size_t quad_points = 8);

/// c_beta = int f^beta, integrated over the bounding box and over the box
/// doubled; a relative change above 1e-6 means the integral has not
/// converged and raises AccuracyError.
double c_beta(const DensityModel& model, double beta);

struct FunctionalCheckSpec {
  const BandwidthWindow* window = nullptr;  // defines the evaluation grid over A_n
  std::size_t max_points = 4096;
  std::size_t quad_points = 8;
  int max_refinements = 3;
};

struct FunctionalBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double c_beta = 0.0;
  bool holds = false;
  double slack = 0.0;
  double plugin = 0.0;    // int phi(f_{n,h})
  double centered = 0.0;  // int phi(E f_{n,h})
  int refinements = 0;
};

nlohmann::json to_json(const FunctionalBound& b);

/// |int phi(f_{n,h}) - int phi(E f_{n,h})| against D c_beta sup f^{-beta}|f_{n,h} - E f_{n,h}|.
FunctionalBound functional_bound_check(const PointSet& sample, const Kernel& kernel, double h,
                                       const LipschitzFunctional& phi,
                                       const DensityModel& model, double beta,
                                       const FunctionalCheckSpec& spec);

}  // namespace ubkde

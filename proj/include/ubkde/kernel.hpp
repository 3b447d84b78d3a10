#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ubkde/point_set.hpp"

namespace ubkde {

enum class KernelFamily { uniform, epanechnikov, triweight, product_of_1d };

const char* to_string(KernelFamily family);

/// Compactly supported density kernel on the closed box [-1/2, 1/2]^d.
///
/// Every kernel is a product of one 1-d profile, p(4u^2) for a polynomial p,
/// times the indicator of the closed support. The closed boundary means
/// K(+-1/2) takes the limit-from-inside value. Polynomial-times-indicator
/// kernels have polynomial VC-type covering numbers, so no entropy estimate is
/// needed for them. Kernels are immutable and safe to share across threads.
class Kernel {
 public:
  /// Shipped profiles: "uniform", "epanechnikov", "triweight".
  Kernel(KernelFamily profile, std::size_t dim, double scale = 1.0);

  /// Profile p(w) = sum_k coeffs[k] w^k evaluated at w = 4u^2. Rejects
  /// profiles that are negative anywhere on the support.
  Kernel(std::vector<double> profile_coeffs, std::size_t dim, double scale,
         std::string name);

  std::size_t dim() const noexcept { return dim_; }
  /// `product_of_1d` when dim > 1.
  KernelFamily family() const noexcept;
  KernelFamily profile() const noexcept { return profile_; }
  const std::string& name() const noexcept { return name_; }
  double kappa() const noexcept { return kappa_; }
  double l2_norm_sq() const noexcept { return l2_norm_sq_; }
  double support_half_width() const noexcept { return 0.5; }
  double scale() const noexcept { return scale_; }
  /// True when K is constant on its support (uniform profile).
  bool piecewise_constant() const noexcept { return constant_; }

  /// K(u); throws on dimension mismatch or non-finite input.
  double eval(Point u) const;

  /// Hot-path evaluation; no checks.
  double eval_unchecked(const double* u) const noexcept {
    double v = scale_;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double x = u[i];
      if (!(std::abs(x) <= 0.5)) return 0.0;
      if (!constant_) v *= profile_at(4.0 * x * x);
    }
    return v;
  }

  /// One-dimensional factor p(4u^2) on the support (zero outside).
  double eval_1d(double u) const noexcept {
    if (!(std::abs(u) <= 0.5)) return 0.0;
    return profile_at(4.0 * u * u);
  }

  /// (K * K)(w) = int K(v) K(w + v) dv, supported on [-1, 1]^d.
  double self_convolution(Point w) const;

 private:
  double profile_at(double w) const noexcept {
    double acc = 0.0;
    for (std::size_t k = coeffs_.size(); k > 0; --k) acc = acc * w + coeffs_[k - 1];
    return acc;
  }
  void init_constants();

  KernelFamily profile_;
  std::size_t dim_;
  double scale_;
  std::vector<double> coeffs_;
  std::string name_;
  bool constant_ = false;
  double kappa_ = 0.0;
  double l2_norm_sq_ = 0.0;
};

struct KernelConstants {
  double kappa;
  double l2_norm_sq;
};

KernelConstants kernel_constants(const Kernel& kernel);

/// Parses "uniform", "epanechnikov", "triweight", optionally followed by
/// ":dim=<d>" or " dim=<d>". `default_dim` applies when no dim is given.
Kernel make_kernel(std::string_view spec, std::size_t default_dim = 1);

struct KernelValidationReport {
  double integral = 0.0;
  double integral_error = 0.0;  // |quadrature(K) - 1|
  double observed_sup = 0.0;
  double kappa = 0.0;
  std::size_t support_violations = 0;
  std::size_t bound_violations = 0;
  std::size_t right_continuity_failures = 0;
  std::optional<std::vector<double>> nonfinite_at;
  bool passed = false;
  std::string message;
};

/// Tensor Gauss-Legendre check of the normalization plus grid checks of the
/// support, the bound by kappa and right-continuity (off the +1/2 faces, where
/// the closed-support convention applies).
KernelValidationReport validate_kernel(const Kernel& kernel,
                                       std::size_t quad_points_per_axis);

}  // namespace ubkde

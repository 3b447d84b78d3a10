#include "ubkde/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ubkde/error.hpp"
#include "ubkde/quadrature.hpp"

namespace ubkde {

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::uniform: return "uniform";
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::triweight: return "triweight";
    case KernelFamily::product_of_1d: return "product-of-1d";
  }
  return "unknown";
}

namespace {

// Profiles in w = 4u^2, normalized so that each integrates to one over
// [-1/2, 1/2].
std::vector<double> profile_coeffs(KernelFamily family) {
  switch (family) {
    case KernelFamily::uniform: return {1.0};
    case KernelFamily::epanechnikov: return {1.5, -1.5};
    case KernelFamily::triweight: {
      const double c = 35.0 / 16.0;
      return {c, -3.0 * c, 3.0 * c, -c};
    }
    case KernelFamily::product_of_1d: break;
  }
  throw Error(ErrorKind::config, "product-of-1d is not a base profile");
}

}  // namespace

Kernel::Kernel(KernelFamily profile, std::size_t dim, double scale)
    : profile_(profile),
      dim_(dim),
      scale_(scale),
      coeffs_(profile_coeffs(profile)),
      name_(to_string(profile)) {
  if (dim_ == 0) throw Error(ErrorKind::dimension, "kernel dimension must be >= 1");
  constant_ = profile == KernelFamily::uniform;
  init_constants();
}

Kernel::Kernel(std::vector<double> profile_coeffs, std::size_t dim,
               double scale, std::string name)
    : profile_(KernelFamily::product_of_1d),
      dim_(dim),
      scale_(scale),
      coeffs_(std::move(profile_coeffs)),
      name_(std::move(name)) {
  if (dim_ == 0) throw Error(ErrorKind::dimension, "kernel dimension must be >= 1");
  if (coeffs_.empty()) throw Error(ErrorKind::domain, "empty kernel profile");
  constant_ = coeffs_.size() == 1;
  init_constants();
}

KernelFamily Kernel::family() const noexcept {
  return dim_ > 1 ? KernelFamily::product_of_1d : profile_;
}

void Kernel::init_constants() {
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
    throw Error(ErrorKind::domain, "kernel scale must be positive");
  }
  // Positivity and the 1-d maximum on a dense grid of w in [0, 1].
  double max1 = 0.0;
  constexpr int kSteps = 4096;
  for (int i = 0; i <= kSteps; ++i) {
    const double v = profile_at(static_cast<double>(i) / kSteps);
    if (v < 0.0) {
      throw Error(ErrorKind::domain,
                  "signed kernel rejected: profile is negative on the support");
    }
    max1 = std::max(max1, v);
  }
  // p(4u^2)^2 has degree 4 * deg(p) in u; this rule integrates it exactly.
  const GaussRule& rule = gauss_legendre(2 * coeffs_.size() + 2);
  const double l2_1d = constant_ ? coeffs_[0] * coeffs_[0]
                                 : integrate_gauss(rule, -0.5, 0.5, [&](double u) {
                                     const double v = profile_at(4.0 * u * u);
                                     return v * v;
                                   });
  kappa_ = scale_ * std::pow(max1, static_cast<double>(dim_));
  l2_norm_sq_ = scale_ * scale_ * std::pow(l2_1d, static_cast<double>(dim_));
}

double Kernel::eval(Point u) const {
  if (u.size() != dim_) {
    throw Error(ErrorKind::dimension, "kernel argument has dimension " +
                                          std::to_string(u.size()) +
                                          ", expected " + std::to_string(dim_));
  }
  for (double x : u) {
    if (!std::isfinite(x)) throw Error(ErrorKind::domain, "non-finite kernel argument");
  }
  return eval_unchecked(u.data());
}

double Kernel::self_convolution(Point w) const {
  if (w.size() != dim_) throw Error(ErrorKind::dimension, "dimension mismatch");
  const GaussRule& rule = gauss_legendre(2 * coeffs_.size() + 2);
  double v = scale_ * scale_;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double x = w[i];
    const double lo = std::max(-0.5, -0.5 - x);
    const double hi = std::min(0.5, 0.5 - x);
    if (!(hi > lo)) return 0.0;
    v *= integrate_gauss(rule, lo, hi, [&](double s) {
      return eval_1d(s) * eval_1d(s + x);
    });
  }
  return v;
}

KernelConstants kernel_constants(const Kernel& kernel) {
  return {kernel.kappa(), kernel.l2_norm_sq()};
}

Kernel make_kernel(std::string_view spec, std::size_t default_dim) {
  std::string_view name = spec;
  std::size_t dim = default_dim;
  const auto sep = spec.find_first_of(": ,");
  if (sep != std::string_view::npos) {
    name = spec.substr(0, sep);
    std::string_view rest = spec.substr(sep + 1);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    if (rest.rfind("dim=", 0) != 0) {
      throw Error(ErrorKind::config, "bad kernel spec '" + std::string(spec) + "'");
    }
    rest.remove_prefix(4);
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), dim);
    if (res.ec != std::errc() || res.ptr != rest.data() + rest.size() || dim == 0) {
      throw Error(ErrorKind::config, "bad kernel dim in '" + std::string(spec) + "'");
    }
  }
  if (name == "uniform") return Kernel(KernelFamily::uniform, dim);
  if (name == "epanechnikov") return Kernel(KernelFamily::epanechnikov, dim);
  if (name == "triweight") return Kernel(KernelFamily::triweight, dim);
  throw Error(ErrorKind::config, "unknown kernel '" + std::string(name) + "'");
}

namespace {

// Calls f(point) for every point of the tensor grid `axis`^dim.
template <class F>
void for_each_tensor(const std::vector<double>& axis, std::size_t dim, F&& f) {
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> p(dim);
  const std::size_t m = axis.size();
  while (true) {
    for (std::size_t i = 0; i < dim; ++i) p[i] = axis[idx[i]];
    f(p, idx);
    std::size_t k = 0;
    while (k < dim && ++idx[k] == m) idx[k++] = 0;
    if (k == dim) break;
  }
}

}  // namespace

KernelValidationReport validate_kernel(const Kernel& kernel,
                                       std::size_t quad_points_per_axis) {
  if (quad_points_per_axis < 16) {
    throw Error(ErrorKind::domain, "validate_kernel needs >= 16 points per axis");
  }
  const std::size_t d = kernel.dim();
  KernelValidationReport rep;
  rep.kappa = kernel.kappa();

  // Normalization by tensor Gauss-Legendre over the support box.
  const GaussRule rule = quad_points_per_axis <= 64
                             ? gauss_legendre(quad_points_per_axis)
                             : compute_gauss_legendre(quad_points_per_axis);
  std::vector<double> nodes(rule.nodes.size());
  std::vector<double> weights(rule.weights.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i] = 0.5 * rule.nodes[i];
    weights[i] = 0.5 * rule.weights[i];
  }
  double integral = 0.0;
  for_each_tensor(nodes, d, [&](const std::vector<double>& p,
                                const std::vector<std::size_t>& idx) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) w *= weights[idx[i]];
    const double v = kernel.eval_unchecked(p.data());
    if (!std::isfinite(v) && !rep.nonfinite_at) rep.nonfinite_at = p;
    integral += w * v;
  });
  if (kernel.piecewise_constant()) {
    // Constant on a unit-volume box: the integral is the value itself.
    const std::vector<double> origin(d, 0.0);
    integral = kernel.eval_unchecked(origin.data());
  }
  rep.integral = integral;
  rep.integral_error = std::abs(integral - 1.0);

  // Grid over [-1, 1]^d with the support faces on grid lines.
  const std::size_t per_axis = std::max<std::size_t>(
      9, static_cast<std::size_t>(std::pow(2.0e6, 1.0 / static_cast<double>(d))));
  const std::size_t half = (per_axis - 1) / 4 * 2;  // even: +-1/2 are nodes
  std::vector<double> axis;
  for (std::size_t i = 0; i <= 2 * half; ++i) {
    axis.push_back(-1.0 + static_cast<double>(i) / static_cast<double>(half));
  }
  const double eps = 1e-12;
  for_each_tensor(axis, d, [&](const std::vector<double>& p,
                               const std::vector<std::size_t>&) {
    const double v = kernel.eval_unchecked(p.data());
    if (!std::isfinite(v)) {
      if (!rep.nonfinite_at) rep.nonfinite_at = p;
      return;
    }
    double maxabs = 0.0;
    bool on_upper_face = false;
    for (double x : p) {
      maxabs = std::max(maxabs, std::abs(x));
      if (x == 0.5) on_upper_face = true;
    }
    if (maxabs > 0.5 && v != 0.0) ++rep.support_violations;
    if (v < 0.0 || v > rep.kappa * (1.0 + 1e-12)) ++rep.bound_violations;
    rep.observed_sup = std::max(rep.observed_sup, v);
    if (!on_upper_face) {
      std::vector<double> q = p;
      for (double& x : q) x += eps;
      const double right = kernel.eval_unchecked(q.data());
      if (std::abs(right - v) > 1e-8 * std::max(1.0, rep.kappa)) {
        ++rep.right_continuity_failures;
      }
    }
  });

  rep.passed = !rep.nonfinite_at && rep.integral_error <= 1e-8 &&
               rep.support_violations == 0 && rep.bound_violations == 0 &&
               rep.right_continuity_failures == 0;
  if (rep.nonfinite_at) {
    rep.message = "non-finite kernel value";
  } else if (rep.integral_error > 1e-8) {
    rep.message = "kernel does not integrate to one";
  } else if (rep.support_violations > 0) {
    rep.message = "kernel is nonzero outside [-1/2,1/2]^d";
  } else if (rep.bound_violations > 0) {
    rep.message = "kernel exceeds kappa or is negative";
  } else if (rep.right_continuity_failures > 0) {
    rep.message = "kernel is not right-continuous on the grid";
  } else {
    rep.message = "ok";
  }
  return rep;
}

}  // namespace ubkde

#include "ubkde/density_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ubkde/error.hpp"
#include "ubkde/parallel.hpp"
#include "ubkde/quadrature.hpp"

namespace ubkde {

const char* to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::gaussian: return "gaussian";
    case ModelFamily::laplace: return "laplace";
    case ModelFamily::cauchy: return "cauchy";
    case ModelFamily::polynomial_bump: return "polynomial-bump";
    case ModelFamily::uniform_box: return "uniform-box";
    case ModelFamily::custom: return "custom";
  }
  return "unknown";
}

struct DensityModel::Impl {
  ModelFamily family = ModelFamily::custom;
  std::size_t dim = 1;
  std::string name;
  std::function<double(Point)> pdf;
  std::function<bool(Point)> positive;
  double sup_f = 0.0;
  Box bounding;
  std::vector<std::vector<double>> breakpoints;
  Sampler sampler;
  std::function<Box(double)> probability_box;
  std::function<std::optional<double>(double)> level_tail;
  // Nearest point of a cube to the mode; valid for the unimodal families.
  bool mode_at_origin = false;
};

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_two_sided_quantile(double mass) {
  // z with P{|Z| <= z} = mass.
  double lo = 0.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::numbers::sqrt2) > 1.0 - mass) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

DensityModel DensityModel::gaussian(std::size_t dim) {
  if (dim == 0) throw Error(ErrorKind::dimension, "dimension must be >= 1");
  auto m = std::make_shared<Impl>();
  m->family = ModelFamily::gaussian;
  m->dim = dim;
  m->name = dim == 1 ? "gaussian" : "gaussian:dim=" + std::to_string(dim);
  const double norm = std::pow(kInvSqrt2Pi, static_cast<double>(dim));
  m->pdf = [norm](Point t) {
    double r2 = 0.0;
    for (double x : t) r2 += x * x;
    return norm * std::exp(-0.5 * r2);
  };
  m->positive = [](Point t) {
    for (double x : t) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  m->sup_f = norm;
  m->bounding = cube(dim, -13.0, 13.0);
  m->breakpoints.assign(dim, {});
  m->sampler = [dim](Stream& s, std::size_t n, PointSet& out) {
    std::vector<double> p(dim);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& x : p) x = s.normal();
      out.push_back(p);
    }
  };
  m->probability_box = [dim](double mass) {
    const double z = normal_two_sided_quantile(
        std::pow(mass, 1.0 / static_cast<double>(dim)));
    return cube(dim, -z, z);
  };
  m->level_tail = [dim, norm](double level) -> std::optional<double> {
    if (level >= norm) return 1.0;
    if (level <= 0.0) return 0.0;
    const double r2 = -2.0 * std::log(level / norm);
    if (dim == 1) return std::erfc(std::sqrt(r2) / std::numbers::sqrt2);
    if (dim == 2) return std::exp(-0.5 * r2);
    return std::nullopt;
  };
  m->mode_at_origin = true;
  return DensityModel(std::move(m));
}

DensityModel DensityModel::laplace() {
  auto m = std::make_shared<Impl>();
  m->family = ModelFamily::laplace;
  m->name = "laplace";
  m->pdf = [](Point t) { return 0.5 * std::exp(-std::abs(t[0])); };
  m->positive = [](Point t) { return std::isfinite(t[0]); };
  m->sup_f = 0.5;
  m->bounding = cube(1, -30.0, 30.0);
  m->breakpoints = {{0.0}};
  m->sampler = [](Stream& s, std::size_t n, PointSet& out) {
    for (std::size_t i = 0; i < n; ++i) {
      const double u = s.uniform_open() - 0.5;
      const double x = -std::copysign(std::log1p(-2.0 * std::abs(u)), -u);
      out.push_back(std::span<const double>(&x, 1));
    }
  };
  m->probability_box = [](double mass) {
    const double r = -std::log(1.0 - mass);
    return cube(1, -r, r);
  };
  m->level_tail = [](double level) -> std::optional<double> {
    if (level >= 0.5) return 1.0;
    if (level <= 0.0) return 0.0;
    return 2.0 * level;
  };
  m->mode_at_origin = true;
  return DensityModel(std::move(m));
}

DensityModel DensityModel::cauchy() {
  auto m = std::make_shared<Impl>();
  m->family = ModelFamily::cauchy;
  m->name = "cauchy";
  m->pdf = [](Point t) {
    return 1.0 / (std::numbers::pi * (1.0 + t[0] * t[0]));
  };
  m->positive = [](Point t) { return std::isfinite(t[0]); };
  m->sup_f = 1.0 / std::numbers::pi;
  m->probability_box = [](double mass) {
    const double r = std::tan(0.5 * std::numbers::pi * mass);
    return cube(1, -r, r);
  };
  m->bounding = m->probability_box(1.0 - 1e-6);
  m->breakpoints = {{}};
  m->sampler = [](Stream& s, std::size_t n, PointSet& out) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::tan(std::numbers::pi * (s.uniform_open() - 0.5));
      out.push_back(std::span<const double>(&x, 1));
    }
  };
  m->level_tail = [](double level) -> std::optional<double> {
    if (level >= 1.0 / std::numbers::pi) return 1.0;
    if (level <= 0.0) return 0.0;
    const double x = std::sqrt(1.0 / (std::numbers::pi * level) - 1.0);
    return 2.0 / std::numbers::pi * std::atan(1.0 / x);
  };
  m->mode_at_origin = true;
  return DensityModel(std::move(m));
}

DensityModel DensityModel::polynomial_bump(std::size_t dim, int power) {
  if (dim == 0) throw Error(ErrorKind::dimension, "dimension must be >= 1");
  if (power < 1) throw Error(ErrorKind::domain, "bump power must be >= 1");
  auto m = std::make_shared<Impl>();
  m->family = ModelFamily::polynomial_bump;
  m->dim = dim;
  m->name = "polynomial-bump:k=" + std::to_string(power) +
            (dim == 1 ? "" : ",dim=" + std::to_string(dim));
  const double half_d = 0.5 * static_cast<double>(dim);
  const double k = power;
  // int_{ball} (1 - |t|^2)^k dt = pi^{d/2} Gamma(k+1) / Gamma(k+1+d/2)
  const double mass = std::pow(std::numbers::pi, half_d) * std::tgamma(k + 1.0) /
                      std::tgamma(k + 1.0 + half_d);
  const double c = 1.0 / mass;
  m->pdf = [c, power](Point t) {
    double r2 = 0.0;
    for (double x : t) r2 += x * x;
    return r2 < 1.0 ? c * std::pow(1.0 - r2, power) : 0.0;
  };
  m->positive = [](Point t) {
    double r2 = 0.0;
    for (double x : t) r2 += x * x;
    return r2 < 1.0;
  };
  m->sup_f = c;
  m->bounding = cube(dim, -1.0, 1.0);
  m->breakpoints.assign(dim, {-1.0, 1.0});
  m->sampler = [dim, power](Stream& s, std::size_t n, PointSet& out) {
    std::vector<double> p(dim);
    for (std::size_t i = 0; i < n; ++i) {
      while (true) {
        double r2 = 0.0;
        for (double& x : p) {
          x = 2.0 * s.uniform() - 1.0;
          r2 += x * x;
        }
        const double u = s.uniform();
        if (r2 < 1.0 && u < std::pow(1.0 - r2, power)) break;
      }
      out.push_back(p);
    }
  };
  m->probability_box = [dim](double) { return cube(dim, -1.0, 1.0); };
  m->level_tail = [dim, c, power](double level) -> std::optional<double> {
    if (level >= c) return 1.0;
    if (level <= 0.0) return 0.0;
    if (dim != 1) return std::nullopt;
    // f < level  <=>  |t| > t0 with c (1 - t0^2)^k = level.
    const double t0 = std::sqrt(1.0 - std::pow(level / c, 1.0 / power));
    const GaussRule& rule = gauss_legendre(static_cast<std::size_t>(power) + 2);
    const double inner = integrate_gauss(rule, -t0, t0, [&](double x) {
      return c * std::pow(1.0 - x * x, power);
    });
    return std::max(0.0, 1.0 - inner);
  };
  m->mode_at_origin = true;
  return DensityModel(std::move(m));
}

DensityModel DensityModel::uniform_box(Box box) {
  if (box.dim() == 0 || box.hi.size() != box.lo.size()) {
    throw Error(ErrorKind::dimension, "bad box");
  }
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (!(box.hi[i] > box.lo[i])) throw Error(ErrorKind::domain, "empty box");
  }
  auto m = std::make_shared<Impl>();
  m->family = ModelFamily::uniform_box;
  m->dim = box.dim();
  m->name = "uniform-box";
  const double density = 1.0 / box.volume();
  auto inside = [box](Point t) {
    for (std::size_t i = 0; i < box.dim(); ++i) {
      if (!(t[i] > box.lo[i] && t[i] < box.hi[i])) return false;
    }
    return true;
  };
  m->pdf = [inside, density](Point t) { return inside(t) ? density : 0.0; };
  m->positive = inside;
  m->sup_f = density;
  m->bounding = box;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    m->breakpoints.push_back({box.lo[i], box.hi[i]});
  }
  m->sampler = [box](Stream& s, std::size_t n, PointSet& out) {
    std::vector<double> p(box.dim());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] = box.lo[j] + s.uniform_open() * (box.hi[j] - box.lo[j]);
      }
      out.push_back(p);
    }
  };
  m->probability_box = [box](double) { return box; };
  m->level_tail = [density](double level) -> std::optional<double> {
    return level > density ? 1.0 : 0.0;
  };
  return DensityModel(std::move(m));
}

DensityModel DensityModel::custom(CustomModelSpec spec) {
  if (!spec.pdf) throw Error(ErrorKind::config, "custom model needs a pdf");
  if (spec.bounding_box.dim() != spec.dim) {
    throw Error(ErrorKind::dimension, "custom model bounding box dimension");
  }
  auto m = std::make_shared<Impl>();
  m->family = ModelFamily::custom;
  m->dim = spec.dim;
  m->name = spec.name;
  m->pdf = spec.pdf;
  if (spec.in_positivity_set) {
    m->positive = spec.in_positivity_set;
  } else {
    auto pdf = spec.pdf;
    m->positive = [pdf](Point t) { return pdf(t) > 0.0; };
  }
  m->sup_f = spec.sup_f;
  m->bounding = spec.bounding_box;
  m->breakpoints = spec.breakpoints;
  m->breakpoints.resize(spec.dim);
  m->sampler = spec.sampler;
  Box bb = spec.bounding_box;
  m->probability_box = [bb](double) { return bb; };
  m->level_tail = [](double) -> std::optional<double> { return std::nullopt; };
  return DensityModel(std::move(m));
}

std::size_t DensityModel::dim() const noexcept { return impl_->dim; }
ModelFamily DensityModel::family() const noexcept { return impl_->family; }
const std::string& DensityModel::name() const noexcept { return impl_->name; }

double DensityModel::pdf(Point t) const {
  if (t.size() != impl_->dim) throw Error(ErrorKind::dimension, "pdf: dimension mismatch");
  return impl_->pdf(t);
}

bool DensityModel::in_positivity_set(Point t) const {
  if (t.size() != impl_->dim) {
    throw Error(ErrorKind::dimension, "positivity test: dimension mismatch");
  }
  return impl_->positive(t);
}

double DensityModel::sup_f() const noexcept { return impl_->sup_f; }
const Box& DensityModel::bounding_box() const noexcept { return impl_->bounding; }

Box DensityModel::probability_box(double mass) const {
  if (!(mass > 0.0 && mass < 1.0)) {
    throw Error(ErrorKind::domain, "probability mass must be in (0, 1)");
  }
  return impl_->probability_box(mass);
}

const std::vector<double>& DensityModel::breakpoints(std::size_t axis) const {
  return impl_->breakpoints.at(axis);
}

bool DensityModel::has_sampler() const noexcept {
  return static_cast<bool>(impl_->sampler);
}

void DensityModel::sample(Stream& stream, std::size_t n, PointSet& out) const {
  if (!impl_->sampler) {
    throw Error(ErrorKind::config, "model '" + impl_->name + "' has no sampler");
  }
  if (out.dim() != impl_->dim) out = PointSet(impl_->dim);
  out.reserve(out.size() + n);
  impl_->sampler(stream, n, out);
}

std::optional<double> DensityModel::pdf_level_tail(double level) const {
  return impl_->level_tail(level);
}

double DensityModel::box_sup(Point center, double half_side) const {
  const std::size_t d = impl_->dim;
  std::vector<double> p(d);
  if (impl_->mode_at_origin) {
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = std::clamp(0.0, center[i] - half_side, center[i] + half_side);
    }
    return impl_->pdf(p);
  }
  if (impl_->family == ModelFamily::uniform_box) {
    const Box& b = impl_->bounding;
    for (std::size_t i = 0; i < d; ++i) {
      if (center[i] + half_side <= b.lo[i] || center[i] - half_side >= b.hi[i]) {
        return 0.0;
      }
    }
    return impl_->sup_f;
  }
  // 3^d stencil: corners, face centers and the center.
  double best = 0.0;
  std::vector<int> idx(d, -1);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) p[i] = center[i] + idx[i] * half_side;
    best = std::max(best, impl_->pdf(p));
    std::size_t k = 0;
    while (k < d && ++idx[k] == 2) idx[k++] = -1;
    if (k == d) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Weights

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 0.5)) {
    throw Error(ErrorKind::domain, "beta must lie in (0, 1/2)");
  }
}

}  // namespace

WeightFunction WeightFunction::inverse_density_power(const DensityModel& model,
                                                     double beta, double scale) {
  check_beta(beta);
  if (!(scale > 0.0)) throw Error(ErrorKind::domain, "weight scale must be positive");
  WeightFunction w;
  w.model_ = model;
  w.mode_ = WeightMode::inverse_density_power;
  w.beta_ = beta;
  w.scale_ = scale;
  w.wd_bound_ = scale;
  w.name_ = scale == 1.0 ? "inverse-power" : "inverse-power*" + std::to_string(scale);
  w.psi_ = [model, beta, scale](Point t) {
    return scale / std::pow(model.pdf(t), beta);
  };
  return w;
}

WeightFunction WeightFunction::constant(const DensityModel& model, double beta,
                                        double value) {
  check_beta(beta);
  if (!(value > 0.0)) throw Error(ErrorKind::domain, "weight must be positive");
  WeightFunction w;
  w.model_ = model;
  w.mode_ = WeightMode::custom;
  w.beta_ = beta;
  w.scale_ = value;
  w.constant_ = true;
  w.wd_bound_ = value * std::pow(model.sup_f(), beta);
  w.name_ = "constant";
  w.psi_ = [value](Point) { return value; };
  return w;
}

WeightFunction WeightFunction::custom(const DensityModel& model, double beta,
                                      std::function<double(Point)> psi,
                                      std::string name) {
  check_beta(beta);
  WeightFunction w;
  w.model_ = model;
  w.mode_ = WeightMode::custom;
  w.beta_ = beta;
  w.name_ = std::move(name);
  w.psi_ = std::move(psi);
  // sup f^beta psi on a uniform audit grid over the 1 - 1e-6 box.
  const std::size_t d = model.dim();
  const Box box = model.probability_box(1.0 - 1e-6);
  const std::size_t per_axis = std::max<std::size_t>(
      11, static_cast<std::size_t>(std::pow(4.0e5, 1.0 / static_cast<double>(d))));
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  double bound = 0.0;
  while (true) {
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(idx[i]) /
                             static_cast<double>(per_axis - 1);
    }
    if (model.in_positivity_set(p)) {
      bound = std::max(bound, std::pow(model.pdf(p), beta) * w.psi_(p));
    }
    std::size_t k = 0;
    while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == d) break;
  }
  w.wd_bound_ = bound;
  return w;
}

std::optional<double> WeightFunction::tail_probability(double lambda) const {
  if (!(lambda > 0.0)) return 1.0;
  if (constant_) return scale_ > lambda ? 1.0 : 0.0;
  if (mode_ == WeightMode::inverse_density_power) {
    // scale f^{-beta} > lambda  <=>  f < (scale / lambda)^{1/beta}
    return model_.pdf_level_tail(std::pow(scale_ / lambda, 1.0 / beta_));
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Sample draw_sample(const DensityModel& model, std::size_t n, const StreamId& id) {
  if (n == 0) throw Error(ErrorKind::domain, "sample size must be >= 1");
  Stream stream(id);
  Sample s{PointSet(model.dim()), id};
  model.sample(stream, n, s.points);
  return s;
}

namespace {

void check_bandwidth(double h) {
  if (!(h > 0.0 && h < 1.0)) {
    throw Error(ErrorKind::domain, "bandwidth must lie in (0, 1)");
  }
}

// Panel boundaries in u for one axis: [-1/2, 1/2] cut where t + u s crosses a
// model breakpoint.
void axis_cuts(const std::vector<double>& breaks, double t, double s,
               std::vector<double>& cuts) {
  cuts.clear();
  cuts.push_back(-0.5);
  for (double b : breaks) {
    const double u = (b - t) / s;
    if (u > -0.5 && u < 0.5) cuts.push_back(u);
  }
  cuts.push_back(0.5);
  std::sort(cuts.begin(), cuts.end());
}

}  // namespace

namespace {

// Standard normal mass of [lo, hi], taken from the tail that avoids cancellation.
double normal_mass(double lo, double hi) {
  constexpr double r = 0.70710678118654752440;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo * r) - std::erfc(hi * r));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi * r) - std::erfc(-lo * r));
  return 1.0 - 0.5 * std::erfc(-lo * r) - 0.5 * std::erfc(hi * r);
}

}  // namespace

double expected_kde(const DensityModel& model, const Kernel& kernel, double h,
                    Point t, std::size_t quad_points_per_axis) {
  const std::size_t d = model.dim();
  if (t.size() != d || kernel.dim() != d) {
    throw Error(ErrorKind::dimension, "expected_kde: dimension mismatch");
  }
  check_bandwidth(h);
  for (double x : t) {
    if (!std::isfinite(x)) throw Error(ErrorKind::domain, "non-finite evaluation point");
  }
  const double s = d == 1 ? h : std::pow(h, 1.0 / static_cast<double>(d));
  if (model.family() == ModelFamily::gaussian && kernel.piecewise_constant()) {
    // Constant kernel: K(0) times the gaussian mass of the window, over h.
    const std::vector<double> origin(d, 0.0);
    double v = kernel.eval_unchecked(origin.data());
    for (double x : t) v *= normal_mass(x - 0.5 * s, x + 0.5 * s);
    return v / h;
  }
  const GaussRule& coarse = gauss_legendre(quad_points_per_axis);
  const GaussRule& fine = gauss_legendre(2 * quad_points_per_axis);

  if (d == 1) {
    const std::vector<double>& breaks = model.breakpoints(0);
    double cuts_buf[16];
    std::vector<double> cuts_heap;
    double* cuts = cuts_buf;
    std::size_t nc = 0;
    if (breaks.size() + 2 > 16) {
      axis_cuts(breaks, t[0], s, cuts_heap);
      cuts = cuts_heap.data();
      nc = cuts_heap.size();
    } else {
      cuts[nc++] = -0.5;
      for (double b : breaks) {
        const double u = (b - t[0]) / s;
        if (u > -0.5 && u < 0.5) cuts[nc++] = u;
      }
      cuts[nc++] = 0.5;
      std::sort(cuts, cuts + nc);
    }
    const double t0 = t[0];
    double vc = 0.0;
    double vf = 0.0;
    for (std::size_t p = 0; p + 1 < nc; ++p) {
      auto integrand = [&](double u) {
        const double x = t0 + u * s;
        return kernel.eval_unchecked(&u) * model.pdf(std::span<const double>(&x, 1));
      };
      vc += integrate_gauss(coarse, cuts[p], cuts[p + 1], integrand);
      vf += integrate_gauss(fine, cuts[p], cuts[p + 1], integrand);
    }
    if (std::abs(vf - vc) > 1e-6) {
      throw AccuracyError("expected_kde: quadrature resolutions disagree", vc, vf);
    }
    return vf;
  }

  // Tensor product over per-axis panels.
  std::vector<std::vector<double>> cuts(d);
  for (std::size_t i = 0; i < d; ++i) axis_cuts(model.breakpoints(i), t[i], s, cuts[i]);
  auto tensor = [&](const GaussRule& rule) {
    // Flattened per-axis node/weight lists over all panels.
    std::vector<std::vector<double>> nodes(d);
    std::vector<std::vector<double>> weights(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t p = 0; p + 1 < cuts[i].size(); ++p) {
        const double a = cuts[i][p];
        const double b = cuts[i][p + 1];
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
          nodes[i].push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k]);
          weights[i].push_back(0.5 * (b - a) * rule.weights[k]);
        }
      }
    }
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> u(d);
    std::vector<double> x(d);
    double sum = 0.0;
    while (true) {
      double w = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        u[i] = nodes[i][idx[i]];
        x[i] = t[i] + u[i] * s;
        w *= weights[i][idx[i]];
      }
      sum += w * kernel.eval_unchecked(u.data()) * model.pdf(x);
      std::size_t k = 0;
      while (k < d && ++idx[k] == nodes[k].size()) idx[k++] = 0;
      if (k == d) break;
    }
    return sum;
  };
  const double vc = tensor(coarse);
  const double vf = tensor(fine);
  if (std::abs(vf - vc) > 1e-6) {
    throw AccuracyError("expected_kde: quadrature resolutions disagree", vc, vf);
  }
  return vf;
}

std::vector<double> expected_kde_many(const DensityModel& model,
                                      const Kernel& kernel, double h,
                                      const PointSet& points,
                                      std::size_t quad_points_per_axis) {
  std::vector<double> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    out[i] = expected_kde(model, kernel, h, points[i], quad_points_per_axis);
  });
  return out;
}

}  // namespace ubkde

#include "ubkde/functional.hpp"

#include <algorithm>
#include <cmath>

#include "ubkde/deviation.hpp"
#include "ubkde/error.hpp"
#include "ubkde/kde.hpp"
#include "ubkde/parallel.hpp"
#include "ubkde/quadrature.hpp"
#include "ubkde/rng.hpp"

namespace ubkde {

LipschitzFunctional LipschitzFunctional::identity() {
  return {[](double x) { return x; }, 1.0, "identity"};
}

LipschitzFunctional LipschitzFunctional::clamp(double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::domain, "clamp level must be positive");
  return {[c](double x) { return std::min(x, c); }, 1.0, "clamp:" + std::to_string(c)};
}

LipschitzFunctional LipschitzFunctional::smooth_min(double c, double k) {
  if (!(c > 0.0) || !(k > 0.0)) throw Error(ErrorKind::domain, "smooth-min needs c, k > 0");
  // -(1/k) log(e^{-kx} + e^{-kc}), evaluated stably and shifted to vanish at 0.
  auto softmin = [c, k](double x) {
    const double m = std::min(x, c);
    return m - std::log1p(std::exp(-k * std::abs(x - c))) / k;
  };
  const double offset = softmin(0.0);
  return {[softmin, offset](double x) { return softmin(x) - offset; }, 1.0,
          "smooth-min:" + std::to_string(c)};
}

LipschitzFunctional make_functional(const std::string& spec) {
  if (spec == "identity") return LipschitzFunctional::identity();
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  if (colon == std::string::npos) {
    throw Error(ErrorKind::config, "functional '" + spec + "' needs a level, e.g. clamp:0.2");
  }
  double c = 0.0;
  try {
    c = std::stod(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, "bad functional level in '" + spec + "'");
  }
  if (name == "clamp" || name == "min") return LipschitzFunctional::clamp(c);
  if (name == "smooth-min") return LipschitzFunctional::smooth_min(c);
  throw Error(ErrorKind::config, "unknown functional '" + spec + "'");
}

double observed_lipschitz(const LipschitzFunctional& phi, double range_hi,
                          std::size_t pairs, std::uint64_t seed) {
  Stream s(StreamId{seed, 0, 0});
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double x = s.uniform() * range_hi;
    const double y = s.uniform() * range_hi;
    if (x == y) continue;
    worst = std::max(worst, std::abs(phi(x) - phi(y)) / std::abs(x - y));
  }
  return worst;
}

namespace {

struct CellIntegral {
  double coarse = 0.0;
  double fine = 0.0;
};

}  // namespace

double plugin_functional(const PointSet& sample, const Kernel& kernel, double h,
                         const LipschitzFunctional& phi, const Box& region,
                         std::size_t quad_points) {
  if (!(h > 0.0 && h < 1.0)) throw Error(ErrorKind::domain, "bandwidth must lie in (0, 1)");
  if (sample.empty()) throw Error(ErrorKind::domain, "empty sample");
  const std::size_t d = sample.dim();
  if (kernel.dim() != d || region.dim() != d) {
    throw Error(ErrorKind::dimension, "plugin functional: dimension mismatch");
  }
  if (quad_points == 0) throw Error(ErrorKind::domain, "quadrature needs points");
  const double s = d == 1 ? h : std::pow(h, 1.0 / static_cast<double>(d));

  std::vector<std::vector<double>> edges(d);
  double cells = 1.0;
  for (std::size_t c = 0; c < d; ++c) {
    auto& e = edges[c];
    e.push_back(region.lo[c]);
    e.push_back(region.hi[c]);
    for (std::size_t i = 0; i < sample.size(); ++i) {
      for (double b : {sample[i][c] - 0.5 * s, sample[i][c] + 0.5 * s}) {
        if (b > region.lo[c] && b < region.hi[c]) e.push_back(b);
      }
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    cells *= static_cast<double>(e.size() - 1);
  }
  if (cells > 5e7) {
    throw Error(ErrorKind::domain, "too many integration cells; reduce n or the dimension");
  }
  const std::size_t ncell = static_cast<std::size_t>(cells);

  const bool constant = kernel.piecewise_constant();
  const GaussRule& coarse = gauss_legendre(constant ? 1 : quad_points);
  const GaussRule& fine = gauss_legendre(constant ? 2 : 2 * quad_points);

  const KdeEvaluator eval(sample, kernel);
  eval.prepare(h);
  std::vector<CellIntegral> parts(ncell);
  parallel_for(ncell, [&](std::size_t flat) {
    std::vector<std::size_t> cell(d);
    std::size_t rest = flat;
    for (std::size_t c = 0; c < d; ++c) {
      cell[c] = rest % (edges[c].size() - 1);
      rest /= edges[c].size() - 1;
    }
    auto tensor = [&](const GaussRule& rule) {
      const std::size_t q = rule.nodes.size();
      std::vector<std::size_t> idx(d, 0);
      std::vector<double> t(d);
      double sum = 0.0;
      while (true) {
        double w = 1.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double a = edges[c][cell[c]];
          const double b = edges[c][cell[c] + 1];
          t[c] = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[idx[c]];
          w *= 0.5 * (b - a) * rule.weights[idx[c]];
        }
        sum += w * phi(eval.at(t, h));
        std::size_t c = 0;
        while (c < d && ++idx[c] == q) idx[c++] = 0;
        if (c == d) break;
      }
      return sum;
    };
    parts[flat] = {tensor(coarse), tensor(fine)};
  });
  double vc = 0.0;
  double vf = 0.0;
  for (const auto& p : parts) {
    vc += p.coarse;
    vf += p.fine;
  }
  if (std::abs(vf - vc) > 1e-5) {
    throw AccuracyError("plugin functional: quadrature resolutions disagree", vc, vf);
  }
  return vf;
}

namespace {

// Composite tensor Gauss-Legendre over a box with `panels` per axis.
template <class F>
double tensor_composite(const Box& box, std::size_t panels, std::size_t order, F&& f) {
  const std::size_t d = box.dim();
  const GaussRule& rule = gauss_legendre(order);
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (std::size_t c = 0; c < d; ++c) {
    const double width = (box.hi[c] - box.lo[c]) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = box.lo[c] + width * static_cast<double>(p);
      for (std::size_t k = 0; k < order; ++k) {
        nodes[c].push_back(a + 0.5 * width * (1.0 + rule.nodes[k]));
        weights[c].push_back(0.5 * width * rule.weights[k]);
      }
    }
  }
  const std::size_t per_axis = panels * order;
  std::size_t total = 1;
  for (std::size_t c = 0; c < d; ++c) total *= per_axis;
  // Sum per first-axis slice, then in order, so the result is schedule-free.
  const std::size_t slices = per_axis;
  const std::size_t per_slice = total / slices;
  std::vector<double> slice_sum(slices, 0.0);
  parallel_for(slices, [&](std::size_t i0) {
    std::vector<double> t(d);
    double sum = 0.0;
    for (std::size_t r = 0; r < per_slice; ++r) {
      std::size_t rest = r;
      double w = weights[0][i0];
      t[0] = nodes[0][i0];
      for (std::size_t c = 1; c < d; ++c) {
        const std::size_t k = rest % per_axis;
        rest /= per_axis;
        t[c] = nodes[c][k];
        w *= weights[c][k];
      }
      sum += w * f(Point(t));
    }
    slice_sum[i0] = sum;
  });
  double total_sum = 0.0;
  for (double v : slice_sum) total_sum += v;
  return total_sum;
}

double integrate_over_box(const DensityModel& model, const Box& box,
                          const std::function<double(Point)>& g, double* err) {
  const std::size_t d = model.dim();
  if (d == 1) {
    std::vector<double> breaks;
    for (double b : model.breakpoints(0)) breaks.push_back(b);
    const QuadratureResult r = integrate_adaptive(
        [&](double x) { return g(Point(&x, 1)); }, box.lo[0], box.hi[0], 16, 1e-11, breaks);
    if (err) *err = r.error;
    if (!r.converged) throw AccuracyError("adaptive quadrature did not converge", r.value, r.value);
    return r.value;
  }
  const std::size_t panels = d == 2 ? 64 : 8;
  const double coarse = tensor_composite(box, panels, 8, g);
  const double fine = tensor_composite(box, panels, 16, g);
  if (err) *err = std::abs(fine - coarse);
  return fine;
}

}  // namespace

double c_beta(const DensityModel& model, double beta) {
  if (!(beta > 0.0 && beta < 0.5)) throw Error(ErrorKind::domain, "beta must lie in (0, 1/2)");
  auto g = [&](Point t) {
    if (!model.in_positivity_set(t)) return 0.0;
    return std::pow(model.pdf(t), beta);
  };
  const Box box = model.bounding_box();
  const double base = integrate_over_box(model, box, g, nullptr);
  const double wide = integrate_over_box(model, box.scaled(2.0), g, nullptr);
  if (!std::isfinite(base) || !std::isfinite(wide) ||
      std::abs(wide - base) > 1e-6 * std::abs(wide)) {
    throw AccuracyError("integral of f^beta does not converge on the bounding region", base, wide);
  }
  return wide;
}

nlohmann::json to_json(const FunctionalBound& b) {
  return {{"lhs", b.lhs},         {"rhs", b.rhs},           {"c_beta", b.c_beta},
          {"holds", b.holds},     {"slack", b.slack},       {"plugin", b.plugin},
          {"centered", b.centered}, {"refinements", b.refinements}};
}

FunctionalBound functional_bound_check(const PointSet& sample, const Kernel& kernel, double h,
                                       const LipschitzFunctional& phi,
                                       const DensityModel& model, double beta,
                                       const FunctionalCheckSpec& spec) {
  if (!spec.window) throw Error(ErrorKind::config, "functional check needs a bandwidth window");
  const std::size_t d = model.dim();
  const double s = d == 1 ? h : std::pow(h, 1.0 / static_cast<double>(d));
  FunctionalBound out;
  out.c_beta = c_beta(model, beta);

  // Region: the model's bounding box widened to hold every kernel window.
  Box region = model.bounding_box();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      region.lo[c] = std::min(region.lo[c], sample[i][c] - s);
      region.hi[c] = std::max(region.hi[c], sample[i][c] + s);
    }
  }

  out.plugin = plugin_functional(sample, kernel, h, phi, region, spec.quad_points);
  double centered_err = 0.0;
  const std::size_t q = spec.quad_points;
  auto centered = [&](Point t) { return phi(expected_kde(model, kernel, h, t, q)); };
  if (d == 1) {
    std::vector<double> breaks;
    for (double b : model.breakpoints(0)) {
      breaks.push_back(b - 0.5 * s);
      breaks.push_back(b + 0.5 * s);
    }
    const QuadratureResult r = integrate_adaptive(
        [&](double x) { return centered(Point(&x, 1)); }, region.lo[0], region.hi[0], 8,
        1e-9, breaks);
    if (!r.converged) {
      throw AccuracyError("integral of phi(E f) did not converge", r.value, r.value);
    }
    out.centered = r.value;
    centered_err = r.error;
  } else {
    const double coarse = tensor_composite(region, 32, 4, centered);
    out.centered = tensor_composite(region, 32, 8, centered);
    centered_err = std::abs(out.centered - coarse);
  }
  out.lhs = std::abs(out.plugin - out.centered);
  out.slack = centered_err + 1e-12;

  const WeightFunction psi = WeightFunction::inverse_density_power(model, beta);
  std::size_t max_points = spec.max_points;
  double refine = 1.0;
  for (int round = 0;; ++round) {
    const EvalGrid grid = build_eval_grid(model, psi, *spec.window, sample.size(), max_points,
                                          &sample, refine);
    const DeviationRecord rec = weighted_deviation(sample, model, psi, kernel, h, grid, q);
    out.rhs = phi.lipschitz_D * out.c_beta * rec.sup_weighted_dev;
    out.refinements = round;
    out.holds = out.lhs <= out.rhs * (1.0 + 1e-6) + out.slack;
    if (out.holds || round >= spec.max_refinements) break;
    refine *= 0.5;
    max_points <<= d;
  }
  return out;
}

}  // namespace ubkde

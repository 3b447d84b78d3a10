#include "ubkde/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ubkde/error.hpp"

namespace ubkde {

double SlowlyVarying::operator()(double t) const {
  if (log_power == 0.0) return scale;
  return scale * std::pow(std::log(std::numbers::e + t), log_power);
}

BandwidthWindow::BandwidthWindow(double alpha, double mu, SlowlyVarying L1,
                                 SlowlyVarying L2)
    : alpha_(alpha), mu_(mu), L1_(L1), L2_(L2) {
  if (!(mu > 0.0 && mu < alpha && alpha < 1.0)) {
    throw Error(ErrorKind::domain, "window exponents must satisfy 0 < mu < alpha < 1");
  }
  finish();
}

BandwidthWindow BandwidthWindow::single_bandwidth(double alpha, SlowlyVarying L1) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::domain, "alpha must lie in (0, 1)");
  }
  BandwidthWindow w;
  w.alpha_ = alpha;
  w.mu_ = alpha;
  w.L1_ = L1;
  w.L2_ = L1;
  w.degenerate_ = true;
  w.finish();
  return w;
}

void BandwidthWindow::finish() {
  if (!(L1_.scale > 0.0) || !(L2_.scale > 0.0)) {
    throw Error(ErrorKind::domain, "slowly varying scale must be positive");
  }
  region_r_ = static_cast<int>(std::ceil(3.0 / mu_ - 1e-12));

  // lambda must be strictly increasing on [1, 2^60]; sampled at ratio 2^{1/4}.
  double prev = lambda(1.0);
  for (int k = 1; k <= 240; ++k) {
    const double t = std::exp2(0.25 * k);
    const double cur = lambda(t);
    if (!(cur > prev)) {
      throw Error(ErrorKind::domain,
                  "lambda(t) is not strictly increasing near t = " + std::to_string(t));
    }
    prev = cur;
  }

  auto ok = [this](double t) {
    const double at = a(t);
    const double bt = b(t);
    return at <= bt && bt < 1.0;
  };
  // Last failure beyond the exhaustive range would mean the window never settles.
  for (int k = 80; k <= 240; ++k) {
    if (!ok(std::exp2(0.25 * k))) {
      throw Error(ErrorKind::domain, "window never satisfies a_n <= b_n < 1");
    }
  }
  std::size_t last_bad = 1;
  for (std::size_t n = 2; n <= (std::size_t{1} << 20); ++n) {
    if (!ok(static_cast<double>(n))) last_bad = n;
  }
  n_min_ = last_bad + 1;
}

double BandwidthWindow::a(double t) const {
  return std::exp2(-alpha_ * std::log2(t)) * L1_(t);
}

double BandwidthWindow::b(double t) const {
  if (degenerate_) return a(t);
  return std::exp2(-mu_ * std::log2(t)) * L2_(t);
}

double BandwidthWindow::lambda(double t) const {
  const double at = a(t);
  return std::sqrt(t * at * std::abs(std::log(at)));
}

namespace {

void check_h(double h) {
  if (!(h > 0.0 && h < 1.0)) throw Error(ErrorKind::domain, "bandwidth must lie in (0, 1)");
}

void check_n(const BandwidthWindow& window, std::size_t n) {
  if (n < window.n_min()) {
    throw WindowNotValid("n = " + std::to_string(n) + " is below the window's n_min = " +
                             std::to_string(window.n_min()),
                         window.n_min());
  }
}

}  // namespace

double lambda_n(std::size_t n, double h) {
  check_h(h);
  return std::sqrt(static_cast<double>(n) * h * std::abs(std::log(h)));
}

double rescale_factor(std::size_t n, double h) {
  check_h(h);
  return std::sqrt(static_cast<double>(n) * h / std::abs(std::log(h)));
}

WindowValues window_eval(const BandwidthWindow& window, std::size_t n,
                         std::optional<double> h) {
  if (n < 2) throw Error(ErrorKind::domain, "window_eval needs n >= 2");
  const double t = static_cast<double>(n);
  WindowValues v;
  v.a_n = window.a(t);
  v.b_n = window.b(t);
  v.lambda_t = window.lambda(t);
  if (h) v.lambda_n_h = lambda_n(n, *h);
  return v;
}

DyadicGrid dyadic_grid(const BandwidthWindow& window, std::size_t n) {
  const double t = static_cast<double>(n);
  const double an = window.a(t);
  const double bn = window.b(t);
  if (n < 2 || an > bn) {
    throw WindowNotValid("a(n) > b(n); the window is valid from n_min = " +
                             std::to_string(window.n_min()),
                         window.n_min());
  }
  DyadicGrid g;
  const double limit = 2.0 * bn * (1.0 + 1e-12);
  for (int j = 0;; ++j) {
    const double h = std::ldexp(an, j);
    if (h > limit) break;
    g.h_list.push_back(h);
  }
  g.l_n = g.h_list.size() - 1;
  if (n >= window.n_min() && static_cast<double>(g.l_n) > 2.0 * std::log(t)) {
    throw InvariantViolation("dyadic grid exceeds 2 log n levels",
                             {t, static_cast<double>(g.l_n)});
  }
  return g;
}

std::vector<double> h_subgrid(const BandwidthWindow& window, std::size_t n,
                              int ratio_exponent) {
  if (ratio_exponent < 1) throw Error(ErrorKind::domain, "subgrid ratio exponent must be >= 1");
  check_n(window, n);
  const double t = static_cast<double>(n);
  const double an = window.a(t);
  const double bn = window.b(t);
  std::vector<double> grid;
  const double stop = bn * (1.0 - 1e-12);
  for (int i = 0;; ++i) {
    const double h = an * std::exp2(static_cast<double>(i) / ratio_exponent);
    if (!(h < stop)) break;
    grid.push_back(h);
  }
  if (grid.empty() || grid.back() != bn) grid.push_back(bn);
  return grid;
}

// ---------------------------------------------------------------------------

const char* to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::fixed_a: return "fixed-a";
    case SelectorKind::fixed_b: return "fixed-b";
    case SelectorKind::geometric_midpoint: return "geometric-midpoint";
    case SelectorKind::lscv: return "lscv";
    case SelectorKind::knn_local: return "knn-local";
  }
  return "unknown";
}

SelectorKind parse_selector(const std::string& name) {
  for (SelectorKind k : {SelectorKind::fixed_a, SelectorKind::fixed_b,
                         SelectorKind::geometric_midpoint, SelectorKind::lscv,
                         SelectorKind::knn_local}) {
    if (name == to_string(k)) return k;
  }
  if (name == "fixed-a_n") return SelectorKind::fixed_a;
  if (name == "fixed-b_n") return SelectorKind::fixed_b;
  throw Error(ErrorKind::usage, "unknown selector '" + name + "'");
}

namespace {

double uniform_self_convolution(const double* w, std::size_t d) {
  double v = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = std::abs(w[i]);
    if (!(x < 1.0)) return 0.0;
    v *= 1.0 - x;
  }
  return v;
}

}  // namespace

double lscv_score(const PointSet& sample, const Kernel& kernel, double h) {
  check_h(h);
  const std::size_t n = sample.size();
  const std::size_t d = sample.dim();
  if (n < 2) throw Error(ErrorKind::domain, "cross-validation needs at least two points");
  if (kernel.dim() != d) throw Error(ErrorKind::dimension, "lscv: dimension mismatch");
  const double s = d == 1 ? h : std::pow(h, 1.0 / static_cast<double>(d));
  const bool uniform = kernel.piecewise_constant() && kernel.scale() == 1.0;

  // Off-diagonal pair sums of K*K and K, over pairs within sup-distance s.
  double conv_sum = 0.0;
  double loo_sum = 0.0;
  std::vector<double> w(d);
  auto pair = [&](std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < d; ++k) w[k] = (sample[j][k] - sample[i][k]) / s;
    conv_sum += uniform ? uniform_self_convolution(w.data(), d)
                        : kernel.self_convolution(w);
    loo_sum += kernel.eval_unchecked(w.data());
  };
  if (d == 1) {
    std::vector<double> x(sample.coords());
    std::sort(x.begin(), x.end());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n && x[j] - x[i] < s; ++j) {
        const double u = (x[j] - x[i]) / s;
        conv_sum += uniform ? uniform_self_convolution(&u, 1)
                            : kernel.self_convolution(std::span<const double>(&u, 1));
        loo_sum += kernel.eval_unchecked(&u);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) pair(i, j);
    }
  }
  std::vector<double> zero(d, 0.0);
  const double k0k0 = uniform ? 1.0 : kernel.self_convolution(zero);
  const double nn = static_cast<double>(n);
  const double integral_sq = (nn * k0k0 + 2.0 * conv_sum) / (nn * nn * h);
  const double loo = 2.0 * loo_sum / ((nn - 1.0) * h);  // sum_i f_{-i}(X_i)
  return integral_sq - 2.0 * loo / nn;
}

double select_bandwidth(const BandwidthSelector& selector, const PointSet& sample,
                        std::optional<Point> t, const BandwidthWindow& window) {
  const std::size_t n = sample.size();
  if (n == 0) throw Error(ErrorKind::domain, "empty sample");
  if (n < 2) throw Error(ErrorKind::domain, "window needs n >= 2");
  const double nt = static_cast<double>(n);
  const double an = window.a(nt);
  const double bn = window.b(nt);
  auto clamp = [&](double h) {
    if (std::isnan(h)) return an;
    return std::clamp(h, an, bn);
  };
  switch (selector.kind) {
    case SelectorKind::fixed_a:
      return an;
    case SelectorKind::fixed_b:
      return bn;
    case SelectorKind::geometric_midpoint:
      return clamp(std::sqrt(an * bn));
    case SelectorKind::lscv: {
      const Kernel kernel = selector.cv_kernel
                                ? *selector.cv_kernel
                                : Kernel(KernelFamily::uniform, sample.dim());
      const std::vector<double> grid = h_subgrid(window, n, 8);
      double best_h = grid.front();
      double best = lscv_score(sample, kernel, best_h);
      for (std::size_t i = 1; i < grid.size(); ++i) {
        const double score = lscv_score(sample, kernel, grid[i]);
        if (score < best) {
          best = score;
          best_h = grid[i];
        }
      }
      return clamp(best_h);
    }
    case SelectorKind::knn_local: {
      if (!t) throw Error(ErrorKind::usage, "knn-local selector needs an evaluation point");
      if (t->size() != sample.dim()) throw Error(ErrorKind::dimension, "knn-local: dimension mismatch");
      const std::size_t d = sample.dim();
      std::size_t k = selector.knn_rank;
      if (k == 0) k = static_cast<std::size_t>(std::ceil(std::sqrt(nt)));
      k = std::clamp<std::size_t>(k, 1, n);
      std::vector<double> dist(n);
      for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (std::size_t c = 0; c < d; ++c) m = std::max(m, std::abs(sample[i][c] - (*t)[c]));
        dist[i] = m;
      }
      std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
      // The kernel window has side h^{1/d}, so a sup-norm distance maps to
      // the bandwidth dist^d.
      return clamp(std::pow(dist[k - 1], static_cast<double>(d)));
    }
  }
  return an;
}

std::vector<NamedWindow> shipped_windows() {
  return {
      {"default", BandwidthWindow(0.7, 0.3)},
      {"narrow", BandwidthWindow(0.5, 0.3)},
      {"wide", BandwidthWindow(0.9, 0.2)},
      {"log-corrected", BandwidthWindow(0.7, 0.3, {1.0, -0.5}, {1.0, 0.5})},
      {"scaled", BandwidthWindow(0.6, 0.25, {0.5, 0.0}, {2.0, 0.0})},
  };
}

}  // namespace ubkde

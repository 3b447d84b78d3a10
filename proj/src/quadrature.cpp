#include "ubkde/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "ubkde/error.hpp"

namespace ubkde {

GaussRule compute_gauss_legendre(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::domain, "Gauss-Legendre order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (nd + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
      }
      dp = nd * (x * p1 - p2) / (x * x - 1.0);
      const double prev = x;
      x = prev - p1 / dp;
      if (std::abs(x - prev) <= 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

const GaussRule& gauss_legendre(std::size_t n) {
  static const std::array<GaussRule, 65> cache = [] {
    std::array<GaussRule, 65> rules;
    for (std::size_t k = 1; k < rules.size(); ++k) {
      rules[k] = compute_gauss_legendre(k);
    }
    return rules;
  }();
  if (n >= 1 && n < cache.size()) return cache[n];
  thread_local GaussRule scratch;
  scratch = compute_gauss_legendre(n);
  return scratch;
}

namespace {

struct Panel {
  double a;
  double b;
  int depth;
};

}  // namespace

constexpr std::size_t kMaxPanels = 100000;

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, std::size_t order,
                                    double tol,
                                    const std::vector<double>& breaks,
                                    int max_depth) {
  QuadratureResult out;
  if (!(b > a)) return out;
  const GaussRule& coarse = gauss_legendre(order);
  const GaussRule fine = compute_gauss_legendre(2 * order);

  std::vector<double> cuts{a};
  for (double x : breaks) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double width = b - a;
  std::vector<Panel> stack;
  for (std::size_t i = cuts.size() - 1; i > 0; --i) {
    stack.push_back({cuts[i - 1], cuts[i], 0});
  }
  // Depth-first, left to right: summation order is fixed by the input.
  std::size_t panels = 0;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double c = integrate_gauss(coarse, p.a, p.b, f);
    const double v = integrate_gauss(fine, p.a, p.b, f);
    const double err = std::abs(v - c);
    // Below a few ulps of the panel value the comparison is pure roundoff.
    const double allowed = std::max(tol * (p.b - p.a) / width,
                                    64.0 * std::numeric_limits<double>::epsilon() * std::abs(v));
    if (err <= allowed || p.depth >= max_depth || ++panels >= kMaxPanels) {
      if (err > allowed) out.converged = false;
      out.value += v;
      out.error += err;
      continue;
    }
    const double mid = 0.5 * (p.a + p.b);
    stack.push_back({mid, p.b, p.depth + 1});
    stack.push_back({p.a, mid, p.depth + 1});
  }
  return out;
}

}  // namespace ubkde

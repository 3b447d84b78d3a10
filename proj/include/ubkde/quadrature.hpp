#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ubkde {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule. Rules up to 64 points are cached; larger
/// ones are computed on each call.
const GaussRule& gauss_legendre(std::size_t n);
GaussRule compute_gauss_legendre(std::size_t n);

template <class F>
double integrate_gauss(const GaussRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return sum * half;
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // summed |fine - coarse| over accepted panels
  bool converged = true;
};

/// Adaptive composite Gauss-Legendre on [a, b]: each panel is integrated with
/// `order` and `2 * order` points and bisected while the two disagree by more
/// than its share of `tol`. `breaks` seeds the initial panels.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, std::size_t order,
                                    double tol,
                                    const std::vector<double>& breaks = {},
                                    int max_depth = 30);

}  // namespace ubkde

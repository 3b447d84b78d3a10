#pragma once

// Test-side oracles. Nothing here calls into the library's numerics, so a
// bug there cannot hide behind the same bug here.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace oracle {

/// Composite Simpson on [a, b] with `panels` (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Simpson on each piece between consecutive cut points.
template <class F>
double simpson_pieces(F&& f, const std::vector<double>& cuts, int panels) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) s += simpson(f, cuts[i], cuts[i + 1], panels);
  }
  return s;
}

/// Shipped 1-d profiles written out by hand.
inline double profile(const std::string& name, double u) {
  if (!(std::abs(u) <= 0.5)) return 0.0;
  const double w = 1.0 - 4.0 * u * u;
  if (name == "uniform") return 1.0;
  if (name == "epanechnikov") return 1.5 * w;
  if (name == "triweight") return 35.0 / 16.0 * w * w * w;
  return NAN;
}

/// (1/(n h)) sum_i prod_c K((X_ic - t_c) / h^{1/d}), summed in index order.
inline double kde(const std::vector<double>& xs, std::size_t d, const std::string& kernel,
                  double h, const std::vector<double>& t) {
  const std::size_t n = xs.size() / d;
  const double s = std::pow(h, 1.0 / static_cast<double>(d));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 1.0;
    for (std::size_t c = 0; c < d; ++c) v *= profile(kernel, (xs[i * d + c] - t[c]) / s);
    sum += v;
  }
  return sum / (static_cast<double>(n) * h);
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

/// Hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  double normal() { return std::normal_distribution<double>()(rng_); }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[integer(0, xs.size() - 1)];
  }
  std::uint64_t bits() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle

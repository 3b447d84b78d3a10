#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ubkde/density_model.hpp"
#include "ubkde/kernel.hpp"
#include "ubkde/point_set.hpp"

namespace ubkde {

/// L(t) = scale * (log(e + t))^log_power.
struct SlowlyVarying {
  double scale = 1.0;
  double log_power = 0.0;

  double operator()(double t) const;
};

/// The window [a_t, b_t] with a_t = t^{-alpha} L1(t), b_t = t^{-mu} L2(t).
class BandwidthWindow {
 public:
  /// Requires 0 < mu < alpha < 1; verifies that lambda is strictly increasing
  /// on [1, 2^60] and computes n_min.
  BandwidthWindow(double alpha, double mu, SlowlyVarying L1 = {},
                  SlowlyVarying L2 = {});

  /// a_t = b_t: the window collapses to the single sequence t^{-alpha} L1(t).
  static BandwidthWindow single_bandwidth(double alpha, SlowlyVarying L1 = {});

  double alpha() const noexcept { return alpha_; }
  double mu() const noexcept { return mu_; }
  const SlowlyVarying& L1() const noexcept { return L1_; }
  const SlowlyVarying& L2() const noexcept { return L2_; }
  double eta() const noexcept { return 0.5 * (1.0 - alpha_); }
  /// Smallest integer r with r * mu >= 3.
  int region_r() const noexcept { return region_r_; }
  /// Smallest n >= 2 from which a(m) <= b(m) < 1 for all m >= n.
  std::size_t n_min() const noexcept { return n_min_; }
  bool degenerate() const noexcept { return degenerate_; }

  double a(double t) const;
  double b(double t) const;
  /// lambda(t) = sqrt(t a_t |log a_t|).
  double lambda(double t) const;

 private:
  BandwidthWindow() = default;
  void finish();

  double alpha_ = 0.7;
  double mu_ = 0.3;
  SlowlyVarying L1_;
  SlowlyVarying L2_;
  int region_r_ = 10;
  std::size_t n_min_ = 2;
  bool degenerate_ = false;
};

/// lambda_n(h) = sqrt(n h |log h|).
double lambda_n(std::size_t n, double h);

/// sqrt(n h / |log h|), the factor that rescales sup-norm deviations.
double rescale_factor(std::size_t n, double h);

struct WindowValues {
  double a_n = 0.0;
  double b_n = 0.0;
  double lambda_t = 0.0;
  std::optional<double> lambda_n_h;
};

WindowValues window_eval(const BandwidthWindow& window, std::size_t n,
                         std::optional<double> h = std::nullopt);

struct DyadicGrid {
  std::vector<double> h_list;  // h_{n,0} .. h_{n,l_n}
  std::size_t l_n = 0;
};

/// h_{n,j} = 2^j a_n for j = 0..l_n, l_n = max{j : h_{n,j} <= 2 b_n}.
DyadicGrid dyadic_grid(const BandwidthWindow& window, std::size_t n);

/// Geometric grid a_n 2^{i/k} from a_n up to b_n, both endpoints included.
std::vector<double> h_subgrid(const BandwidthWindow& window, std::size_t n,
                              int ratio_exponent);

enum class SelectorKind {
  fixed_a,
  fixed_b,
  geometric_midpoint,
  lscv,
  knn_local
};

const char* to_string(SelectorKind kind);
SelectorKind parse_selector(const std::string& name);

struct BandwidthSelector {
  SelectorKind kind = SelectorKind::geometric_midpoint;
  /// Neighbor rank for knn_local; 0 means ceil(sqrt(n)).
  std::size_t knn_rank = 0;
  /// Kernel used by the cross-validation score; uniform if unset.
  std::optional<Kernel> cv_kernel;

  bool local() const noexcept { return kind == SelectorKind::knn_local; }
};

/// Least-squares cross-validation score
///   int f_{n,h}^2 - (2/n) sum_i f_{n,h,-i}(X_i).
double lscv_score(const PointSet& sample, const Kernel& kernel, double h);

/// Bandwidth for the sample (and location t for local selectors), always
/// clamped to [a_n, b_n].
double select_bandwidth(const BandwidthSelector& selector, const PointSet& sample,
                        std::optional<Point> t, const BandwidthWindow& window);

struct NamedWindow {
  std::string name;
  BandwidthWindow window;
};

/// Window parameterizations exercised by the test suites.
std::vector<NamedWindow> shipped_windows();

}  // namespace ubkde

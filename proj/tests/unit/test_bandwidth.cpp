#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "ubkde/bandwidth.hpp"
#include "ubkde/error.hpp"

using namespace ubkde;

namespace {

BandwidthWindow default_window() { return BandwidthWindow(0.7, 0.3, {1, 0}, {1, 0}); }

PointSet line(std::vector<double> xs) { return PointSet(1, std::move(xs)); }

}  // namespace

TEST(Window, PowersOfTwoAtN1024) {
  const BandwidthWindow w = default_window();
  EXPECT_DOUBLE_EQ(w.a(1024), 0.0078125);
  EXPECT_DOUBLE_EQ(w.b(1024), 0.125);
  const WindowValues v = window_eval(w, 1024, 1.0 / 64);
  EXPECT_DOUBLE_EQ(v.a_n, std::ldexp(1.0, -7));
  EXPECT_DOUBLE_EQ(v.b_n, std::ldexp(1.0, -3));
  ASSERT_TRUE(v.lambda_n_h.has_value());
  // n h = 16, |log h| = log 64
  EXPECT_NEAR(*v.lambda_n_h, std::sqrt(16.0 * std::log(64.0)), 1e-12);
  EXPECT_NEAR(*v.lambda_n_h, 8.1573, 5e-5);
}

TEST(Window, UnitBandwidthRejected) {
  EXPECT_THROW(lambda_n(1024, 1.0), Error);
  EXPECT_THROW(rescale_factor(1024, 1.0), Error);
  EXPECT_THROW(lambda_n(1024, 0.0), Error);
}

TEST(Window, ExponentOrderEnforced) {
  EXPECT_THROW(BandwidthWindow(0.5, 0.5), Error);
  EXPECT_THROW(BandwidthWindow(0.3, 0.5), Error);
  EXPECT_THROW(BandwidthWindow(1.0, 0.5), Error);
  EXPECT_THROW(BandwidthWindow(0.7, 0.0), Error);
}

TEST(Window, RegionExponent) {
  EXPECT_EQ(default_window().region_r(), 10);
  EXPECT_EQ(BandwidthWindow(0.9, 0.2).region_r(), 15);
}

TEST(DyadicGrid, EnumerationAtN1024) {
  const DyadicGrid g = dyadic_grid(default_window(), 1024);
  ASSERT_EQ(g.l_n, 5u);
  ASSERT_EQ(g.h_list.size(), 6u);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(g.h_list[j], std::ldexp(1.0, int(j) - 7));
  EXPECT_LE(double(g.l_n), 2.0 * std::log(1024.0));
}

TEST(DyadicGrid, JustAboveNMinCovers) {
  for (const auto& nw : shipped_windows()) {
    const std::size_t n = nw.window.n_min() + 1;
    const DyadicGrid g = dyadic_grid(nw.window, n);
    EXPECT_GE(g.h_list.back(), nw.window.b(double(n))) << nw.name;
    EXPECT_EQ(g.h_list.front(), nw.window.a(double(n))) << nw.name;
  }
}

TEST(Subgrid, OnePointPerOctave) {
  const std::vector<double> s = h_subgrid(default_window(), 1024, 1);
  // 2^-7, ..., 2^-3; the last octave point is b_n itself, so it is not repeated.
  ASSERT_EQ(s.size(), 5u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], std::ldexp(1.0, int(i) - 7));
}

TEST(Subgrid, EightPerOctave) {
  const BandwidthWindow w = default_window();
  const std::vector<double> s = h_subgrid(w, 1024, 8);
  // 4 octaves * 8 + 1
  EXPECT_EQ(s.size(), std::size_t(8 * std::log2(w.b(1024) / w.a(1024)) + 1));
  EXPECT_EQ(s.size(), 33u);
  EXPECT_EQ(s.front(), w.a(1024));
  EXPECT_EQ(s.back(), w.b(1024));
}

TEST(SubgridProperty, EndpointsExactAndIncreasing) {
  oracle::Gen g(31);
  const auto windows = shipped_windows();
  for (int i = 0; i < 300; ++i) {
    const auto& w = g.pick(windows).window;
    const std::size_t n = g.integer(w.n_min(), 1u << 20);
    const int k = int(g.integer(1, 16));
    const std::vector<double> s = h_subgrid(w, n, k);
    EXPECT_EQ(s.front(), w.a(double(n)));
    EXPECT_EQ(s.back(), w.b(double(n)));
    for (std::size_t j = 1; j < s.size(); ++j) EXPECT_GT(s[j], s[j - 1]);
  }
}

TEST(SubgridProperty, RescaleMapIncreasingOnSubgrid) {
  for (const auto& nw : shipped_windows()) {
    for (std::size_t n = std::max<std::size_t>(nw.window.n_min(), 256); n <= (1u << 20); n *= 2) {
      const std::vector<double> s = h_subgrid(nw.window, n, 8);
      double prev = 0.0;
      for (double h : s) {
        if (h > std::exp(-1.0)) break;
        const double v = double(n) * h / std::abs(std::log(h));
        EXPECT_GT(v, prev) << nw.name << " n=" << n;
        prev = v;
      }
    }
  }
}

TEST(WindowProperty, LambdaIdentityOnGeometricGrid) {
  for (const auto& nw : shipped_windows()) {
    for (double t = 4.0; t <= 1e15; t *= 3.7) {
      const double a = nw.window.a(t);
      if (!(a < 1.0)) continue;
      const double lhs = nw.window.lambda(t) * nw.window.lambda(t);
      const double rhs = t * a * std::abs(std::log(a));
      EXPECT_NEAR(lhs / rhs, 1.0, 1e-12) << nw.name << " t=" << t;
    }
  }
}

TEST(WindowProperty, CoverageAndGridLength) {
  for (const auto& nw : shipped_windows()) {
    for (int e = 8; e <= 20; ++e) {
      const std::size_t n = std::size_t(1) << e;
      ASSERT_GE(n, nw.window.n_min()) << nw.name;
      const DyadicGrid g = dyadic_grid(nw.window, n);
      const double a = nw.window.a(double(n)), b = nw.window.b(double(n));
      EXPECT_EQ(g.h_list.front(), a);
      EXPECT_LE(b, g.h_list[g.l_n]);
      EXPECT_LE(g.h_list[g.l_n], 2.0 * b * (1 + 1e-12));
      EXPECT_LE(double(g.l_n), 2.0 * std::log(double(n))) << nw.name << " n=" << n;
    }
  }
}

TEST(WindowProperty, SlowVariation) {
  for (const SlowlyVarying L : {SlowlyVarying{1, 0}, SlowlyVarying{0.5, -0.5},
                                SlowlyVarying{2, 0.5}, SlowlyVarying{1, 2}}) {
    double prev_gap = INFINITY;
    for (int k = 10; k <= 1000; k *= 10) {
      const double t = std::ldexp(1.0, k);
      const double gap = std::abs(L(2 * t) / L(t) - 1.0);
      EXPECT_LE(gap, prev_gap);
      prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 3e-3);
  }
}

TEST(Selector, FixedAndMidpointValues) {
  const BandwidthWindow w = default_window();
  const PointSet s = line(std::vector<double>(1024, 0.0));
  EXPECT_EQ(select_bandwidth({SelectorKind::fixed_a}, s, std::nullopt, w), 0.0078125);
  EXPECT_EQ(select_bandwidth({SelectorKind::fixed_b}, s, std::nullopt, w), 0.125);
  EXPECT_EQ(select_bandwidth({SelectorKind::geometric_midpoint}, s, std::nullopt, w), 0.03125);
}

TEST(Selector, KnnFarFromDataClampsToUpperEnd) {
  const BandwidthWindow w = default_window();
  std::vector<double> xs(1024);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = double(i) / 1024.0;
  const double h = select_bandwidth({SelectorKind::knn_local}, line(xs),
                                    std::vector<double>{1e6}, w);
  EXPECT_EQ(h, w.b(1024));
}

TEST(Selector, NamesRoundTrip) {
  for (SelectorKind k : {SelectorKind::fixed_a, SelectorKind::fixed_b,
                         SelectorKind::geometric_midpoint, SelectorKind::lscv,
                         SelectorKind::knn_local}) {
    EXPECT_EQ(parse_selector(to_string(k)), k);
  }
  try {
    parse_selector("bogus");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::usage);
  }
}

TEST(Selector, LscvScoreMatchesDirectFormula) {
  // Uniform kernel: int f^2 = (1/(n^2 h)) sum_ij max(0, 1 - |X_i - X_j|/h).
  oracle::Gen g(41);
  const Kernel k = make_kernel("uniform");
  std::vector<double> xs(60);
  for (double& x : xs) x = g.normal();
  const double h = 0.3;
  const double n = double(xs.size());
  double conv = 0.0, loo = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double w = std::abs(xs[i] - xs[j]) / h;
      conv += std::max(0.0, 1.0 - w);
      if (i != j && w <= 0.5) loo += 1.0;
    }
  }
  const double ref = conv / (n * n * h) - 2.0 / n * loo / ((n - 1.0) * h);
  EXPECT_NEAR(lscv_score(line(xs), k, h), ref, 1e-12);
}

TEST(SelectorProperty, AlwaysInsideWindow) {
  oracle::Gen g(51);
  const auto windows = shipped_windows();
  const std::vector<SelectorKind> kinds = {SelectorKind::fixed_a, SelectorKind::fixed_b,
                                           SelectorKind::geometric_midpoint,
                                           SelectorKind::lscv, SelectorKind::knn_local};
  for (int i = 0; i < 10000; ++i) {
    const auto& w = g.pick(windows).window;
    const SelectorKind kind = g.pick(kinds);
    const std::size_t n =
        std::max(w.n_min(), g.integer(2, kind == SelectorKind::lscv ? 40 : 300));
    std::vector<double> xs(n);
    const int shape = int(g.integer(0, 3));
    for (double& x : xs) {
      x = shape == 0 ? g.normal() : shape == 1 ? g.uniform(-1e-9, 1e-9)
          : shape == 2 ? 0.0 : g.uniform(-1e4, 1e4);
    }
    BandwidthSelector sel{kind, g.integer(0, 5), std::nullopt};
    std::optional<Point> t;
    std::vector<double> tv{g.uniform(-1e3, 1e3)};
    if (sel.local()) t = tv;
    double h = 0.0;
    ASSERT_NO_THROW(h = select_bandwidth(sel, line(xs), t, w))
        << to_string(kind) << " n=" << n << " shape=" << shape;
    EXPECT_GE(h, w.a(double(n)));
    EXPECT_LE(h, w.b(double(n)));
  }
}

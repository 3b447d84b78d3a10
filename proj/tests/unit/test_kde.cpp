#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "ubkde/bandwidth.hpp"
#include "ubkde/density_model.hpp"
#include "ubkde/kde.hpp"

using namespace ubkde;

namespace {

PointSet line(std::vector<double> xs) { return PointSet(1, std::move(xs)); }

double kde1(std::vector<double> xs, double h, double t) {
  return kde_brute(line(std::move(xs)), make_kernel("uniform"), h, line({t}))[0];
}

PointSet random_points(oracle::Gen& g, std::size_t n, std::size_t d, double spread) {
  std::vector<double> c(n * d);
  for (double& x : c) x = spread * g.normal();
  return PointSet(d, std::move(c));
}

}  // namespace

TEST(Kde, SmallHandComputedValues) {
  EXPECT_EQ(kde1({0.0}, 0.25, 0.0), 4.0);
  EXPECT_EQ(kde1({0.0, 0.5}, 0.5, 0.25), 2.0);
  EXPECT_EQ(kde1({0.0, 0.9}, 0.5, 0.25), 1.0);
}

TEST(Kde, FastBelowThresholdIsBitIdenticalToBrute) {
  oracle::Gen g(61);
  for (const std::string p : {"uniform", "epanechnikov", "triweight"}) {
    for (std::size_t d : {1u, 2u}) {
      const PointSet xs = random_points(g, 100, d, 1.0);
      const PointSet ts = random_points(g, 100, d, 1.0);
      const Kernel k = make_kernel(p, d);
      EXPECT_EQ(kde_fast(xs, k, 0.2, ts), kde_brute(xs, k, 0.2, ts));
    }
  }
}

TEST(Kde, FastMatchesOracleLargeSample1d) {
  oracle::Gen g(62);
  const Sample s = draw_sample(DensityModel::gaussian(), 100000, StreamId{62, 0, 0});
  std::vector<double> t(1000);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = -4.0 + 8.0 * double(i) / 999.0;
  const Kernel k = make_kernel("epanechnikov");
  const double h = 0.05;
  const std::vector<double> fast = kde_fast(s.points, k, h, line(t));
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    worst = std::max(worst, std::abs(fast[i] - oracle::kde(s.points.coords(), 1, "epanechnikov", h, {t[i]})));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Kde, FastMatchesOracleProductUniform2d) {
  const Sample s = draw_sample(DensityModel::gaussian(2), 10000, StreamId{63, 0, 0});
  oracle::Gen g(63);
  const PointSet ts = random_points(g, 500, 2, 1.5);
  const std::vector<double> fast = kde_fast(s.points, make_kernel("uniform", 2), 0.01, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double ref = oracle::kde(s.points.coords(), 2, "uniform", 0.01,
                                   {ts[i][0], ts[i][1]});
    EXPECT_NEAR(fast[i], ref, 1e-10);
  }
}

TEST(Kde, EvaluationAtSampleAndSupportEdges) {
  // Points exactly h/2 away lie on the closed boundary and count.
  const std::vector<double> xs = {0.0, 0.125, -0.125, 0.3};
  const std::vector<double> ts = {0.0, 0.125, 0.25, -0.25, 0.175};
  const Kernel k = make_kernel("uniform");
  const KdeEvaluator ev(line(xs), k);
  for (double t : ts) {
    EXPECT_EQ(ev.at(std::vector<double>{t}, 0.25), oracle::kde(xs, 1, "uniform", 0.25, {t}))
        << "t=" << t;
  }
}

TEST(Kde, VariableWithFixedSelectorEqualsFastAtA) {
  const BandwidthWindow w(0.7, 0.3);
  const Sample s = draw_sample(DensityModel::gaussian(), 1024, StreamId{64, 0, 0});
  oracle::Gen g(64);
  const PointSet ts = random_points(g, 300, 1, 1.0);
  const Kernel k = make_kernel("epanechnikov");
  const auto v = kde_variable(s.points, k, {SelectorKind::fixed_a}, w, ts);
  const auto f = kde_fast(s.points, k, w.a(1024), ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_EQ(v[i].value, f[i]);
    EXPECT_EQ(v[i].h_used, w.a(1024));
  }
}

TEST(Kde, KnnOnIdenticalPointsUsesOneBandwidth) {
  const BandwidthWindow w(0.7, 0.3);
  const PointSet xs = line(std::vector<double>(500, 0.25));
  const PointSet ts = line({-1.0, 0.0, 0.25, 3.0, 100.0});
  const auto v = kde_variable(xs, make_kernel("uniform"), {SelectorKind::knn_local}, w, xs);
  for (const auto& x : v) EXPECT_EQ(x.h_used, v[0].h_used);
  const auto u = kde_variable(xs, make_kernel("uniform"), {SelectorKind::knn_local}, w, ts);
  for (const auto& x : u) {
    EXPECT_GE(x.h_used, w.a(500));
    EXPECT_LE(x.h_used, w.b(500));
  }
}

TEST(Kde, KthNeighborDistanceMatchesSort) {
  oracle::Gen g(65);
  for (std::size_t d : {1u, 2u}) {
    const PointSet xs = random_points(g, 400, d, 1.0);
    const KdeEvaluator ev(xs, make_kernel("uniform", d));
    ev.prepare(0.5);
    for (int rep = 0; rep < 50; ++rep) {
      const PointSet t = random_points(g, 1, d, 1.5);
      std::vector<double> dist;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        double m = 0.0;
        for (std::size_t c = 0; c < d; ++c) m = std::max(m, std::abs(xs[i][c] - t[0][c]));
        dist.push_back(m);
      }
      std::sort(dist.begin(), dist.end());
      const std::size_t k = g.integer(1, 400);
      EXPECT_EQ(ev.kth_neighbor_distance(t[0], k), dist[k - 1]);
    }
  }
}

TEST(KdeProperty, FastEqualsBruteOnRandomConfigs) {
  oracle::Gen g(66);
  const std::vector<std::string> kernels = {"uniform", "epanechnikov", "triweight"};
  for (int c = 0; c < 25; ++c) {
    const std::size_t d = g.integer(1, 2);
    const std::size_t n = g.integer(1, 20000);
    const double h = g.log_uniform(d == 1 ? 1e-4 : 1e-5, 0.5);
    const std::string& kn = g.pick(kernels);
    const PointSet xs = random_points(g, n, d, g.log_uniform(0.01, 10));
    const PointSet ts = random_points(g, 200, d, 1.0);
    const Kernel k = make_kernel(kn, d);
    const auto fast = kde_fast(xs, k, h, ts);
    const auto brute = kde_brute(xs, k, h, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      ASSERT_NEAR(fast[i], brute[i], 1e-10) << kn << " d=" << d << " n=" << n << " h=" << h;
    }
  }
}

TEST(KdeProperty, NonnegativeAndMassConserved) {
  oracle::Gen g(67);
  const BandwidthWindow w(0.7, 0.3);
  for (int c = 0; c < 12; ++c) {
    const std::size_t d = g.integer(1, 2);
    const std::size_t n = g.integer(256, 4096);
    const double h = g.log_uniform(w.a(double(n)), w.b(double(n)));
    const Kernel k = make_kernel(g.pick(std::vector<std::string>{"uniform", "epanechnikov"}), d);
    const Sample s = draw_sample(DensityModel::gaussian(d), n, StreamId{g.bits() >> 1, 0, 0});
    const PointSet ts = random_points(g, 100, d, 2.0);
    for (double v : kde_brute(s.points, k, h, ts)) EXPECT_GE(v, 0.0);
    Box box = cube(d, 0.0, 0.0);
    for (std::size_t c2 = 0; c2 < d; ++c2) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, s.points[i][c2]);
        hi = std::max(hi, s.points[i][c2]);
      }
      const double pad = std::pow(h, 1.0 / double(d));
      box.lo[c2] = lo - pad;
      box.hi[c2] = hi + pad;
    }
    const std::size_t cells = d == 1 ? 200000 : 1500;
    EXPECT_NEAR(kde_grid_mass(s.points, k, h, box, cells), 1.0, 2e-3) << "d=" << d << " h=" << h;
  }
}

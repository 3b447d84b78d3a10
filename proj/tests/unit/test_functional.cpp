#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "ubkde/bandwidth.hpp"
#include "ubkde/error.hpp"
#include "ubkde/functional.hpp"

using namespace ubkde;

namespace {

Box around(const PointSet& xs, double pad) {
  const std::size_t d = xs.dim();
  Box b = cube(d, 0.0, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    b.lo[c] = INFINITY;
    b.hi[c] = -INFINITY;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      b.lo[c] = std::min(b.lo[c], xs[i][c] - pad);
      b.hi[c] = std::max(b.hi[c], xs[i][c] + pad);
    }
  }
  return b;
}

}  // namespace

TEST(Functional, IdentityIntegratesToOne) {
  oracle::Gen g(81);
  for (int c = 0; c < 12; ++c) {
    const std::size_t d = c < 8 ? 1 : 2;
    const std::size_t n = g.integer(5, d == 1 ? 3000 : 60);
    const double h = g.log_uniform(1e-3, 0.5);
    const Kernel k = make_kernel(g.pick(std::vector<std::string>{"uniform", "epanechnikov", "triweight"}), d);
    const Sample s = draw_sample(DensityModel::gaussian(d), n, StreamId{g.bits() >> 1, 0, 0});
    const double v = plugin_functional(s.points, k, h, LipschitzFunctional::identity(),
                                       around(s.points, std::pow(h, 1.0 / double(d))));
    EXPECT_NEAR(v, 1.0, 1e-5) << k.name() << " d=" << d << " n=" << n << " h=" << h;
  }
}

TEST(Functional, InactiveClampEqualsIdentity) {
  const Sample s = draw_sample(DensityModel::gaussian(), 500, StreamId{82, 0, 0});
  const Kernel k = make_kernel("epanechnikov");
  const double h = 0.05;
  // sup f_{n,h} <= kappa / h
  const Box box = around(s.points, h);
  const double id = plugin_functional(s.points, k, h, LipschitzFunctional::identity(), box);
  const double cl = plugin_functional(s.points, k, h, LipschitzFunctional::clamp(k.kappa() / h), box);
  EXPECT_NEAR(cl, id, 1e-12);
}

TEST(Functional, ClampAgainstTrueDensityIntegral) {
  // int min(phi, 0.2) by Simpson on the pieces cut where phi = 0.2.
  const double x0 = std::sqrt(-2.0 * std::log(0.2 * std::sqrt(2.0 * M_PI)));
  auto f = [](double x) { return std::min(oracle::normal_pdf(x), 0.2); };
  const double truth = oracle::simpson_pieces(f, {-14.0, -x0, x0, 14.0}, 20000);
  const Kernel k = make_kernel("uniform");
  const double h = std::ldexp(1.0, -5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Sample s = draw_sample(DensityModel::gaussian(), 4096, StreamId{seed, 0, 0});
    const double v = plugin_functional(s.points, k, h, LipschitzFunctional::clamp(0.2),
                                       around(s.points, h));
    EXPECT_NEAR(v, truth, 0.02) << "seed " << seed;
  }
}

TEST(Functional, CBetaGaussianQuarter) {
  const double closed = std::pow(2.0 * M_PI, -0.125) * std::sqrt(8.0 * M_PI);
  const double simpson = oracle::simpson(
      [](double x) { return std::pow(oracle::normal_pdf(x), 0.25); }, -60.0, 60.0, 200000);
  EXPECT_NEAR(simpson, closed, 1e-9);
  EXPECT_NEAR(c_beta(DensityModel::gaussian(), 0.25), closed, 1e-8);
  EXPECT_NEAR(closed, 3.984, 5e-4);
}

TEST(Functional, CBetaDivergesForHeavyTails) {
  // int f^0.1 diverges for the Cauchy density.
  EXPECT_THROW(c_beta(DensityModel::cauchy(), 0.1), AccuracyError);
}

TEST(Functional, IdentityBoundIsTrivial) {
  const BandwidthWindow w(0.7, 0.3);
  FunctionalCheckSpec spec;
  spec.window = &w;
  const Sample s = draw_sample(DensityModel::gaussian(), 1024, StreamId{83, 0, 0});
  const FunctionalBound b = functional_bound_check(
      s.points, make_kernel("uniform"), 0.03, LipschitzFunctional::identity(),
      DensityModel::gaussian(), 0.25, spec);
  EXPECT_LE(b.lhs, 2e-5);
  EXPECT_TRUE(b.holds);
  EXPECT_GT(b.rhs, 0.0);
}

TEST(Functional, ParseSpecs) {
  EXPECT_EQ(make_functional("identity")(0.7), 0.7);
  EXPECT_EQ(make_functional("clamp:0.2")(0.7), 0.2);
  EXPECT_EQ(make_functional("min:0.2")(0.1), 0.1);
  EXPECT_NEAR(make_functional("smooth-min:0.2")(0.0), 0.0, 1e-15);
  EXPECT_THROW(make_functional("log"), Error);
  EXPECT_THROW(make_functional("clamp:abc"), Error);
}

TEST(FunctionalProperty, LipschitzConstantsHold) {
  for (const auto& phi : {LipschitzFunctional::identity(), LipschitzFunctional::clamp(0.2),
                          LipschitzFunctional::smooth_min(0.2)}) {
    EXPECT_LE(observed_lipschitz(phi, 2.0 * 0.4, 20000, 91), phi.lipschitz_D * (1 + 1e-12))
        << phi.name;
  }
}

TEST(FunctionalProperty, BoundHoldsOnRandomSeedsAndBandwidths) {
  oracle::Gen g(92);
  const BandwidthWindow w(0.7, 0.3);
  FunctionalCheckSpec spec;
  spec.window = &w;
  const DensityModel m = DensityModel::gaussian();
  const auto phi = LipschitzFunctional::clamp(0.2);
  for (int c = 0; c < 10; ++c) {
    const std::size_t n = 1024;
    const double h = g.log_uniform(w.a(double(n)), w.b(double(n)));
    const Sample s = draw_sample(m, n, StreamId{g.bits() >> 1, 0, 0});
    const FunctionalBound b = functional_bound_check(s.points, make_kernel("uniform"), h, phi, m, 0.25, spec);
    EXPECT_TRUE(b.holds) << "h=" << h << " lhs=" << b.lhs << " rhs=" << b.rhs;
    EXPECT_LE(b.lhs, b.rhs);
  }
}

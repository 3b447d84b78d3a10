#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "ubkde/error.hpp"
#include "ubkde/kernel.hpp"

using namespace ubkde;

namespace {

double at(const Kernel& k, std::vector<double> u) { return k.eval(u); }

const std::vector<std::string> kProfiles = {"uniform", "epanechnikov", "triweight"};

}  // namespace

TEST(Kernel, PointValues) {
  const Kernel uni = make_kernel("uniform");
  EXPECT_EQ(at(uni, {0.0}), 1.0);
  EXPECT_EQ(at(uni, {0.5}), 1.0);  // closed support
  EXPECT_EQ(at(uni, {-0.5}), 1.0);
  EXPECT_EQ(at(uni, {std::nextafter(0.5, 1.0)}), 0.0);
  EXPECT_EQ(at(make_kernel("epanechnikov"), {0.0}), 1.5);
}

TEST(Kernel, Constants) {
  const Kernel uni = make_kernel("uniform");
  EXPECT_EQ(uni.kappa(), 1.0);
  EXPECT_EQ(uni.l2_norm_sq(), 1.0);
  const Kernel epa = make_kernel("epanechnikov");
  EXPECT_EQ(epa.kappa(), 1.5);
  const double l2 = oracle::simpson(
      [](double u) { return std::pow(oracle::profile("epanechnikov", u), 2); }, -0.5, 0.5, 2000);
  EXPECT_NEAR(l2, 1.2, 1e-12);
  EXPECT_NEAR(epa.l2_norm_sq(), l2, 1e-12);
  const Kernel uni2 = make_kernel("uniform", 2);
  EXPECT_EQ(uni2.kappa(), 1.0);
  EXPECT_EQ(uni2.l2_norm_sq(), 1.0);
  EXPECT_EQ(uni2.family(), KernelFamily::product_of_1d);
}

TEST(Kernel, Validation) {
  const KernelValidationReport u = validate_kernel(make_kernel("uniform"), 64);
  EXPECT_TRUE(u.passed);
  EXPECT_EQ(u.integral_error, 0.0);
  const KernelValidationReport e = validate_kernel(make_kernel("epanechnikov"), 128);
  EXPECT_TRUE(e.passed);
  EXPECT_LE(e.integral_error, 1e-10);
  const KernelValidationReport twice = validate_kernel(Kernel(KernelFamily::uniform, 1, 2.0), 64);
  EXPECT_FALSE(twice.passed);
  EXPECT_NEAR(twice.integral_error, 1.0, 1e-15);
}

TEST(Kernel, AllShippedPassValidationInOneAndTwoDimensions) {
  for (const auto& p : kProfiles) {
    for (std::size_t d : {1u, 2u}) {
      const KernelValidationReport r = validate_kernel(make_kernel(p, d), 32);
      EXPECT_TRUE(r.passed) << p << " d=" << d << ": " << r.message;
      EXPECT_LE(r.integral_error, 1e-8);
      EXPECT_EQ(r.support_violations, 0u);
      EXPECT_EQ(r.bound_violations, 0u);
    }
  }
}

TEST(Kernel, SignedProfileRejected) {
  EXPECT_THROW(Kernel({1.0, -2.0}, 1, 1.0, "signed"), Error);
}

TEST(Kernel, DimensionMismatchThrows) {
  const Kernel k = make_kernel("uniform", 2);
  EXPECT_THROW(at(k, {0.0}), Error);
}

TEST(KernelProperty, BoundedAndZeroOffSupport) {
  oracle::Gen g(11);
  for (const auto& p : kProfiles) {
    for (std::size_t d : {1u, 2u, 3u}) {
      const Kernel k = make_kernel(p, d);
      for (int i = 0; i < 2000; ++i) {
        std::vector<double> u(d);
        bool inside = true;
        for (auto& x : u) {
          x = g.uniform(-0.8, 0.8);
          inside = inside && std::abs(x) <= 0.5;
        }
        const double v = at(k, u);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, k.kappa());
        if (!inside) EXPECT_EQ(v, 0.0);
      }
    }
  }
}

TEST(KernelProperty, ProductStructureIsExact) {
  oracle::Gen g(12);
  for (const auto& p : kProfiles) {
    const Kernel k1 = make_kernel(p, 1);
    const Kernel k2 = make_kernel(p, 2);
    for (int i = 0; i < 1000; ++i) {
      const double a = g.uniform(-0.6, 0.6), b = g.uniform(-0.6, 0.6);
      EXPECT_EQ(at(k2, {a, b}), at(k1, {a}) * at(k1, {b}));
    }
  }
}

TEST(KernelProperty, TwoResolutionQuadratureAgrees) {
  for (const auto& p : kProfiles) {
    const Kernel k = make_kernel(p, 1);
    const double coarse = oracle::simpson([&](double u) { return at(k, {u}); }, -0.5, 0.5, 2000);
    const double fine = oracle::simpson([&](double u) { return at(k, {u}); }, -0.5, 0.5, 4000);
    EXPECT_LE(std::abs(coarse - fine), 1e-9);
    EXPECT_NEAR(fine, 1.0, 1e-8);
  }
}

TEST(KernelProperty, SelfConvolutionMatchesOracle) {
  for (const auto& p : kProfiles) {
    const Kernel k = make_kernel(p, 1);
    for (double w : {0.0, 0.1, 0.37, 0.8, -0.55, 1.0}) {
      const double lo = std::max(-0.5, -0.5 - w), hi = std::min(0.5, 0.5 - w);
      const double ref = hi > lo ? oracle::simpson([&](double s) {
        return oracle::profile(p, s) * oracle::profile(p, s + w);
      }, lo, hi, 2000) : 0.0;
      EXPECT_NEAR(k.self_convolution(std::vector<double>{w}), ref, 1e-10) << p << " w=" << w;
    }
  }
}

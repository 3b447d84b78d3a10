// Acceptance gate. One PASS/FAIL line per criterion; tolerances are pinned
// below. `--criterion N` runs a single criterion, no argument runs all.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ubkde/bandwidth.hpp"
#include "ubkde/cli.hpp"
#include "ubkde/deviation.hpp"
#include "ubkde/error.hpp"
#include "ubkde/experiment.hpp"
#include "ubkde/functional.hpp"
#include "ubkde/kde.hpp"
#include "ubkde/kernel.hpp"

using namespace ubkde;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleTol = 1e-10;        // 1
constexpr double kMassTol = 2e-3;           // 2
constexpr double kKernelTol = 1e-8;         // 3
constexpr double kSlopeBounded = 0.05;      // 6, 7, 9
constexpr double kSlopeGrowth = 0.1;        // 9
constexpr double kPathIncrease = 0.10;      // 8
constexpr double kGammaNoise = 0.05;        // 12

struct Outcome {
  bool pass = false;
  std::string detail;
};

int workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string slope_str(const std::optional<double>& s) { return s ? num(*s) : "n/a"; }

std::string rows_str(const std::vector<QuantileRow>& rows) {
  std::string s;
  for (const auto& r : rows) s += " " + std::to_string(r.n) + ":" + num(r.q50);
  return s;
}

PointSet random_points(std::mt19937_64& g, std::size_t n, std::size_t d, double spread) {
  std::normal_distribution<double> nd;
  std::vector<double> c(n * d);
  for (double& x : c) x = spread * nd(g);
  return PointSet(d, std::move(c));
}

Outcome oracle_equivalence() {
  std::mt19937_64 g(1001);
  const std::vector<std::string> kernels = {"uniform", "epanechnikov", "triweight"};
  double worst = 0.0;
  std::size_t largest_n = 0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t d = 1 + c % 2;
    const std::string& kn = kernels[(c / 2) % 3];
    const auto n = static_cast<std::size_t>(std::exp(
        std::uniform_real_distribution<double>(std::log(10.0), std::log(1e5))(g)));
    const double h = std::exp(std::uniform_real_distribution<double>(std::log(1e-4), std::log(0.5))(g));
    const PointSet xs = random_points(g, n, d, 1.0);
    const PointSet ts = random_points(g, 200, d, 1.2);
    const Kernel k = make_kernel(kn, d);
    const auto fast = kde_fast(xs, k, h, ts);
    const auto brute = kde_brute(xs, k, h, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(fast[i] - brute[i]));
    largest_n = std::max(largest_n, n);
  }
  return {worst <= kOracleTol, "max |fast - brute| = " + num(worst) + " over 100 configs, n up to " +
                                   std::to_string(largest_n)};
}

Outcome mass_conservation() {
  std::mt19937_64 g(1002);
  const BandwidthWindow w(0.7, 0.3);
  const std::vector<std::string> kernels = {"uniform", "epanechnikov", "triweight"};
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    const std::size_t d = c % 5 == 4 ? 2 : 1;
    const std::size_t n = std::size_t(1) << std::uniform_int_distribution<int>(8, 13)(g);
    const double h = std::exp(std::uniform_real_distribution<double>(
        std::log(w.a(double(n))), std::log(w.b(double(n))))(g));
    const Kernel k = make_kernel(kernels[c % 3], d);
    const Sample s = draw_sample(DensityModel::gaussian(d), n, StreamId{1002, c, 0});
    const double side = std::pow(h, 1.0 / double(d));
    Box box = cube(d, 0.0, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, s.points[i][a]);
        hi = std::max(hi, s.points[i][a]);
      }
      box.lo[a] = lo - side;
      box.hi[a] = hi + side;
    }
    const std::size_t cells = d == 1 ? 400000 : 2000;
    const double mass = kde_grid_mass(s.points, k, h, box, cells);
    worst = std::max(worst, std::abs(mass - 1.0));
  }
  return {worst <= kMassTol, "max |mass - 1| = " + num(worst) + " over 50 configs (d = 1, 2)"};
}

Outcome kernel_validation() {
  bool ok = true;
  std::string detail;
  for (const std::string p : {"uniform", "epanechnikov", "triweight"}) {
    for (std::size_t d : {1u, 2u, 3u}) {
      const KernelValidationReport r = validate_kernel(make_kernel(p, d), d == 3 ? 24 : 64);
      const bool good = r.passed && r.integral_error <= kKernelTol && r.support_violations == 0 &&
                        r.bound_violations == 0;
      ok = ok && good;
      if (!good) detail += " " + p + "/d" + std::to_string(d) + ": " + r.message;
    }
  }
  return {ok, ok ? "3 profiles x d in {1,2,3}: |int K - 1| <= 1e-8, support and bound clean" : detail};
}

Outcome dyadic_lemma() {
  std::size_t checked = 0, bad = 0;
  std::string first_bad;
  for (const auto& nw : shipped_windows()) {
    for (std::size_t n = std::size_t(1) << 8; n <= (std::size_t(1) << 20); ++n) {
      const DyadicGrid g = dyadic_grid(nw.window, n);
      const double a = nw.window.a(double(n)), b = nw.window.b(double(n));
      const bool ok = g.h_list.front() <= a && b <= g.h_list[g.l_n] &&
                      double(g.l_n) <= 2.0 * std::log(double(n));
      ++checked;
      if (!ok && bad++ == 0) first_bad = nw.name + " n=" + std::to_string(n);
    }
  }
  return {bad == 0, std::to_string(checked) + " (window, n) pairs, " + std::to_string(bad) +
                        " failures" + (bad ? " first " + first_bad : "")};
}

Outcome region_coverage() {
  const DensityModel m = DensityModel::gaussian();
  const WeightFunction w = WeightFunction::inverse_density_power(m, 0.25);
  const BandwidthWindow win(0.7, 0.3);
  std::size_t neither = 0, labelled = 0;
  for (std::size_t n : {512u, 4096u, 16384u}) {
    const Sample s = draw_sample(m, n, StreamId{1005, 0, 0});
    const EvalGrid g = build_eval_grid(m, w, win, n, 1u << 16, &s.points);
    const DyadicGrid dg = dyadic_grid(win, n);
    for (std::size_t j = 0; j < dg.l_n; ++j) {
      try {
        const RegionSplit rs = region_split(m, w, win, n, j, g);
        labelled += rs.a1_only + rs.a2_only + rs.both;
      } catch (const InvariantViolation&) {
        ++neither;
      }
    }
  }
  return {neither == 0, std::to_string(labelled) + " labels, " + std::to_string(neither) +
                            " (n, j) pairs with an uncovered point"};
}

ExperimentConfig gaussian_default() {
  ExperimentConfig c;
  c.workers = workers();
  c.override_tail_check = true;
  return c;
}

Outcome boundedness() {
  const ExperimentResult r = run_boundedness(gaussian_default());
  const bool ok = r.slope && *r.slope <= kSlopeBounded;
  return {ok, "slope " + slope_str(r.slope) + ", medians" + rows_str(r.quantiles) +
                  "; tail audit " + to_string(r.tail_report->verdict)};
}

Outcome rates() {
  bool ok = true;
  std::string detail;
  for (const std::string sel : {"geometric-midpoint", "knn-local"}) {
    ExperimentConfig c = gaussian_default();
    c.selector = sel;
    const ExperimentResult r = run_rate_comparison(c);
    bool in_window = true;
    for (const auto& x : r.raw) in_window = in_window && x.h_in_window;
    const bool good = r.slope && *r.slope <= kSlopeBounded && r.slope_fixed &&
                      *r.slope_fixed <= kSlopeBounded && in_window;
    ok = ok && good;
    detail += sel + ": slope " + slope_str(r.slope) + " (a_n: " + slope_str(r.slope_fixed) +
              "), medians" + rows_str(r.quantiles) + (in_window ? "" : ", h left window") + "; ";
  }
  return {ok, detail};
}

Outcome path() {
  ExperimentConfig c = gaussian_default();
  c.paths = 5;
  const ExperimentResult r = run_path(c);
  bool ok = r.paths.size() == 5;
  std::string detail = "relative increase over the last half:";
  for (const auto& p : r.paths) {
    ok = ok && p.relative_increase <= kPathIncrease;
    detail += " " + num(p.relative_increase);
  }
  return {ok, detail + "; tail audit " + to_string(r.tail_report->verdict)};
}

Outcome necessity_separation() {
  ExperimentConfig heavy = gaussian_default();
  heavy.model = "cauchy";
  heavy.beta = 0.1;
  heavy.replications = 100;
  const ExperimentResult h = run_necessity_demo(heavy);
  ExperimentConfig light = gaussian_default();
  light.replications = 100;
  const ExperimentResult l = run_necessity_demo(light);
  const bool ok = h.slope && l.slope && *h.slope >= kSlopeGrowth && *l.slope <= kSlopeBounded;
  return {ok, "cauchy beta=0.1 slope " + slope_str(h.slope) + " (need >= 0.1), medians" +
                  rows_str(h.quantiles) + "; gaussian slope " + slope_str(l.slope) +
                  " (need <= 0.05)"};
}

Outcome functional_bound() {
  std::mt19937_64 g(1010);
  const DensityModel m = DensityModel::gaussian();
  const BandwidthWindow w(0.7, 0.3);
  FunctionalCheckSpec spec;
  spec.window = &w;
  const LipschitzFunctional phi = LipschitzFunctional::clamp(0.2);
  const Kernel k = make_kernel("uniform");
  std::size_t held = 0;
  double min_gap = INFINITY;
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = std::size_t(1) << std::uniform_int_distribution<int>(9, 12)(g);
    const double h = std::exp(std::uniform_real_distribution<double>(
        std::log(w.a(double(n))), std::log(w.b(double(n))))(g));
    const Sample s = draw_sample(m, n, StreamId{g() >> 1, 0, 0});
    const FunctionalBound b = functional_bound_check(s.points, k, h, phi, m, 0.25, spec);
    if (b.holds) ++held;
    min_gap = std::min(min_gap, b.rhs - b.lhs);
  }
  return {held == 200, std::to_string(held) + "/200 hold, smallest rhs - lhs = " + num(min_gap)};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"ubkde"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(int(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "ubkde_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> common = {
      "--set", "n_list=512,1024,2048", "--set", "replications=50", "--set", "grid_cap=1000",
      "--set", "subgrid_k=4", "--set", "paths=3", "--set", "override_tail_check=true"};
  bool ok = true;
  std::string detail;
  for (const std::string cmd : {"boundedness", "rates", "path", "necessity", "deviation"}) {
    std::string manifests[2];
    int codes[2];
    const int worker_counts[2] = {1, 4};
    for (int i = 0; i < 2; ++i) {
      const fs::path dir = root / (cmd + "_" + std::to_string(worker_counts[i]));
      std::vector<std::string> args = {cmd, "--out", dir.string(), "--workers",
                                       std::to_string(worker_counts[i])};
      args.insert(args.end(), common.begin(), common.end());
      codes[i] = cli(args);
      manifests[i] = slurp(dir / "manifest.json");
    }
    const bool same = !manifests[0].empty() && manifests[0] == manifests[1] && codes[0] <= 1 &&
                      codes[0] == codes[1];
    ok = ok && same;
    detail += cmd + (same ? " identical" : " DIFFERENT") + "; ";
  }
  fs::remove_all(root);
  return {ok, detail + "workers 1 vs 4"};
}

Outcome centering_gamma() {
  const DensityModel m = DensityModel::gaussian();
  const WeightFunction w = WeightFunction::inverse_density_power(m, 0.25);
  const BandwidthWindow win(0.7, 0.3);
  const Kernel k = make_kernel("uniform");
  std::vector<double> gammas;
  for (std::size_t n : {512u, 2048u, 8192u}) {
    const EvalGrid g = build_eval_grid(m, w, win, n, 4096);
    gammas.push_back(centering_bound(m, w, k, win, n, g, 8).gamma);
  }
  bool ok = true;
  for (std::size_t i = 1; i < gammas.size(); ++i) {
    ok = ok && gammas[i] <= gammas[i - 1] * (1.0 + kGammaNoise);
  }
  return {ok, "gamma at n = 2^9, 2^11, 2^13: " + num(gammas[0]) + ", " + num(gammas[1]) + ", " +
                  num(gammas[2])};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run one criterion (1-12)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "oracle equivalence", oracle_equivalence},
      {2, "mass conservation", mass_conservation},
      {3, "kernel validation", kernel_validation},
      {4, "dyadic grid coverage and length", dyadic_lemma},
      {5, "region split coverage", region_coverage},
      {6, "boundedness of Delta_n", boundedness},
      {7, "selector rate ratios", rates},
      {8, "nested-path stabilization", path},
      {9, "necessity separation", necessity_separation},
      {10, "functional bound", functional_bound},
      {11, "determinism across worker counts", determinism},
      {12, "centering margin decreases", centering_gamma},
  };
  bool all_pass = true;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << c.id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << c.name
              << "  [" << v.detail << "] (" << num(secs) << " s)" << std::endl;
    all_pass = all_pass && v.pass;
  }
  return all_pass ? 0 : 1;
}

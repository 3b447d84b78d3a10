#include "ubkde/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iomanip>

#include "ubkde/error.hpp"
#include "ubkde/parallel.hpp"

namespace ubkde {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& hash, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= p[i];
    hash *= kFnvPrime;
  }
}

std::uint64_t compute_grid_id(const EvalGrid& g) {
  std::uint64_t hash = kFnvOffset;
  const std::uint64_t n = g.n;
  const std::uint64_t dim = g.points.dim();
  fnv_bytes(hash, &n, sizeof n);
  fnv_bytes(hash, &dim, sizeof dim);
  fnv_bytes(hash, g.points.coords().data(), g.points.coords().size() * sizeof(double));
  fnv_bytes(hash, g.in_region.data(), g.in_region.size());
  return hash;
}

double side_of(double h, std::size_t d) {
  return d == 1 ? h : std::pow(h, 1.0 / static_cast<double>(d));
}

// E f at the in-region points from `first` on; zero elsewhere.
void centering_values(const DensityModel& model, const Kernel& kernel, double h,
                      const EvalGrid& grid, std::size_t first, std::size_t q,
                      std::vector<double>& ef) {
  ef.assign(grid.size(), 0.0);
  const std::size_t count = grid.size() - first;
  parallel_for(count, [&](std::size_t k) {
    const std::size_t i = first + k;
    if (grid.in_region[i]) ef[i] = expected_kde(model, kernel, h, grid.points[i], q);
  });
}

}  // namespace

std::string grid_id_hex(std::uint64_t id) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

EvalGrid build_eval_grid(const DensityModel& model, const WeightFunction& weight,
                         const BandwidthWindow& window, std::size_t n,
                         std::size_t max_points, const PointSet* sample, double refine) {
  if (max_points < 1000) throw Error(ErrorKind::domain, "grid cap must be at least 1000 points");
  if (!(refine > 0.0)) throw Error(ErrorKind::domain, "refine factor must be positive");
  if (n < window.n_min()) {
    throw WindowNotValid("n = " + std::to_string(n) + " is below the window's n_min = " +
                             std::to_string(window.n_min()),
                         window.n_min());
  }
  const std::size_t d = model.dim();
  const double nt = static_cast<double>(n);
  const double an = window.a(nt);
  const double bn = window.b(nt);
  const Box& box = model.bounding_box();

  EvalGrid g;
  g.n = n;
  g.region_r_used = window.region_r();
  g.region_threshold = std::pow(bn, -static_cast<double>(window.region_r()));

  const double target = 0.5 * side_of(an, d) * refine;
  std::vector<std::size_t> m(d);
  double total = 1.0;
  for (std::size_t c = 0; c < d; ++c) {
    m[c] = static_cast<std::size_t>(std::ceil((box.hi[c] - box.lo[c]) / target)) + 1;
    total *= static_cast<double>(m[c]);
  }
  if (total > static_cast<double>(max_points)) {
    g.capped = true;
    std::size_t per_axis = d == 1 ? max_points
                                  : static_cast<std::size_t>(std::floor(
                                        std::pow(static_cast<double>(max_points),
                                                 1.0 / static_cast<double>(d)) + 1e-9));
    while (d > 1 && std::pow(static_cast<double>(per_axis), static_cast<double>(d)) >
                        static_cast<double>(max_points)) {
      --per_axis;
    }
    std::fill(m.begin(), m.end(), std::max<std::size_t>(per_axis, 2));
  }
  for (std::size_t c = 0; c < d; ++c) {
    g.spacing = std::max(g.spacing, (box.hi[c] - box.lo[c]) / static_cast<double>(m[c] - 1));
  }

  g.points = PointSet(d);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  while (true) {
    for (std::size_t c = 0; c < d; ++c) {
      p[c] = box.lo[c] + (box.hi[c] - box.lo[c]) * static_cast<double>(idx[c]) /
                             static_cast<double>(m[c] - 1);
    }
    if (model.in_positivity_set(p)) {
      const double psi = weight(p);
      if (psi <= g.region_threshold) {
        g.points.push_back(p);
        g.psi.push_back(psi);
        g.in_region.push_back(1);
      }
    }
    std::size_t c = 0;
    while (c < d && ++idx[c] == m[c]) idx[c++] = 0;
    if (c == d) break;
  }
  if (g.points.empty()) {
    throw Error(ErrorKind::degenerate_region, "A_n has no grid points on the bounding region");
  }
  g.regular_count = g.points.size();
  g.grid_id = compute_grid_id(g);
  if (sample) return attach_sample(g, model, weight, *sample);
  return g;
}

EvalGrid attach_sample(const EvalGrid& regular, const DensityModel& model,
                       const WeightFunction& weight, const PointSet& sample) {
  if (sample.dim() != regular.points.dim()) {
    throw Error(ErrorKind::dimension, "sample dimension does not match the grid");
  }
  EvalGrid g;
  g.points = regular.points.prefix(regular.regular_count);
  g.psi.assign(regular.psi.begin(), regular.psi.begin() + static_cast<std::ptrdiff_t>(regular.regular_count));
  g.in_region.assign(regular.in_region.begin(),
                     regular.in_region.begin() + static_cast<std::ptrdiff_t>(regular.regular_count));
  g.regular_count = regular.regular_count;
  g.spacing = regular.spacing;
  g.capped = regular.capped;
  g.region_r_used = regular.region_r_used;
  g.region_threshold = regular.region_threshold;
  g.n = regular.n;
  g.includes_data_points = true;
  g.points.reserve(g.regular_count + sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Point x = sample[i];
    g.points.push_back(x);
    if (model.in_positivity_set(x)) {
      const double psi = weight(x);
      g.psi.push_back(psi);
      g.in_region.push_back(psi <= g.region_threshold ? 1 : 0);
    } else {
      g.psi.push_back(0.0);
      g.in_region.push_back(0);
    }
  }
  g.grid_id = compute_grid_id(g);
  return g;
}

CenteringTable build_centering_table(const DensityModel& model, const Kernel& kernel,
                                     const EvalGrid& grid, const std::vector<double>& hs,
                                     std::size_t quad_points_per_axis) {
  CenteringTable t;
  t.h = hs;
  t.values.resize(hs.size());
  const std::size_t m = grid.regular_count;
  for (std::size_t k = 0; k < hs.size(); ++k) t.values[k].assign(m, 0.0);
  parallel_for(hs.size() * m, [&](std::size_t flat) {
    const std::size_t k = flat / m;
    const std::size_t i = flat % m;
    if (grid.in_region[i]) {
      t.values[k][i] = expected_kde(model, kernel, hs[k], grid.points[i], quad_points_per_axis);
    }
  });
  t.grid_id = grid.grid_id;
  return t;
}

DeviationRecord deviation_from_values(std::size_t n, double h, const EvalGrid& grid,
                                      const std::vector<double>& fhat,
                                      const std::vector<double>& ef) {
  DeviationRecord r;
  r.n = n;
  r.h = h;
  r.grid_id = grid.grid_id;
  std::size_t best_i = grid.size();
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_region[i]) continue;
    const double v = grid.psi[i] * std::abs(fhat[i] - ef[i]);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  if (best_i == grid.size()) {
    throw Error(ErrorKind::degenerate_region, "no evaluation point lies in A_n");
  }
  r.sup_weighted_dev = best;
  r.rescaled = rescale_factor(n, h) * best;
  const Point a = grid.points[best_i];
  r.argsup.assign(a.begin(), a.end());
  return r;
}

DeviationRecord weighted_deviation(const PointSet& sample, const DensityModel& model,
                                   const WeightFunction& weight, const Kernel& kernel,
                                   double h, const EvalGrid& grid,
                                   std::size_t quad_points_per_axis) {
  (void)weight;  // psi is cached on the grid
  if (grid.n != sample.size()) {
    throw Error(ErrorKind::config, "evaluation grid was built for a different n");
  }
  const KdeEvaluator eval(sample, kernel);
  const std::vector<double> fhat = eval(h, grid.points);
  std::vector<double> ef;
  centering_values(model, kernel, h, grid, 0, quad_points_per_axis, ef);
  return deviation_from_values(sample.size(), h, grid, fhat, ef);
}

UniformDeviation uniform_deviation_over(const PointSet& sample, const DensityModel& model,
                                        const WeightFunction& weight, const Kernel& kernel,
                                        const std::vector<double>& hs, const EvalGrid& grid,
                                        const CenteringTable* table,
                                        std::size_t quad_points_per_axis) {
  (void)weight;
  if (hs.empty()) throw Error(ErrorKind::domain, "no bandwidths to evaluate");
  if (grid.n != sample.size()) {
    throw Error(ErrorKind::config, "evaluation grid was built for a different n");
  }
  if (table && (table->h != hs)) {
    throw Error(ErrorKind::config, "centering table holds different bandwidths");
  }
  const KdeEvaluator eval(sample, kernel);
  UniformDeviation out;
  std::vector<double> ef;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const double h = hs[k];
    const std::vector<double> fhat = eval(h, grid.points);
    if (table) {
      if (table->values[k].size() != grid.regular_count) {
        throw Error(ErrorKind::config, "centering table does not match the grid");
      }
      centering_values(model, kernel, h, grid, grid.regular_count, quad_points_per_axis, ef);
      std::copy(table->values[k].begin(), table->values[k].end(), ef.begin());
    } else {
      centering_values(model, kernel, h, grid, 0, quad_points_per_axis, ef);
    }
    out.profile.push_back(deviation_from_values(sample.size(), h, grid, fhat, ef));
    if (out.profile.back().rescaled > out.delta_n || k == 0) {
      out.delta_n = out.profile.back().rescaled;
      out.argmax = k;
    }
  }
  return out;
}

UniformDeviation uniform_deviation(const PointSet& sample, const DensityModel& model,
                                   const WeightFunction& weight, const Kernel& kernel,
                                   const BandwidthWindow& window, int subgrid_k,
                                   const EvalGrid& grid, const CenteringTable* table,
                                   std::size_t quad_points_per_axis) {
  const std::vector<double> hs = h_subgrid(window, sample.size(), subgrid_k);
  return uniform_deviation_over(sample, model, weight, kernel, hs, grid, table,
                                quad_points_per_axis);
}

RefinementGap refinement_gap(const PointSet& sample, const DensityModel& model,
                             const WeightFunction& weight, const Kernel& kernel,
                             const BandwidthWindow& window, double h,
                             std::size_t max_points) {
  const std::size_t n = sample.size();
  const std::size_t d = sample.dim();
  const EvalGrid coarse = build_eval_grid(model, weight, window, n, max_points, &sample, 1.0);
  const EvalGrid fine = build_eval_grid(model, weight, window, n,
                                        max_points << d, &sample, 0.5);
  RefinementGap g;
  g.coarse = weighted_deviation(sample, model, weight, kernel, h, coarse).rescaled;
  g.fine = weighted_deviation(sample, model, weight, kernel, h, fine).rescaled;
  g.gap = g.fine - g.coarse;
  return g;
}

const char* to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::A1: return "A1";
    case RegionLabel::A2: return "A2";
    case RegionLabel::both: return "both";
    case RegionLabel::neither: return "neither";
    case RegionLabel::outside_region: return "outside";
  }
  return "unknown";
}

RegionSplit region_split(const DensityModel& model, const WeightFunction& weight,
                         const BandwidthWindow& window, std::size_t n, std::size_t j,
                         const EvalGrid& grid) {
  const DyadicGrid dg = dyadic_grid(window, n);
  if (dg.l_n == 0 || j > dg.l_n - 1) {
    throw Error(ErrorKind::domain, "region split index must satisfy 0 <= j <= l_n - 1");
  }
  RegionSplit rs;
  rs.h = dg.h_list[j + 1];
  if (!(rs.h < 1.0)) throw Error(ErrorKind::domain, "h_{n,j+1} must be below 1");
  const double nt = static_cast<double>(n);
  const double beta = weight.beta();
  const double lg = std::abs(std::log(rs.h));
  rs.epsilon = 1.0 / std::log(nt);
  const double thr1 = std::pow(rs.epsilon, 1.0 - beta) * std::sqrt(lg / (nt * rs.h));
  const double thr2 = std::pow(rs.epsilon, -beta) *
                      std::pow(nt * rs.h / lg, beta / (2.0 * (1.0 - beta)));
  // Equality cases are decided up to rounding in the last bits.
  const double slack = 1.0 + 1e-12;
  rs.labels.assign(grid.size(), RegionLabel::outside_region);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_region[i]) continue;
    const double psi = grid.psi[i];
    const double f = model.pdf(grid.points[i]);
    const bool in1 = f * psi <= thr1 * slack;
    const bool in2 = psi <= thr2 * slack;
    if (in1 && in2) {
      rs.labels[i] = RegionLabel::both;
      ++rs.both;
    } else if (in1) {
      rs.labels[i] = RegionLabel::A1;
      ++rs.a1_only;
    } else if (in2) {
      rs.labels[i] = RegionLabel::A2;
      ++rs.a2_only;
    } else {
      const Point t = grid.points[i];
      throw InvariantViolation("grid point lies in neither A1 nor A2",
                               std::vector<double>(t.begin(), t.end()));
    }
  }
  return rs;
}

CenteringBound centering_bound(const DensityModel& model, const WeightFunction& weight,
                               const Kernel& kernel, const BandwidthWindow& window,
                               std::size_t n, const EvalGrid& grid, int subgrid_k,
                               std::size_t quad_points_per_axis) {
  (void)weight;
  const std::vector<double> hs = h_subgrid(window, n, subgrid_k);
  const std::size_t d = model.dim();
  CenteringBound cb;
  cb.n = n;
  cb.tau = window.region_r();
  const double kappa = kernel.kappa();
  const std::size_t m = grid.regular_count;

  struct Local {
    double split = 0.0;
    double resid = 0.0;
    double h_split = 0.0;
    double h_resid = 0.0;
    std::size_t audited = 0;
  };
  std::vector<Local> local(m);
  parallel_for(m, [&](std::size_t i) {
    if (!grid.in_region[i]) return;
    const Point t = grid.points[i];
    const double f = model.pdf(t);
    const double psi = grid.psi[i];
    Local& L = local[i];
    for (double h : hs) {
      const double sc = rescale_factor(n, h);
      const double ef = expected_kde(model, kernel, h, t, quad_points_per_axis);
      ++L.audited;
      if (f <= std::pow(h, cb.tau)) {
        const double v = kappa * sc * psi * model.box_sup(t, 0.5 * side_of(h, d));
        if (v > L.split) {
          L.split = v;
          L.h_split = h;
        }
      }
      const double r = sc * psi * ef - 2.0 * kappa * sc * f * psi;
      if (r > L.resid) {
        L.resid = r;
        L.h_resid = h;
      }
    }
  });
  std::size_t wi = m;
  double wh = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    cb.audited += local[i].audited;
    if (local[i].split > cb.split_term) {
      cb.split_term = local[i].split;
      if (cb.split_term >= cb.residual) {
        wi = i;
        wh = local[i].h_split;
      }
    }
    if (local[i].resid > cb.residual) {
      cb.residual = local[i].resid;
      if (cb.residual > cb.split_term) {
        wi = i;
        wh = local[i].h_resid;
      }
    }
  }
  cb.gamma = std::max(cb.split_term, cb.residual);
  if (wi < m) {
    const Point t = grid.points[wi];
    cb.witness_t.assign(t.begin(), t.end());
    cb.witness_h = wh;
  }
  return cb;
}

void write_deviation_csv_header(std::ostream& out) {
  out << "n,h,sup_weighted_dev,rescaled,argsup_coords,grid_id\n";
}

void write_deviation_csv_row(std::ostream& out, const DeviationRecord& r) {
  out << r.n << ',' << std::setprecision(17) << r.h << ',' << r.sup_weighted_dev << ','
      << r.rescaled << ',';
  for (std::size_t c = 0; c < r.argsup.size(); ++c) {
    if (c) out << ';';
    out << r.argsup[c];
  }
  out << ',' << grid_id_hex(r.grid_id) << '\n';
}

}  // namespace ubkde

#include "ubkde/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ubkde/error.hpp"

namespace ubkde {

const char* to_string(ConditionId id) {
  switch (id) {
    case ConditionId::D_i: return "D.i";
    case ConditionId::D_ii: return "D.ii";
    case ConditionId::W_ii: return "W.ii";
    case ConditionId::W_iii: return "W.iii";
    case ConditionId::WD_i: return "WD.i";
    case ConditionId::WD_ii: return "WD.ii";
    case ConditionId::tail_1_1: return "tail-1.1";
    case ConditionId::tail_1_2: return "tail-1.2";
  }
  return "unknown";
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::no_violation_found: return "no-violation-found";
    case Verdict::violated: return "violated";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "unknown";
}

nlohmann::json to_json(const ConditionReport& report) {
  nlohmann::json j;
  j["condition_id"] = to_string(report.condition_id);
  j["verdict"] = to_string(report.verdict);
  if (report.witness) {
    nlohmann::json w;
    if (!report.witness->x.empty()) w["x"] = report.witness->x;
    if (!report.witness->y.empty()) w["y"] = report.witness->y;
    if (report.witness->h) w["h"] = *report.witness->h;
    if (report.witness->t) w["t"] = *report.witness->t;
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["audited_grid_spec"] = report.audited_grid_spec;
  j["numeric_margin"] = std::isfinite(report.numeric_margin)
                            ? nlohmann::json(report.numeric_margin)
                            : nlohmann::json("inf");
  if (report.parameter) j["parameter"] = *report.parameter;
  if (!report.series.empty()) j["series"] = report.series;
  return j;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Best {
  double value = -1.0;
  std::vector<double> x;
  std::vector<double> y;
  double h = 0.0;

  void offer(double v, Point px, const std::vector<double>& py, double ph) {
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    if (v > value) {
      value = v;
      x.assign(px.begin(), px.end());
      y = py;
      h = ph;
    }
  }
  bool empty() const { return value < 0.0; }
};

Witness witness_of(const Best& b) { return {b.x, b.y, b.h, std::nullopt}; }

// Sup series along decreasing h; entries with an empty audit set are skipped.
// The series must not increase (up to rounding) and must end well below
// where it starts.
ConditionReport series_report(ConditionId id, double r, const std::vector<Best>& s,
                              const std::string& spec) {
  ConditionReport rep;
  rep.condition_id = id;
  rep.parameter = r;
  rep.audited_grid_spec = spec;
  std::size_t first = s.size();
  for (std::size_t k = 0; k < s.size(); ++k) {
    rep.series.push_back(s[k].empty() ? 0.0 : s[k].value);
    if (first == s.size() && !s[k].empty()) first = k;
  }
  if (first == s.size()) {
    rep.verdict = Verdict::no_violation_found;
    rep.numeric_margin = 0.0;
    rep.audited_grid_spec += "; audit set empty for every h";
    return rep;
  }
  const Best& last = s.back();
  rep.numeric_margin = last.value;
  bool ok = true;
  for (std::size_t k = first + 1; k < s.size(); ++k) {
    if (!(s[k].value <= s[k - 1].value * (1.0 + 1e-9) + 1e-15)) ok = false;
  }
  const double start = s[first].value;
  if (!(last.value <= 1e-12 || last.value <= 0.5 * start)) ok = false;
  if (!std::isfinite(last.value)) ok = false;
  rep.verdict = ok ? Verdict::no_violation_found : Verdict::violated;
  if (!ok) rep.witness = witness_of(last);
  return rep;
}

}  // namespace

std::vector<ConditionReport> check_regularity(const DensityModel& model,
                                              const WeightFunction& weight,
                                              const std::vector<double>& delta_list,
                                              const std::vector<double>& h_sweep,
                                              const AuditGridSpec& grid) {
  if (delta_list.empty()) throw Error(ErrorKind::domain, "delta list is empty");
  for (double d : delta_list) {
    if (!(d > 0.0 && d < 1.0)) throw Error(ErrorKind::domain, "delta must lie in (0, 1)");
  }
  if (h_sweep.empty()) throw Error(ErrorKind::domain, "h sweep is empty");
  for (std::size_t k = 0; k < h_sweep.size(); ++k) {
    if (!(h_sweep[k] > 0.0) || (k > 0 && !(h_sweep[k] < h_sweep[k - 1]))) {
      throw Error(ErrorKind::domain, "h sweep must be positive and strictly decreasing");
    }
  }
  if (grid.points_per_axis < 2) throw Error(ErrorKind::domain, "audit grid too small");
  if (grid.r_list.empty()) throw Error(ErrorKind::domain, "r list is empty");

  const std::size_t d = model.dim();
  const Box box = model.probability_box(grid.probability_mass);
  const double beta = weight.beta();

  // x grid over the probability box, plus breakpoints on the line, within B_f.
  PointSet xs(d);
  {
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> p(d);
    const std::size_t m = grid.points_per_axis;
    while (true) {
      for (std::size_t i = 0; i < d; ++i) {
        p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(idx[i]) /
                               static_cast<double>(m - 1);
      }
      xs.push_back(p);
      std::size_t k = 0;
      while (k < d && ++idx[k] == m) idx[k++] = 0;
      if (k == d) break;
    }
    if (d == 1) {
      for (double b : model.breakpoints(0)) {
        if (b >= box.lo[0] && b <= box.hi[0]) xs.push_back(std::span<const double>(&b, 1));
      }
    }
  }
  std::vector<std::size_t> keep;
  std::vector<double> fx;
  std::vector<double> px;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!model.in_positivity_set(xs[i])) continue;
    const double f = model.pdf(xs[i]);
    if (!(f > 0.0)) {
      throw Error(ErrorKind::model_inconsistency,
                  "pdf vanishes at a point of the declared positivity set, x[0] = " +
                      fmt(xs[i][0]));
    }
    keep.push_back(i);
    fx.push_back(f);
    px.push_back(weight(xs[i]));
  }

  // Offsets {-1, 0, 1}^d \ {0}.
  std::vector<std::vector<double>> unit;
  {
    std::vector<int> idx(d, -1);
    while (true) {
      bool zero = true;
      for (int v : idx) zero = zero && v == 0;
      if (!zero) unit.emplace_back(idx.begin(), idx.end());
      std::size_t k = 0;
      while (k < d && ++idx[k] == 2) idx[k++] = -1;
      if (k == d) break;
    }
  }

  const std::size_t nr = grid.r_list.size();
  const std::size_t nh = h_sweep.size();
  const std::size_t nd = delta_list.size();
  std::vector<Best> di(nd), wii(nd);
  std::vector<std::vector<Best>> dii(nr, std::vector<Best>(nh));
  std::vector<std::vector<Best>> wiii(nr, std::vector<Best>(nh));
  std::vector<std::vector<Best>> wdii(nr, std::vector<Best>(nh));
  Best wdi;

  std::vector<double> y(d);
  std::vector<double> z(d);
  for (std::size_t k = 0; k < nh; ++k) {
    const double h = h_sweep[k];
    std::vector<double> f_level(nr), psi_level(nr);
    for (std::size_t q = 0; q < nr; ++q) {
      f_level[q] = std::pow(h, grid.r_list[q]);
      psi_level[q] = std::pow(h, -grid.r_list[q]);
    }
    for (std::size_t ii = 0; ii < keep.size(); ++ii) {
      const Point x = xs[keep[ii]];
      const double f0 = fx[ii];
      const double p0 = px[ii];
      if (k == 0) wdi.offer(std::pow(f0, beta) * p0, x, {}, 0.0);
      for (const auto& u : unit) {
        for (double radius : {0.5 * h, h}) {
          for (std::size_t c = 0; c < d; ++c) {
            y[c] = u[c] * radius;
            z[c] = x[c] + y[c];
          }
          if (!model.in_positivity_set(z)) continue;
          const double f1 = model.pdf(z);
          if (!(f1 > 0.0)) {
            throw Error(ErrorKind::model_inconsistency,
                        "pdf vanishes at a point of the declared positivity set, z[0] = " +
                            fmt(z[0]));
          }
          const double p1 = weight(z);
          const double rf = std::abs(f1 / f0 - 1.0);
          const double rp = std::abs(p1 / p0 - 1.0);
          if (k == 0) {
            for (std::size_t q = 0; q < nd; ++q) {
              const double dl = delta_list[q];
              di[q].offer(std::max(std::pow(f0, 1.0 + dl) / f1, f1 / std::pow(f0, 1.0 - dl)),
                          x, y, h);
              wii[q].offer(std::max(std::pow(p0, 1.0 - dl) / p1, p1 / std::pow(p0, 1.0 + dl)),
                           x, y, h);
            }
          }
          for (std::size_t q = 0; q < nr; ++q) {
            if (f0 >= f_level[q]) dii[q][k].offer(rf, x, y, h);
            if (p0 <= psi_level[q]) {
              wiii[q][k].offer(rp, x, y, h);
              wdii[q][k].offer(rf, x, y, h);
            }
          }
        }
      }
    }
  }

  std::string spec = "x: " + std::to_string(grid.points_per_axis) + "^" + std::to_string(d) +
                     " uniform over [" + fmt(box.lo[0]) + ", " + fmt(box.hi[0]) + "]^" +
                     std::to_string(d) + " (mass " + fmt(grid.probability_mass) +
                     ") within B_f, " + std::to_string(keep.size()) +
                     " points; y: sup-norm stencil {h/2, h}; h: " + std::to_string(nh) +
                     " values " + fmt(h_sweep.front()) + " .. " + fmt(h_sweep.back());

  std::vector<ConditionReport> out;
  auto constant_report = [&](ConditionId id, double delta, const Best& b) {
    ConditionReport rep;
    rep.condition_id = id;
    rep.parameter = delta;
    rep.audited_grid_spec = spec + "; h0 = " + fmt(h_sweep.front());
    rep.numeric_margin = b.empty() ? 1.0 : std::max(1.0, b.value);
    const bool ok = std::isfinite(rep.numeric_margin);
    rep.verdict = ok ? Verdict::no_violation_found : Verdict::violated;
    if (!ok) rep.witness = witness_of(b);
    return rep;
  };
  for (std::size_t q = 0; q < nd; ++q) {
    out.push_back(constant_report(ConditionId::D_i, delta_list[q], di[q]));
  }
  for (std::size_t q = 0; q < nr; ++q) {
    out.push_back(series_report(ConditionId::D_ii, grid.r_list[q], dii[q], spec));
  }
  for (std::size_t q = 0; q < nd; ++q) {
    out.push_back(constant_report(ConditionId::W_ii, delta_list[q], wii[q]));
  }
  for (std::size_t q = 0; q < nr; ++q) {
    out.push_back(series_report(ConditionId::W_iii, grid.r_list[q], wiii[q], spec));
  }
  {
    ConditionReport rep;
    rep.condition_id = ConditionId::WD_i;
    rep.audited_grid_spec = spec;
    rep.numeric_margin = wdi.empty() ? 0.0 : wdi.value;
    const bool ok = std::isfinite(rep.numeric_margin);
    rep.verdict = ok ? Verdict::no_violation_found : Verdict::violated;
    if (!ok) rep.witness = witness_of(wdi);
    out.push_back(rep);
  }
  for (std::size_t q = 0; q < nr; ++q) {
    out.push_back(series_report(ConditionId::WD_ii, grid.r_list[q], wdii[q], spec));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> geometric_t_grid(double t_max, double ratio) {
  if (!(t_max >= 1.0) || !(ratio > 1.0)) {
    throw Error(ErrorKind::domain, "t grid needs t_max >= 1 and ratio > 1");
  }
  std::vector<double> g;
  for (double t = 1.0; t <= t_max * (1.0 + 1e-12); t *= ratio) g.push_back(t);
  return g;
}

TailEstimate wilson_interval(std::size_t k, std::size_t n, double z) {
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // Rounding can push an endpoint past p when k is 0 or n.
  const double lo = k == 0 ? 0.0 : std::min(p, std::max(0.0, center - half));
  const double hi = k == n ? 1.0 : std::max(p, std::min(1.0, center + half));
  return {p, lo, hi};
}

ConditionReport check_tail_condition(const DensityModel& model,
                                     const WeightFunction& weight,
                                     const BandwidthWindow& window,
                                     const std::vector<double>& t_grid,
                                     TailMode mode, std::size_t mc_samples,
                                     std::uint64_t mc_seed) {
  if (t_grid.size() < 2) throw Error(ErrorKind::domain, "t grid needs at least two points");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 1.0)) throw Error(ErrorKind::domain, "t grid values must be >= 1");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1] && t_grid[i] <= 2.0 * t_grid[i - 1] * (1.0 + 1e-12))) {
      throw Error(ErrorKind::domain, "t grid must be increasing with ratio <= 2");
    }
  }
  const double t_max = t_grid.back();
  std::size_t top = 0;
  while (t_grid[top] < t_max / 10.0 * (1.0 - 1e-12)) ++top;
  if (top + 1 >= t_grid.size()) {
    throw Error(ErrorKind::domain, "t grid must span at least a decade with two points in it");
  }

  const bool analytic = weight.tail_probability(window.lambda(t_grid[0])).has_value();
  std::vector<double> psi_sorted;
  if (!analytic) {
    if (mc_samples < 100000) {
      throw Error(ErrorKind::domain,
                  "no analytic tail for this weight; Monte Carlo needs at least 1e5 samples");
    }
    const Sample s = draw_sample(model, mc_samples, StreamId{mc_seed, 0, 0});
    psi_sorted.resize(mc_samples);
    for (std::size_t i = 0; i < mc_samples; ++i) psi_sorted[i] = weight(s.points[i]);
    std::sort(psi_sorted.begin(), psi_sorted.end());
  }

  std::vector<TailEstimate> est(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double lam = window.lambda(t_grid[i]);
    if (analytic) {
      const double p = *weight.tail_probability(lam);
      est[i] = {p, p, p};
    } else {
      const auto above = static_cast<std::size_t>(
          psi_sorted.end() - std::upper_bound(psi_sorted.begin(), psi_sorted.end(), lam));
      est[i] = wilson_interval(above, psi_sorted.size());
    }
  }

  ConditionReport rep;
  rep.condition_id = mode == TailMode::limsup ? ConditionId::tail_1_1 : ConditionId::tail_1_2;
  for (std::size_t i = 0; i < t_grid.size(); ++i) rep.series.push_back(t_grid[i] * est[i].p);

  std::string spec = "t: " + std::to_string(t_grid.size()) + " points " + fmt(t_grid.front()) +
                     " .. " + fmt(t_max) + "; top decade from " + fmt(t_grid[top]) + "; " +
                     (analytic ? std::string("analytic tail")
                               : "Monte Carlo, " + std::to_string(mc_samples) +
                                     " samples, 99% Wilson bands");
  if (mode == TailMode::limsup) {
    double sup = 0.0;
    for (std::size_t i = t_grid.size() / 2; i < t_grid.size(); ++i) {
      sup = std::max(sup, t_grid[i] * est[i].p);
    }
    rep.numeric_margin = sup;
  } else {
    double integral = 0.0;
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      integral += 0.5 * (est[i].p + est[i - 1].p) * (t_grid[i] - t_grid[i - 1]);
    }
    rep.numeric_margin = integral;
    // The part beyond t_max is at least comparable to t_max P(t_max) unless
    // the tail decays quickly; flag when that is not negligible.
    const double tail_proxy = t_max * est.back().p;
    spec += std::string("; truncated: ") +
            (tail_proxy > 1e-3 * std::max(integral, 1e-300) ? "yes" : "no") +
            " (t_max P(t_max) = " + fmt(tail_proxy) + ")";
  }
  rep.audited_grid_spec = spec;

  // Tracked quantity t P over the top decade: compare its end with its start.
  const std::size_t e = t_grid.size() - 1;
  const double ts = t_grid[top];
  const double te = t_grid[e];
  const double lo = te * est[e].lo - ts * est[top].hi;
  const double hi = te * est[e].hi - ts * est[top].lo;
  const bool strict = mode == TailMode::integral;
  const bool all_zero = est[e].hi == 0.0 && est[top].hi == 0.0;
  if (all_zero) {
    rep.verdict = Verdict::no_violation_found;
  } else if (strict ? hi < 0.0 : hi <= 1e-12 * ts * est[top].p) {
    rep.verdict = Verdict::no_violation_found;
  } else if (strict ? lo >= 0.0 : lo > 1e-12 * ts * est[top].p) {
    rep.verdict = Verdict::violated;
  } else {
    rep.verdict = Verdict::indeterminate;
  }
  if (rep.verdict != Verdict::no_violation_found) {
    rep.witness = Witness{{}, {}, std::nullopt, te};
  }
  return rep;
}

}  // namespace ubkde

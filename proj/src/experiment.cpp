#include "ubkde/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include <omp.h>

#include "ubkde/deviation.hpp"
#include "ubkde/error.hpp"
#include "ubkde/kde.hpp"
#include "ubkde/parallel.hpp"

namespace ubkde {

DensityModel resolve_model(const ExperimentConfig& cfg) {
  if (cfg.dim == 0) throw Error(ErrorKind::config, "dim must be >= 1");
  if (cfg.model == "gaussian") return DensityModel::gaussian(cfg.dim);
  if (cfg.model == "laplace" || cfg.model == "cauchy") {
    if (cfg.dim != 1) throw Error(ErrorKind::config, cfg.model + " is one-dimensional");
    return cfg.model == "laplace" ? DensityModel::laplace() : DensityModel::cauchy();
  }
  if (cfg.model == "polynomial-bump") return DensityModel::polynomial_bump(cfg.dim, cfg.bump_power);
  if (cfg.model == "uniform-box") return DensityModel::uniform_box(cube(cfg.dim, 0.0, 1.0));
  throw Error(ErrorKind::config, "unknown model '" + cfg.model + "'");
}

Setup resolve(const ExperimentConfig& cfg) {
  DensityModel model = resolve_model(cfg);
  std::optional<WeightFunction> weight;
  if (cfg.weight == "inverse-power") {
    weight = WeightFunction::inverse_density_power(model, cfg.beta, cfg.weight_scale);
  } else if (cfg.weight == "constant") {
    weight = WeightFunction::constant(model, cfg.beta, cfg.weight_scale);
  } else {
    throw Error(ErrorKind::config, "unknown weight '" + cfg.weight + "'");
  }
  Kernel kernel = make_kernel(cfg.kernel, cfg.dim);
  if (kernel.dim() != cfg.dim) throw Error(ErrorKind::config, "kernel dimension differs from dim");
  const SlowlyVarying L1{cfg.L1_scale, cfg.L1_power};
  const SlowlyVarying L2{cfg.L2_scale, cfg.L2_power};
  BandwidthWindow window = cfg.single_bandwidth
                               ? BandwidthWindow::single_bandwidth(cfg.alpha, L1)
                               : BandwidthWindow(cfg.alpha, cfg.mu, L1, L2);
  return {std::move(model), std::move(*weight), std::move(kernel), std::move(window)};
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::domain, "quantile of an empty set");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::optional<double> ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

QuantileRow quantile_row(std::size_t n, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return {n, values.size(), quantile(values, 0.1), quantile(values, 0.5), quantile(values, 0.9)};
}

namespace {

std::optional<double> median_slope(const std::vector<QuantileRow>& rows) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (!(r.q50 > 0.0)) return std::nullopt;
    x.push_back(std::log(static_cast<double>(r.n)));
    y.push_back(std::log(r.q50));
  }
  return ls_slope(x, y);
}

nlohmann::json rows_json(const std::vector<QuantileRow>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows) {
    a.push_back({{"n", r.n}, {"count", r.count}, {"q10", r.q10}, {"q50", r.q50}, {"q90", r.q90}});
  }
  return a;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void check_common(const ExperimentConfig& cfg) {
  if (cfg.subgrid_k < 1) throw Error(ErrorKind::config, "subgrid_k must be >= 1");
  if (cfg.quad_points < 1) throw Error(ErrorKind::config, "quad_points must be >= 1");
  if (cfg.grid_cap < 1000) throw Error(ErrorKind::config, "grid_cap must be >= 1000");
  if (cfg.workers < 1) throw Error(ErrorKind::config, "workers must be >= 1");
}

ConditionReport tail_audit(const ExperimentConfig& cfg, const Setup& s, TailMode mode) {
  return check_tail_condition(s.model, s.weight, s.window, geometric_t_grid(cfg.tail_t_max),
                              mode, cfg.tail_mc_samples, cfg.seed);
}

// Delta_n for every (n, replication); records ordered by n, then replication.
std::vector<RawRecord> delta_records(const ExperimentConfig& cfg, const Setup& s) {
  std::vector<RawRecord> raw;
  for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
    const std::size_t n = cfg.n_list[k];
    const EvalGrid regular = build_eval_grid(s.model, s.weight, s.window, n, cfg.grid_cap);
    const std::vector<double> hs = h_subgrid(s.window, n, cfg.subgrid_k);
    const CenteringTable table =
        build_centering_table(s.model, s.kernel, regular, hs, cfg.quad_points);
    std::vector<RawRecord> block(cfg.replications);
    parallel_for(cfg.replications, [&](std::size_t r) {
      const Sample sample = draw_sample(
          s.model, n, StreamId{cfg.seed, static_cast<std::int64_t>(r), static_cast<std::int64_t>(k)});
      const EvalGrid grid = cfg.include_sample_points
                                ? attach_sample(regular, s.model, s.weight, sample.points)
                                : regular;
      const UniformDeviation ud = uniform_deviation_over(
          sample.points, s.model, s.weight, s.kernel, hs, grid, &table, cfg.quad_points);
      block[r] = RawRecord{n, r, ud.delta_n, ud.profile[ud.argmax].h};
    }, cfg.workers);
    raw.insert(raw.end(), block.begin(), block.end());
  }
  return raw;
}

std::vector<QuantileRow> rows_from(const ExperimentConfig& cfg, const std::vector<RawRecord>& raw,
                                   bool fixed) {
  std::vector<QuantileRow> rows;
  for (std::size_t n : cfg.n_list) {
    std::vector<double> v;
    for (const auto& r : raw) {
      if (r.n == n) v.push_back(fixed ? r.value_fixed : r.value);
    }
    rows.push_back(quantile_row(n, std::move(v)));
  }
  return rows;
}

ExperimentResult boundedness_core(const ExperimentConfig& cfg, const Setup& s,
                                  const std::string& name) {
  ExperimentResult res;
  res.experiment = name;
  res.config_echo = cfg.echo_json();
  res.raw = delta_records(cfg, s);
  res.quantiles = rows_from(cfg, res.raw, false);
  res.slope = median_slope(res.quantiles);
  return res;
}

void set_threads(const ExperimentConfig& cfg) { omp_set_num_threads(cfg.workers); }

}  // namespace

void validate_n_list(const ExperimentConfig& cfg, const BandwidthWindow& window) {
  if (cfg.n_list.empty()) throw Error(ErrorKind::config, "n_list is empty");
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    if (i > 0 && cfg.n_list[i] != 2 * cfg.n_list[i - 1]) {
      throw Error(ErrorKind::config, "n_list must be geometric with ratio 2");
    }
    if (cfg.n_list[i] < window.n_min()) {
      throw WindowNotValid("n_list entry " + std::to_string(cfg.n_list[i]) +
                               " is below the window's n_min = " + std::to_string(window.n_min()),
                           window.n_min());
    }
  }
}

nlohmann::json summary_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["experiment"] = r.experiment;
  j["pass"] = r.pass;
  j["note"] = r.note;
  j["slope"] = r.slope ? nlohmann::json(*r.slope) : nlohmann::json("not-applicable");
  if (!r.quantiles_fixed.empty()) {
    j["slope_fixed"] = r.slope_fixed ? nlohmann::json(*r.slope_fixed)
                                     : nlohmann::json("not-applicable");
    j["quantiles_fixed"] = rows_json(r.quantiles_fixed);
  }
  j["quantiles"] = rows_json(r.quantiles);
  if (!r.paths.empty()) {
    nlohmann::json p = nlohmann::json::array();
    for (const auto& s : r.paths) {
      p.push_back({{"path", s.path},
                   {"relative_increase", s.relative_increase},
                   {"stabilized", s.stabilized}});
    }
    j["paths"] = p;
  }
  j["tail_report"] = r.tail_report ? to_json(*r.tail_report) : nlohmann::json(nullptr);
  j["config"] = r.config_echo;
  return j;
}

ExperimentResult run_boundedness(const ExperimentConfig& cfg) {
  const Timer timer;
  check_common(cfg);
  set_threads(cfg);
  const Setup s = resolve(cfg);
  validate_n_list(cfg, s.window);
  const ConditionReport tail = tail_audit(cfg, s, TailMode::limsup);
  if (tail.verdict == Verdict::violated && !cfg.override_tail_check) {
    throw Error(ErrorKind::config,
                "tail condition t P{psi(X) > lambda(t)} bounded is violated for this "
                "model/weight/window (margin " + std::to_string(tail.numeric_margin) +
                    "); Delta_n need not be bounded. Use the 'necessity' command to "
                    "study growth, or set override_tail_check=true");
  }
  ExperimentResult res = boundedness_core(cfg, s, "boundedness");
  res.tail_report = tail;
  if (res.slope) {
    res.pass = *res.slope <= 0.05;
    res.note = res.pass ? "median Delta_n slope within 0.05" : "median Delta_n grows with n";
  } else {
    res.pass = true;
    res.note = "slope not applicable (fewer than two sample sizes)";
  }
  if (tail.verdict != Verdict::no_violation_found) {
    res.note += std::string("; tail audit verdict: ") + to_string(tail.verdict);
  }
  res.wall_clock_seconds = timer.seconds();
  return res;
}

ExperimentResult run_necessity_demo(const ExperimentConfig& cfg) {
  const Timer timer;
  check_common(cfg);
  set_threads(cfg);
  const Setup s = resolve(cfg);
  validate_n_list(cfg, s.window);
  ExperimentResult res = boundedness_core(cfg, s, "necessity");
  res.tail_report = tail_audit(cfg, s, TailMode::limsup);
  res.pass = true;
  if (!res.slope) {
    res.note = "raw trajectory only; slope not applicable";
  } else if (*res.slope >= 0.1) {
    res.note = "growth observed";
  } else {
    res.note = "no growth observed";
  }
  if (cfg.replications < 2) res.note += "; single replication, no confidence in the slope";
  res.note += std::string("; tail audit verdict: ") + to_string(res.tail_report->verdict) +
              "; illustrative demo, not a proof";
  res.wall_clock_seconds = timer.seconds();
  return res;
}

ExperimentResult run_path(const ExperimentConfig& cfg) {
  const Timer timer;
  check_common(cfg);
  set_threads(cfg);
  const Setup s = resolve(cfg);
  validate_n_list(cfg, s.window);
  if (!s.model.has_sampler()) throw Error(ErrorKind::config, "model has no nested sampler");
  if (cfg.paths == 0) throw Error(ErrorKind::config, "paths must be >= 1");
  const ConditionReport tail = tail_audit(cfg, s, TailMode::integral);
  if (tail.verdict == Verdict::violated && !cfg.override_tail_check) {
    throw Error(ErrorKind::config,
                "tail condition int P{psi(X) > lambda(t)} dt < inf is violated for this "
                "model/weight/window; set override_tail_check=true to run anyway");
  }

  ExperimentResult res;
  res.experiment = "path";
  res.config_echo = cfg.echo_json();
  res.tail_report = tail;
  const std::size_t K = cfg.n_list.size();
  const std::size_t n_max = cfg.n_list.back();

  // One sample per path at the largest n; smaller n use its prefixes.
  std::vector<Sample> samples;
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    samples.push_back(
        draw_sample(s.model, n_max, StreamId{cfg.seed, static_cast<std::int64_t>(p), 0}));
  }
  std::vector<RawRecord> grid_records(cfg.paths * K);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t n = cfg.n_list[k];
    const EvalGrid regular = build_eval_grid(s.model, s.weight, s.window, n, cfg.grid_cap);
    const std::vector<double> hs = h_subgrid(s.window, n, cfg.subgrid_k);
    const CenteringTable table =
        build_centering_table(s.model, s.kernel, regular, hs, cfg.quad_points);
    parallel_for(cfg.paths, [&](std::size_t p) {
      const PointSet prefix = samples[p].points.prefix(n);
      const EvalGrid grid = cfg.include_sample_points
                                ? attach_sample(regular, s.model, s.weight, prefix)
                                : regular;
      const UniformDeviation ud = uniform_deviation_over(prefix, s.model, s.weight, s.kernel,
                                                         hs, grid, &table, cfg.quad_points);
      grid_records[p * K + k] = RawRecord{n, p, ud.delta_n, ud.profile[ud.argmax].h};
    }, cfg.workers);
  }
  res.pass = true;
  const std::size_t half_end = K >= 2 ? K / 2 - (K % 2 == 0 ? 1 : 0) : 0;
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    double running = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      RawRecord& r = grid_records[p * K + k];
      running = std::max(running, r.value);
      r.running_max = running;
    }
    PathSummary ps;
    ps.path = p;
    const double before = grid_records[p * K + half_end].running_max;
    const double after = grid_records[p * K + K - 1].running_max;
    ps.relative_increase = before > 0.0 ? after / before - 1.0 : 0.0;
    ps.stabilized = ps.relative_increase <= 0.10;
    res.pass = res.pass && ps.stabilized;
    res.paths.push_back(ps);
  }
  res.raw = grid_records;
  // Quantiles across paths of the running maximum.
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> v;
    for (std::size_t p = 0; p < cfg.paths; ++p) v.push_back(grid_records[p * K + k].running_max);
    res.quantiles.push_back(quantile_row(cfg.n_list[k], std::move(v)));
  }
  res.slope = median_slope(res.quantiles);
  res.note = res.pass ? "running maximum stabilized on every path"
                      : "running maximum still growing on some path";
  if (tail.verdict != Verdict::no_violation_found) {
    res.note += std::string("; tail audit verdict: ") + to_string(tail.verdict);
  }
  res.wall_clock_seconds = timer.seconds();
  return res;
}

ExperimentResult run_rate_comparison(const ExperimentConfig& cfg) {
  const Timer timer;
  check_common(cfg);
  set_threads(cfg);
  const Setup s = resolve(cfg);
  validate_n_list(cfg, s.window);
  BandwidthSelector selector;
  selector.kind = parse_selector(cfg.selector);
  selector.knn_rank = cfg.knn_rank;
  selector.cv_kernel = s.kernel;
  const bool deterministic = selector.kind == SelectorKind::fixed_a ||
                             selector.kind == SelectorKind::fixed_b ||
                             selector.kind == SelectorKind::geometric_midpoint;

  ExperimentResult res;
  res.experiment = "rates";
  res.config_echo = cfg.echo_json();
  for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
    const std::size_t n = cfg.n_list[k];
    const double nt = static_cast<double>(n);
    const double an = s.window.a(nt);
    const double bn = s.window.b(nt);
    const double rate = std::sqrt(std::abs(std::log(an)) / (nt * an));
    const EvalGrid regular = build_eval_grid(s.model, s.weight, s.window, n, cfg.grid_cap);
    const CenteringTable fixed_table =
        build_centering_table(s.model, s.kernel, regular, {an}, cfg.quad_points);
    std::optional<CenteringTable> sel_table;
    double h_det = an;
    if (deterministic) {
      const PointSet dummy(s.model.dim(), std::vector<double>(n * s.model.dim(), 0.0));
      h_det = select_bandwidth(selector, dummy, std::nullopt, s.window);
      sel_table = build_centering_table(s.model, s.kernel, regular, {h_det}, cfg.quad_points);
    }
    std::vector<RawRecord> block(cfg.replications);
    parallel_for(cfg.replications, [&](std::size_t r) {
      const Sample sample = draw_sample(
          s.model, n, StreamId{cfg.seed, static_cast<std::int64_t>(r), static_cast<std::int64_t>(k)});
      const EvalGrid grid = cfg.include_sample_points
                                ? attach_sample(regular, s.model, s.weight, sample.points)
                                : regular;
      const KdeEvaluator eval(sample.points, s.kernel);
      auto sup_dev = [&](double h, const CenteringTable* table) {
        const std::vector<double> fhat = eval(h, grid.points, 1);
        std::vector<double> ef(grid.size(), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (!grid.in_region[i]) continue;
          ef[i] = (table && i < grid.regular_count)
                      ? table->values[0][i]
                      : expected_kde(s.model, s.kernel, h, grid.points[i], cfg.quad_points);
        }
        return deviation_from_values(n, h, grid, fhat, ef).sup_weighted_dev;
      };
      RawRecord rec;
      rec.n = n;
      rec.replication = r;
      rec.value_fixed = sup_dev(an, &fixed_table) / rate;
      if (deterministic) {
        rec.value = sup_dev(h_det, &*sel_table) / rate;
        rec.h_at_max = h_det;
      } else if (!selector.local()) {
        const double h = select_bandwidth(selector, sample.points, std::nullopt, s.window);
        rec.value = sup_dev(h, nullptr) / rate;
        rec.h_at_max = h;
        rec.h_in_window = h >= an && h <= bn;
      } else {
        const std::vector<VariableKdeValue> v =
            kde_variable(sample.points, s.kernel, selector, s.window, grid.points, 1);
        double best = -1.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          rec.h_in_window = rec.h_in_window && v[i].h_used >= an && v[i].h_used <= bn;
          if (!grid.in_region[i]) continue;
          const double ef =
              expected_kde(s.model, s.kernel, v[i].h_used, grid.points[i], cfg.quad_points);
          const double dev = grid.psi[i] * std::abs(v[i].value - ef);
          if (dev > best) {
            best = dev;
            rec.h_at_max = v[i].h_used;
          }
        }
        rec.value = best / rate;
      }
      block[r] = rec;
    }, cfg.workers);
    res.raw.insert(res.raw.end(), block.begin(), block.end());
  }
  res.quantiles = rows_from(cfg, res.raw, false);
  res.quantiles_fixed = rows_from(cfg, res.raw, true);
  res.slope = median_slope(res.quantiles);
  res.slope_fixed = median_slope(res.quantiles_fixed);
  bool in_window = true;
  for (const auto& r : res.raw) in_window = in_window && r.h_in_window;
  if (res.slope && res.slope_fixed) {
    res.pass = *res.slope <= 0.05 && *res.slope_fixed <= 0.05 && in_window;
    res.note = res.pass ? "both median ratio sequences bounded"
                        : "a median ratio sequence grows with n";
  } else {
    res.pass = in_window;
    res.note = "slope not applicable (fewer than two sample sizes)";
  }
  if (!in_window) res.note += "; selected bandwidth left [a_n, b_n]";
  res.wall_clock_seconds = timer.seconds();
  return res;
}

}  // namespace ubkde

#include "ubkde/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "CLI11.hpp"
#include "ubkde/conditions.hpp"
#include "ubkde/deviation.hpp"
#include "ubkde/error.hpp"
#include "ubkde/experiment.hpp"
#include "ubkde/functional.hpp"
#include "ubkde/kde.hpp"
#include "ubkde/results_io.hpp"

namespace ubkde {

namespace {

struct Outcome {
  bool pass = true;
  std::string note;
  std::vector<OutputFile> files;
};

std::string coords_csv(Point p) {
  std::string s;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (c) s += ';';
    s += format_double(p[c]);
  }
  return s;
}

Sample single_sample(const ExperimentConfig& cfg, const Setup& s) {
  if (cfg.n < s.window.n_min()) {
    throw WindowNotValid("n = " + std::to_string(cfg.n) + " is below n_min = " +
                             std::to_string(s.window.n_min()),
                         s.window.n_min());
  }
  return draw_sample(s.model, cfg.n, StreamId{cfg.seed, 0, 0});
}

Outcome cmd_validate_kernel(const ExperimentConfig& cfg) {
  const Kernel k = make_kernel(cfg.kernel, cfg.dim);
  const KernelValidationReport r = validate_kernel(k, cfg.validation_points);
  nlohmann::json j{{"kernel", k.name()},
                   {"dim", k.dim()},
                   {"integral", r.integral},
                   {"integral_error", r.integral_error},
                   {"observed_sup", r.observed_sup},
                   {"kappa", r.kappa},
                   {"support_violations", r.support_violations},
                   {"bound_violations", r.bound_violations},
                   {"right_continuity_failures", r.right_continuity_failures},
                   {"passed", r.passed},
                   {"message", r.message}};
  std::string csv = "kernel,dim,integral,integral_error,observed_sup,kappa,passed\n" + k.name() +
                    ',' + std::to_string(k.dim()) + ',' + format_double(r.integral) + ',' +
                    format_double(r.integral_error) + ',' + format_double(r.observed_sup) + ',' +
                    format_double(r.kappa) + ',' + (r.passed ? "true" : "false") + '\n';
  return {r.passed, r.message, {{"kernel.csv", csv}, {"kernel.json", j.dump(2) + "\n"}}};
}

Outcome cmd_check_conditions(const ExperimentConfig& cfg) {
  const Setup s = resolve(cfg);
  AuditGridSpec grid;
  grid.points_per_axis = cfg.audit_points;
  std::vector<ConditionReport> reports =
      check_regularity(s.model, s.weight, cfg.delta_list, cfg.h_sweep, grid);
  const std::vector<double> tg = geometric_t_grid(cfg.tail_t_max);
  for (TailMode m : {TailMode::limsup, TailMode::integral}) {
    reports.push_back(
        check_tail_condition(s.model, s.weight, s.window, tg, m, cfg.tail_mc_samples, cfg.seed));
  }
  nlohmann::json j = nlohmann::json::array();
  std::string csv = "condition_id,parameter,verdict,numeric_margin\n";
  bool pass = true;
  std::size_t violated = 0;
  for (const auto& r : reports) {
    j.push_back(to_json(r));
    csv += std::string(to_string(r.condition_id)) + ',' +
           (r.parameter ? format_double(*r.parameter) : std::string()) + ',' +
           to_string(r.verdict) + ',' + format_double(r.numeric_margin) + '\n';
    if (r.verdict == Verdict::violated) {
      pass = false;
      ++violated;
    }
  }
  return {pass, std::to_string(violated) + " of " + std::to_string(reports.size()) + " checks violated",
          {{"conditions.csv", csv}, {"conditions.json", j.dump(2) + "\n"}}};
}

double pick_h(const ExperimentConfig& cfg, const Setup& s, const PointSet& sample) {
  if (cfg.h) return *cfg.h;
  BandwidthSelector sel;
  sel.kind = parse_selector(cfg.selector);
  if (sel.local()) throw Error(ErrorKind::usage, "a local selector needs per-point evaluation; use 'rates'");
  sel.cv_kernel = s.kernel;
  return select_bandwidth(sel, sample, std::nullopt, s.window);
}

Outcome cmd_estimate(const ExperimentConfig& cfg) {
  const Setup s = resolve(cfg);
  const Sample sample = single_sample(cfg, s);
  const double h = pick_h(cfg, s, sample.points);
  const Box box = s.model.probability_box(1.0 - 1e-6);
  const std::size_t d = s.model.dim();
  const std::size_t m = std::max<std::size_t>(cfg.audit_points, 2);
  PointSet pts(d);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  for (;;) {
    for (std::size_t c = 0; c < d; ++c) {
      p[c] = box.lo[c] + (box.hi[c] - box.lo[c]) * static_cast<double>(idx[c]) /
                             static_cast<double>(m - 1);
    }
    pts.push_back(p);
    std::size_t c = 0;
    while (c < d && ++idx[c] == m) idx[c++] = 0;
    if (c == d) break;
  }
  const std::vector<double> fhat = kde_fast(sample.points, s.kernel, h, pts);
  std::string csv = "t,fhat,f\n";
  double mass_cell = 1.0;
  for (std::size_t c = 0; c < d; ++c) mass_cell *= (box.hi[c] - box.lo[c]) / static_cast<double>(m - 1);
  double riemann = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    csv += coords_csv(pts[i]) + ',' + format_double(fhat[i]) + ',' +
           format_double(s.model.pdf(pts[i])) + '\n';
    riemann += fhat[i] * mass_cell;
  }
  nlohmann::json j{{"n", cfg.n}, {"h", h}, {"points", pts.size()}, {"riemann_mass", riemann}};
  return {true, "h = " + format_double(h), {{"estimate.csv", csv}, {"estimate.json", j.dump(2) + "\n"}}};
}

Outcome cmd_deviation(const ExperimentConfig& cfg) {
  const Setup s = resolve(cfg);
  const Sample sample = single_sample(cfg, s);
  EvalGrid grid = build_eval_grid(s.model, s.weight, s.window, cfg.n, cfg.grid_cap);
  if (cfg.include_sample_points) grid = attach_sample(grid, s.model, s.weight, sample.points);
  std::vector<DeviationRecord> rows;
  std::size_t argmax = 0;
  if (cfg.h) {
    rows.push_back(weighted_deviation(sample.points, s.model, s.weight, s.kernel, *cfg.h, grid,
                                      cfg.quad_points));
  } else {
    UniformDeviation ud = uniform_deviation(sample.points, s.model, s.weight, s.kernel, s.window,
                                            static_cast<int>(cfg.subgrid_k), grid, nullptr,
                                            cfg.quad_points);
    rows = std::move(ud.profile);
    argmax = ud.argmax;
  }
  std::ostringstream csv;
  write_deviation_csv_header(csv);
  for (const auto& r : rows) write_deviation_csv_row(csv, r);
  const DeviationRecord& best = rows[argmax];
  nlohmann::json j{{"n", cfg.n},
                   {"delta_n", best.rescaled},
                   {"h_at_max", best.h},
                   {"sup_weighted_dev", best.sup_weighted_dev},
                   {"argsup", best.argsup},
                   {"grid_id", grid_id_hex(grid.grid_id)},
                   {"grid_points", grid.size()},
                   {"grid_capped", grid.capped}};
  return {true, "Delta_n = " + format_double(best.rescaled),
          {{"deviation.csv", csv.str()}, {"summary.json", j.dump(2) + "\n"}}};
}

Outcome cmd_functional(const ExperimentConfig& cfg) {
  const Setup s = resolve(cfg);
  if (cfg.weight != "inverse-power") {
    throw Error(ErrorKind::config, "the functional bound uses psi = f^-beta (weight=inverse-power)");
  }
  const Sample sample = single_sample(cfg, s);
  const double h = cfg.h ? *cfg.h : std::sqrt(s.window.a(double(cfg.n)) * s.window.b(double(cfg.n)));
  FunctionalCheckSpec spec;
  spec.window = &s.window;
  spec.max_points = cfg.grid_cap;
  spec.quad_points = cfg.quad_points;
  const LipschitzFunctional phi = make_functional(cfg.functional);
  const FunctionalBound b =
      functional_bound_check(sample.points, s.kernel, h, phi, s.model, cfg.beta, spec);
  nlohmann::json j = to_json(b);
  j["h"] = h;
  j["n"] = cfg.n;
  j["functional"] = phi.name;
  std::string csv = "n,h,lhs,rhs,c_beta,slack,holds\n" + std::to_string(cfg.n) + ',' +
                    format_double(h) + ',' + format_double(b.lhs) + ',' + format_double(b.rhs) +
                    ',' + format_double(b.c_beta) + ',' + format_double(b.slack) + ',' +
                    (b.holds ? "true" : "false") + '\n';
  return {b.holds, "lhs " + format_double(b.lhs) + " vs rhs " + format_double(b.rhs),
          {{"functional.csv", csv}, {"functional.json", j.dump(2) + "\n"}}};
}

Outcome cmd_grid(const ExperimentConfig& cfg) {
  const Setup s = resolve(cfg);
  const WindowValues w = window_eval(s.window, cfg.n, cfg.h);
  const DyadicGrid dg = dyadic_grid(s.window, cfg.n);
  const std::vector<double> sub = h_subgrid(s.window, cfg.n, static_cast<int>(cfg.subgrid_k));
  std::string csv = "kind,index,h\n";
  for (std::size_t j = 0; j < dg.h_list.size(); ++j) {
    csv += "dyadic," + std::to_string(j) + ',' + format_double(dg.h_list[j]) + '\n';
  }
  for (std::size_t i = 0; i < sub.size(); ++i) {
    csv += "subgrid," + std::to_string(i) + ',' + format_double(sub[i]) + '\n';
  }
  nlohmann::json j{{"n", cfg.n},       {"a_n", w.a_n},         {"b_n", w.b_n},
                   {"lambda_n", w.lambda_t}, {"l_n", dg.l_n},  {"n_min", s.window.n_min()},
                   {"dyadic", dg.h_list}, {"subgrid", sub}};
  if (w.lambda_n_h) j["lambda_n_h"] = *w.lambda_n_h;
  return {true, "l_n = " + std::to_string(dg.l_n) + ", subgrid size " + std::to_string(sub.size()),
          {{"grid.csv", csv}, {"grid.json", j.dump(2) + "\n"}}};
}

Outcome from_experiment(const ExperimentResult& r, const ExperimentConfig& cfg) {
  return {r.pass, r.note, experiment_files(r, cfg)};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted uniform-in-bandwidth KDE deviation experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  app.option_defaults()->always_capture_default(false);
  app.add_option("--config", config_path, "key=value or JSON configuration file");
  app.add_option("--set", overrides, "override one key (key=value), repeatable");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "csv, json or both");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate-kernel", "check normalization, support and bound of the configured kernel"},
      {"check-conditions", "audit the regularity and tail conditions"},
      {"estimate", "evaluate the estimator on a grid"},
      {"deviation", "weighted sup deviation of one sample over the bandwidth window"},
      {"boundedness", "median Delta_n across n (refuses when the tail condition fails)"},
      {"rates", "selector-driven ratio statistic against the fixed a_n bandwidth"},
      {"path", "running maximum of Delta_n along nested samples"},
      {"necessity", "Delta_n growth when the tail condition fails"},
      {"functional", "plug-in functional bound check"},
      {"grid", "bandwidth window, dyadic grid and subgrid for one n"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::string dir = out_dir.value_or("results");
  ExperimentConfig cfg;
  try {
    cfg = parse_config(config_path, overrides);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.set("workers", std::to_string(*workers));
    if (out_dir) cfg.out = *out_dir;
    if (format) cfg.set("format", *format);
    dir = cfg.out;
    const OutputFormat fmt = parse_format(cfg.format);

    if (command == "boundedness" && cfg.replications < 50) {
      throw Error(ErrorKind::config, "boundedness runs need replications >= 50");
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    if (command == "validate-kernel") o = cmd_validate_kernel(cfg);
    else if (command == "check-conditions") o = cmd_check_conditions(cfg);
    else if (command == "estimate") o = cmd_estimate(cfg);
    else if (command == "deviation") o = cmd_deviation(cfg);
    else if (command == "boundedness") o = from_experiment(run_boundedness(cfg), cfg);
    else if (command == "rates") o = from_experiment(run_rate_comparison(cfg), cfg);
    else if (command == "path") o = from_experiment(run_path(cfg), cfg);
    else if (command == "necessity") o = from_experiment(run_necessity_demo(cfg), cfg);
    else if (command == "functional") o = cmd_functional(cfg);
    else o = cmd_grid(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (std::none_of(o.files.begin(), o.files.end(),
                     [](const OutputFile& f) { return f.name == "config.cfg"; })) {
      o.files.push_back(config_file(cfg));
    }
    o.files.push_back(run_info_file(cfg, command, secs));
    write_results(std::move(o.files), dir, fmt);
    out << command << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.note << ")\n";
    return o.pass ? 0 : 1;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    write_error(dir, e, code);
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return code;
  } catch (const std::exception& e) {
    write_error(dir, e, 3);
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace ubkde

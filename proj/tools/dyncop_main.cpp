// dyncop: dependence-change detection and copula-based risk from the shell.
//
//   dyncop simulate  --scenario sc.txt --out data.csv
//   dyncop detect    --input data.csv --method bottom_up --segments segs.jsonl
//   dyncop risk      --input prices.csv --segments segs.jsonl --out risk.csv
//   dyncop backtest  --risk risk.csv --input prices.csv
//   dyncop compare   --scenarios sc.txt --out rows.csv --summary summary.csv
//
// Inputs are CSV with header `date,asset1,asset2` (the date column is
// optional). Price columns are turned into log returns, each margin is
// filtered by a GARCH(2,1) fit, and the standardized residuals are rank
// transformed before any detector runs; `--returns` skips the log-return
// step and `--no-filter` ranks the input columns directly. Every command is
// deterministic given its inputs and `--seed` (defaultable through
// DYNCOP_SEED, overridable per invocation); runs exit 0 only when the whole
// pipeline completed.

#include <array>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyncop/detect.hpp"
#include "dyncop/io.hpp"
#include "dyncop/margins.hpp"
#include "dyncop/pseudo.hpp"
#include "dyncop/risk.hpp"
#include "dyncop/sim.hpp"

namespace {

using namespace dyncop;

// "gaussian:0.5", "studentt:0.94,2.89", "clayton:1.5"
CopulaSpec parse_spec_arg(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("copula spec '" + text +
                                "': expected family:par[,par]");
  const Family family = family_from_name(text.substr(0, colon));
  std::vector<double> par;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      par.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("copula spec '" + text +
                                  "': bad number '" + item + "'");
    }
  }
  CopulaSpec spec;
  const int want = family == Family::StudentT ? 2 : 1;
  if (static_cast<int>(par.size()) != want)
    throw std::invalid_argument("copula spec '" + text + "': " +
                                family_name(family) + " takes " +
                                std::to_string(want) + " parameter(s)");
  switch (family) {
    case Family::Gaussian: spec = CopulaSpec::gaussian(par[0]); break;
    case Family::StudentT: spec = CopulaSpec::student_t(par[0], par[1]); break;
    case Family::Clayton: spec = CopulaSpec::clayton(par[0]); break;
  }
  spec.validate();
  return spec;
}

std::array<double, 2> as_weights(const std::vector<double>& w) {
  if (w.size() != 2)
    throw std::invalid_argument("--weights takes exactly two values");
  return {w[0], w[1]};
}

std::vector<Family> parse_families(const std::string& text) {
  std::vector<Family> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(family_from_name(item));
  if (out.empty()) throw std::invalid_argument("families: empty list");
  return out;
}

// Working return series plus the dates aligned to it. When log returns are
// taken, observation i of the working series corresponds to input row i+1.
struct WorkingSeries {
  std::vector<double> r1, r2;
  std::vector<std::string> dates;
};

WorkingSeries to_returns(const SeriesCsv& in, bool already_returns) {
  WorkingSeries w;
  if (already_returns) {
    w.r1 = in.asset1;
    w.r2 = in.asset2;
    w.dates = in.dates;
  } else {
    w.r1 = log_returns(in.asset1);
    w.r2 = log_returns(in.asset2);
    if (!in.dates.empty())
      w.dates.assign(in.dates.begin() + 1, in.dates.end());
  }
  return w;
}

Eigen::ArrayX2d to_array(const std::vector<double>& a,
                         const std::vector<double>& b) {
  Eigen::ArrayX2d rows(static_cast<Eigen::Index>(a.size()), 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    rows(static_cast<Eigen::Index>(i), 0) = a[i];
    rows(static_cast<Eigen::Index>(i), 1) = b[i];
  }
  return rows;
}

// Shared detector-configuration options. Every default matches
// DetectorConfig; the returned seed option lets callers wire DYNCOP_SEED.
CLI::Option* add_detector_options(CLI::App* cmd, DetectorConfig* cfg,
                                  std::string* families) {
  cmd->add_option("--n-window", cfg->n_window, "moving-window length N");
  cmd->add_option("--step", cfg->step, "roll distance K");
  cmd->add_option("--n-min", cfg->n_min, "accelerated restart length N_min");
  cmd->add_option("--growth", cfg->growth, "accelerated growth increment D");
  cmd->add_option("--max-window", cfg->max_window,
                  "accelerated window cap L before rolling");
  cmd->add_option("--alpha-w", cfg->alpha_w, "warning-limit level");
  cmd->add_option("--alpha-c", cfg->alpha_c, "control-limit level");
  cmd->add_option("--bu-min", cfg->bu_min, "bottom-up initial block length");
  cmd->add_option("--min-fit", cfg->min_fit,
                  "binary-segmentation minimum leaf size");
  cmd->add_option("--mc-draws", cfg->mc_draws,
                  "Monte-Carlo draws per goodness-of-fit call");
  cmd->add_option("--families", *families,
                  "candidate families, comma separated");
  return cmd->add_option("--seed", cfg->seed, "random seed")
      ->envname("DYNCOP_SEED");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario_path, name, out, truth;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

int cmd_simulate(const SimulateArgs& a) {
  const std::vector<Scenario> all = parse_scenario_file(a.scenario_path);
  const Scenario* picked = nullptr;
  if (a.name.empty()) {
    picked = &all.front();
  } else {
    for (const Scenario& sc : all)
      if (sc.name == a.name) picked = &sc;
    if (!picked)
      throw std::invalid_argument("scenario '" + a.name + "' not found in " +
                                  a.scenario_path);
  }
  Scenario sc = *picked;
  if (a.seed_opt->count() > 0) sc.seed = a.seed;

  const GeneratedData gen = generate(sc);
  write_series_csv(a.out, gen.data);

  const std::string truth_path = a.truth.empty() ? a.out + ".truth" : a.truth;
  std::ofstream truth(truth_path);
  if (!truth)
    throw std::runtime_error(truth_path + ": cannot open for writing");
  for (int cp : gen.true_change_points) truth << cp << "\n";
  truth.close();

  std::cout << "scenario " << sc.name << ": " << gen.data.rows()
            << " rows -> " << a.out << ", " << gen.true_change_points.size()
            << " change point(s) -> " << truth_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
  std::string input, method, segments_path, events_path;
  bool returns = false;
  bool no_filter = false;
  DetectorConfig cfg;
  std::string families;
};

int cmd_detect(const DetectArgs& a) {
  DetectorConfig cfg = a.cfg;
  if (!a.families.empty()) cfg.families = parse_families(a.families);
  const Method method = method_from_name(a.method);

  const SeriesCsv in = read_series_csv(a.input);
  PseudoSample ps;
  std::vector<std::string> dates;
  if (a.no_filter) {
    ps = pseudo_observations(to_array(in.asset1, in.asset2));
    dates = in.dates;
  } else {
    const WorkingSeries w = to_returns(in, a.returns);
    const GarchFit g1 = fit_garch21(w.r1);
    const GarchFit g2 = fit_garch21(w.r2);
    ps = pseudo_observations(to_array(g1.resid, g2.resid));
    dates = w.dates;
  }

  std::vector<Segment> segments;
  std::vector<DetectionEvent> events;
  switch (method) {
    case Method::BinarySegmentation:
      segments = binary_segmentation(ps, cfg);
      break;
    case Method::BottomUp:
      segments = bottom_up(ps, cfg);
      break;
    case Method::MovingWindow: {
      MonitorResult r = moving_window(ps, cfg);
      segments = std::move(r.segments);
      events = std::move(r.events);
      break;
    }
    case Method::AcceleratedMW: {
      MonitorResult r = accelerated_moving_window(ps, cfg);
      segments = std::move(r.segments);
      events = std::move(r.events);
      break;
    }
  }

  if (!a.segments_path.empty())
    write_segments_jsonl(a.segments_path, segments, dates);
  if (!a.events_path.empty()) write_events_csv(a.events_path, events);

  std::cout << method_name(method) << ": " << ps.t_len() << " observations, "
            << segments.size() << " segment(s), " << events.size()
            << " event(s)\n";
  for (const Segment& s : segments) {
    std::cout << "  [" << s.start + 1 << ", " << s.end << "] "
              << (s.fit.converged ? s.fit.spec.str() : std::string("(no fit)"))
              << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// risk / backtest
// ---------------------------------------------------------------------------

struct RiskArgs {
  std::string input, out, static_spec, segments_path;
  bool returns = false;
  bool plot_sign = false;
  RollingRiskConfig cfg;
  std::vector<double> weights;
};

int cmd_risk(const RiskArgs& a) {
  if (a.static_spec.empty() == a.segments_path.empty())
    throw std::invalid_argument(
        "risk: exactly one of --static and --segments is required");
  RollingRiskConfig cfg = a.cfg;
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 0.5))
    throw std::invalid_argument("risk: --alpha must be in (0, 0.5]");
  if (cfg.n_sims < 1000)
    throw std::invalid_argument("risk: --n-sims must be >= 1000");
  if (!a.weights.empty()) cfg.weights = as_weights(a.weights);

  const SeriesCsv in = read_series_csv(a.input);
  const WorkingSeries w = to_returns(in, a.returns);

  std::vector<RiskPoint> points;
  if (!a.static_spec.empty()) {
    points = rolling_risk(w.r1, w.r2, parse_spec_arg(a.static_spec), cfg);
  } else {
    points = rolling_risk(w.r1, w.r2, read_segments_jsonl(a.segments_path),
                          cfg);
  }
  write_risk_csv(a.out, points, w.dates, a.plot_sign);
  std::cout << points.size() << " evaluation(s) -> " << a.out << "\n";
  return 0;
}

struct BacktestArgs {
  std::string risk_path, input, out;
  bool returns = false;
  bool plot_sign = false;
  double alpha = 0.05;
  std::vector<double> weights;
};

int cmd_backtest(const BacktestArgs& a) {
  const std::array<double, 2> weights =
      a.weights.empty() ? std::array<double, 2>{0.5, 0.5}
                        : as_weights(a.weights);
  const std::vector<RiskPoint> points = read_risk_csv(a.risk_path, a.plot_sign);
  const SeriesCsv in = read_series_csv(a.input);
  const WorkingSeries w = to_returns(in, a.returns);

  // Each evaluation at index t forecasts the loss over day t+1.
  std::vector<double> losses, var_values;
  losses.reserve(points.size());
  var_values.reserve(points.size());
  const int n = static_cast<int>(w.r1.size());
  for (const RiskPoint& pt : points) {
    const int day = pt.t + 1;
    if (pt.t < 0 || day >= n)
      throw std::invalid_argument(
          "backtest: risk file index " + std::to_string(pt.t) +
          " has no following observation in " + a.input);
    losses.push_back(portfolio_loss({1.0, 1.0}, {w.r1[day], w.r2[day]},
                                    weights));
    var_values.push_back(pt.var_value);
  }

  const BacktestReport rep = backtest_var(losses, var_values, a.alpha);
  std::ostringstream os;
  os << "n " << rep.n << "\n"
     << "exceedances " << rep.exceedances << "\n"
     << "expected " << fmt_g(rep.expected) << "\n"
     << "kupiec_stat " << fmt_g(rep.kupiec_stat) << "\n"
     << "kupiec_pvalue " << fmt_g(rep.kupiec_pvalue) << "\n";
  std::cout << os.str();
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error(a.out + ": cannot open for writing");
    f << os.str();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string scenarios_path, out, summary, methods = "mw,amw,bs,bu";
  int n_seeds = 20;
  DetectorConfig cfg;
  std::string families;
  CLI::Option* seed_opt = nullptr;
};

int cmd_compare(const CompareArgs& a) {
  DetectorConfig cfg = a.cfg;
  if (!a.families.empty()) cfg.families = parse_families(a.families);

  std::vector<Scenario> scenarios = parse_scenario_file(a.scenarios_path);
  if (a.seed_opt->count() > 0)
    for (Scenario& sc : scenarios) sc.seed = cfg.seed;

  std::vector<Method> methods;
  {
    std::stringstream ss(a.methods);
    std::string item;
    while (std::getline(ss, item, ',')) methods.push_back(method_from_name(item));
  }

  const ComparisonResult res =
      run_comparison(scenarios, methods, a.n_seeds, cfg);
  write_comparison_csv(a.out, res.rows);
  if (!a.summary.empty()) write_summary_csv(a.summary, res.summaries);

  for (const ComparisonSummary& s : res.summaries) {
    std::cout << s.scenario << " " << method_name(s.method) << ": "
              << s.n_detected << "/" << s.n_runs << " detected, median delay "
              << fmt_g(s.delay_median) << ", IQR " << fmt_g(s.delay_iqr)
              << ", false alarms " << s.false_alarms << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dependence-change detection and copula risk pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "plain-text key=value configuration (flags take precedence)");

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "generate piecewise-copula data from a scenario file");
  sim->add_option("--scenario", sim_args.scenario_path, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--name", sim_args.name,
                  "scenario name (default: first in the file)");
  sim->add_option("--out", sim_args.out, "output data CSV")->required();
  sim->add_option("--truth", sim_args.truth,
                  "true change-point file (default: <out>.truth)");
  sim_args.seed_opt =
      sim->add_option("--seed", sim_args.seed, "overrides the scenario seed")
          ->envname("DYNCOP_SEED");

  DetectArgs det_args;
  CLI::App* det = app.add_subcommand(
      "detect", "segment a bivariate series by dependence changes");
  det->add_option("--input", det_args.input, "price or return CSV")
      ->required()
      ->check(CLI::ExistingFile);
  det->add_option("--method", det_args.method,
                  "moving_window | accelerated_moving_window | "
                  "binary_segmentation | bottom_up (mw/amw/bs/bu)")
      ->required();
  det->add_option("--segments", det_args.segments_path,
                  "segment JSON-lines output path");
  det->add_option("--events", det_args.events_path,
                  "detection-event CSV output path");
  det->add_flag("--returns", det_args.returns,
                "input columns are returns, skip the log-return step");
  det->add_flag("--no-filter", det_args.no_filter,
                "rank the input columns directly, no GARCH filtering");
  add_detector_options(det, &det_args.cfg, &det_args.families);

  RiskArgs risk_args;
  CLI::App* risk = app.add_subcommand(
      "risk", "rolling Monte-Carlo VaR/ES under a static or fitted copula");
  risk->add_option("--input", risk_args.input, "price or return CSV")
      ->required()
      ->check(CLI::ExistingFile);
  risk->add_option("--out", risk_args.out, "risk CSV output path")->required();
  risk->add_option("--static", risk_args.static_spec,
                   "fixed copula, e.g. studentt:0.94,2.89");
  risk->add_option("--segments", risk_args.segments_path,
                   "segment JSON-lines file from `detect`");
  risk->add_flag("--returns", risk_args.returns,
                 "input columns are returns, skip the log-return step");
  risk->add_flag("--plot-sign", risk_args.plot_sign,
                 "negate VaR/ES columns for plotting against returns");
  risk->add_option("--alpha", risk_args.cfg.alpha, "VaR level");
  risk->add_option("--n-sims", risk_args.cfg.n_sims,
                   "Monte-Carlo draws per evaluation");
  risk->add_option("--window", risk_args.cfg.window,
                   "days between evaluations");
  risk->add_option("--min-history", risk_args.cfg.min_history,
                   "history required before the first evaluation");
  risk->add_option("--weights", risk_args.weights,
                   "portfolio weights (two values)")
      ->expected(2);
  risk->add_option("--seed", risk_args.cfg.seed, "random seed")
      ->envname("DYNCOP_SEED");

  BacktestArgs back_args;
  CLI::App* back = app.add_subcommand(
      "backtest", "Kupiec exceedance test of a risk CSV against realized data");
  back->add_option("--risk", back_args.risk_path, "risk CSV from `risk`")
      ->required()
      ->check(CLI::ExistingFile);
  back->add_option("--input", back_args.input, "price or return CSV")
      ->required()
      ->check(CLI::ExistingFile);
  back->add_option("--out", back_args.out, "also write the report here");
  back->add_flag("--returns", back_args.returns,
                 "input columns are returns, skip the log-return step");
  back->add_flag("--plot-sign", back_args.plot_sign,
                 "risk CSV was written with --plot-sign");
  back->add_option("--alpha", back_args.alpha, "VaR level being tested");
  back->add_option("--weights", back_args.weights,
                   "portfolio weights (two values)")
      ->expected(2);

  CompareArgs cmp_args;
  CLI::App* cmp = app.add_subcommand(
      "compare", "multi-seed detector comparison over scenario files");
  cmp->add_option("--scenarios", cmp_args.scenarios_path, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  cmp->add_option("--out", cmp_args.out, "per-run comparison CSV")->required();
  cmp->add_option("--summary", cmp_args.summary, "summary CSV output path");
  cmp->add_option("--methods", cmp_args.methods,
                  "methods to run, comma separated");
  cmp->add_option("--n-seeds", cmp_args.n_seeds, "seeds per scenario")
      ->check(CLI::PositiveNumber);
  cmp_args.seed_opt = add_detector_options(cmp, &cmp_args.cfg, &cmp_args.families);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (det->parsed()) return cmd_detect(det_args);
    if (risk->parsed()) return cmd_risk(risk_args);
    if (back->parsed()) return cmd_backtest(back_args);
    if (cmp->parsed()) return cmd_compare(cmp_args);
  } catch (const std::exception& e) {
    std::cerr << "dyncop: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

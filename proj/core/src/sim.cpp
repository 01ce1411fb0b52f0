#include "dyncop/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "internal/rng.hpp"
#include "internal/stats.hpp"

namespace dyncop {

int Scenario::t_len() const {
  int t = 0;
  for (const auto& b : blocks) t += b.length;
  return t;
}

std::vector<int> Scenario::true_change_points() const {
  std::vector<int> cps;
  int pos = 0;
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
    pos += blocks[i].length;
    cps.push_back(pos + 1);  // 1-based first observation of the next block
  }
  return cps;
}

GeneratedData generate(const Scenario& scenario) {
  if (scenario.blocks.empty())
    throw std::invalid_argument("generate: scenario has no blocks");
  for (const auto& b : scenario.blocks) {
    if (b.length <= 0)
      throw std::invalid_argument("generate: block length must be positive");
    b.spec.validate();
  }
  GeneratedData out;
  out.data.resize(scenario.t_len(), 2);
  out.true_change_points = scenario.true_change_points();
  int pos = 0;
  for (std::size_t i = 0; i < scenario.blocks.size(); ++i) {
    const auto& b = scenario.blocks[i];
    out.data.middleRows(pos, b.length) = sample(
        b.spec, b.length,
        detail::mix_seed(scenario.seed, static_cast<std::uint64_t>(i)));
    pos += b.length;
  }
  return out;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::BinarySegmentation: return "binary_segmentation";
    case Method::MovingWindow: return "moving_window";
    case Method::AcceleratedMW: return "accelerated_moving_window";
    case Method::BottomUp: return "bottom_up";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name)
    s.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(
                                     static_cast<unsigned char>(c))));
  if (s == "bs" || s == "binseg" || s == "binary_segmentation")
    return Method::BinarySegmentation;
  if (s == "mw" || s == "moving_window") return Method::MovingWindow;
  if (s == "amw" || s == "accelerated_moving_window" || s == "accelerated")
    return Method::AcceleratedMW;
  if (s == "bu" || s == "bottom_up") return Method::BottomUp;
  throw std::invalid_argument("unknown method name: " + name);
}

namespace {

struct Detection {
  int at = 0;  // 1-based observation index (count for real-time methods)
  std::optional<CopulaSpec> new_spec;
};

std::optional<CopulaSpec> spec_of_segment_starting(
    const std::vector<Segment>& segs, int start) {
  for (const Segment& s : segs)
    if (s.start == start && s.fit.converged) return s.fit.spec;
  return std::nullopt;
}

std::vector<Detection> run_method(const Eigen::ArrayX2d& data, Method m,
                                  const DetectorConfig& cfg) {
  const PseudoSample ps = pseudo_observations(data);
  std::vector<Detection> dets;
  switch (m) {
    case Method::BinarySegmentation:
    case Method::BottomUp: {
      const std::vector<Segment> segs = m == Method::BinarySegmentation
                                            ? binary_segmentation(ps, cfg)
                                            : bottom_up(ps, cfg);
      for (const Segment& s : segs) {
        if (s.start == 0) continue;
        Detection d;
        d.at = s.start + 1;  // 1-based first observation of the new regime
        if (s.fit.converged) d.new_spec = s.fit.spec;
        dets.push_back(std::move(d));
      }
      break;
    }
    case Method::MovingWindow:
    case Method::AcceleratedMW: {
      const MonitorResult res = m == Method::MovingWindow
                                    ? moving_window(ps, cfg)
                                    : accelerated_moving_window(ps, cfg);
      for (const DetectionEvent& ev : res.events) {
        if (ev.crossed != Crossed::CLL) continue;
        Detection d;
        d.at = ev.detected_at;
        d.new_spec = spec_of_segment_starting(res.segments, ev.change_point);
        dets.push_back(std::move(d));
      }
      break;
    }
  }
  return dets;
}

/// Index of the true change point an offline boundary belongs to, or -1 for
/// a false alarm. Offline locators place boundaries on either side of the
/// truth, so the boundary goes to the nearest change point, bounded by half
/// the gap to the neighboring change point on that side; toward the series
/// edges (before the first, after the last) there is no neighboring change
/// point and no bound applies.
int attribute_nearest(int at, const std::vector<int>& cps) {
  if (cps.empty()) return -1;
  int best = 0;
  for (std::size_t i = 1; i < cps.size(); ++i)
    if (std::abs(at - cps[i]) < std::abs(at - cps[best]))
      best = static_cast<int>(i);
  const int c = cps[static_cast<std::size_t>(best)];
  if (at < c && best > 0) {
    const int gap = c - cps[static_cast<std::size_t>(best) - 1];
    if (c - at > gap / 2) return -1;
  }
  if (at >= c && best + 1 < static_cast<int>(cps.size())) {
    const int gap = cps[static_cast<std::size_t>(best) + 1] - c;
    if (at - c > gap / 2) return -1;
  }
  return best;
}

/// Index of the last true change point at or before an online alarm, or -1
/// when the alarm fires before any change has happened and is therefore a
/// false alarm. A sequential monitor cannot see a change before it occurs,
/// so its delay is measured from the first alarm at or after the change.
int attribute_last_before(int at, const std::vector<int>& cps) {
  int idx = -1;
  for (std::size_t i = 0; i < cps.size(); ++i)
    if (cps[i] <= at) idx = static_cast<int>(i);
  return idx;
}

}  // namespace

ComparisonResult run_comparison(const std::vector<Scenario>& scenarios,
                                const std::vector<Method>& methods,
                                int n_seeds, const DetectorConfig& cfg) {
  if (scenarios.empty())
    throw std::invalid_argument("run_comparison: no scenarios");
  if (methods.empty()) throw std::invalid_argument("run_comparison: no methods");
  if (n_seeds < 1) throw std::invalid_argument("run_comparison: n_seeds < 1");
  cfg.validate();

  ComparisonResult out;
  for (const Scenario& sc : scenarios) {
    std::vector<Eigen::ArrayX2d> data_per_seed;
    data_per_seed.reserve(static_cast<std::size_t>(n_seeds));
    for (int si = 0; si < n_seeds; ++si) {
      Scenario run = sc;
      run.seed = sc.seed + static_cast<std::uint64_t>(si);
      data_per_seed.push_back(generate(run).data);
    }
    const std::vector<int> cps = sc.true_change_points();

    for (Method m : methods) {
      ComparisonSummary sum;
      sum.scenario = sc.name;
      sum.method = m;
      sum.n_runs = n_seeds * static_cast<int>(cps.size());
      std::vector<double> delays;

      for (int si = 0; si < n_seeds; ++si) {
        std::vector<Detection> dets;
        bool run_ok = true;
        try {
          dets = run_method(data_per_seed[static_cast<std::size_t>(si)], m,
                            cfg);
        } catch (const std::exception&) {
          run_ok = false;  // failure: this run's rows are simply missing
        }
        if (!run_ok) continue;

        // Offline boundaries go to the nearest true change point (ties to
        // the earlier one) and may land on either side of it; a spurious
        // early boundary must not displace a genuine later hit. Online
        // alarms go to the last change point at or before them, the first
        // such alarm fixes the delay, and repeated alarms within the same
        // regime count as false alarms.
        const bool online =
            m == Method::MovingWindow || m == Method::AcceleratedMW;
        std::vector<const Detection*> hit(cps.size(), nullptr);
        std::vector<const Detection*> extras;
        for (const Detection& d : dets) {
          const int idx = online ? attribute_last_before(d.at, cps)
                                 : attribute_nearest(d.at, cps);
          if (idx < 0) {
            extras.push_back(&d);
            continue;
          }
          const int cp = cps[static_cast<std::size_t>(idx)];
          auto& slot = hit[static_cast<std::size_t>(idx)];
          const bool better =
              slot == nullptr ||
              (online ? d.at < slot->at
                      : std::abs(d.at - cp) < std::abs(slot->at - cp) ||
                            (std::abs(d.at - cp) == std::abs(slot->at - cp) &&
                             d.at < slot->at));
          if (better) {
            if (slot != nullptr) extras.push_back(slot);
            slot = &d;
          } else {
            extras.push_back(&d);
          }
        }

        for (std::size_t i = 0; i < cps.size(); ++i) {
          ComparisonRow row;
          row.scenario = sc.name;
          row.method = m;
          row.seed_index = si;
          row.true_cp = cps[i];
          if (const Detection* d = hit[i]) {
            row.detected_cp = d->at;
            row.delay = d->at - cps[i];
            row.new_spec = d->new_spec;
            ++sum.n_detected;
            delays.push_back(static_cast<double>(*row.delay));
          }
          out.rows.push_back(std::move(row));
        }
        for (const Detection* d : extras) {
          ComparisonRow row;
          row.scenario = sc.name;
          row.method = m;
          row.seed_index = si;
          row.true_cp = 0;
          row.detected_cp = d->at;
          row.new_spec = d->new_spec;
          out.rows.push_back(std::move(row));
          ++sum.false_alarms;
        }
      }

      sum.detection_rate =
          sum.n_runs > 0
              ? static_cast<double>(sum.n_detected) / sum.n_runs
              : 0.0;
      if (delays.empty()) {
        sum.delay_median = std::nan("");
        sum.delay_iqr = std::nan("");
      } else {
        std::sort(delays.begin(), delays.end());
        sum.delay_median = detail::median_sorted(delays);
        sum.delay_iqr = detail::empirical_quantile(delays, 0.75) -
                        detail::empirical_quantile(delays, 0.25);
      }
      out.summaries.push_back(std::move(sum));
    }
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

double parse_num(const std::string& path, int line, const std::string& tok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    parse_fail(path, line, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size())
    parse_fail(path, line, "trailing characters in number '" + tok + "'");
  return v;
}

}  // namespace

std::vector<Scenario> parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);

  std::vector<Scenario> scenarios;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (tok[0] == "scenario") {
      if (tok.size() != 2 && tok.size() != 4)
        parse_fail(path, lineno, "expected 'scenario <name> [seed <n>]'");
      Scenario sc;
      sc.name = tok[1];
      if (tok.size() == 4) {
        if (tok[2] != "seed")
          parse_fail(path, lineno, "expected 'seed', got '" + tok[2] + "'");
        const double s = parse_num(path, lineno, tok[3]);
        if (s < 0 || s != std::floor(s))
          parse_fail(path, lineno, "seed must be a nonnegative integer");
        sc.seed = static_cast<std::uint64_t>(s);
      }
      scenarios.push_back(std::move(sc));
      continue;
    }

    if (tok[0] == "block") {
      if (scenarios.empty())
        parse_fail(path, lineno, "'block' before any 'scenario'");
      if (tok.size() < 4)
        parse_fail(path, lineno,
                   "expected 'block <family> <params...> <length>'");
      Family fam;
      try {
        fam = family_from_name(tok[1]);
      } catch (const std::exception&) {
        parse_fail(path, lineno, "unknown family '" + tok[1] + "'");
      }
      const std::size_t nparams = fam == Family::StudentT ? 2 : 1;
      if (tok.size() != 3 + nparams)
        parse_fail(path, lineno,
                   "wrong parameter count for family '" + tok[1] + "'");
      ScenarioBlock b;
      try {
        // The factories validate on construction, so domain errors (rho
        // outside (-1,1), nu off the grid, ...) surface here.
        switch (fam) {
          case Family::Gaussian:
            b.spec = CopulaSpec::gaussian(parse_num(path, lineno, tok[2]));
            break;
          case Family::StudentT:
            b.spec = CopulaSpec::student_t(parse_num(path, lineno, tok[2]),
                                           parse_num(path, lineno, tok[3]));
            break;
          case Family::Clayton:
            b.spec = CopulaSpec::clayton(parse_num(path, lineno, tok[2]));
            break;
        }
      } catch (const std::runtime_error&) {
        throw;  // parse_num already attached the location
      } catch (const std::exception& e) {
        parse_fail(path, lineno, e.what());
      }
      const double len = parse_num(path, lineno, tok.back());
      if (len <= 0 || len != std::floor(len))
        parse_fail(path, lineno, "block length must be a positive integer");
      b.length = static_cast<int>(len);
      scenarios.back().blocks.push_back(std::move(b));
      continue;
    }

    parse_fail(path, lineno, "unknown directive '" + tok[0] + "'");
  }

  if (scenarios.empty())
    throw std::runtime_error(path + ": no scenarios defined");
  for (const Scenario& sc : scenarios)
    if (sc.blocks.empty())
      throw std::runtime_error(path + ": scenario '" + sc.name +
                               "' has no blocks");
  return scenarios;
}

}  // namespace dyncop

#pragma once

// Scenario generation for piecewise-copula data and the multi-seed detector
// comparison harness.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyncop/copula.hpp"
#include "dyncop/detect.hpp"

namespace dyncop {

struct ScenarioBlock {
  CopulaSpec spec;
  int length = 0;
};

struct Scenario {
  std::string name;
  std::vector<ScenarioBlock> blocks;
  std::uint64_t seed = 1;

  int t_len() const;
  /// 1-based indices of the first observation of each non-initial block
  /// (e.g. two blocks of 5000 -> {5001}).
  std::vector<int> true_change_points() const;
};

struct GeneratedData {
  Eigen::ArrayX2d data;                // T x 2 copula draws, block-concatenated
  std::vector<int> true_change_points; // 1-based
};

/// Seeded per-block sampling (block b uses a seed derived from scenario.seed
/// and b, so prefixes are stable under block edits further right).
GeneratedData generate(const Scenario& scenario);

enum class Method { BinarySegmentation, MovingWindow, AcceleratedMW, BottomUp };

const char* method_name(Method m);
Method method_from_name(const std::string& name);  // throws std::invalid_argument

struct ComparisonRow {
  std::string scenario;
  Method method = Method::MovingWindow;
  int seed_index = 0;
  int true_cp = 0;                  // 1-based; 0 on a false-alarm row
  std::optional<int> detected_cp;   // observation count (real-time) or 1-based segment start (retrospective)
  std::optional<int> delay;         // detected_cp - true_cp
  std::optional<CopulaSpec> new_spec;
};

struct ComparisonSummary {
  std::string scenario;
  Method method = Method::MovingWindow;
  int n_runs = 0;          // seeds x true change points
  int n_detected = 0;
  double detection_rate = 0.0;
  double delay_median = 0.0;  // NaN when nothing was detected
  double delay_iqr = 0.0;
  int false_alarms = 0;
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonSummary> summaries;
};

/// Runs every (scenario, method, seed) combination, attributes detections to
/// the nearest true change point within half the inter-change gap, and
/// aggregates detection rate and delay quantiles. Per-run failures become
/// missing rows; the run continues. Throws std::invalid_argument on empty
/// scenario or method lists, or n_seeds < 1.
ComparisonResult run_comparison(const std::vector<Scenario>& scenarios,
                                const std::vector<Method>& methods,
                                int n_seeds, const DetectorConfig& cfg);

/// Plain-text scenario format: one `scenario <name> [seed <n>]` header per
/// scenario followed by `block <family> <params...> <length>` lines; `#`
/// comments. Throws std::runtime_error with a line number on parse errors.
std::vector<Scenario> parse_scenario_file(const std::string& path);

}  // namespace dyncop

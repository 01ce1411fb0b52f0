#pragma once

// CSV/JSON-lines serialization shared by the CLI and the test harness.
// Floating-point values are written with a fixed "%.12g" so identical inputs
// produce byte-identical files.

#include <optional>
#include <string>
#include <vector>

#include "dyncop/detect.hpp"
#include "dyncop/risk.hpp"
#include "dyncop/sim.hpp"

namespace dyncop {

/// Bivariate input table: header `date,asset1,asset2` (the date column is
/// optional; `asset1,asset2` alone is accepted).
struct SeriesCsv {
  std::vector<std::string> dates;  // empty when the file had no date column
  std::vector<double> asset1;
  std::vector<double> asset2;
};

/// Throws std::runtime_error with a line number on unreadable/ragged rows.
SeriesCsv read_series_csv(const std::string& path);

/// Stable float formatting used by every writer.
std::string fmt_g(double v);

/// One JSON object per line:
/// {"schema":"segments.v1","start":...,"end":...,"start_date":...,
///  "end_date":...,"family":...,"params":[...],"change_type":...}
/// Indices are 1-based inclusive in the serialized form; dates pass through
/// when provided (indexed by observation). change_type for segment i>0 names
/// the family transition, e.g. "Gaussian->Clayton" or "parameter".
void write_segments_jsonl(const std::string& path,
                          const std::vector<Segment>& segments,
                          const std::vector<std::string>& dates = {});

/// Reads back write_segments_jsonl output. Only the boundaries and the copula
/// spec survive the round trip (fit diagnostics are not serialized);
/// fit.converged is set so the spec is usable downstream. Throws
/// std::runtime_error with a line number on malformed input.
std::vector<Segment> read_segments_jsonl(const std::string& path);

void write_events_csv(const std::string& path,
                      const std::vector<DetectionEvent>& events);

void write_risk_csv(const std::string& path,
                    const std::vector<RiskPoint>& points,
                    const std::vector<std::string>& dates = {},
                    bool plot_sign = false);

/// Risk CSV reader (round-trips write_risk_csv's schema; sign flag must match).
std::vector<RiskPoint> read_risk_csv(const std::string& path,
                                     bool plot_sign = false);

void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonRow>& rows);

void write_summary_csv(const std::string& path,
                       const std::vector<ComparisonSummary>& summaries);

void write_series_csv(const std::string& path, const Eigen::ArrayX2d& data,
                      const std::vector<std::string>& dates = {});

}  // namespace dyncop

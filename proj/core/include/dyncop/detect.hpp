#pragma once

// Change-point detection over a bivariate series: two retrospective methods
// (binary segmentation, bottom-up merging) and two real-time monitors
// (moving window, accelerated moving window with warning/control limits).

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dyncop/fit.hpp"
#include "dyncop/gof.hpp"
#include "dyncop/pseudo.hpp"

namespace dyncop {

struct DetectorConfig {
  int n_window = 500;    // N: moving-window length
  int step = 120;        // K: roll distance and post-detection retention
  int n_min = 200;       // N_min: accelerated-window restart length
  int growth = 50;       // D: accelerated-window growth increment
  int max_window = 500;  // L: accelerated-window cap before rolling
  double alpha_w = 0.85; // warning limit level (WLL)
  double alpha_c = 0.95; // control limit level (CLL)
  int bu_min = 100;      // initial bottom-up block length
  int min_fit = 60;      // binary-segmentation minimum leaf size
  std::vector<Family> families = {Family::Gaussian, Family::StudentT,
                                  Family::Clayton};
  std::uint64_t seed = 1;
  int mc_draws = 4096;   // Monte-Carlo draws inside each goodness-of-fit call

  void validate() const;  // throws std::invalid_argument
};

/// Half-open [start, end) with the fit and test evaluated on that range.
/// Segments in a report are contiguous, ordered, and cover [0, T).
struct Segment {
  int start = 0;
  int end = 0;
  FitResult fit;
  GofResult gof;
};

enum class Crossed { WLL, CLL };

struct DetectionEvent {
  int detected_at = 0;   // observation count when the limit was crossed
  int change_point = 0;  // boundary assigned (last K observations retained)
  Crossed crossed = Crossed::CLL;
  double statistic = 0.0;
};

struct MonitorResult {
  std::vector<Segment> segments;
  std::vector<DetectionEvent> events;
};

/// Recursive splitting: AIC fit + test on a range; on rejection at alpha_c the
/// range splits at its midpoint and both halves recurse (stopping when a half
/// would drop below min_fit); afterwards adjacent leaves whose pooled refit
/// keeps the family and passes the test are merged back. A branch whose fit
/// fails becomes a leaf with fit.converged == false rather than aborting the
/// run. Throws std::invalid_argument when t_len < 2*min_fit.
std::vector<Segment> binary_segmentation(const PseudoSample& ps,
                                         const DetectorConfig& cfg = {});

/// Fixed N-window rolled forward by K. Each window is re-ranked, the current
/// family's parameter is refitted, and the statistic is compared with the
/// control limit; a crossing keeps the last K observations as the new segment
/// start and refits the family by AIC. Throws when t_len < N.
MonitorResult moving_window(const PseudoSample& ps,
                            const DetectorConfig& cfg = {});

/// Two-phase monitor. CALM grows the window from N_min by D up to L then
/// rolls by K, comparing with the warning limit; a crossing restarts the
/// window (last K kept) and arms ALERT. ALERT runs the same dynamics against
/// the control limit: a crossing records the change point and returns to
/// CALM; segments are delimited by control-limit events only. Throws when
/// t_len < N_min.
MonitorResult accelerated_moving_window(const PseudoSample& ps,
                                        const DetectorConfig& cfg = {});

/// Partition into bu_min-length blocks (raised to 30, the smallest sample a
/// fit accepts), AIC fit + test per block; while more blocks reject at
/// alpha_c than twice the chance false-alarm count, the block length shrinks
/// (x0.8, floor 27) and the partition restarts. Then
/// merge layer by layer, left to right: adjacent
/// segments merge when the families match, the pooled AIC refit keeps that
/// family, and the pooled statistic stays below the control limit. A segment
/// no longer than 2*bu_min may also merge into a strictly longer neighbor of
/// a different family when the pooled refit returns the neighbor's family and
/// passes. Throws when t_len < 2*bu_min.
std::vector<Segment> bottom_up(const PseudoSample& ps,
                               const DetectorConfig& cfg = {});

/// Incremental front end for the two real-time monitors: rows arrive in
/// batches, the state machine advances as soon as enough data is buffered,
/// and crossing events are returned per push. Rows may be raw observations or
/// any strictly increasing transform of them (windows re-rank internally).
class Monitor {
 public:
  enum class Kind { MovingWindow, Accelerated };

  Monitor(Kind kind, const DetectorConfig& cfg);
  ~Monitor();
  Monitor(Monitor&&) noexcept;
  Monitor& operator=(Monitor&&) noexcept;

  /// Append rows; returns the events whose crossing happened inside them.
  std::vector<DetectionEvent> push(const Eigen::ArrayX2d& rows);
  /// All events so far.
  const std::vector<DetectionEvent>& events() const;
  /// Segmentation of everything seen so far (final partial segment included).
  std::vector<Segment> segments() const;
  int observations() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dyncop

#include "dyncop/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "internal/rng.hpp"

namespace dyncop {

namespace {

/// Deterministic per-range Monte-Carlo seed so disjoint windows can be
/// evaluated in any order (or concurrently) with identical results.
std::uint64_t window_seed(std::uint64_t base, int s, int e) {
  return detail::mix_seed(
      base, static_cast<std::uint64_t>(s) * 2654435761ull +
                static_cast<std::uint64_t>(e));
}

/// Row slice keeping the caller's (global) ranks.
PseudoSample slice_rows(const PseudoSample& ps, int s, int e) {
  PseudoSample out;
  out.u = ps.u.middleRows(s, e - s);
  return out;
}

struct RangeEval {
  FitResult fit;
  GofResult gof;
  bool ok = false;
};

/// AIC family selection plus the test on one range; failures are contained
/// (the range is reported unconverged, never aborting the whole run).
RangeEval eval_range(const PseudoSample& sl, const DetectorConfig& cfg,
                     std::uint64_t seed) {
  RangeEval r;
  try {
    r.fit = select_family(sl, cfg.families);
    GofConfig gc;
    gc.mc_draws = cfg.mc_draws;
    gc.seed = seed;
    r.gof = info_matrix_test(sl, r.fit.spec, gc);
    r.ok = true;
  } catch (const std::exception&) {
    r.ok = false;
  }
  return r;
}

double limit(const GofResult& g, double alpha) {
  return chi2_quantile(g.dof, alpha);
}

}  // namespace

void DetectorConfig::validate() const {
  const auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  if (n_window < 30) fail("DetectorConfig: n_window must be >= 30");
  if (step <= 0 || step > n_window)
    fail("DetectorConfig: need 0 < step <= n_window");
  if (n_min < 30) fail("DetectorConfig: n_min must be >= 30");
  if (n_min > max_window) fail("DetectorConfig: need n_min <= max_window");
  if (growth <= 0) fail("DetectorConfig: growth must be positive");
  if (!(alpha_w > 0.0 && alpha_w < alpha_c && alpha_c < 1.0))
    fail("DetectorConfig: need 0 < alpha_w < alpha_c < 1");
  if (bu_min < 27) fail("DetectorConfig: bu_min must be >= 27");
  if (min_fit < 30) fail("DetectorConfig: min_fit must be >= 30");
  if (families.empty()) fail("DetectorConfig: families must be non-empty");
  if (mc_draws < 1000) fail("DetectorConfig: mc_draws must be >= 1000");
}

// ---------------------------------------------------------------------------
// binary segmentation
// ---------------------------------------------------------------------------

namespace {

void bs_recurse(const PseudoSample& ps, const DetectorConfig& cfg, int s,
                int e, std::vector<Segment>& leaves) {
  Segment leaf;
  leaf.start = s;
  leaf.end = e;
  bool reject = false;
  const RangeEval ev =
      eval_range(slice_rows(ps, s, e), cfg, window_seed(cfg.seed, s, e));
  if (ev.ok) {
    leaf.fit = ev.fit;
    leaf.gof = ev.gof;
    reject = ev.gof.statistic > limit(ev.gof, cfg.alpha_c);
  }
  const int mid = s + (e - s) / 2;
  if (reject && mid - s >= cfg.min_fit && e - mid >= cfg.min_fit) {
    bs_recurse(ps, cfg, s, mid, leaves);
    bs_recurse(ps, cfg, mid, e, leaves);
  } else {
    leaves.push_back(std::move(leaf));
  }
}

}  // namespace

std::vector<Segment> binary_segmentation(const PseudoSample& ps,
                                         const DetectorConfig& cfg) {
  cfg.validate();
  if (ps.t_len() < 2 * cfg.min_fit)
    throw std::invalid_argument("binary_segmentation: t_len < 2*min_fit");

  std::vector<Segment> segs;
  bs_recurse(ps, cfg, 0, ps.t_len(), segs);

  // Midpoint splits overshoot; rejoin adjacent leaves whose pooled refit
  // keeps the family and passes the test.
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i + 1 < segs.size();) {
      Segment& a = segs[i];
      const Segment& b = segs[i + 1];
      if (a.fit.converged && b.fit.converged &&
          a.fit.spec.family == b.fit.spec.family) {
        const RangeEval ev = eval_range(slice_rows(ps, a.start, b.end), cfg,
                                        window_seed(cfg.seed, a.start, b.end));
        if (ev.ok && ev.fit.spec.family == a.fit.spec.family &&
            ev.gof.statistic <= limit(ev.gof, cfg.alpha_c)) {
          a.end = b.end;
          a.fit = ev.fit;
          a.gof = ev.gof;
          segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(i) + 1);
          merged = true;
          continue;
        }
      }
      ++i;
    }
  }
  return segs;
}

// ---------------------------------------------------------------------------
// bottom-up merging
// ---------------------------------------------------------------------------

std::vector<Segment> bottom_up(const PseudoSample& ps,
                               const DetectorConfig& cfg) {
  cfg.validate();
  const int t = ps.t_len();
  if (t < 2 * cfg.bu_min)
    throw std::invalid_argument("bottom_up: t_len < 2*bu_min");

  struct Block {
    int s = 0, e = 0;
    bool ok = false;
    FitResult fit;
    GofResult gof;
  };

  // Initial partition; while any block rejects, shrink the nominal block
  // length (x0.8, floor 27) and repartition. Actual blocks are never shorter
  // than 30 observations, the smallest sample a fit accepts.
  int b = cfg.bu_min;
  int blen = std::max(b, 30);
  std::vector<Block> blocks;
  for (;;) {
    blocks.clear();
    const int nb = t / blen;
    std::vector<int> bounds;
    bounds.reserve(static_cast<std::size_t>(nb) + 2);
    for (int i = 0; i <= nb; ++i) bounds.push_back(i * blen);
    const int rem = t - nb * blen;
    if (rem > 0) {
      if (rem >= std::max(30, blen / 2))
        bounds.push_back(t);  // remainder stands on its own
      else
        bounds.back() = t;  // too short: absorbed into the previous block
    }
    int n_reject = 0;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      Block blk;
      blk.s = bounds[i];
      blk.e = bounds[i + 1];
      const RangeEval ev = eval_range(slice_rows(ps, blk.s, blk.e), cfg,
                                      window_seed(cfg.seed, blk.s, blk.e));
      if (ev.ok) {
        blk.ok = true;
        blk.fit = ev.fit;
        blk.gof = ev.gof;
        if (blk.gof.statistic > limit(blk.gof, cfg.alpha_c)) ++n_reject;
      }
      blocks.push_back(std::move(blk));
    }
    // Rejections at chance level carry no length signal: a level-alpha_c test
    // falsely rejects about (1-alpha_c) of the blocks, so with many blocks
    // "any rejection" would always fire and the partition would collapse to
    // the floor. Shrink only when rejections exceed twice the expected
    // false-alarm count, the signature of blocks straddling change points.
    const double budget = std::max(
        1.0, std::ceil(2.0 * (1.0 - cfg.alpha_c) *
                       static_cast<double>(blocks.size())));
    if (static_cast<double>(n_reject) <= budget) break;
    const int shrunk = std::max(static_cast<int>(b * 0.8), 27);
    const int next_len = std::max(shrunk, 30);
    if (shrunk >= b || next_len == blen) break;
    b = shrunk;
    blen = next_len;
  }

  // Merge layer by layer, left to right over non-overlapping pairs. Same
  // family merges when the pooled refit keeps it and passes; a block no
  // longer than twice the working block length may also be absorbed by a
  // longer neighbor of a different family when the pooled refit returns the
  // neighbor's family and passes.
  bool merged_any = true;
  while (merged_any) {
    merged_any = false;
    std::vector<Block> next;
    next.reserve(blocks.size());
    std::size_t i = 0;
    while (i < blocks.size()) {
      bool did = false;
      if (i + 1 < blocks.size() && blocks[i].ok && blocks[i + 1].ok) {
        const Block& a = blocks[i];
        const Block& c = blocks[i + 1];
        Family target = a.fit.spec.family;
        bool eligible = a.fit.spec.family == c.fit.spec.family;
        if (!eligible) {
          const bool a_short = a.e - a.s <= 2 * blen;
          const bool c_short = c.e - c.s <= 2 * blen;
          if (a_short != c_short) {
            eligible = true;
            target = a_short ? c.fit.spec.family : a.fit.spec.family;
          }
        }
        if (eligible) {
          const RangeEval ev = eval_range(slice_rows(ps, a.s, c.e), cfg,
                                          window_seed(cfg.seed, a.s, c.e));
          if (ev.ok && ev.fit.spec.family == target &&
              ev.gof.statistic <= limit(ev.gof, cfg.alpha_c)) {
            Block pooled;
            pooled.s = a.s;
            pooled.e = c.e;
            pooled.ok = true;
            pooled.fit = ev.fit;
            pooled.gof = ev.gof;
            next.push_back(std::move(pooled));
            i += 2;
            did = true;
            merged_any = true;
          }
        }
      }
      if (!did) {
        next.push_back(blocks[i]);
        ++i;
      }
    }
    blocks.swap(next);
  }

  std::vector<Segment> segs;
  segs.reserve(blocks.size());
  for (auto& blk : blocks) {
    Segment s;
    s.start = blk.s;
    s.end = blk.e;
    s.fit = std::move(blk.fit);
    s.gof = std::move(blk.gof);
    segs.push_back(std::move(s));
  }
  return segs;
}

// ---------------------------------------------------------------------------
// moving-window monitors (shared incremental engine)
// ---------------------------------------------------------------------------

namespace {

/// State machine behind moving_window, accelerated_moving_window, and the
/// incremental Monitor. Windows are re-ranked so decisions at time t never
/// use ranks that depend on later observations.
struct Engine {
  DetectorConfig cfg;
  bool accel = false;

  Eigen::ArrayX2d rows{0, 2};
  int n = 0;

  bool fit_pending = true;  // next action is an AIC (re)fit, not a test
  bool alert = false;       // accelerated monitor armed by a warning crossing
  bool have_family = false;
  Family family = Family::Gaussian;
  int base = 0;                    // segment base: last retained boundary
  int win_start = 0, win_end = 0;  // range of the next action

  std::vector<DetectionEvent> events;
  std::vector<int> change_points;

  Engine(bool accel_, const DetectorConfig& c) : cfg(c), accel(accel_) {
    cfg.validate();
    win_start = 0;
    win_end = accel ? cfg.n_min : cfg.n_window;
  }

  void append(const Eigen::ArrayX2d& r) {
    const int add = static_cast<int>(r.rows());
    if (n + add > rows.rows()) {
      Eigen::ArrayX2d grown(std::max<Eigen::Index>(2 * rows.rows(), n + add),
                            2);
      grown.topRows(n) = rows.topRows(n);
      rows.swap(grown);
    }
    rows.middleRows(n, add) = r;
    n += add;
  }

  PseudoSample window(int s, int e) const {
    return pseudo_observations(rows.middleRows(s, e - s));
  }

  void schedule_after_fit() {
    if (accel) {
      grow_or_roll(base, base + cfg.n_min);
    } else {
      win_start += cfg.step;
      win_end += cfg.step;
    }
  }

  void schedule_next_test() {
    if (accel) {
      grow_or_roll(win_start, win_end);
    } else {
      win_start += cfg.step;
      win_end += cfg.step;
    }
  }

  void grow_or_roll(int s, int e) {
    const int w = e - s;
    if (w < cfg.max_window) {
      win_start = s;
      win_end = e + std::min(cfg.growth, cfg.max_window - w);
    } else {
      win_end = e + cfg.step;
      win_start = win_end - cfg.max_window;
    }
  }

  void on_crossing(double stat) {
    DetectionEvent ev;
    ev.detected_at = win_end;
    ev.change_point = std::max(win_end - cfg.step, base);
    ev.statistic = stat;
    const bool is_cll = !accel || alert;
    ev.crossed = is_cll ? Crossed::CLL : Crossed::WLL;
    events.push_back(ev);
    base = ev.change_point;
    if (is_cll) {
      change_points.push_back(ev.change_point);
      alert = false;
    } else {
      alert = true;
    }
    fit_pending = true;
    win_start = base;
    win_end = base + (accel ? cfg.n_min : cfg.n_window);
  }

  void step() {
    const PseudoSample w = window(win_start, win_end);
    if (fit_pending || !have_family) {
      try {
        family = select_family(w, cfg.families).spec.family;
        have_family = true;
      } catch (const std::exception&) {
        // keep monitoring with the previous family, or retry at the next step
      }
      const bool was_fit = fit_pending;
      fit_pending = false;
      if (was_fit)
        schedule_after_fit();
      else
        schedule_next_test();
      return;
    }
    bool rejected = false;
    double stat = 0.0;
    try {
      const FitResult f = fit_copula(w, family);
      if (f.converged) {
        GofConfig gc;
        gc.mc_draws = cfg.mc_draws;
        gc.seed = window_seed(cfg.seed, win_start, win_end);
        const GofResult g = info_matrix_test(w, f.spec, gc);
        stat = g.statistic;
        const double alpha = accel && !alert ? cfg.alpha_w : cfg.alpha_c;
        rejected = stat > limit(g, alpha);
      }
    } catch (const std::exception&) {
      rejected = false;  // untestable window: treated as non-rejecting
    }
    if (rejected)
      on_crossing(stat);
    else
      schedule_next_test();
  }

  std::vector<DetectionEvent> push(const Eigen::ArrayX2d& r) {
    const std::size_t before = events.size();
    append(r);
    while (n >= win_end) step();
    return {events.begin() + static_cast<std::ptrdiff_t>(before),
            events.end()};
  }

  std::vector<Segment> segments() const {
    std::vector<Segment> out;
    if (n == 0) return out;
    std::vector<int> bounds;
    bounds.push_back(0);
    for (int cp : change_points) bounds.push_back(cp);
    bounds.push_back(n);
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      Segment seg;
      seg.start = bounds[i];
      seg.end = bounds[i + 1];
      if (seg.end - seg.start >= 30) {
        const RangeEval ev =
            eval_range(window(seg.start, seg.end), cfg,
                       window_seed(cfg.seed, seg.start, seg.end));
        if (ev.ok) {
          seg.fit = ev.fit;
          seg.gof = ev.gof;
        }
      }
      out.push_back(std::move(seg));
    }
    return out;
  }
};

MonitorResult run_monitor(const PseudoSample& ps, const DetectorConfig& cfg,
                          bool accel) {
  cfg.validate();
  const int need = accel ? cfg.n_min : cfg.n_window;
  if (ps.t_len() < need)
    throw std::invalid_argument(accel
                                    ? "accelerated_moving_window: t_len < n_min"
                                    : "moving_window: t_len < n_window");
  Engine eng(accel, cfg);
  eng.push(ps.u);
  MonitorResult res;
  res.events = eng.events;
  res.segments = eng.segments();
  return res;
}

}  // namespace

MonitorResult moving_window(const PseudoSample& ps,
                            const DetectorConfig& cfg) {
  return run_monitor(ps, cfg, false);
}

MonitorResult accelerated_moving_window(const PseudoSample& ps,
                                        const DetectorConfig& cfg) {
  return run_monitor(ps, cfg, true);
}

// ---------------------------------------------------------------------------
// incremental front end
// ---------------------------------------------------------------------------

struct Monitor::Impl {
  Engine engine;
  Impl(bool accel, const DetectorConfig& cfg) : engine(accel, cfg) {}
};

Monitor::Monitor(Kind kind, const DetectorConfig& cfg)
    : impl_(std::make_unique<Impl>(kind == Kind::Accelerated, cfg)) {}

Monitor::~Monitor() = default;
Monitor::Monitor(Monitor&&) noexcept = default;
Monitor& Monitor::operator=(Monitor&&) noexcept = default;

std::vector<DetectionEvent> Monitor::push(const Eigen::ArrayX2d& rows) {
  return impl_->engine.push(rows);
}

const std::vector<DetectionEvent>& Monitor::events() const {
  return impl_->engine.events;
}

std::vector<Segment> Monitor::segments() const {
  return impl_->engine.segments();
}

int Monitor::observations() const { return impl_->engine.n; }

}  // namespace dyncop

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "krasno/function_model.hpp"

namespace krasno {

enum class StartSign { above, below, fixed };
enum class TravelDirection { increasing, decreasing, stationary };

/// Where the sequence starts relative to the diagonal and which way it will
/// travel. `guaranteed` is set only when the monotone-convergence hypotheses
/// (finite domain, asserted self-map, t <= 1/(1+L)) all hold.
struct ModeReport {
  StartSign initial_sign;
  bool guaranteed;
  TravelDirection direction;
};

/// Hypotheses a caller can supply to classify_start to have `guaranteed`
/// evaluated.
struct GuaranteeClaim {
  SlopeBound bound;
  double t;
  bool self_map;
};

/// One damped step (1 - t) * x + t * h(x).
inline double kras_step(const RealFunction& h, double x, double t) {
  if (!h.domain().contains(x)) {
    throw DomainError("kras_step: x = " + format_double(x) + " outside the domain");
  }
  if (!(t > 0.0 && t <= 1.0)) throw PreconditionError("kras_step: t must lie in (0, 1]");
  return (1.0 - t) * x + t * h(x);
}

inline ModeReport classify_start(const RealFunction& h, double x0, double tol,
                                 const std::optional<GuaranteeClaim>& claim = std::nullopt) {
  if (!h.domain().contains(x0)) {
    throw DomainError("classify_start: x0 = " + format_double(x0) + " outside the domain");
  }
  const double gap = h(x0) - x0;
  ModeReport report{StartSign::fixed, false, TravelDirection::stationary};
  if (std::abs(gap) > tol) {
    report.initial_sign = gap > 0 ? StartSign::above : StartSign::below;
    report.direction = gap > 0 ? TravelDirection::increasing : TravelDirection::decreasing;
  }
  if (claim) {
    report.guaranteed = claim->self_map && h.domain().is_finite() && claim->t > 0.0 &&
                        claim->t <= max_relaxation(claim->bound);
  }
  return report;
}

/// safety * 1 / (1 + L).
inline double choose_t(const SlopeBound& L, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) {
    throw PreconditionError("choose_t: safety must lie in (0, 1], got " + format_double(safety));
  }
  return safety * max_relaxation(L);
}

enum class ResidualMode { fixed_point, root };

namespace detail {

inline double residual(ResidualMode mode, double x, double hx) {
  return mode == ResidualMode::fixed_point ? std::abs(hx - x) : std::abs(hx);
}

inline double signed_residual(ResidualMode mode, double x, double hx) {
  return mode == ResidualMode::fixed_point ? hx - x : hx;
}

/// Length of the first outward monotone run that triggers an escape probe;
/// later probes happen each time the run length doubles.
inline constexpr std::size_t kEscapeRun = 32;
inline constexpr int kEscapeProbes = 512;

/// True when the signed residual keeps the sign it has at `x`, and at least a
/// tenth of its size, at every probe point between x and the divergence
/// threshold in direction `dir`. Probe offsets are log-spaced from `pitch`
/// outwards. The size floor keeps a tangential touch of zero from passing. A
/// probe that fails to evaluate counts as a possible fixed point.
template <class Value>
bool no_candidate_ahead(Value& value, ResidualMode mode, double x, double res_at_x, double dir,
                        double pitch, double threshold) {
  const double reach = threshold + std::abs(x);
  pitch = std::max(pitch, std::numeric_limits<double>::min());
  if (pitch >= reach) return true;
  const double ratio = std::log(reach / pitch) / (kEscapeProbes - 1);
  for (int k = 0; k < kEscapeProbes; ++k) {
    const double p = x + dir * pitch * std::exp(ratio * k);
    try {
      const double r = signed_residual(mode, p, value(p));
      if (!(r * res_at_x > 0) || std::abs(r) < 0.1 * std::abs(res_at_x)) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

struct DriveOptions {
  ResidualMode mode = ResidualMode::fixed_point;
  /// Leaving a finite endpoint raises PreconditionError instead of
  /// producing ExitedInterval.
  bool forbid_exit = false;
};

/// Shared iteration loop. `value(x)` evaluates the map whose residual is
/// monitored, `step(x, value(x))` produces the next iterate.
///
/// Converged requires |residual| <= tol and a step no larger than
/// tol * max(1, |x_n|); an exactly zero residual is accepted on its own
/// because the sequence is constant from there on.
template <class Value, class Step>
IterationTrace drive(double x0, const Interval& domain, const IterationConfig& cfg,
                     Value&& value, Step&& step, DriveOptions opts) {
  cfg.validate();
  if (!domain.contains(x0)) {
    throw DomainError("x0 = " + format_double(x0) + " outside the domain");
  }
  std::vector<double> xs{x0};
  try {
    double x = x0;
    double hx = value(x);
    double r = residual(opts.mode, x, hx);
    if (r <= cfg.tol) return {std::move(xs), Converged{x, r, 0}};

    double run_dir = 0.0;
    std::size_t run = 0;
    std::size_t next_probe = kEscapeRun;

    for (std::size_t n = 1; n <= cfg.max_iter; ++n) {
      const double next = step(x, hx);
      if (std::isnan(next)) {
        throw EvaluationError("iterate became NaN after x = " + format_double(x));
      }
      if (!domain.contains_with_slack(next, cfg.edge_tol)) {
        const ExitSide side = next < domain.lo() ? ExitSide::below_lo : ExitSide::above_hi;
        if (opts.forbid_exit) {
          throw PreconditionError("iterate " + format_double(next) + " left [" +
                                  format_double(domain.lo()) + ", " + format_double(domain.hi()) +
                                  "]; the self-map assertion or the slope bound is wrong");
        }
        return {std::move(xs), ExitedInterval{side, x, next}};
      }
      xs.push_back(next);

      // Escape on an unbounded side: past the threshold and still moving outwards.
      if (std::abs(next) > cfg.divergence_threshold && std::abs(next) > std::abs(x)) {
        if (next > 0 && !domain.bounded_above()) {
          return {std::move(xs), Diverged{InfinitySign::positive, next}};
        }
        if (next < 0 && !domain.bounded_below()) {
          return {std::move(xs), Diverged{InfinitySign::negative, next}};
        }
      }

      const double hn = value(next);
      r = residual(opts.mode, next, hn);

      const bool small_step = std::abs(next - x) <= cfg.tol * std::max(1.0, std::abs(x));
      if (r <= cfg.tol && (small_step || r == 0.0)) {
        return {std::move(xs), Converged{next, r, n}};
      }
      // Monotone escape: a long run in one direction towards an unbounded
      // side and no sign of a fixed point anywhere up to the threshold.
      const double dir = next > x ? 1.0 : (next < x ? -1.0 : 0.0);
      if (dir != 0.0 && dir == run_dir) {
        ++run;
      } else {
        run = 1;
        run_dir = dir;
        next_probe = kEscapeRun;
      }
      const bool open_side = dir > 0 ? !domain.bounded_above() : !domain.bounded_below();
      if (dir != 0.0 && open_side && run >= next_probe) {
        next_probe *= 2;
        const double s = signed_residual(opts.mode, next, hn);
        if (s != 0.0 && no_candidate_ahead(value, opts.mode, next, s, dir, std::abs(next - x),
                                           cfg.divergence_threshold)) {
          return {std::move(xs), Diverged{dir > 0 ? InfinitySign::positive : InfinitySign::negative,
                                          next}};
        }
      }

      x = next;
      hx = hn;
    }
    return {std::move(xs), BudgetExhausted{x}};
  } catch (Error& e) {
    e.attach_trace(xs);
    throw;
  }
}

}  // namespace detail

/// Damped fixed-point iteration x_{n+1} = (1 - t) x_n + t h(x_n) on h's
/// domain, classified as converged, diverged (unbounded side only), exited
/// (finite endpoint) or out of budget. Any t in (0, 1] is accepted; the
/// outcome is reported as observed.
inline IterationTrace iterate(const RealFunction& h, double x0, const IterationConfig& cfg) {
  const double t = cfg.t;
  return detail::drive(
      x0, h.domain(), cfg, [&h](double x) { return h(x); },
      [t](double x, double hx) { return (1.0 - t) * x + t * hx; }, {});
}

/// Iteration under the monotone-convergence hypotheses: finite domain, h a
/// self-map of it (caller-asserted) and t <= 1/(1+L). Result is Converged or
/// BudgetExhausted; an iterate leaving the domain means the assertion was
/// false and raises PreconditionError.
inline IterationTrace iterate_hillam(const RealFunction& h, const SlopeBound& L, double x0,
                                     const IterationConfig& cfg) {
  if (!h.domain().is_finite()) {
    throw PreconditionError("iterate_hillam requires a finite domain");
  }
  if (cfg.t > max_relaxation(L)) {
    throw PreconditionError("iterate_hillam: t = " + format_double(cfg.t) +
                            " exceeds 1/(1+L) = " + format_double(max_relaxation(L)));
  }
  const double t = cfg.t;
  return detail::drive(
      x0, h.domain(), cfg, [&h](double x) { return h(x); },
      [t](double x, double hx) { return (1.0 - t) * x + t * hx; },
      {ResidualMode::fixed_point, true});
}

}  // namespace krasno

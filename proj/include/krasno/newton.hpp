#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "krasno/engine.hpp"
#include "krasno/function_model.hpp"

namespace krasno {

/// |h'(x)| below this is treated as a vanishing derivative.
inline constexpr double kDerivativeZero = 1e-300;

namespace detail {

inline double checked_slope(const RealFunction& h, double x) {
  const double d = h.d1(x);
  if (std::abs(d) < kDerivativeZero) {
    throw DerivativeZeroError("h'(" + format_double(x) + ") = " + format_double(d) + " vanishes", x);
  }
  return d;
}

}  // namespace detail

/// g(x) = x - 2 h(x) / h'(x). Roots of h are fixed points of g, and the
/// Newton step is the average of x and g(x).
inline double g_transform(const RealFunction& h, double x) {
  const double d = detail::checked_slope(h, x);
  return x - 2.0 * h(x) / d;
}

inline double newton_step(const RealFunction& h, double x) {
  const double d = detail::checked_slope(h, x);
  return x - h(x) / d;
}

/// g as a RealFunction on h's domain, for feeding to the damped engine.
inline RealFunction g_function(const RealFunction& h) {
  return RealFunction([h](double x) { return g_transform(h, x); }, h.domain());
}

enum class RootSide {
  /// Root at the right end c of [a, c]; h h' < 0 on [a, c).
  root_above,
  /// Root at the left end c of [c, b]; h h' > 0 on (c, b].
  root_below,
};

struct HypothesisCheck {
  std::string name;
  bool passed = true;
  /// An evaluation failed at some sample, so the condition could not be decided.
  bool indeterminate = false;
  /// Up to three sample points where the condition failed.
  std::vector<double> witnesses;
};

struct HypothesisReport {
  RootSide side;
  std::vector<HypothesisCheck> checks;
  bool overall = false;
};

namespace hypothesis {
inline constexpr const char* kCurvatureSign = "h*h'' >= 0";
inline constexpr const char* kSlopeSignAbove = "h*h' < 0";
inline constexpr const char* kSlopeSignBelow = "h*h' > 0";
inline constexpr const char* kSlopeNonzero = "h' != 0";
inline constexpr const char* kEndpointLimits = "h'(lo+) != 0 and h'(hi-) != 0";
inline constexpr std::size_t kMaxWitnesses = 3;
inline constexpr std::size_t kEdgePoints = 64;
}  // namespace hypothesis

/// Samples the sign conditions for global Newton convergence on a finite
/// interval: n_grid uniform interior points plus 64 log-spaced points near
/// each end (offsets from (hi - lo) * 1e-6 up to the grid pitch). One-sided
/// derivative limits are approximated at offset (hi - lo) * 1e-6.
/// Endpoints themselves are never sampled.
inline HypothesisReport check_global_hypotheses(const RealFunction& h, const Interval& interval,
                                                RootSide side, std::size_t n_grid = 1024) {
  using namespace hypothesis;
  if (!interval.is_finite()) throw PreconditionError("check_global_hypotheses requires a finite interval");
  if (n_grid < 16) throw PreconditionError("check_global_hypotheses requires n_grid >= 16");
  if (!h.has_d1() || !h.has_d2()) {
    throw PreconditionError("check_global_hypotheses requires h' and h''");
  }
  const double lo = interval.lo();
  const double hi = interval.hi();
  const double w = hi - lo;
  const double eps = w * 1e-6;
  const double pitch = w / static_cast<double>(n_grid + 1);

  std::vector<double> xs;
  xs.reserve(n_grid + 2 * kEdgePoints);
  const double ratio = std::pow(pitch / eps, 1.0 / static_cast<double>(kEdgePoints - 1));
  for (std::size_t k = 0; k < kEdgePoints; ++k) {
    xs.push_back(lo + eps * std::pow(ratio, static_cast<double>(k)));
  }
  for (std::size_t i = 1; i <= n_grid; ++i) xs.push_back(lo + static_cast<double>(i) * pitch);
  for (std::size_t k = kEdgePoints; k-- > 0;) {
    xs.push_back(hi - eps * std::pow(ratio, static_cast<double>(k)));
  }

  struct Sample {
    double x;
    std::optional<double> v, d1, d2;
  };
  auto sample = [&h](double x) {
    Sample s{x, {}, {}, {}};
    try { s.v = h(x); } catch (const Error&) {}
    try { s.d1 = h.d1(x); } catch (const Error&) {}
    try { s.d2 = h.d2(x); } catch (const Error&) {}
    return s;
  };

  HypothesisCheck curvature{kCurvatureSign, true, false, {}};
  HypothesisCheck slope_sign{side == RootSide::root_above ? kSlopeSignAbove : kSlopeSignBelow,
                              true, false, {}};
  HypothesisCheck nonzero{kSlopeNonzero, true, false, {}};
  HypothesisCheck limits{kEndpointLimits, true, false, {}};

  auto record = [](HypothesisCheck& c, std::optional<bool> ok, double x) {
    if (!ok) {
      c.indeterminate = true;
      c.passed = false;
    } else if (!*ok) {
      c.passed = false;
      if (c.witnesses.size() < kMaxWitnesses) c.witnesses.push_back(x);
    }
  };

  for (double x : xs) {
    const Sample s = sample(x);
    std::optional<bool> ok;
    if (s.v && s.d2) ok = (*s.v) * (*s.d2) >= 0.0;
    record(curvature, ok, x);

    ok.reset();
    if (s.v && s.d1) {
      const double p = (*s.v) * (*s.d1);
      ok = side == RootSide::root_above ? p < 0.0 : p > 0.0;
    }
    record(slope_sign, ok, x);

    ok.reset();
    if (s.d1) ok = std::abs(*s.d1) >= kDerivativeZero;
    record(nonzero, ok, x);
  }
  for (double x : {lo + eps, hi - eps}) {
    std::optional<bool> ok;
    try {
      ok = std::abs(h.d1(x)) >= kDerivativeZero;
    } catch (const Error&) {
    }
    record(limits, ok, x);
  }

  HypothesisReport report{side, {curvature, slope_sign, nonzero, limits}, true};
  for (const auto& c : report.checks) report.overall = report.overall && c.passed;
  return report;
}

/// Newton iteration x_{n+1} = x_n - h(x_n) / h'(x_n) restricted to
/// `interval`. Converged needs |h(x)| <= tol and a step within
/// tol * max(1, |x|). A vanishing h' raises DerivativeZeroError carrying the
/// partial trace.
inline IterationTrace newton_solve(const RealFunction& h, const Interval& interval, double x0,
                                   const IterationConfig& cfg) {
  if (!h.has_d1()) throw PreconditionError("newton_solve requires h'");
  return detail::drive(
      x0, interval, cfg, [&h](double x) { return h(x); },
      [&h](double x, double hx) { return x - hx / detail::checked_slope(h, x); },
      {ResidualMode::root, false});
}

}  // namespace krasno

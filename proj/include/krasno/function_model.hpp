#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "krasno/errors.hpp"
#include "krasno/format.hpp"

namespace krasno {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi] over the extended reals. Either endpoint may be
/// infinite, in which case the interval is unbounded on that side.
class Interval {
 public:
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi) || lo == kInf || hi == -kInf) {
      throw PreconditionError("interval requires lo < hi, got [" + format_double(lo) + ", " +
                              format_double(hi) + "]");
    }
  }

  static Interval real_line() { return Interval(-kInf, kInf); }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }

  bool bounded_below() const noexcept { return std::isfinite(lo_); }
  bool bounded_above() const noexcept { return std::isfinite(hi_); }
  bool is_finite() const noexcept { return bounded_below() && bounded_above(); }

  bool contains(double x) const noexcept { return lo_ <= x && x <= hi_; }

  /// Membership with each finite endpoint pushed outwards by
  /// rel * max(1, |endpoint|).
  bool contains_with_slack(double x, double rel) const noexcept {
    return x >= lo_ - slack(lo_, rel) && x <= hi_ + slack(hi_, rel);
  }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  static double slack(double end, double rel) noexcept {
    return std::isfinite(end) ? rel * std::max(1.0, std::abs(end)) : 0.0;
  }

  double lo_;
  double hi_;
};

using Evaluator = std::function<double(double)>;

/// A scalar map h with a declared domain and optional h', h''.
///
/// Evaluation never yields NaN or infinity: a non-finite value, or any
/// exception escaping the evaluator, surfaces as EvaluationError.
class RealFunction {
 public:
  explicit RealFunction(Evaluator eval, Interval domain = Interval::real_line(),
                        Evaluator d1 = {}, Evaluator d2 = {})
      : eval_(std::move(eval)), domain_(domain), d1_(std::move(d1)), d2_(std::move(d2)) {
    if (!eval_) throw PreconditionError("RealFunction requires an evaluator");
  }

  double operator()(double x) const { return checked(eval_, x, "h"); }

  double d1(double x) const {
    if (!d1_) throw PreconditionError("no first derivative supplied");
    return checked(d1_, x, "h'");
  }

  double d2(double x) const {
    if (!d2_) throw PreconditionError("no second derivative supplied");
    return checked(d2_, x, "h''");
  }

  bool has_d1() const noexcept { return static_cast<bool>(d1_); }
  bool has_d2() const noexcept { return static_cast<bool>(d2_); }
  const Interval& domain() const noexcept { return domain_; }

  RealFunction with_domain(Interval domain) const {
    RealFunction copy = *this;
    copy.domain_ = domain;
    return copy;
  }

 private:
  static double checked(const Evaluator& f, double x, const char* name) {
    double v;
    try {
      v = f(x);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(std::string(name) + "(" + format_double(x) + ") failed: " + e.what());
    }
    if (!std::isfinite(v)) {
      throw EvaluationError(std::string(name) + "(" + format_double(x) +
                            ") is not finite: " + format_double(v));
    }
    return v;
  }

  Evaluator eval_;
  Interval domain_;
  Evaluator d1_;
  Evaluator d2_;
};

enum class SlopeKind { two_sided_lipschitz, lower_only };
enum class Provenance { user, estimated };

/// Lipschitz constant L, or the weaker one-sided bound slope >= -L.
struct SlopeBound {
  SlopeKind kind = SlopeKind::two_sided_lipschitz;
  double value = 0.0;
  Provenance provenance = Provenance::user;

  static SlopeBound lipschitz(double L, Provenance p = Provenance::user) {
    return make(SlopeKind::two_sided_lipschitz, L, p);
  }
  static SlopeBound lower(double L, Provenance p = Provenance::user) {
    return make(SlopeKind::lower_only, L, p);
  }

 private:
  static SlopeBound make(SlopeKind k, double L, Provenance p) {
    if (!(L >= 0.0) || !std::isfinite(L)) {
      throw PreconditionError("slope bound must be a finite value >= 0, got " + format_double(L));
    }
    return SlopeBound{k, L, p};
  }
};

/// Largest relaxation weight t for which damped iteration is guaranteed to
/// converge monotonically: 1 / (1 + L).
inline double max_relaxation(const SlopeBound& L) {
  if (!(L.value >= 0.0)) throw PreconditionError("slope bound must be >= 0");
  return 1.0 / (1.0 + L.value);
}

struct IterationConfig {
  double t = 0.5;
  double tol = 1e-12;
  std::size_t max_iter = 10000;
  /// |x| beyond this on an unbounded side counts as divergence.
  double divergence_threshold = 1e12;
  /// Relative slack on finite endpoints before an iterate counts as having
  /// left the domain. Absorbs rounding when the limit sits on an endpoint.
  double edge_tol = 1e-9;

  void validate() const {
    if (!(t > 0.0 && t <= 1.0)) throw PreconditionError("t must lie in (0, 1], got " + format_double(t));
    if (!(tol > 0.0)) throw PreconditionError("tol must be > 0");
    if (max_iter < 1) throw PreconditionError("max_iter must be >= 1");
    if (!(divergence_threshold > 0.0)) throw PreconditionError("divergence_threshold must be > 0");
    if (!(edge_tol >= 0.0)) throw PreconditionError("edge_tol must be >= 0");
  }
};

enum class InfinitySign { positive, negative };
enum class ExitSide { below_lo, above_hi };

struct Converged {
  double point;
  double residual;
  std::size_t iterations;
};

struct Diverged {
  InfinitySign direction;
  double last;
};

struct ExitedInterval {
  ExitSide side;
  /// Last iterate inside the domain.
  double last;
  /// The computed next iterate that fell outside.
  double escaped;
};

struct BudgetExhausted {
  double last;
};

using Outcome = std::variant<Converged, Diverged, ExitedInterval, BudgetExhausted>;

inline const char* outcome_kind(const Outcome& o) {
  static constexpr const char* names[] = {"converged", "diverged", "exited_interval",
                                          "budget_exhausted"};
  return names[o.index()];
}

struct IterationTrace {
  std::vector<double> iterates;
  Outcome outcome;

  bool converged() const noexcept { return std::holds_alternative<Converged>(outcome); }
  const Converged* converged_state() const noexcept { return std::get_if<Converged>(&outcome); }
};

}  // namespace krasno

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "krasno/function_model.hpp"

namespace krasno {

/// Bisection on a sign-changing bracket. Halves [a, b] until its width is at
/// most tol (or the midpoint can no longer be represented between the ends)
/// and returns the final midpoint. Only the bracket width is guaranteed;
/// |f| at the result may be large for steep f.
///
/// If `steps` is given it receives the number of halvings performed.
template <class F>
double bisect_root(F&& f, double a, double b, double tol, std::size_t* steps = nullptr) {
  if (!(a < b)) throw PreconditionError("bisect_root requires a < b");
  if (!(tol > 0.0)) throw PreconditionError("bisect_root requires tol > 0");
  double fa = f(a);
  const double fb = f(b);
  if ((fa > 0 && fb > 0) || (fa < 0 && fb < 0)) {
    throw BracketError("f(" + format_double(a) + ") and f(" + format_double(b) +
                       ") have the same sign");
  }
  std::size_t k = 0;
  if (fa == 0.0) b = a;
  else if (fb == 0.0) a = b;
  while (b - a > tol) {
    const double mid = a + (b - a) / 2;
    if (mid <= a || mid >= b) break;
    const double fm = f(mid);
    ++k;
    if (fm == 0.0) {
      a = b = mid;
      break;
    }
    if ((fm < 0) == (fa < 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  if (steps) *steps = k;
  return a + (b - a) / 2;
}

/// Fixed points located by the oracle, sorted strictly increasing.
struct FixedPointSet {
  std::vector<double> points;
  /// Pitch of the scanning grid; fixed points closer together than this may
  /// be merged or missed.
  double grid_resolution = 0.0;
};

inline constexpr std::size_t kOracleGrid = 4096;

/// Scans h(x) - x for sign changes on a uniform grid of n_grid points and
/// refines each bracket by bisection. Tangential fixed points (no sign
/// change) are not found. When h(x) - x vanishes on a whole stretch every
/// grid point there is reported.
inline FixedPointSet find_fixed_points(const RealFunction& h, const Interval& interval,
                                       std::size_t n_grid = kOracleGrid, double tol = 1e-14) {
  if (!interval.is_finite()) throw PreconditionError("find_fixed_points requires a finite interval");
  if (n_grid < 2) throw PreconditionError("find_fixed_points requires n_grid >= 2");
  const double lo = interval.lo();
  const double hi = interval.hi();
  const double pitch = (hi - lo) / static_cast<double>(n_grid - 1);
  auto gap = [&h](double x) { return h(x) - x; };
  auto grid = [&](std::size_t i) {
    return i + 1 == n_grid ? hi : lo + static_cast<double>(i) * pitch;
  };

  FixedPointSet out;
  out.grid_resolution = pitch;
  auto add = [&](double p) {
    if (out.points.empty() || p - out.points.back() > tol) out.points.push_back(p);
  };

  double x_prev = grid(0);
  double g_prev = gap(x_prev);
  if (g_prev == 0.0) add(x_prev);
  for (std::size_t i = 1; i < n_grid; ++i) {
    const double x = grid(i);
    const double g = gap(x);
    if ((g_prev < 0 && g > 0) || (g_prev > 0 && g < 0)) {
      add(bisect_root(gap, x_prev, x, tol));
    }
    if (g == 0.0) add(x);
    x_prev = x;
    g_prev = g;
  }
  return out;
}

enum class SearchDirection { up, down };

/// Closest located fixed point strictly above (up) or below (down) x0.
inline std::optional<double> nearest_fixed_point(const RealFunction& h, const Interval& interval,
                                                 double x0, SearchDirection direction,
                                                 std::size_t n_grid = kOracleGrid,
                                                 double tol = 1e-14) {
  if (!interval.contains(x0)) {
    throw DomainError("nearest_fixed_point: x0 = " + format_double(x0) + " outside the interval");
  }
  const FixedPointSet set = find_fixed_points(h, interval, n_grid, tol);
  if (direction == SearchDirection::up) {
    for (double p : set.points) {
      if (p > x0) return p;
    }
  } else {
    for (auto it = set.points.rbegin(); it != set.points.rend(); ++it) {
      if (*it < x0) return *it;
    }
  }
  return std::nullopt;
}

}  // namespace krasno

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "krasno/function_model.hpp"

namespace krasno {

inline constexpr std::uint64_t kSlopeSeed = 0x6b7261736e6f0001ULL;

/// A sampled slope bound. Sampling only sees finitely many pairs, so the
/// value is a lower bound on the true constant; apply a safety factor before
/// relying on it.
struct SlopeEstimate {
  SlopeBound bound;
  /// Number of slope pairs evaluated.
  std::size_t n_samples = 0;
  /// Running estimate after each grid refinement; non-decreasing.
  std::vector<double> refinement_history;
  std::uint64_t seed = kSlopeSeed;
};

namespace detail {

/// Visits slopes (h(y) - h(x)) / (y - x) on nested uniform grids with
/// 2, 3, 5, 9, ... points (each level a superset of the previous), ending at
/// the full n_grid-point grid, followed by n_grid pseudorandom non-adjacent
/// pairs of the full grid. `fold(acc, slope)` accumulates one level; the
/// running value after each level is appended to the history.
template <class Fold>
SlopeEstimate sample_slopes(const RealFunction& h, const Interval& interval, std::size_t n_grid,
                            double init, Fold fold) {
  if (!interval.is_finite()) throw PreconditionError("slope estimation requires a finite interval");
  if (n_grid < 2) throw PreconditionError("slope estimation requires n_grid >= 2");
  const double lo = interval.lo();
  const double hi = interval.hi();
  const std::size_t segments = n_grid - 1;
  auto point = [&](std::size_t i) {
    return i == segments ? hi : lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(segments));
  };

  std::vector<double> values(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) values[i] = h(point(i));
  auto slope = [&](std::size_t i, std::size_t j) {
    return (values[j] - values[i]) / (point(j) - point(i));
  };

  SlopeEstimate est;
  double acc = init;
  // Coarse levels use every stride-th point of the full grid, stride halving
  // each time, so each level's pairs refine the previous level's.
  std::size_t stride = 1;
  while (stride * 2 <= segments) stride *= 2;
  for (; stride >= 1; stride /= 2) {
    for (std::size_t i = 0; i + stride <= segments; i += stride) {
      acc = fold(acc, slope(i, i + stride));
      ++est.n_samples;
    }
    if (segments % stride != 0) {
      acc = fold(acc, slope(segments - segments % stride, segments));
      ++est.n_samples;
    }
    est.refinement_history.push_back(acc);
    if (stride == 1) break;
  }

  if (n_grid >= 3) {
    std::mt19937_64 rng(est.seed);
    std::uniform_int_distribution<std::size_t> pick(0, segments);
    for (std::size_t k = 0; k < n_grid; ++k) {
      std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      if (i > j) std::swap(i, j);
      if (j - i < 2) continue;
      acc = fold(acc, slope(i, j));
      ++est.n_samples;
    }
    est.refinement_history.push_back(acc);
  }
  return est;
}

}  // namespace detail

/// Largest sampled |h(x) - h(y)| / |x - y|.
inline SlopeEstimate estimate_lipschitz(const RealFunction& h, const Interval& interval,
                                        std::size_t n_grid) {
  SlopeEstimate est = detail::sample_slopes(h, interval, n_grid, 0.0, [](double acc, double s) {
    return std::max(acc, std::abs(s));
  });
  est.bound = SlopeBound::lipschitz(est.refinement_history.back(), Provenance::estimated);
  return est;
}

/// One-sided bound: max(0, -min sampled slope). Zero for increasing h.
inline SlopeEstimate estimate_lower_slope(const RealFunction& h, const Interval& interval,
                                          std::size_t n_grid) {
  SlopeEstimate est = detail::sample_slopes(h, interval, n_grid, 0.0, [](double acc, double s) {
    return std::max(acc, -s);
  });
  est.bound = SlopeBound::lower(est.refinement_history.back(), Provenance::estimated);
  return est;
}

}  // namespace krasno

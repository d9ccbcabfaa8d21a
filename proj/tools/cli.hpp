#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "krasno/krasno.hpp"

namespace krasno::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int {
  kConverged = 0,
  kUsageOrEval = 1,
  kDiverged = 2,
  kExited = 3,
  kBudget = 4,
  kHypothesisFailed = 5,
  kDerivativeZero = 6,
};

inline int exit_code_for(const Outcome& o) {
  static constexpr int codes[] = {kConverged, kDiverged, kExited, kBudget};
  return codes[o.index()];
}

enum class Format { json, csv };

/// One row of an emitted trace.
struct TraceRecord {
  std::size_t n;
  double x;
  double hx;
  double residual;
};

inline std::vector<TraceRecord> trace_records(const RealFunction& h, const std::vector<double>& xs,
                                              ResidualMode mode) {
  std::vector<TraceRecord> rows;
  rows.reserve(xs.size());
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double hx = h(xs[n]);
    rows.push_back({n, xs[n], hx, detail::residual(mode, xs[n], hx)});
  }
  return rows;
}

// JSON has no infinities; unbounded endpoints are written as strings.
inline json endpoint(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

inline const char* slope_kind_name(SlopeKind k) {
  return k == SlopeKind::two_sided_lipschitz ? "two_sided_lipschitz" : "lower_only";
}

inline json slope_json(const SlopeBound& b) {
  return json{{"kind", slope_kind_name(b.kind)},
              {"value", b.value},
              {"provenance", b.provenance == Provenance::user ? "user" : "estimated"}};
}

inline json outcome_json(const Outcome& o) {
  json j;
  j["kind"] = outcome_kind(o);
  std::visit(
      [&j](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Converged>) {
          j["point"] = s.point;
          j["residual"] = s.residual;
          j["iterations"] = s.iterations;
        } else if constexpr (std::is_same_v<T, Diverged>) {
          j["direction"] = s.direction == InfinitySign::positive ? "+inf" : "-inf";
          j["last"] = s.last;
        } else if constexpr (std::is_same_v<T, ExitedInterval>) {
          j["side"] = s.side == ExitSide::below_lo ? "below_lo" : "above_hi";
          j["last"] = s.last;
          j["escaped"] = s.escaped;
        } else {
          j["last"] = s.last;
        }
      },
      o);
  return j;
}

inline json hypotheses_json(const HypothesisReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back(json{{"name", c.name},
                          {"passed", c.passed},
                          {"indeterminate", c.indeterminate},
                          {"witnesses", c.witnesses}});
  }
  return json{{"side", r.side == RootSide::root_above ? "root_above" : "root_below"},
              {"checks", checks},
              {"overall", r.overall}};
}

inline std::string outcome_line(const json& outcome) {
  std::string line = "# outcome";
  for (const auto& [key, value] : outcome.items()) {
    line += " " + key + "=";
    line += value.is_string() ? value.get<std::string>()
            : value.is_number_float() ? format_double(value.get<double>())
                                      : value.dump();
  }
  return line;
}

/// Everything needed to print one solver run.
struct RunDocument {
  std::string mode;
  json header;  // function, domain, config, optional hypotheses
  std::vector<TraceRecord> rows;
  json outcome;
};

inline void emit(const RunDocument& doc, Format format, std::ostream& out) {
  if (format == Format::json) {
    json j;
    j["mode"] = doc.mode;
    for (const auto& [key, value] : doc.header.items()) j[key] = value;
    json trace = json::array();
    for (const auto& r : doc.rows) {
      trace.push_back(json{{"n", r.n}, {"x", r.x}, {"hx", r.hx}, {"residual", r.residual}});
    }
    j["trace"] = trace;
    if (!doc.outcome.is_null()) j["outcome"] = doc.outcome;
    out << j.dump(2) << '\n';
    return;
  }
  out << "n,x,hx,residual\n";
  for (const auto& r : doc.rows) {
    out << r.n << ',' << format_double(r.x) << ',' << format_double(r.hx) << ','
        << format_double(r.residual) << '\n';
  }
  if (doc.header.contains("hypotheses")) {
    for (const auto& c : doc.header["hypotheses"]["checks"]) {
      out << "# hypothesis " << c["name"].get<std::string>() << ": "
          << (c["passed"].get<bool>() ? "pass" : "fail");
      for (const auto& w : c["witnesses"]) out << ' ' << format_double(w.get<double>());
      out << '\n';
    }
  }
  if (!doc.outcome.is_null()) out << outcome_line(doc.outcome) << '\n';
}

struct CommonArgs {
  std::string fn;
  std::vector<double> domain;
  bool unbounded = false;
  std::string format = "json";
};

inline Interval resolve_domain(const CommonArgs& a) {
  if (a.unbounded) return Interval::real_line();
  if (a.domain.size() != 2) throw CLI::ValidationError("--domain", "expected LO HI or --unbounded");
  return Interval(a.domain[0], a.domain[1]);
}

inline constexpr double kDefaultSafety = 0.8;

/// Runs the command line and returns the process exit status. Results go to
/// `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Damped fixed-point iteration and globally convergent Newton for scalar maps",
               "krasno"};
  app.require_subcommand(1);

  CommonArgs common;
  auto add_common = [&common](CLI::App* sub, bool allow_unbounded) {
    sub->add_option("--fn", common.fn, "function of x, e.g. \"cos(x)\"")->required();
    auto* dom = sub->add_option("--domain", common.domain, "domain endpoints LO HI")->expected(2);
    if (allow_unbounded) {
      auto* unb = sub->add_flag("--unbounded", common.unbounded, "use the whole real line");
      dom->excludes(unb);
    }
  };

  // fixed-point
  auto* fp = app.add_subcommand("fixed-point", "damped fixed-point iteration");
  add_common(fp, true);
  double fp_x0 = 0.0;
  std::optional<double> fp_t, fp_L;
  IterationConfig fp_cfg;
  bool fp_guaranteed = false;
  std::size_t fp_grid = 1024;
  fp->add_option("--x0", fp_x0, "starting point")->required();
  fp->add_option("--t", fp_t, "relaxation weight in (0, 1]");
  fp->add_option("--L", fp_L, "Lipschitz constant of h");
  fp->add_option("--tol", fp_cfg.tol, "convergence tolerance")->capture_default_str();
  fp->add_option("--max-iter", fp_cfg.max_iter, "iteration budget")->capture_default_str();
  fp->add_option("--divergence-threshold", fp_cfg.divergence_threshold,
                 "|x| treated as divergence on unbounded sides")
      ->capture_default_str();
  fp->add_option("--grid", fp_grid, "grid size when estimating L")->capture_default_str();
  fp->add_option("--format", common.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  fp->add_flag("--guaranteed", fp_guaranteed,
               "assert h maps the domain into itself and require monotone convergence");

  // root-newton
  auto* nt = app.add_subcommand("root-newton", "Newton-Raphson with global-convergence checks");
  add_common(nt, false);
  double nt_x0 = 0.0;
  IterationConfig nt_cfg;
  std::optional<std::string> nt_side;
  bool nt_force = false;
  std::size_t nt_grid = 1024;
  nt->add_option("--x0", nt_x0, "starting point")->required();
  nt->add_option("--tol", nt_cfg.tol, "convergence tolerance")->capture_default_str();
  nt->add_option("--max-iter", nt_cfg.max_iter, "iteration budget")->capture_default_str();
  nt->add_option("--check-hypotheses", nt_side, "root_above or root_below")
      ->check(CLI::IsMember({"root_above", "root_below"}));
  nt->add_flag("--force", nt_force, "run even if the hypothesis check fails");
  nt->add_option("--grid", nt_grid, "hypothesis sampling grid")->capture_default_str();
  nt->add_option("--format", common.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  // estimate
  auto* es = app.add_subcommand("estimate", "sampled Lipschitz / lower slope bound");
  add_common(es, false);
  std::size_t es_grid = 1024;
  bool es_one_sided = false;
  es->add_option("--grid", es_grid, "grid size")->capture_default_str();
  es->add_flag("--one-sided", es_one_sided, "estimate the lower slope bound only");

  // fixed-points
  auto* fx = app.add_subcommand("fixed-points", "list fixed points found by grid scan + bisection");
  add_common(fx, false);
  std::size_t fx_grid = kOracleGrid;
  fx->add_option("--grid", fx_grid, "grid size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageOrEval;
  }

  try {
    const Format format = common.format == "csv" ? Format::csv : Format::json;
    const Interval domain = resolve_domain(common);
    const expr::CompiledFunction compiled = expr::compile(common.fn);
    for (const auto& note : compiled.notes) err << "note: " << note << '\n';
    const RealFunction h = compiled.as_function(domain);
    const std::string fn_text = expr::to_string(compiled.ast);

    if (fp->parsed()) {
      std::optional<SlopeBound> bound;
      if (fp_L) {
        bound = SlopeBound::lipschitz(*fp_L);
      } else if (!fp_t || fp_guaranteed) {
        // Without a finite domain, sample a unit window around x0.
        Interval window = domain;
        if (!domain.is_finite()) {
          window = Interval(std::max(domain.lo(), fp_x0 - 1.0), std::min(domain.hi(), fp_x0 + 1.0));
        }
        bound = estimate_lipschitz(h, window, fp_grid).bound;
      }
      fp_cfg.t = fp_t ? *fp_t : choose_t(*bound, kDefaultSafety);
      fp_cfg.validate();

      const IterationTrace trace =
          fp_guaranteed ? iterate_hillam(h, *bound, fp_x0, fp_cfg) : iterate(h, fp_x0, fp_cfg);

      RunDocument doc;
      doc.mode = "fixed_point";
      doc.header["function"] = fn_text;
      doc.header["domain"] = json::array({endpoint(domain.lo()), endpoint(domain.hi())});
      doc.header["config"] = json{{"solver", fp_guaranteed ? "iterate_hillam" : "iterate"},
                                  {"t", fp_cfg.t},
                                  {"tol", fp_cfg.tol},
                                  {"max_iter", fp_cfg.max_iter},
                                  {"divergence_threshold", fp_cfg.divergence_threshold},
                                  {"slope_bound", bound ? slope_json(*bound) : json(nullptr)}};
      doc.rows = trace_records(h, trace.iterates, ResidualMode::fixed_point);
      doc.outcome = outcome_json(trace.outcome);
      emit(doc, format, out);
      return exit_code_for(trace.outcome);
    }

    if (nt->parsed()) {
      if (!compiled.d1) {
        err << "error: cannot differentiate '" << fn_text << "': " << compiled.derivative_error << '\n';
        return kUsageOrEval;
      }
      nt_cfg.validate();
      RunDocument doc;
      doc.mode = "root";
      doc.header["function"] = fn_text;
      doc.header["derivative"] = expr::to_string(*compiled.d1);
      doc.header["domain"] = json::array({endpoint(domain.lo()), endpoint(domain.hi())});
      doc.header["config"] = json{{"solver", "newton_solve"},
                                  {"tol", nt_cfg.tol},
                                  {"max_iter", nt_cfg.max_iter}};
      if (nt_side) {
        const RootSide side = *nt_side == "root_above" ? RootSide::root_above : RootSide::root_below;
        const HypothesisReport report = check_global_hypotheses(h, domain, side, nt_grid);
        doc.header["hypotheses"] = hypotheses_json(report);
        if (!report.overall && !nt_force) {
          emit(doc, format, out);
          err << "error: global-convergence hypotheses not satisfied (use --force to run anyway)\n";
          return kHypothesisFailed;
        }
      }
      try {
        const IterationTrace trace = newton_solve(h, domain, nt_x0, nt_cfg);
        doc.rows = trace_records(h, trace.iterates, ResidualMode::root);
        doc.outcome = outcome_json(trace.outcome);
        emit(doc, format, out);
        return exit_code_for(trace.outcome);
      } catch (const DerivativeZeroError& e) {
        doc.rows = trace_records(h, e.partial_trace(), ResidualMode::root);
        doc.outcome = json{{"kind", "derivative_zero"}, {"at", e.at()}};
        emit(doc, format, out);
        err << "error: " << e.what() << '\n';
        return kDerivativeZero;
      }
    }

    if (es->parsed()) {
      const SlopeEstimate est =
          es_one_sided ? estimate_lower_slope(h, domain, es_grid) : estimate_lipschitz(h, domain, es_grid);
      json j{{"function", fn_text},
             {"domain", json::array({domain.lo(), domain.hi()})},
             {"kind", slope_kind_name(est.bound.kind)},
             {"value", est.bound.value},
             {"provenance", "estimated"},
             {"n_samples", est.n_samples},
             {"seed", est.seed},
             {"refinement_history", est.refinement_history},
             {"safety", kDefaultSafety},
             {"recommended_t", choose_t(est.bound, kDefaultSafety)}};
      out << j.dump(2) << '\n';
      return 0;
    }

    if (fx->parsed()) {
      const FixedPointSet set = find_fixed_points(h, domain, fx_grid);
      out << json(set.points).dump() << '\n';
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageOrEval;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageOrEval;
  }
  return kUsageOrEval;
}

}  // namespace krasno::cli

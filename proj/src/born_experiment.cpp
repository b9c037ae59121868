#include "mangled/born_experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <set>
#include <sstream>

#include "mangled/errors.hpp"
#include "mangled/special_functions.hpp"

namespace mangled::born {

double BornOutcomeSpec::born_probability() const {
  return std::exp(f.log() + std::log(static_cast<double>(g)));
}

void check_normalized(const std::vector<BornOutcomeSpec>& outcomes) {
  if (outcomes.empty()) throw DomainError("outcomes: at least one outcome is required");
  std::set<std::string> labels;
  double total = 0.0;
  for (const BornOutcomeSpec& o : outcomes) {
    if (o.g < 1) throw DomainError("outcomes: G must be >= 1 (outcome '" + o.label + "')");
    if (!labels.insert(o.label).second) throw DomainError("outcomes: duplicate label '" + o.label + "'");
    total += o.born_probability();
  }
  if (!(std::fabs(total - 1.0) <= kNormalizationTolerance)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "outcomes: sum of F*G is %.17g, expected 1", total);
    throw DomainError(buf);
  }
}

std::string engine_name(Engine engine) {
  switch (engine) {
    case Engine::Analytic:
      return "analytic";
    case Engine::Pde:
      return "pde";
    case Engine::Mc:
      return "mc";
  }
  return "unknown";
}

Engine engine_from_name(const std::string& name) {
  if (name == "analytic") return Engine::Analytic;
  if (name == "pde") return Engine::Pde;
  if (name == "mc") return Engine::Mc;
  throw DomainError("unknown engine '" + name + "' (expected analytic, pde or mc)");
}

ExperimentSetup ExperimentSetup::from_discrete(const DecoherenceParams& dp, double eps, double t1, double t2) {
  ExperimentSetup s{to_diffusion(dp, eps), dp, t1, t2};
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw DomainError("experiment: t1 and t2 must be > 0");
  return s;
}

ExperimentSetup ExperimentSetup::from_continuum(const DiffusionParams& params, double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw DomainError("experiment: t1 and t2 must be > 0");
  return {params, std::nullopt, t1, t2};
}

namespace {

std::int64_t events_for(const std::optional<DecoherenceParams>& dp, double t) {
  if (!dp) throw DomainError("experiment: the mc engine needs discrete parameters (p, r)");
  const auto n = static_cast<std::int64_t>(std::llround(dp->r() * t));
  if (n < 1) throw DomainError("experiment: r t rounds to zero events");
  return n;
}

}  // namespace

std::int64_t ExperimentSetup::n_events_1() const { return events_for(discrete, t1); }
std::int64_t ExperimentSetup::n_events_2() const { return events_for(discrete, t2); }

pde::Grid PdeSettings::stage_one_grid(const ExperimentSetup& setup) const {
  const double y_max =
      y_max_1.value_or(pde::recommended_y_max(setup.continuum.w(), setup.t1, setup.continuum.eps()));
  return pde::Grid(y_max, n_cells, dt, scheme);
}

pde::Grid PdeSettings::stage_two_grid(const ExperimentSetup& setup, double max_abs_log_f) const {
  const double y_max = y_max_2.value_or(pde::recommended_y_max(
      setup.continuum.w(), setup.t1 + setup.t2, setup.continuum.eps(), max_abs_log_f));
  return pde::Grid(y_max, n_cells, dt, scheme);
}

std::vector<OutcomeRow> DeviationReport::rows_for(Engine engine) const {
  std::vector<OutcomeRow> out;
  for (const OutcomeRow& r : rows) {
    if (r.engine == engine) out.push_back(r);
  }
  return out;
}

namespace {

struct EngineResult {
  std::vector<LogValue> lambda;
  LogValue reference;
  std::vector<double> log_ratio;  // ln(lambda_k / reference)
  std::vector<double> relative_error;  // of lambda_k
  double reference_relative_error = 0.0;
  std::vector<GammaSample> series;
  Diagnostics diagnostics;
};

EngineResult run_analytic(const std::vector<BornOutcomeSpec>& outcomes, const ExperimentSetup& s) {
  EngineResult r;
  for (const BornOutcomeSpec& o : outcomes) {
    r.lambda.push_back(analytic::lambda_count(o.f, o.g, s.t1, s.t2, s.continuum, &r.diagnostics));
    r.relative_error.push_back(0.0);
    // Exact where lambda's own log magnitude, of order (v - w)(t1 + t2), would lose digits.
    r.log_ratio.push_back(o.f.log() + std::log(static_cast<double>(o.g)) +
                          std::log(analytic::gamma_correction(o.f, s.t1, s.continuum.w())));
  }
  r.reference = analytic::lambda_count(analytic::MeasureFraction::unit(), 1.0, s.t1, s.t2, s.continuum);
  return r;
}

double log_mass(const pde::Field& field) {
  double sum = 0.0;
  for (double v : field.values) sum += v;
  return sum > 0.0 ? std::log(sum * field.h) + field.log_scale : LogValue::kNegInf;
}

EngineResult run_pde(const std::vector<BornOutcomeSpec>& outcomes, const ExperimentSetup& s,
                     const PdeSettings& settings) {
  EngineResult r;
  double max_abs_log_f = 0.0;
  for (const BornOutcomeSpec& o : outcomes) max_abs_log_f = std::max(max_abs_log_f, std::fabs(o.f.log()));
  const pde::Grid grid1 = settings.stage_one_grid(s);
  const pde::Grid grid2 = settings.stage_two_grid(s, max_abs_log_f);
  const pde::Field first = pde::solve(s.continuum, grid1, s.t1);

  using Trace = std::vector<std::pair<double, double>>;
  auto run = [&](analytic::MeasureFraction f, double g, Trace& trace) {
    int counter = 0;
    auto on_step = [&](const pde::Field& field) {
      if (settings.gamma_series_every > 0 && ++counter % settings.gamma_series_every == 0) {
        trace.emplace_back(field.t - s.t1, log_mass(field));
      }
    };
    return pde::continue_two_stage(s.continuum, first, f, g, s.t2, grid2, on_step).count;
  };

  Trace ref_trace;
  r.reference = run(analytic::MeasureFraction::unit(), 1.0, ref_trace);
  r.reference_relative_error = 0.0;
  for (const BornOutcomeSpec& o : outcomes) {
    Trace trace;
    r.lambda.push_back(run(o.f, o.g, trace));
    r.relative_error.push_back(0.0);
    const std::size_t n = std::min(trace.size(), ref_trace.size());
    for (std::size_t i = 0; i < n; ++i) {
      r.series.push_back({o.label, trace[i].first, std::exp(trace[i].second - o.f.log() - ref_trace[i].second)});
    }
  }
  return r;
}

EngineResult run_mc(const std::vector<BornOutcomeSpec>& outcomes, const ExperimentSetup& s,
                    const McSettings& settings) {
  EngineResult r;
  const std::int64_t n1 = s.n_events_1();
  const std::int64_t n2 = s.n_events_2();
  const DecoherenceParams& dp = *s.discrete;
  mc::WalkSpec stage_one{dp, s.continuum.eps(), n1, mc::BoundaryRule::Continuum, mc::Tilt::None, std::nullopt};
  stage_one.tilt = settings.tilt.value_or(mc::default_tilt(dp, n1 + n2));

  // Every outcome reuses the reference run's paths (common random numbers), so
  // an outcome with F = 1, G = 1 reproduces the reference exactly.
  auto run = [&](analytic::MeasureFraction f, std::uint32_t g) {
    mc::RunOptions opt;
    opt.workers = settings.workers;
    return mc::born_two_stage_mc(stage_one, f, g, n2, settings.n_paths, settings.seed, opt);
  };
  const mc::PathEnsemble ref = run(analytic::MeasureFraction::unit(), 1);
  r.reference = ref.estimate;
  r.reference_relative_error = ref.relative_error();
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const mc::PathEnsemble e = run(outcomes[k].f, outcomes[k].g);
    r.lambda.push_back(e.estimate);
    r.relative_error.push_back(e.relative_error());
  }
  return r;
}

std::vector<OutcomeRow> assemble(Engine engine, const std::vector<BornOutcomeSpec>& outcomes,
                                 const ExperimentSetup& s, const EngineResult& r) {
  std::vector<OutcomeRow> rows;
  std::vector<double> log_ratio = r.log_ratio;
  if (log_ratio.empty()) {
    for (const LogValue& l : r.lambda) log_ratio.push_back(l.log_magnitude() - r.reference.log_magnitude());
  }
  const double log_total = log_sum_exp(log_ratio);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const BornOutcomeSpec& o = outcomes[k];
    OutcomeRow row;
    row.label = o.label;
    row.engine = engine;
    row.log_f = o.f.log();
    row.g = o.g;
    row.born_probability = o.born_probability();
    row.lambda = r.lambda[k];
    row.share = std::exp(log_ratio[k] - log_total);
    row.share_ratio = row.share / row.born_probability;
    row.gamma = std::exp(log_ratio[k] - o.f.log() - std::log(static_cast<double>(o.g)));
    row.gamma_analytic = analytic::gamma_correction(o.f, s.t1, s.continuum.w());
    row.relative_error = std::hypot(r.relative_error[k], r.reference_relative_error);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<OutcomeRow> failed_rows(Engine engine, const std::vector<BornOutcomeSpec>& outcomes,
                                    const std::string& what) {
  std::vector<OutcomeRow> rows;
  for (const BornOutcomeSpec& o : outcomes) {
    OutcomeRow row;
    row.label = o.label;
    row.engine = engine;
    row.log_f = o.f.log();
    row.g = o.g;
    row.born_probability = o.born_probability();
    row.share = row.share_ratio = row.gamma = std::nan("");
    row.relative_error = std::nan("");
    row.gamma_analytic = std::nan("");
    row.status = "failed: " + what;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

DeviationReport deviation_table(const std::vector<BornOutcomeSpec>& outcomes, const ExperimentSetup& setup,
                                const std::vector<Engine>& engines, const PdeSettings& pde,
                                const McSettings& mc) {
  check_normalized(outcomes);
  if (engines.empty()) throw DomainError("deviation_table: no engines selected");
  setup.continuum.require_diffusive("deviation_table");

  DeviationReport report{setup, engines, pde, mc, {}, {}, {}, true};
  analytic::check_born_regime(setup.continuum.eps(), setup.continuum.w() * setup.t1, &report.diagnostics);

  std::vector<std::future<EngineResult>> jobs;
  for (Engine e : engines) {
    jobs.push_back(std::async(std::launch::async, [&, e] {
      switch (e) {
        case Engine::Analytic:
          return run_analytic(outcomes, setup);
        case Engine::Pde:
          return run_pde(outcomes, setup, pde);
        case Engine::Mc:
          return run_mc(outcomes, setup, mc);
      }
      throw DomainError("deviation_table: unknown engine");
    }));
  }
  for (std::size_t i = 0; i < engines.size(); ++i) {
    std::vector<OutcomeRow> rows;
    try {
      const EngineResult r = jobs[i].get();
      rows = assemble(engines[i], outcomes, setup, r);
      report.gamma_series.insert(report.gamma_series.end(), r.series.begin(), r.series.end());
      for (const std::string& w : r.diagnostics.warnings) report.diagnostics.warn(w);
    } catch (const std::exception& ex) {
      rows = failed_rows(engines[i], outcomes, ex.what());
      report.complete = false;
    }
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  return report;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_deviation_csv(std::ostream& os, const DeviationReport& report) {
  os << "engine,label,log_f,g,born_probability,log_lambda,share,share_ratio,gamma,gamma_analytic,"
        "relative_error,status\n";
  for (const OutcomeRow& r : report.rows) {
    os << engine_name(r.engine) << ',' << r.label << ',' << fmt(r.log_f) << ',' << r.g << ','
       << fmt(r.born_probability) << ',' << fmt(r.lambda.log_magnitude()) << ',' << fmt(r.share) << ','
       << fmt(r.share_ratio) << ',' << fmt(r.gamma) << ',' << fmt(r.gamma_analytic) << ','
       << fmt(r.relative_error) << ',' << r.status << '\n';
  }
}

void write_gamma_series_csv(std::ostream& os, const DeviationReport& report) {
  os << "label,t_since_split,gamma\n";
  for (const GammaSample& s : report.gamma_series) {
    os << s.label << ',' << fmt(s.t) << ',' << fmt(s.gamma) << '\n';
  }
}

nlohmann::json deviation_metadata(const DeviationReport& report) {
  using nlohmann::json;
  const ExperimentSetup& s = report.setup;
  json meta;
  meta["continuum"] = {{"v", s.continuum.v()}, {"w", s.continuum.w()}, {"eps", s.continuum.eps()}};
  if (s.discrete) {
    meta["discrete"] = {{"p", s.discrete->p()}, {"r", s.discrete->r()}};
  }
  meta["t1"] = s.t1;
  meta["t2"] = s.t2;
  meta["wt1"] = s.continuum.w() * s.t1;
  json engines = json::array();
  for (Engine e : report.engines) engines.push_back(engine_name(e));
  meta["engines"] = engines;
  if (std::find(report.engines.begin(), report.engines.end(), Engine::Pde) != report.engines.end()) {
    meta["pde"] = {{"n_cells", report.pde.n_cells},
                   {"dt", report.pde.dt},
                   {"scheme", report.pde.scheme == pde::Scheme::CrankNicolson ? "crank_nicolson" : "explicit"}};
    if (report.pde.y_max_1) meta["pde"]["y_max_1"] = *report.pde.y_max_1;
    if (report.pde.y_max_2) meta["pde"]["y_max_2"] = *report.pde.y_max_2;
  }
  if (std::find(report.engines.begin(), report.engines.end(), Engine::Mc) != report.engines.end()) {
    meta["mc"] = {{"n_paths", report.mc.n_paths}, {"seed", report.mc.seed}};
    if (s.discrete) {
      meta["mc"]["n_events_1"] = s.n_events_1();
      meta["mc"]["n_events_2"] = s.n_events_2();
    }
  }
  meta["complete"] = report.complete;
  meta["warnings"] = report.diagnostics.warnings;
  return meta;
}

bool HeadlineReport::passed() const {
  return std::fabs(gamma - gamma_expected) <= 1e-9 && below_threshold;
}

std::string HeadlineReport::format() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "gamma = %.6f  (F = e^%.6g, wt1 = %.6g)\n"
                "log10 F = %.2f  (< -43000: %s)\n"
                "gamma to 11 digits %.11f, erfc(1/sqrt(2)) = %.11f\n"
                "gamma at F = e^-2e5: %.5f\n"
                "gamma at F = e^-1e4: %.4f\n",
                gamma, log_f, wt1, log10_f, below_threshold ? "yes" : "no", gamma, gamma_expected,
                gamma_double_shift, gamma_small_shift);
  return buf;
}

HeadlineReport headline_check() {
  HeadlineReport h;
  const double w = 1.0;
  const double t1 = h.wt1 / w;
  h.gamma = analytic::gamma_correction(analytic::MeasureFraction::from_log(h.log_f), t1, w);
  h.gamma_expected = special::erfc(1.0 / std::sqrt(2.0));
  h.log10_f = h.log_f / std::log(10.0);
  h.below_threshold = h.log10_f < -43000.0;
  h.gamma_double_shift = analytic::gamma_correction(analytic::MeasureFraction::from_log(-2e5), t1, w);
  h.gamma_small_shift = analytic::gamma_correction(analytic::MeasureFraction::from_log(-1e4), t1, w);
  return h;
}

std::vector<ScanRow> survival_condition_scan(const std::vector<DecoherenceParams>& grid) {
  std::vector<ScanRow> rows;
  for (const DecoherenceParams& dp : grid) {
    const BinaryEventStats st = dp.stats();
    ScanRow row;
    row.p = dp.p();
    row.r = dp.r();
    row.v = -dp.r() * st.xtilde1;
    row.w = dp.r() * st.sigma1 * st.sigma1;
    row.v_minus_w = row.v - row.w;
    row.all_worlds_exponent = row.v - 0.5 * row.w;
    row.fraction_decay = row.all_worlds_exponent - row.v_minus_w;
    row.identity_residual = std::fabs(row.v_minus_w + dp.r() * st.xhat1);
    row.degenerate = row.w == 0.0;
    row.count_grows = row.v > row.w;
    row.fraction_shrinks = row.w > 0.0;
    rows.push_back(row);
  }
  return rows;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "p,r,v,w,v_minus_w,all_worlds_exponent,fraction_decay,identity_residual,degenerate,count_grows,"
        "fraction_shrinks\n";
  for (const ScanRow& r : rows) {
    os << fmt(r.p) << ',' << fmt(r.r) << ',' << fmt(r.v) << ',' << fmt(r.w) << ',' << fmt(r.v_minus_w) << ','
       << fmt(r.all_worlds_exponent) << ',' << fmt(r.fraction_decay) << ',' << fmt(r.identity_residual) << ','
       << r.degenerate << ',' << r.count_grows << ',' << r.fraction_shrinks << '\n';
  }
}

}  // namespace mangled::born

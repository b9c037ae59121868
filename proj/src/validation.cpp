#include "mangled/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fixtures/oracle_fixtures.hpp"
#include "mangled/born_experiment.hpp"
#include "mangled/errors.hpp"
#include "mangled/pde_solver.hpp"
#include "mangled/quadrature.hpp"
#include "mangled/special_functions.hpp"

namespace mangled::validation {

LogValue integrate_log(const std::function<double(double)>& log_f, double a, double b, double rel_tol) {
  if (!(b > a)) return LogValue::zero();
  constexpr int kScan = 512;
  double peak = LogValue::kNegInf;
  for (int i = 0; i <= kScan; ++i) {
    peak = std::max(peak, log_f(a + (b - a) * i / kScan));
  }
  if (!std::isfinite(peak)) return LogValue::zero();
  const quad::Result r = quad::integrate([&](double x) { return std::exp(log_f(x) - peak); }, a, b, rel_tol);
  if (!(r.value > 0.0)) return LogValue::zero();
  return LogValue::from_log(std::log(r.value) + peak);
}

double log_survival(double y0, double wt) {
  if (!(y0 > 0.0)) return LogValue::kNegInf;
  const double s = std::sqrt(2.0 * wt);
  const double a1 = (wt - y0) / s;
  const double a2 = (wt + y0) / s;
  // e^{2 y0} e^{-a2^2} = e^{-a1^2}, so both terms share the Gaussian factor.
  if (a1 >= 0.0) {
    return std::log(0.5) - a1 * a1 + std::log(special::erfcx(a1) - special::erfcx(a2));
  }
  return std::log(0.5 * special::erfc(a1) - 0.5 * std::exp(-a1 * a1) * special::erfcx(a2));
}

double log_image_density(double y, double eps, double wt) {
  if (!(y > 0.0)) return LogValue::kNegInf;
  const double d = y - eps + wt;
  return -d * d / (2.0 * wt) - 0.5 * std::log(2.0 * M_PI * wt) + std::log(-std::expm1(-2.0 * eps * y / wt));
}

double exact_continuum_gamma(analytic::MeasureFraction f, double eps, double wt1, double wt2) {
  auto lambda = [&](double log_f) {
    const double lo = std::max(0.0, -log_f);
    const double hi = -log_f + eps + 15.0 * std::sqrt(wt1) + 10.0;
    return integrate_log(
        [&](double y) { return log_image_density(y, eps, wt1) + log_survival(y + log_f, wt2); }, lo, hi, 1e-11);
  };
  return std::exp(lambda(f.log()).log_magnitude() - f.log() - lambda(0.0).log_magnitude());
}

WalkMoments exact_walk_moments(const mc::WalkSpec& spec) {
  spec.validate();
  const double p = std::max(spec.dp.p(), 1.0 - spec.dp.p());
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const std::int64_t n_events = spec.n_events;
  const double log_f = spec.split ? spec.split->f.log() : 0.0;
  const std::int64_t split_at = spec.split ? spec.split->at_event : n_events + 1;

  // u[k]: fraction of all 2^n branch sequences that are alive with k larger choices.
  std::vector<double> u(static_cast<std::size_t>(n_events) + 2, 0.0);
  std::vector<double> next(u.size(), 0.0);
  u[0] = 1.0;
  for (std::int64_t n = 1; n <= n_events; ++n) {
    const double xb = spec.boundary(n);
    for (std::int64_t k = 0; k <= n; ++k) {
      const double from_small = k <= n - 1 ? u[static_cast<std::size_t>(k)] : 0.0;
      const double from_large = k >= 1 ? u[static_cast<std::size_t>(k - 1)] : 0.0;
      double x = static_cast<double>(k) * lp + static_cast<double>(n - k) * lq;
      if (n >= split_at) x += log_f;
      next[static_cast<std::size_t>(k)] = x <= xb ? 0.0 : 0.5 * (from_small + from_large);
    }
    std::swap(u, next);
  }

  std::vector<double> log_u;
  std::vector<double> log_second;
  const double nn = static_cast<double>(n_events);
  for (std::int64_t k = 0; k <= n_events; ++k) {
    const double v = u[static_cast<std::size_t>(k)];
    if (v <= 0.0) continue;
    const double kk = static_cast<double>(k);
    log_u.push_back(std::log(v));
    log_second.push_back(std::log(v) - (kk * lp + (nn - kk) * lq));
  }
  const double log_g = spec.split ? std::log(static_cast<double>(spec.split->g)) : 0.0;
  WalkMoments m;
  if (log_u.empty()) {
    m.relative_variance_none = m.relative_variance_measure = std::numeric_limits<double>::infinity();
    return m;
  }
  const double log_alive = log_sum_exp(log_u);
  m.mean = LogValue::from_log(log_alive + nn * M_LN2 + log_g);
  m.relative_variance_none = std::expm1(-log_alive);
  m.relative_variance_measure = std::expm1(log_sum_exp(log_second) - nn * M_LN2 - 2.0 * log_alive);
  return m;
}

std::string CriterionResult::line() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %d %s (%.1f s)", passed ? "PASS" : "FAIL", id, title.c_str(), seconds);
  return buf;
}

namespace {

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double rel_diff(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

double rel_diff(LogValue a, LogValue b) { return std::fabs(std::expm1(a.log_magnitude() - b.log_magnitude())); }

void headline(CriterionResult& c) {
  c.title = "headline gamma at wt1 = 1e10, F = e^-1e5";
  const born::HeadlineReport h = born::headline_check();
  const bool gamma_ok = std::fabs(h.gamma - fixtures::kErfcInvSqrt2) <= 1e-6;
  const bool log_ok = std::fabs(h.log10_f - fixtures::kLog10HeadlineF) <= 0.01 && h.below_threshold;
  c.details.push_back(fmt("gamma = %.10f, oracle %.10f", h.gamma, fixtures::kErfcInvSqrt2));
  c.details.push_back(fmt("log10 F = %.4f (< -43000: %s)", h.log10_f, h.below_threshold ? "yes" : "no"));
  c.passed = gamma_ok && log_ok;
}

void near_born(CriterionResult& c) {
  c.title = "near-Born: 1 - gamma <= 1e-3 for F >= e^-100 at wt1 = 1e10";
  double worst = 0.0;
  double worst_log_f = 0.0;
  constexpr int kPoints = 50;
  for (int i = 0; i < kPoints; ++i) {
    // Log-spaced F from e^-100 to 1.
    const double log_f = -100.0 * (1.0 - static_cast<double>(i) / (kPoints - 1));
    const double g = analytic::gamma_correction(analytic::MeasureFraction::from_log(log_f), 1e10, 1.0);
    if (1.0 - g > worst) {
      worst = 1.0 - g;
      worst_log_f = log_f;
    }
  }
  c.details.push_back(fmt("max 1 - gamma = %.6e at ln F = %.1f", worst, worst_log_f));
  c.passed = worst <= 1e-3;
}

void pde_consistency(CriterionResult& c) {
  c.title = "mu0 solves the growth-drift-diffusion equation";
  const DiffusionParams dp(1.0, 0.5, 0.1);
  double worst = 0.0;
  double control = std::numeric_limits<double>::infinity();
  for (double t : {0.75, 1.5, 3.0, 6.0, 12.0}) {
    for (double z : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const double x = -dp.v() * t + z * std::sqrt(dp.w() * t);
      worst = std::max(worst, std::fabs(analytic::pde_residual_mu0(x, t, dp, 1e-4)));
      control = std::min(control, std::fabs(analytic::pde_residual_mu0(x, t, dp, 1e-4, analytic::MeanSign::PlusVt)));
    }
  }
  c.details.push_back(fmt("max |residual| = %.3e over 25 points (limit 1e-5)", worst));
  c.details.push_back(fmt("min |residual| with mean +vt = %.3e (must exceed 0.1)", control));
  c.passed = worst <= 1e-5 && control > 0.1;
}

void measure_conservation(CriterionResult& c) {
  c.title = "measure conservation of mu0";
  c.passed = true;
  const double triples[3][3] = {{1.0, 0.5, 1.0}, {2.0, 1.0, 3.0}, {0.7, 0.2, 10.0}};
  for (const auto& tr : triples) {
    const DiffusionParams dp(tr[0], tr[1], 0.1);
    const double t = tr[2];
    const double centre = (-dp.v() + dp.w()) * t;
    const double half = 15.0 * std::sqrt(dp.w() * t);
    const LogValue m =
        integrate_log([&](double x) { return x + analytic::mu0(x, t, dp).log_magnitude(); }, centre - half, centre + half);
    const double err = std::fabs(m.value() - 1.0);
    c.details.push_back(fmt("(v, w, t) = (%g, %g, %g): integral = %.15f", tr[0], tr[1], t, m.value()));
    c.passed = c.passed && err <= 1e-8;
  }
}

void closed_forms(CriterionResult& c) {
  c.title = "closed forms match quadrature";
  c.passed = true;
  for (double wt : {1.0, 4.0, 25.0}) {
    const DiffusionParams dp(1.0, 0.5, 0.1);
    const double t = wt / dp.w();
    const LogValue q = integrate_log([&](double y) { return analytic::mu1_approx(y, t, dp).log_magnitude(); }, 0.0,
                                     quad::tail_cutoff(wt, dp.eps()));
    const double err = rel_diff(q, analytic::unmangled_count_W(t, dp));
    c.details.push_back(fmt("wt = %g: integral of mu1_approx vs W, rel diff %.2e (limit 1e-6)", wt, err));
    c.passed = c.passed && err <= 1e-6;
  }
  const DiffusionParams dp(1.0, 0.5, 0.05);
  const double t1 = 50.0;
  const double t2 = 800.0;
  for (double log_f : {std::log(0.25), -5.0}) {
    const analytic::MeasureFraction f = analytic::MeasureFraction::from_log(log_f);
    const LogValue closed = analytic::lambda_count(f, 1.0, t1, t2, dp);
    const double hi = quad::tail_cutoff(dp.w() * t1, dp.eps());
    const LogValue q = integrate_log(
        [&](double y) {
          if (!(y > 0.0)) return LogValue::kNegInf;
          return analytic::unmangled_count_from(y, t2, dp).log_magnitude() +
                 analytic::mu1_approx(y - log_f, t1, dp).log_magnitude();
        },
        0.0, hi, 1e-10);
    const double err = rel_diff(q, closed);
    c.details.push_back(fmt("lambda at ln F = %.4f: closed form vs quadrature rel diff %.2e (limit 2e-2)", log_f, err));
    c.passed = c.passed && err <= 2e-2;
  }
}

void analytic_vs_pde(CriterionResult& c, const SuiteOptions& o) {
  c.title = "analytic vs PDE: W, density shape, two-stage gamma";
  const DiffusionParams dp(1.0, 0.5, 0.1);
  const double t1 = 50.0;
  const double t2 = 400.0;
  const double wt1 = dp.w() * t1;
  const double wt2 = dp.w() * t2;
  const std::vector<double> log_fs = {-2.0, -5.0, -10.0};

  const pde::Grid grid1(pde::recommended_y_max(dp.w(), t1, dp.eps()), o.pde_cells, o.pde_dt);
  const pde::Field first = pde::solve(dp, grid1, t1);

  // The closed forms describe half the initial mass of a single world.
  const LogValue w_pde = first.survivor_count() * LogValue::from_value(analytic::kClosedFormInitialMass);
  const double w_err = rel_diff(w_pde, analytic::unmangled_count_W(t1, dp));
  c.details.push_back(fmt("W(t1): PDE x 1/2 vs closed form rel diff %.3e (limit 1e-2)", w_err));

  double mass_pde = 0.0;
  double mass_approx = 0.0;
  std::vector<double> approx(first.values.size());
  for (std::size_t i = 0; i < approx.size(); ++i) {
    approx[i] = std::exp(analytic::mu1_approx(first.center(static_cast<int>(i)), t1, dp).log_magnitude() -
                         first.growth_log);
    mass_approx += approx[i];
    mass_pde += first.values[i];
  }
  double l1 = 0.0;
  double fitted = 0.0;
  double fit_weight = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    l1 += std::fabs(first.values[i] / mass_pde - approx[i] / mass_approx);
    const LogValue exact = analytic::mu1_exact(first.center(static_cast<int>(i)), t1, dp);
    const LogValue pde_density = first.density(static_cast<int>(i));
    if (!exact.is_zero() && !pde_density.is_zero()) {
      const double wgt = first.values[i];
      fitted += wgt * (pde_density / exact).value();
      fit_weight += wgt;
    }
  }
  c.details.push_back(fmt("density shape L1 = %.3e (limit 2e-2)", l1));
  c.details.push_back(
      fmt("PDE / mu1_exact fitted constant = %.6f (2/pi = %.6f)", fitted / fit_weight, 2.0 / M_PI));

  const pde::Grid grid2(pde::recommended_y_max(dp.w(), t1 + t2, dp.eps(), 10.0), o.pde_cells, o.pde_dt);
  const auto reference = pde::continue_two_stage(dp, first, analytic::MeasureFraction::unit(), 1.0, t2, grid2);
  const LogValue w_end = reference.count * LogValue::from_value(analytic::kClosedFormInitialMass);
  const double w_end_err = rel_diff(w_end, analytic::unmangled_count_W(t1 + t2, dp));
  c.details.push_back(fmt("W(t1 + t2): PDE x 1/2 vs closed form rel diff %.3e (limit 1e-2)", w_end_err));

  bool gamma_ok = true;
  for (double log_f : log_fs) {
    const analytic::MeasureFraction f = analytic::MeasureFraction::from_log(log_f);
    const auto run = pde::continue_two_stage(dp, first, f, 1.0, t2, grid2);
    const double g_pde = std::exp(run.count.log_magnitude() - log_f - reference.count.log_magnitude());
    const double g_erfc = analytic::gamma_correction(f, t1, dp.w());
    const double g_exact = exact_continuum_gamma(f, dp.eps(), wt1, wt2);
    const double err = rel_diff(g_pde, g_erfc);
    gamma_ok = gamma_ok && err <= 3e-2;
    c.details.push_back(fmt("ln F = %g: gamma PDE %.5f, erfc %.5f (rel diff %.2e, limit 3e-2)", log_f, g_pde, g_erfc,
                            err));
    c.details.push_back(
        fmt("  exact continuum gamma %.5f, PDE rel diff %.2e", g_exact, rel_diff(g_pde, g_exact)));
  }
  c.passed = w_err <= 1e-2 && w_end_err <= 1e-2 && l1 <= 2e-2 && gamma_ok;
}

mc::WalkSpec walk(double p, double eps, std::int64_t n, mc::Tilt tilt) {
  mc::WalkSpec s{DecoherenceParams(p, 1.0), eps, n, mc::BoundaryRule::Continuum, tilt, std::nullopt};
  return s;
}

void mc_vs_enumeration(CriterionResult& c, const SuiteOptions& o) {
  c.title = "MC vs exact enumeration, tilt variance reduction";
  c.passed = true;
  mc::RunOptions run;
  run.workers = o.workers;
  const std::uint64_t paths = 1'000'000;
  struct Case {
    double p;
    double eps;
    std::int64_t n;
  };
  const Case cases[] = {{0.6, 0.05, 2}, {0.6, 0.3, 12}, {0.55, 0.2, 16}, {0.7, 0.5, 10}, {0.52, 0.1, 16}, {0.4, 0.3, 14}};
  int index = 0;
  for (const Case& k : cases) {
    for (mc::Tilt tilt : {mc::Tilt::None, mc::Tilt::Measure}) {
      const mc::WalkSpec spec = walk(k.p, k.eps, k.n, tilt);
      const mc::ExactCount exact = mc::enumerate_survivors(spec);
      const mc::PathEnsemble e = mc::simulate_survivors(spec, paths, o.seed + static_cast<std::uint64_t>(index++), run);
      const double diff = std::fabs(e.estimate.value() - exact.count);
      const double se = e.std_error.value();
      const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      c.passed = c.passed && z <= 4.0;
      c.details.push_back(fmt("p %.2f eps %.2f N %lld %s: exact %.0f, MC %.2f +- %.2f (z = %.2f)", k.p, k.eps,
                              static_cast<long long>(k.n), tilt == mc::Tilt::None ? "none   " : "measure", exact.count,
                              e.estimate.value(), se, z));
    }
  }

  const mc::WalkSpec none = walk(0.55, 0.2, 200, mc::Tilt::None);
  const mc::WalkSpec measure = walk(0.55, 0.2, 200, mc::Tilt::Measure);
  const mc::PathEnsemble a = mc::simulate_survivors(none, paths, o.seed + 100, run);
  const mc::PathEnsemble b = mc::simulate_survivors(measure, paths, o.seed + 101, run);
  const double diff = std::fabs((a.estimate - b.estimate).value());
  const double joint = std::hypot(a.std_error.value(), b.std_error.value());
  const double z = diff / joint;
  const double ratio = std::pow((a.std_error / b.std_error).value(), 2.0);
  const WalkMoments m = exact_walk_moments(none);
  c.details.push_back(fmt("N 200 p 0.55 eps 0.2: none %.6e +- %.2e, measure %.6e +- %.2e, z = %.2f (limit 3)",
                          a.estimate.value(), a.std_error.value(), b.estimate.value(), b.std_error.value(), z));
  c.details.push_back(fmt("variance ratio none/measure = %.2f (limit >= 10)", ratio));
  c.details.push_back(fmt("exact: mean %.6e, relative variances %.3f / %.3f, ratio %.2f", m.mean.value(),
                          m.relative_variance_none, m.relative_variance_measure,
                          m.relative_variance_none / m.relative_variance_measure));
  c.passed = c.passed && z <= 3.0 && ratio >= 10.0;
}

mc::PathEnsemble pooled(const mc::WalkSpec& spec, std::uint64_t total, std::uint64_t seed, const mc::RunOptions& run) {
  constexpr int kSeeds = 4;
  std::vector<mc::PathEnsemble> parts;
  for (int i = 0; i < kSeeds; ++i) {
    parts.push_back(mc::simulate_survivors(spec, (total + kSeeds - 1) / kSeeds, seed + static_cast<std::uint64_t>(i), run));
  }
  return mc::merge(spec, parts);
}

void mc_vs_analytic_gamma(CriterionResult& c, const SuiteOptions& o) {
  c.title = "two-stage MC gamma vs erfc";
  const double p = 0.55;
  const double eps = 0.2;
  const std::int64_t n1 = 400;
  const std::int64_t n2 = 3200;
  const analytic::MeasureFraction f = analytic::MeasureFraction::from_log(-3.0);
  mc::RunOptions run;
  run.workers = o.workers;
  const mc::WalkSpec stage_one = walk(p, eps, n1, mc::Tilt::Measure);
  const mc::WalkSpec split = mc::two_stage_spec(stage_one, f, 1, n2);
  const mc::WalkSpec reference = mc::two_stage_spec(stage_one, analytic::MeasureFraction::unit(), 1, n2);

  const mc::PathEnsemble a = pooled(split, o.gamma_paths, o.seed + 1000, run);
  const mc::PathEnsemble b = pooled(reference, o.gamma_paths, o.seed + 2000, run);
  const double gamma = std::exp(a.estimate.log_magnitude() - f.log() - b.estimate.log_magnitude());
  const double rel_se = std::hypot(a.relative_error(), b.relative_error());
  const double se = gamma * rel_se;

  const DiffusionParams cont = to_diffusion(DecoherenceParams(p, 1.0), eps);
  const double t1 = static_cast<double>(n1);
  const double g_erfc = analytic::gamma_correction(f, t1, cont.w());
  const double dp_gamma = std::exp(exact_walk_moments(split).mean.log_magnitude() - f.log() -
                                   exact_walk_moments(reference).mean.log_magnitude());
  const double err = rel_diff(gamma, g_erfc);
  const double z = std::fabs(gamma - g_erfc) / se;
  c.details.push_back(fmt("gamma MC %.5f +- %.5f over %llu paths per run", gamma, se,
                          static_cast<unsigned long long>(a.n_paths)));
  c.details.push_back(fmt("erfc %.5f: rel diff %.3e (limit 0.1), z = %.2f (limit 3)", g_erfc, err, z));
  c.details.push_back(fmt("exact discrete gamma %.5f: z = %.2f", dp_gamma, std::fabs(gamma - dp_gamma) / se));
  c.passed = err <= 0.1 && z <= 3.0;
}

void stability(CriterionResult& c) {
  c.title = "numerical stability: bracket, erfcx seam, extreme times";
  c.passed = true;
  for (double wt : {1e-3, 1.0, 1e3, 1e6, 1e10}) {
    const auto it = std::find_if(fixtures::kBracket.begin(), fixtures::kBracket.end(),
                                 [&](const fixtures::Pair& q) { return q.x == wt; });
    const double err = rel_diff(special::bracket(wt).value(), it->value);
    c.passed = c.passed && err <= 1e-8;
    c.details.push_back(fmt("bracket(%g) rel err %.2e (limit 1e-8)", wt, err));
  }
  const double seam = special::kErfcxSeam;
  const double branch_gap =
      rel_diff(special::detail::erfcx_rational(seam), special::detail::erfcx_continued_fraction(seam));
  c.passed = c.passed && branch_gap <= 1e-12;
  c.details.push_back(fmt("erfcx branches at the seam differ by %.2e relative (limit 1e-12)", branch_gap));

  const DiffusionParams dp(1.0, 0.5, 0.1);
  for (double vw_t : {1e2, 1e6, 1e10}) {
    const double t = vw_t / (dp.v() - dp.w());
    const LogValue w = analytic::unmangled_count_W(t, dp);
    const LogValue lam = analytic::lambda_count(analytic::MeasureFraction::from_log(-10.0), 2.0, t / 2, t / 2, dp);
    const bool ok = w.sign() > 0 && std::isfinite(w.log_magnitude()) && lam.sign() > 0 &&
                    std::isfinite(lam.log_magnitude());
    c.passed = c.passed && ok;
    c.details.push_back(fmt("(v - w) t = %g: ln W = %.10g, ln lambda = %.10g", vw_t, w.log_magnitude(),
                            lam.log_magnitude()));
  }
}

std::string ensemble_bytes(const mc::WalkSpec& spec, const mc::PathEnsemble& e) {
  std::ostringstream os;
  mc::write_ensemble_csv(os, spec, e);
  os << fmt("%a %a\n", e.estimate.log_magnitude(), e.std_error.log_magnitude());
  return os.str();
}

void determinism(CriterionResult& c, const SuiteOptions& o) {
  c.title = "determinism across 1, 2 and 8 workers";
  c.passed = true;
  for (mc::Tilt tilt : {mc::Tilt::None, mc::Tilt::Measure}) {
    const mc::WalkSpec spec = walk(0.55, 0.2, 200, tilt);
    std::string baseline;
    for (unsigned workers : {1u, 2u, 8u}) {
      mc::RunOptions run;
      run.workers = workers;
      run.chunk_paths = 4096;
      const std::string bytes = ensemble_bytes(spec, mc::simulate_survivors(spec, 300'000, o.seed, run));
      if (baseline.empty()) baseline = bytes;
      const bool same = bytes == baseline;
      c.passed = c.passed && same;
      c.details.push_back(fmt("%s tilt, %u workers: %s", tilt == mc::Tilt::None ? "none" : "measure", workers,
                              same ? "identical" : "DIFFERENT"));
    }
  }
}

}  // namespace

CriterionResult run_criterion(int id, const SuiteOptions& options) {
  CriterionResult c;
  c.id = id;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: headline(c); break;
      case 2: near_born(c); break;
      case 3: pde_consistency(c); break;
      case 4: measure_conservation(c); break;
      case 5: closed_forms(c); break;
      case 6: analytic_vs_pde(c, options); break;
      case 7: mc_vs_enumeration(c, options); break;
      case 8: mc_vs_analytic_gamma(c, options); break;
      case 9: stability(c); break;
      case 10: determinism(c, options); break;
      default: throw DomainError("no criterion " + std::to_string(id));
    }
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception& ex) {
    c.passed = false;
    c.details.push_back(std::string("error: ") + ex.what());
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

std::vector<CriterionResult> run_suite(const std::vector<int>& ids, const SuiteOptions& options,
                                       const std::function<void(const CriterionResult&)>& report) {
  std::vector<int> todo = ids;
  if (todo.empty()) {
    for (int i = 1; i <= kCriterionCount; ++i) todo.push_back(i);
  }
  std::vector<CriterionResult> out;
  for (int id : todo) {
    out.push_back(run_criterion(id, options));
    if (report) report(out.back());
  }
  return out;
}

}  // namespace mangled::validation

#include "mangled/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "mangled/errors.hpp"

namespace mangled::pde {

namespace {

// Bernoulli function x / (e^x - 1).
double bernoulli(double x) {
  if (std::fabs(x) < 1e-10) return 1.0 - 0.5 * x;
  return x / std::expm1(x);
}

// Values below this (relative to the O(1) bulk kept by rescaling) are flushed
// to zero so the far tail never goes subnormal.
constexpr double kFlushBelow = 1e-290;
constexpr double kRescaleLow = 1e-100;
constexpr double kRescaleHigh = 1e100;
// Overshoot tolerated (and clamped) before a step is declared a failure.
constexpr double kNegativeTolerance = 1e-12;

}  // namespace

Grid::Grid(double y_max, int n_cells, double dt, Scheme scheme)
    : y_max_(y_max), n_cells_(n_cells), dt_(dt), scheme_(scheme) {
  if (!(y_max > 0.0) || !std::isfinite(y_max)) throw DomainError("Grid: y_max must be > 0");
  if (n_cells < kMinCells) throw DomainError("Grid: n_cells must be >= 16");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("Grid: dt must be > 0");
}

void Grid::check_stability(double w) const {
  if (scheme_ != Scheme::ExplicitUpwind || w == 0.0) return;
  const double hh = h();
  const double limit = kExplicitSafety * std::min(hh * hh / w, hh / w);
  if (dt_ > limit) {
    std::ostringstream os;
    os << "Grid: explicit scheme unstable, dt = " << dt_ << " exceeds " << limit;
    throw DomainError(os.str());
  }
}

double Field::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * h * std::exp(log_scale);
}

LogValue Field::survivor_count() const {
  double s = 0.0;
  for (double v : values) s += v;
  if (s == 0.0) return LogValue::zero();
  return LogValue::from_log(std::log(s * h) + log_scale + growth_log + log_multiplicity);
}

LogValue Field::density(int i) const {
  const double v = values.at(static_cast<std::size_t>(i));
  if (v == 0.0) return LogValue::zero();
  return LogValue::from_log(std::log(v) + log_scale + growth_log + log_multiplicity);
}

double Field::center_of_mass() const {
  double s = 0.0;
  double m1 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += values[i];
    m1 += values[i] * center(static_cast<int>(i));
  }
  return m1 / s;
}

double Field::variance() const {
  const double mean = center_of_mass();
  double s = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = center(static_cast<int>(i)) - mean;
    s += values[i];
    m2 += values[i] * d * d;
  }
  return m2 / s;
}

Field init_delta(const Grid& grid, double eps, double width_cells) {
  const double h = grid.h();
  if (!(eps >= 4.0 * h && eps <= grid.y_max() - 4.0 * h)) {
    std::ostringstream os;
    os << "init_delta: eps = " << eps << " is within 4h = " << 4.0 * h
       << " of a domain edge; refine the grid";
    throw DomainError(os.str());
  }
  if (!(width_cells > 0.0)) throw DomainError("init_delta: width must be > 0");
  const double s0 = width_cells * h;
  Field f;
  f.h = h;
  f.values.resize(static_cast<std::size_t>(grid.n_cells()));
  double total = 0.0;
  // Cell 0 touches the absorbing face and starts empty.
  for (int i = 1; i < grid.n_cells(); ++i) {
    const double z = (grid.center(i) - eps) / s0;
    const double v = std::exp(-0.5 * z * z);
    f.values[static_cast<std::size_t>(i)] = v < kFlushBelow ? 0.0 : v;
    total += f.values[static_cast<std::size_t>(i)];
  }
  const double norm = 1.0 / (total * h);
  for (double& v : f.values) v *= norm;
  return f;
}

Propagator::Propagator(const Grid& grid, double w, LeftBoundary left)
    : grid_(grid), w_(w), left_(left) {
  if (!(w > 0.0)) throw DomainError("Propagator: w must be > 0");
  grid_.check_stability(w);
  const int n = grid.n_cells();
  const double h = grid.h();
  const double d = 0.5 * w;
  // Cell Peclet number of the comoving drift -w against diffusion w/2.
  const double pe = -w * h / d;
  const double alpha = d / (h * h) * bernoulli(-pe);
  const double beta = d / (h * h) * bernoulli(pe);

  lower_.assign(static_cast<std::size_t>(n), alpha);
  upper_.assign(static_cast<std::size_t>(n), beta);
  diag_.assign(static_cast<std::size_t>(n), -(alpha + beta));
  lower_[0] = 0.0;
  upper_[static_cast<std::size_t>(n - 1)] = 0.0;

  // y = 0 face: Dirichlet zero at half a cell from the first centre.
  if (left == LeftBoundary::Absorbing) {
    const double edge = 2.0 * d / (h * h) * bernoulli(0.5 * pe);
    diag_[0] = -alpha - edge;
    absorb_coeff_ = edge * h;
  } else {
    diag_[0] = -alpha;
  }
  // y = y_max face: Dirichlet zero as well. The true far field is a tail
  // diffusing outward against the drift; nothing flows in from beyond.
  const double far_edge = 2.0 * d / (h * h) * bernoulli(-0.5 * pe);
  diag_[static_cast<std::size_t>(n - 1)] = -beta - far_edge;
  leak_coeff_ = far_edge * h;

  const double theta = grid.scheme() == Scheme::CrankNicolson ? 0.5 : 0.0;
  main_ = make_operator(grid.dt(), theta);
  half_implicit_ = make_operator(0.5 * grid.dt(), 1.0);
}

Propagator::Operator Propagator::make_operator(double dt, double theta) const {
  Operator op;
  op.dt = dt;
  op.theta = theta;
  if (theta > 0.0) {
    const std::size_t n = diag_.size();
    std::vector<double> lo(n), di(n), up(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = -theta * dt * lower_[i];
      di[i] = 1.0 - theta * dt * diag_[i];
      up[i] = -theta * dt * upper_[i];
    }
    op.implicit = TridiagonalSolver(lo, di, up);
  }
  return op;
}

void Propagator::apply(Field& field, const Operator& op) const {
  std::vector<double>& v = field.values;
  const std::size_t n = v.size();
  const double explicit_weight = (1.0 - op.theta) * op.dt;
  const double old_first = v[0];
  const double old_last = v[n - 1];

  if (explicit_weight > 0.0) {
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double cur = v[i];
      const double next = i + 1 < n ? v[i + 1] : 0.0;
      v[i] = cur + explicit_weight * (lower_[i] * prev + diag_[i] * cur + upper_[i] * next);
      prev = cur;
    }
  }
  if (op.theta > 0.0) op.implicit.solve(v);

  const double scale = std::exp(field.log_scale);
  field.absorbed += op.dt * absorb_coeff_ * (op.theta * v[0] + (1.0 - op.theta) * old_first) * scale;
  field.leaked += op.dt * leak_coeff_ * (op.theta * v[n - 1] + (1.0 - op.theta) * old_last) * scale;
  field.t += op.dt;
  finish_step(field);
}

void Propagator::finish_step(Field& field) const {
  double peak = 0.0;
  for (double x : field.values) {
    if (std::isnan(x)) throw NumericalFailure("pde step: NaN in field");
    peak = std::max(peak, x);
  }
  const double floor = -kNegativeTolerance * peak;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    double& x = field.values[i];
    if (x < floor) {
      std::ostringstream os;
      os << "pde step: negative overshoot " << x << " at cell " << i << " (peak " << peak
         << ", t = " << field.t << ")";
      throw NumericalFailure(os.str());
    }
    if (x < kFlushBelow) x = 0.0;
  }
  if (peak > 0.0 && (peak < kRescaleLow || peak > kRescaleHigh)) {
    const double inv = 1.0 / peak;
    for (double& x : field.values) x *= inv;
    field.log_scale += std::log(peak);
  }
}

void Propagator::step(Field& field, bool startup) const {
  if (field.values.size() != diag_.size()) throw DomainError("Propagator: field/grid mismatch");
  if (startup && grid_.scheme() == Scheme::CrankNicolson) {
    apply(field, half_implicit_);
    apply(field, half_implicit_);
    return;
  }
  apply(field, main_);
}

void Propagator::advance(Field& field, double duration, bool rannacher_start,
                         const std::function<void(const Field&)>& on_step) const {
  if (!(duration >= 0.0)) throw DomainError("Propagator::advance: negative duration");
  const double start = field.t;
  const double dt = grid_.dt();
  long long full = static_cast<long long>(std::llround(duration / dt));
  double remainder = duration - static_cast<double>(full) * dt;
  if (std::fabs(remainder) <= 1e-9 * std::max(duration, dt)) {
    remainder = 0.0;
  } else {
    full = static_cast<long long>(std::floor(duration / dt));
    remainder = duration - static_cast<double>(full) * dt;
  }
  for (long long k = 0; k < full; ++k) {
    step(field, rannacher_start && k == 0);
    if (on_step) on_step(field);
  }
  if (remainder > 0.0) {
    const Operator tail = make_operator(remainder, main_.theta);
    apply(field, tail);
    if (on_step) on_step(field);
  }
  field.t = start + duration;
}

Field step(Field field, const Grid& grid, double w) {
  Propagator(grid, w).step(field);
  return field;
}

Field solve(const DiffusionParams& dp, const Grid& grid, double T, const SolveOptions& options) {
  if (!(T > 0.0)) throw DomainError("solve: T must be > 0");
  dp.require_diffusive("pde::solve");
  Field field = init_delta(grid, dp.eps(), options.width_cells);
  const double rate = dp.v() - 0.5 * dp.w();
  const Propagator prop(grid, dp.w(), options.left);

  std::size_t next_snapshot = 0;
  long long steps = 0;
  auto hook = [&](const Field& f) {
    ++steps;
    const bool want_snapshot = options.on_snapshot && next_snapshot < options.snapshot_times.size() &&
                               f.t >= options.snapshot_times[next_snapshot] - 1e-12;
    const bool want_series = options.on_series && options.series_every > 0 &&
                             steps % options.series_every == 0;
    if (!want_snapshot && !want_series) return;
    Field view = f;
    view.growth_log = rate * view.t;
    while (want_snapshot && next_snapshot < options.snapshot_times.size() &&
           f.t >= options.snapshot_times[next_snapshot] - 1e-12) {
      options.on_snapshot(view);
      ++next_snapshot;
    }
    if (want_series) options.on_series(view);
  };
  const bool rannacher = grid.scheme() == Scheme::CrankNicolson;
  if (options.on_snapshot || options.on_series) {
    prop.advance(field, T, rannacher, hook);
  } else {
    prop.advance(field, T, rannacher);
  }
  field.growth_log = rate * field.t;
  return field;
}

Field shift_field(const Field& field, const Grid& target, analytic::MeasureFraction f) {
  const double a = -f.log();
  if (a >= 0.5 * target.y_max()) {
    throw DomainError("shift_field: |ln F| must be < y_max / 2 of the target grid");
  }
  const std::size_t n_old = field.values.size();
  const double h_old = field.h;
  const double y_old_max = h_old * static_cast<double>(n_old);

  // Cumulative scaled mass at the old cell faces.
  std::vector<double> prefix(n_old + 1, 0.0);
  for (std::size_t i = 0; i < n_old; ++i) prefix[i + 1] = prefix[i] + field.values[i] * h_old;
  auto cumulative = [&](double y) {
    if (y <= 0.0) return 0.0;
    if (y >= y_old_max) return prefix[n_old];
    const double u = y / h_old;
    const auto i = static_cast<std::size_t>(u);
    return prefix[i] + (u - static_cast<double>(i)) * h_old * field.values[i];
  };

  Field out = field;
  const int n_new = target.n_cells();
  const double h_new = target.h();
  out.h = h_new;
  out.values.assign(static_cast<std::size_t>(n_new), 0.0);
  double previous = cumulative(a);
  for (int j = 0; j < n_new; ++j) {
    const double upper = cumulative(a + (j + 1) * h_new);
    out.values[static_cast<std::size_t>(j)] = std::max(0.0, upper - previous) / h_new;
    previous = upper;
  }
  const double lost = prefix[n_old] - previous;
  if (lost > 1e-10 * prefix[n_old]) {
    throw DomainError("shift_field: target grid too short for the shifted field");
  }
  out.absorbed += cumulative(a) * std::exp(field.log_scale);
  return out;
}

TwoStageResult continue_two_stage(const DiffusionParams& dp, const Field& stage_one,
                                  analytic::MeasureFraction f, double g, double t2,
                                  const Grid& stage_two_grid,
                                  const std::function<void(const Field&)>& on_step) {
  if (!(g >= 1.0)) throw DomainError("born_two_stage: G must be >= 1");
  if (!(t2 > 0.0)) throw DomainError("born_two_stage: t2 must be > 0");
  const bool same_grid = stage_one.values.size() == static_cast<std::size_t>(stage_two_grid.n_cells()) &&
                         stage_one.h == stage_two_grid.h();
  const bool moved = f.log() != 0.0;
  Field field = (moved || !same_grid) ? shift_field(stage_one, stage_two_grid, f) : stage_one;
  field.log_multiplicity += std::log(g);

  const Propagator prop(stage_two_grid, dp.w());
  prop.advance(field, t2, moved && stage_two_grid.scheme() == Scheme::CrankNicolson, on_step);
  field.growth_log = (dp.v() - 0.5 * dp.w()) * field.t;
  return {field.survivor_count(), stage_one, std::move(field)};
}

TwoStageResult born_two_stage(const DiffusionParams& dp, const Grid& stage_one_grid, double t1,
                              analytic::MeasureFraction f, double g, double t2,
                              const std::optional<Grid>& stage_two_grid) {
  const Field first = solve(dp, stage_one_grid, t1);
  return continue_two_stage(dp, first, f, g, t2, stage_two_grid.value_or(stage_one_grid));
}

double recommended_y_max(double w, double T, double eps, double abs_log_f) {
  // Survivors fall off like y exp(-y - y^2 / (2 w T)); keep everything down to e^-kTailLog.
  constexpr double kTailLog = 40.0;
  const double wt = w * T;
  return eps + abs_log_f + wt * (std::sqrt(1.0 + 2.0 * kTailLog / wt) - 1.0);
}

void write_snapshot_csv(std::ostream& os, const Field& field, bool header) {
  if (header) os << "y,density,t\n";
  char buf[128];
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const double y = field.center(static_cast<int>(i));
    const double dens = field.density(static_cast<int>(i)).value();
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", y, dens, field.t);
    os << buf;
  }
}

}  // namespace mangled::pde

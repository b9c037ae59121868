#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mangled/analytic.hpp"
#include "mangled/log_value.hpp"
#include "mangled/model_params.hpp"
#include "mangled/tridiagonal.hpp"

// Finite-volume solver for the comoving-frame equation
//
//     nu_t = w nu_y + (w/2) nu_yy,   y in [0, y_max],   nu(0, t) = 0,
//
// whose solution times e^{(v - w/2)t} is the unmangled-world density mu1.
// The growth factor is applied analytically and never stepped.
//
// Cells are centred at (i + 1/2) h. Face fluxes use the exponentially fitted
// (Scharfetter-Gummel) upwind form: it upwinds toward the boundary, keeps the
// operator an M-matrix, moves mass at exactly velocity -w, and its numerical
// diffusion is O(h^2). The far face at y_max is absorbing too; y_max must be
// large enough that the mass leaving there (Field::leaked) is negligible.
namespace mangled::pde {

enum class Scheme { ExplicitUpwind, CrankNicolson };
enum class LeftBoundary { Absorbing, Reflecting };

class Grid {
 public:
  static constexpr int kMinCells = 16;
  static constexpr double kExplicitSafety = 0.9;

  Grid(double y_max, int n_cells, double dt, Scheme scheme = Scheme::CrankNicolson);

  double y_max() const { return y_max_; }
  int n_cells() const { return n_cells_; }
  double dt() const { return dt_; }
  Scheme scheme() const { return scheme_; }
  double h() const { return y_max_ / n_cells_; }
  double center(int i) const { return (i + 0.5) * h(); }

  // Explicit stepping needs dt <= 0.9 min(h^2/w, h/w). Throws DomainError.
  void check_stability(double w) const;

  bool operator==(const Grid&) const = default;

 private:
  double y_max_;
  int n_cells_;
  double dt_;
  Scheme scheme_;
};

// Density nu over cells at time t. values are scaled by e^{log_scale} to keep
// the bulk near unit magnitude while nu itself decays like e^{-wt/2}.
struct Field {
  std::vector<double> values;
  double h = 0.0;
  double t = 0.0;
  double log_scale = 0.0;
  double absorbed = 0.0;         // nu-frame mass removed at y = 0 (unscaled)
  double leaked = 0.0;           // nu-frame mass lost at y = y_max (unscaled)
  double growth_log = 0.0;       // (v - w/2) t
  double log_multiplicity = 0.0; // ln G after a two-stage split

  // Integral of nu, unscaled.
  double mass() const;
  // e^{growth_log + log_multiplicity} * integral of nu.
  LogValue survivor_count() const;
  // mu density in cell i.
  LogValue density(int i) const;
  double center(int i) const { return (i + 0.5) * h; }
  double center_of_mass() const;
  double variance() const;
};

// Mollified delta at y = eps: a Gaussian of standard deviation width_cells * h,
// normalized to unit integral on the grid, with the cell next to y = 0 left
// empty. eps must be at least 4h from both edges.
Field init_delta(const Grid& grid, double eps, double width_cells = 2.0);

// Precomputed time stepper for one grid, diffusion rate and boundary type.
class Propagator {
 public:
  Propagator(const Grid& grid, double w, LeftBoundary left = LeftBoundary::Absorbing);

  // One step of size grid.dt(). With startup, a Crank-Nicolson step is
  // replaced by two backward-Euler half steps (Rannacher).
  void step(Field& field, bool startup = false) const;

  // Steps until field.t has advanced by duration. The last step is shortened
  // if duration is not a multiple of dt.
  void advance(Field& field, double duration, bool rannacher_start,
               const std::function<void(const Field&)>& on_step = {}) const;

  const Grid& grid() const { return grid_; }
  double w() const { return w_; }

 private:
  struct Operator {
    double dt = 0.0;
    double theta = 0.0;
    TridiagonalSolver implicit;
  };

  Operator make_operator(double dt, double theta) const;
  void apply(Field& field, const Operator& op) const;
  void finish_step(Field& field) const;

  Grid grid_;
  double w_;
  LeftBoundary left_;
  // Spatial operator A (d nu / dt = A nu) as three bands.
  std::vector<double> lower_, diag_, upper_;
  double absorb_coeff_ = 0.0;  // absorbed rate = absorb_coeff * nu_0
  double leak_coeff_ = 0.0;    // leaked rate = leak_coeff * nu_{n-1}
  Operator main_;
  Operator half_implicit_;
};

// Convenience single step; builds a Propagator each call.
Field step(Field field, const Grid& grid, double w);

struct SolveOptions {
  LeftBoundary left = LeftBoundary::Absorbing;
  double width_cells = 2.0;
  // Called with every field whose time crosses one of these (sorted) times.
  std::vector<double> snapshot_times;
  std::function<void(const Field&)> on_snapshot;
  // Called every series_every steps (0 disables).
  int series_every = 0;
  std::function<void(const Field&)> on_series;
};

// Mollified delta at eps, stepped to time T, growth factor applied.
Field solve(const DiffusionParams& dp, const Grid& grid, double T, const SolveOptions& options = {});

// Moves every world down by |ln F| (y <- y + ln F) onto a possibly different
// grid, by conservative remapping. Mass pushed below y = 0 is added to
// absorbed. Throws DomainError if |ln F| >= target.y_max() / 2 or if the
// target grid cannot hold the shifted support.
Field shift_field(const Field& field, const Grid& target, analytic::MeasureFraction f);

struct TwoStageResult {
  LogValue count;  // PDE estimate of lambda, unit initial mass
  Field stage_one;
  Field final_field;
};

// Solve to t1 on stage_one_grid, shift by ln F, multiply by G, continue for t2
// on stage_two_grid (defaults to the same grid).
TwoStageResult born_two_stage(const DiffusionParams& dp, const Grid& stage_one_grid, double t1,
                              analytic::MeasureFraction f, double g, double t2,
                              const std::optional<Grid>& stage_two_grid = std::nullopt);

// Continues a stage-one field through the split and stage two. Lets callers
// share one stage-one solve across several F values. on_step sees the field
// after every stage-two step.
TwoStageResult continue_two_stage(const DiffusionParams& dp, const Field& stage_one,
                                  analytic::MeasureFraction f, double g, double t2,
                                  const Grid& stage_two_grid,
                                  const std::function<void(const Field&)>& on_step = {});

// y_max that keeps the tail leak negligible: eps + |ln F| plus the distance
// at which the survivor density has dropped by e^-40 from its peak.
double recommended_y_max(double w, double T, double eps, double abs_log_f = 0.0);

// CSV rows "y,density,t" for every cell (density in the mu frame).
void write_snapshot_csv(std::ostream& os, const Field& field, bool header = true);

}  // namespace mangled::pde

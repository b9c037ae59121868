#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mangled/analytic.hpp"
#include "mangled/diagnostics.hpp"
#include "mangled/log_value.hpp"
#include "mangled/model_params.hpp"
#include "mangled/monte_carlo.hpp"
#include "mangled/pde_solver.hpp"

// Born-rule experiments: outcome k gives every world G_k children each a
// factor F_k smaller after t1 of background decoherence, and the unmangled
// worlds are counted t2 later. The Born prediction for outcome k is F_k G_k.
//
// Engines report lambda in their own normalization (the closed forms carry
// initial mass 1/2, the PDE and MC start from one world); only shares and
// gamma are compared across engines.
namespace mangled::born {

struct BornOutcomeSpec {
  std::string label;
  analytic::MeasureFraction f = analytic::MeasureFraction::unit();
  std::uint32_t g = 1;

  double born_probability() const;
};

inline constexpr double kNormalizationTolerance = 1e-12;

// Throws DomainError unless the list is nonempty, labels are distinct, every
// G >= 1, and sum_k F_k G_k = 1 within kNormalizationTolerance.
void check_normalized(const std::vector<BornOutcomeSpec>& outcomes);

enum class Engine { Analytic, Pde, Mc };

std::string engine_name(Engine engine);
// Throws DomainError on an unknown name.
Engine engine_from_name(const std::string& name);

// Model and times shared by every engine. The MC engine needs the discrete
// parameters and runs N_i = round(r t_i) events per stage.
struct ExperimentSetup {
  DiffusionParams continuum;
  std::optional<DecoherenceParams> discrete;
  double t1 = 0.0;
  double t2 = 0.0;

  static ExperimentSetup from_discrete(const DecoherenceParams& dp, double eps, double t1, double t2);
  static ExperimentSetup from_continuum(const DiffusionParams& params, double t1, double t2);

  std::int64_t n_events_1() const;
  std::int64_t n_events_2() const;
};

struct PdeSettings {
  int n_cells = 4096;
  double dt = 0.01;
  pde::Scheme scheme = pde::Scheme::CrankNicolson;
  // Defaults: recommended_y_max for t1, and for t1 + t2 with the largest |ln F|.
  std::optional<double> y_max_1;
  std::optional<double> y_max_2;
  // Record gamma(t) during stage two every this many steps (0: off).
  int gamma_series_every = 0;

  pde::Grid stage_one_grid(const ExperimentSetup& setup) const;
  pde::Grid stage_two_grid(const ExperimentSetup& setup, double max_abs_log_f) const;
};

struct McSettings {
  std::uint64_t n_paths = 1u << 20;
  std::uint64_t seed = 0;
  std::optional<mc::Tilt> tilt;  // default_tilt over all events when empty
  unsigned workers = 0;
};

struct OutcomeRow {
  std::string label;
  Engine engine = Engine::Analytic;
  double log_f = 0.0;
  std::uint32_t g = 1;
  double born_probability = 0.0;
  LogValue lambda;
  double share = 0.0;           // lambda_k / sum_j lambda_j
  double share_ratio = 0.0;     // share / born_probability
  double gamma = 0.0;           // lambda_k / (F_k G_k lambda(1, 1))
  double gamma_analytic = 0.0;  // erfc(-ln F / sqrt(2 w t1))
  // MC only: relative errors of lambda_k and lambda(1, 1) in quadrature. The
  // two runs share their paths, so this overstates the error of gamma.
  double relative_error = 0.0;
  std::string status = "ok";
};

struct GammaSample {
  std::string label;
  double t = 0.0;  // time since the split
  double gamma = 0.0;
};

struct DeviationReport {
  ExperimentSetup setup;
  std::vector<Engine> engines;
  PdeSettings pde;
  McSettings mc;
  std::vector<OutcomeRow> rows;  // engine-major, outcomes in input order
  std::vector<GammaSample> gamma_series;
  Diagnostics diagnostics;
  bool complete = true;          // false if any engine failed

  std::vector<OutcomeRow> rows_for(Engine engine) const;
};

// Runs every engine (concurrently) over the outcomes. An engine that throws
// leaves rows with status "failed: ..." and clears complete.
DeviationReport deviation_table(const std::vector<BornOutcomeSpec>& outcomes, const ExperimentSetup& setup,
                                const std::vector<Engine>& engines, const PdeSettings& pde = {},
                                const McSettings& mc = {});

// One row per outcome x engine, header included.
void write_deviation_csv(std::ostream& os, const DeviationReport& report);
void write_gamma_series_csv(std::ostream& os, const DeviationReport& report);
nlohmann::json deviation_metadata(const DeviationReport& report);

struct HeadlineReport {
  double wt1 = 1e10;
  double log_f = -1e5;
  double gamma = 0.0;
  double gamma_expected = 0.0;  // erfc(1/sqrt 2)
  double log10_f = 0.0;
  bool below_threshold = false; // log10 F < -43000
  double gamma_double_shift = 0.0;  // F = e^{-2e5}
  double gamma_small_shift = 0.0;   // F = e^{-1e4}

  bool passed() const;
  std::string format() const;
};

HeadlineReport headline_check();

struct ScanRow {
  double p = 0.0;
  double r = 0.0;
  double v = 0.0;
  double w = 0.0;
  double v_minus_w = 0.0;         // unmangled growth exponent
  double all_worlds_exponent = 0.0;  // v - w/2
  double fraction_decay = 0.0;    // (v - w/2) - (v - w) = w/2
  double identity_residual = 0.0; // |(v - w) + r xhat1|
  bool degenerate = false;        // w == 0
  bool count_grows = false;       // v > w
  bool fraction_shrinks = false;  // w > 0
};

std::vector<ScanRow> survival_condition_scan(const std::vector<DecoherenceParams>& grid);
void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);

}  // namespace mangled::born

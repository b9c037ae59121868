#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mangled/analytic.hpp"
#include "mangled/log_value.hpp"
#include "mangled/model_params.hpp"
#include "mangled/walk_kernel.hpp"

// Branching-worlds Monte Carlo with mangling.
//
// One initial world splits at every event into children of relative measure
// p and 1-p. Following one lineage through N events is a random walk in
// log-size x; the lineage is mangled (absorbed) the first time x <= x_b(n).
// Each simulated path stands for the whole subtree of worlds sharing its
// branch choices, and its weight converts "probability under the sampling
// law" into "number of worlds":
//
//   Tilt::None     children chosen with probability 1/2 each; weight 2^N
//   Tilt::Measure  children chosen with probability (p, 1-p); weight e^{-x_N},
//                  the likelihood ratio of the counting law to the measure law
//
// Both estimate the expected number of unmangled worlds among the 2^N leaves.
namespace mangled::mc {

enum class BoundaryRule {
  Continuum,       // x_b(n) = n xhat1 - eps
  RateContinuum,   // x_b(t) = -(v - w) t - eps at t = n / r
};

enum class Tilt { None, Measure };

// All worlds alive after event at_event are split into g children, each a
// factor f smaller (x <- x + ln f), then checked for absorption at once.
struct Split {
  std::int64_t at_event;
  analytic::MeasureFraction f;
  std::uint32_t g;
};

struct WalkSpec {
  DecoherenceParams dp;
  double eps;
  std::int64_t n_events;
  BoundaryRule rule = BoundaryRule::Continuum;
  Tilt tilt = Tilt::None;
  std::optional<Split> split;

  // Throws DomainError on inconsistent fields.
  void validate() const;
  double boundary(std::int64_t n) const;
  // w t for the continuum model at the final event (t = n_events / r).
  double wt() const;
};

// Measure tilt once w t > 4, plain counting below.
Tilt default_tilt(const DecoherenceParams& dp, std::int64_t n_events);

struct RunOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
  std::optional<KernelKind> kernel;  // default: best_kernel()
  std::uint32_t stream = 0;
  std::uint64_t chunk_paths = 1u << 14;
};

struct PathEnsemble {
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  std::uint64_t survivor_count = 0;
  std::vector<std::uint64_t> survivors_by_k;  // by number of larger-branch choices
  std::vector<double> log_weight_by_k;        // ln of a survivor's weight
  LogValue estimate;                           // mean weight per path
  LogValue std_error;

  double relative_error() const;
};

// Compiles the spec into the integer program run by the kernels.
WalkProgram compile(const WalkSpec& spec, std::uint64_t seed, std::uint32_t stream = 0);

// Log-size after n events with k larger-branch choices (including any split).
double position(const WalkSpec& spec, std::int64_t n, std::int64_t k);

PathEnsemble simulate_survivors(const WalkSpec& spec, std::uint64_t n_paths, std::uint64_t seed,
                                const RunOptions& options = {});

// Rebuilds the estimator statistics from a survivor histogram (used to pool
// ensembles run with different seeds).
PathEnsemble merge(const WalkSpec& spec, const std::vector<PathEnsemble>& parts);

struct ExactCount {
  double count;    // unmangled leaf worlds (times G after a split)
  double measure;  // sum of e^{x_N} over those worlds
};

// Walks the full binary tree. Refuses n_events > 24.
ExactCount enumerate_survivors(const WalkSpec& spec);

inline constexpr std::int64_t kMaxEnumerationEvents = 24;

struct Histogram {
  std::vector<double> edges;       // n_bins + 1 increasing edges in y = x - x_b(N)
  std::vector<LogValue> weight;    // summed survivor weight per bin / n_paths
  LogValue total;                  // summed weight in all bins
  LogValue outside;                // survivor weight beyond the last edge
  double mean_y = 0.0;             // weighted mean of y over all survivors
  bool empty = true;

  // Bin masses scaled to sum to one, divided by bin width.
  std::vector<double> normalized_density() const;
};

// Edges centred on the lattice of reachable y values at the final event, one
// lattice point per bin, from y = 0 to y_hi.
std::vector<double> lattice_edges(const WalkSpec& spec, double y_hi);

Histogram empirical_distribution(const WalkSpec& spec, std::uint64_t n_paths, std::uint64_t seed,
                                 const std::vector<double>& edges, const RunOptions& options = {});
Histogram histogram_from(const WalkSpec& spec, const PathEnsemble& ensemble,
                         const std::vector<double>& edges);

// Two-stage protocol: n_events_1 background events, split into G children a
// factor F smaller, n_events_2 further events. Estimates lambda.
PathEnsemble born_two_stage_mc(const WalkSpec& stage_one, analytic::MeasureFraction f,
                               std::uint32_t g, std::int64_t n_events_2, std::uint64_t n_paths,
                               std::uint64_t seed, const RunOptions& options = {});

// Builds the combined spec used by born_two_stage_mc.
WalkSpec two_stage_spec(const WalkSpec& stage_one, analytic::MeasureFraction f, std::uint32_t g,
                        std::int64_t n_events_2);

// Log-size trajectory of one path until absorption or the last event.
std::vector<double> trace_path(const WalkSpec& spec, std::uint64_t seed, std::uint64_t path,
                               std::uint32_t stream = 0);

// CSV "y,weight": one row per occupied lattice point, weight being the share
// of the estimate carried by that point.
void write_ensemble_csv(std::ostream& os, const WalkSpec& spec, const PathEnsemble& ensemble);

}  // namespace mangled::mc

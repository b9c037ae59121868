#pragma once

#include <cstdint>
#include <optional>

namespace mangled {

// Per-event statistics of the measure-weighted log-size of a binary split
// into fractions p and 1-p.
struct BinaryEventStats {
  double xhat1;    // median-measure drift per event, p ln p + (1-p) ln(1-p)
  double sigma1;   // |sqrt(p(1-p)) ln(p/(1-p))|
  double xtilde1;  // median-world drift per event, xhat1 - sigma1^2
};

// Mean and variance of one step of the counting walk, where both children of
// a split are equally likely.
struct CountWalkStats {
  double mean;
  double var;
};

BinaryEventStats binary_event_stats(double p);
CountWalkStats count_walk_stats(double p);

// Discrete parameterization: binary decoherence events of branch weight p at
// rate r.
class DecoherenceParams {
 public:
  DecoherenceParams(double p, double r, std::optional<std::int64_t> n_events = std::nullopt);

  double p() const { return p_; }
  double r() const { return r_; }
  std::optional<std::int64_t> n_events() const { return n_events_; }
  BinaryEventStats stats() const { return binary_event_stats(p_); }

  // p = 1/2 gives zero diffusion.
  bool degenerate() const { return p_ == 0.5; }

 private:
  double p_;
  double r_;
  std::optional<std::int64_t> n_events_;
};

// Continuum parameterization in log-size x = ln m: drift v, diffusion w, and
// the boundary offset eps below the median measure.
class DiffusionParams {
 public:
  // v > 0, w >= 0, eps > 0. w == 0 is accepted but flagged degenerate.
  DiffusionParams(double v, double w, double eps);

  double v() const { return v_; }
  double w() const { return w_; }
  double eps() const { return eps_; }

  bool degenerate() const { return w_ == 0.0; }
  // Unmangled world count grows in time iff v > w.
  bool survival_regime() const { return v_ > w_; }

  // Throws DomainError when w == 0; every closed form divides by w.
  void require_diffusive(const char* who) const;

  DiffusionParams with_eps(double eps) const { return {v_, w_, eps}; }

 private:
  double v_;
  double w_;
  double eps_;
};

DiffusionParams to_diffusion(const DecoherenceParams& dp, double eps);

}  // namespace mangled

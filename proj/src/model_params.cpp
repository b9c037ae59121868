#include "mangled/model_params.hpp"

#include <cmath>
#include <string>

#include "mangled/errors.hpp"

namespace mangled {

namespace {

void require_probability(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(who) + ": p must lie in (0,1), got " + std::to_string(p));
  }
}

}  // namespace

BinaryEventStats binary_event_stats(double p) {
  require_probability(p, "binary_event_stats");
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double xhat1 = p * lp + (1.0 - p) * lq;
  const double sigma1 = std::sqrt(p * (1.0 - p)) * std::fabs(lp - lq);
  return {xhat1, sigma1, xhat1 - sigma1 * sigma1};
}

CountWalkStats count_walk_stats(double p) {
  require_probability(p, "count_walk_stats");
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double half_gap = 0.5 * (lp - lq);
  return {0.5 * (lp + lq), half_gap * half_gap};
}

DecoherenceParams::DecoherenceParams(double p, double r, std::optional<std::int64_t> n_events)
    : p_(p), r_(r), n_events_(n_events) {
  require_probability(p, "DecoherenceParams");
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("DecoherenceParams: r must be > 0");
  if (n_events && *n_events < 0) throw DomainError("DecoherenceParams: N must be >= 0");
}

DiffusionParams::DiffusionParams(double v, double w, double eps) : v_(v), w_(w), eps_(eps) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("DiffusionParams: v must be > 0");
  if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("DiffusionParams: w must be >= 0");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("DiffusionParams: eps must be > 0");
}

void DiffusionParams::require_diffusive(const char* who) const {
  if (degenerate()) {
    throw DomainError(std::string(who) + ": w = 0 (pure drift) is not supported");
  }
}

DiffusionParams to_diffusion(const DecoherenceParams& dp, double eps) {
  const BinaryEventStats s = dp.stats();
  return {-dp.r() * s.xtilde1, dp.r() * s.sigma1 * s.sigma1, eps};
}

}  // namespace mangled

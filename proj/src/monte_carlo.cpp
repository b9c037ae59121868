#include "mangled/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "mangled/errors.hpp"
#include "mangled/philox.hpp"

namespace mangled::mc {

namespace {

constexpr double kTwo32 = 4294967296.0;

struct Branches {
  double log_large;  // ln max(p, 1-p)
  double log_small;  // ln min(p, 1-p)
};

Branches branches(const DecoherenceParams& dp) {
  const double p = std::max(dp.p(), 1.0 - dp.p());
  return {std::log(p), std::log1p(-p)};
}

std::uint32_t up_threshold(const WalkSpec& spec) {
  if (spec.tilt == Tilt::None) return 0x80000000u;
  const double p = std::max(spec.dp.p(), 1.0 - spec.dp.p());
  const double t = std::nearbyint(p * kTwo32);
  return static_cast<std::uint32_t>(std::clamp(t, 1.0, kTwo32 - 1.0));
}

double log_g(const WalkSpec& spec) { return spec.split ? std::log(static_cast<double>(spec.split->g)) : 0.0; }

std::vector<double> survivor_log_weights(const WalkSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.n_events);
  std::vector<double> lw(n + 1);
  const double extra = log_g(spec);
  if (spec.tilt == Tilt::None) {
    std::fill(lw.begin(), lw.end(), static_cast<double>(spec.n_events) * M_LN2 + extra);
    return lw;
  }
  // Likelihood ratio against the quantized sampling law actually used.
  const double t = static_cast<double>(up_threshold(spec));
  const double log_up = std::log(t / kTwo32);
  const double log_down = std::log((kTwo32 - t) / kTwo32);
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    lw[k] = -(kk * log_up + (static_cast<double>(n) - kk) * log_down) + extra;
  }
  return lw;
}

void fill_statistics(PathEnsemble& e) {
  std::vector<double> first;
  std::vector<double> second;
  e.survivor_count = 0;
  for (std::size_t k = 0; k < e.survivors_by_k.size(); ++k) {
    const std::uint64_t c = e.survivors_by_k[k];
    if (c == 0) continue;
    e.survivor_count += c;
    const double lc = std::log(static_cast<double>(c));
    first.push_back(lc + e.log_weight_by_k[k]);
    second.push_back(lc + 2.0 * e.log_weight_by_k[k]);
  }
  const double log_n = std::log(static_cast<double>(e.n_paths));
  const double m1 = log_sum_exp(first) - log_n;
  const double m2 = log_sum_exp(second) - log_n;
  e.estimate = LogValue::from_log(m1);
  e.std_error = LogValue::zero();
  if (e.survivor_count == 0 || e.n_paths < 2) return;
  const double twice_m1 = 2.0 * m1;
  if (m2 <= twice_m1) return;
  const double log_var = m2 + log1mexp(twice_m1 - m2);
  e.std_error = LogValue::from_log(0.5 * (log_var - std::log(static_cast<double>(e.n_paths - 1))));
}

}  // namespace

void WalkSpec::validate() const {
  if (!(eps > 0.0)) throw DomainError("WalkSpec: eps must be > 0");
  if (n_events < 1) throw DomainError("WalkSpec: n_events must be >= 1");
  if (n_events > std::numeric_limits<std::int32_t>::max() - 64) {
    throw DomainError("WalkSpec: n_events too large");
  }
  if (split) {
    if (split->at_event < 1 || split->at_event > n_events) {
      throw DomainError("WalkSpec: split must happen at an event in [1, n_events]");
    }
    if (split->g < 1) throw DomainError("WalkSpec: G must be >= 1");
  }
}

double WalkSpec::boundary(std::int64_t n) const {
  const BinaryEventStats s = dp.stats();
  const double nn = static_cast<double>(n);
  if (rule == BoundaryRule::Continuum) return nn * s.xhat1 - eps;
  const double v_minus_w = -dp.r() * s.xtilde1 - dp.r() * s.sigma1 * s.sigma1;
  return -v_minus_w * (nn / dp.r()) - eps;
}

double WalkSpec::wt() const {
  const BinaryEventStats s = dp.stats();
  return s.sigma1 * s.sigma1 * static_cast<double>(n_events);
}

Tilt default_tilt(const DecoherenceParams& dp, std::int64_t n_events) {
  const BinaryEventStats s = dp.stats();
  return s.sigma1 * s.sigma1 * static_cast<double>(n_events) > 4.0 ? Tilt::Measure : Tilt::None;
}

double PathEnsemble::relative_error() const {
  if (estimate.is_zero()) return std::numeric_limits<double>::infinity();
  return (std_error / estimate).value();
}

double position(const WalkSpec& spec, std::int64_t n, std::int64_t k) {
  const Branches b = branches(spec.dp);
  double x = static_cast<double>(k) * b.log_large + static_cast<double>(n - k) * b.log_small;
  if (spec.split && n >= spec.split->at_event) x += spec.split->f.log();
  return x;
}

WalkProgram compile(const WalkSpec& spec, std::uint64_t seed, std::uint32_t stream) {
  spec.validate();
  WalkProgram prog;
  prog.n_events = static_cast<std::int32_t>(spec.n_events);
  prog.up_threshold = up_threshold(spec);
  prog.seed = seed;
  prog.stream = stream;
  prog.absorb_threshold.assign(static_cast<std::size_t>(spec.n_events) + 1 + kThresholdPadding, -1);

  const Branches b = branches(spec.dp);
  const double gap = b.log_large - b.log_small;
  for (std::int64_t n = 1; n <= spec.n_events; ++n) {
    const double xb = spec.boundary(n);
    auto absorbed = [&](std::int64_t k) { return position(spec, n, k) <= xb; };
    std::int64_t c;
    if (gap > 0.0) {
      const double shift = spec.split && n >= spec.split->at_event ? spec.split->f.log() : 0.0;
      const double guess = std::floor((xb - static_cast<double>(n) * b.log_small - shift) / gap);
      c = static_cast<std::int64_t>(std::clamp(guess, -1.0, static_cast<double>(n)));
      // Settle rounding at the edge against the exact predicate.
      while (c + 1 <= n && absorbed(c + 1)) ++c;
      while (c >= 0 && !absorbed(c)) --c;
    } else {
      c = absorbed(0) ? n : -1;
    }
    prog.absorb_threshold[static_cast<std::size_t>(n)] = static_cast<std::int32_t>(c);
  }
  return prog;
}

PathEnsemble simulate_survivors(const WalkSpec& spec, std::uint64_t n_paths, std::uint64_t seed,
                                const RunOptions& options) {
  if (n_paths < 1) throw DomainError("simulate_survivors: n_paths must be >= 1");
  const WalkProgram prog = compile(spec, seed, options.stream);
  const KernelKind kernel = options.kernel.value_or(best_kernel());
  const std::size_t bins = static_cast<std::size_t>(spec.n_events) + 1;
  const std::uint64_t chunk = std::max<std::uint64_t>(1, options.chunk_paths);
  const std::uint64_t n_chunks = (n_paths + chunk - 1) / chunk;

  unsigned workers = options.workers != 0 ? options.workers : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, n_chunks));

  // Histograms are integer counts, so the merge is exact in any order.
  std::vector<std::vector<std::uint64_t>> local(workers, std::vector<std::uint64_t>(bins, 0));
  std::atomic<std::uint64_t> next_chunk{0};
  auto work = [&](unsigned id) {
    for (;;) {
      const std::uint64_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) return;
      const std::uint64_t begin = c * chunk;
      const std::uint64_t end = std::min(n_paths, begin + chunk);
      run_walk(kernel, prog, begin, end, local[id]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
  }

  PathEnsemble e;
  e.n_paths = n_paths;
  e.seed = seed;
  e.stream = options.stream;
  e.survivors_by_k.assign(bins, 0);
  for (const auto& h : local) {
    for (std::size_t k = 0; k < bins; ++k) e.survivors_by_k[k] += h[k];
  }
  e.log_weight_by_k = survivor_log_weights(spec);
  fill_statistics(e);
  return e;
}

PathEnsemble merge(const WalkSpec& spec, const std::vector<PathEnsemble>& parts) {
  if (parts.empty()) throw DomainError("merge: nothing to merge");
  PathEnsemble e;
  const std::size_t bins = static_cast<std::size_t>(spec.n_events) + 1;
  e.survivors_by_k.assign(bins, 0);
  e.seed = parts.front().seed;
  e.stream = parts.front().stream;
  for (const PathEnsemble& p : parts) {
    if (p.survivors_by_k.size() != bins) throw DomainError("merge: ensembles from different specs");
    e.n_paths += p.n_paths;
    for (std::size_t k = 0; k < bins; ++k) e.survivors_by_k[k] += p.survivors_by_k[k];
  }
  e.log_weight_by_k = survivor_log_weights(spec);
  fill_statistics(e);
  return e;
}

ExactCount enumerate_survivors(const WalkSpec& spec) {
  spec.validate();
  if (spec.n_events > kMaxEnumerationEvents) {
    throw DomainError("enumerate_survivors: n_events > 24 is too large to enumerate");
  }
  const double lp = std::log(spec.dp.p());
  const double lq = std::log1p(-spec.dp.p());
  const std::int64_t last = spec.n_events;
  double count = 0.0;
  double measure = 0.0;

  struct Frame {
    std::int64_t n;
    double x;
  };
  std::vector<Frame> stack{{0, 0.0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    for (const double step : {lp, lq}) {
      const std::int64_t n = f.n + 1;
      double x = f.x + step;
      if (spec.split && n == spec.split->at_event) x += spec.split->f.log();
      if (x <= spec.boundary(n)) continue;
      if (n == last) {
        count += 1.0;
        measure += std::exp(x);
      } else {
        stack.push_back({n, x});
      }
    }
  }
  const double g = spec.split ? static_cast<double>(spec.split->g) : 1.0;
  return {count * g, measure * g};
}

std::vector<double> Histogram::normalized_density() const {
  std::vector<double> out(weight.size(), 0.0);
  if (empty || total.is_zero()) return out;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out[i] = (weight[i] / total).value() / (edges[i + 1] - edges[i]);
  }
  return out;
}

std::vector<double> lattice_edges(const WalkSpec& spec, double y_hi) {
  const Branches b = branches(spec.dp);
  const double gap = b.log_large - b.log_small;
  const double xb = spec.boundary(spec.n_events);
  std::vector<double> edges;
  if (gap == 0.0) {
    const double y = position(spec, spec.n_events, 0) - xb;
    edges = {0.0, std::max(y_hi, y + 1.0)};
    return edges;
  }
  // Smallest reachable positive y.
  double y0 = position(spec, spec.n_events, 0) - xb;
  const double skip = std::floor(-y0 / gap) + 1.0;
  if (y0 <= 0.0) y0 += std::max(0.0, skip) * gap;
  while (y0 - gap > 0.0) y0 -= gap;
  edges.push_back(std::max(0.0, y0 - 0.5 * gap));
  for (double c = y0; c + 0.5 * gap <= y_hi; c += gap) edges.push_back(c + 0.5 * gap);
  if (edges.size() < 2) edges.push_back(y_hi);
  return edges;
}

Histogram histogram_from(const WalkSpec& spec, const PathEnsemble& ensemble,
                         const std::vector<double>& edges) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
    throw DomainError("histogram: need at least two increasing edges");
  }
  Histogram h;
  h.edges = edges;
  h.weight.assign(edges.size() - 1, LogValue::zero());
  const double xb = spec.boundary(spec.n_events);
  const double log_n = std::log(static_cast<double>(ensemble.n_paths));

  double max_lw = LogValue::kNegInf;
  for (std::size_t k = 0; k < ensemble.survivors_by_k.size(); ++k) {
    if (ensemble.survivors_by_k[k] > 0) max_lw = std::max(max_lw, ensemble.log_weight_by_k[k]);
  }
  double rel_total = 0.0;
  double rel_first = 0.0;
  for (std::size_t k = 0; k < ensemble.survivors_by_k.size(); ++k) {
    const std::uint64_t c = ensemble.survivors_by_k[k];
    if (c == 0) continue;
    h.empty = false;
    const double y = position(spec, spec.n_events, static_cast<std::int64_t>(k)) - xb;
    const LogValue w = LogValue::from_log(std::log(static_cast<double>(c)) + ensemble.log_weight_by_k[k] - log_n);
    const double rel = std::exp(std::log(static_cast<double>(c)) + ensemble.log_weight_by_k[k] - max_lw);
    rel_total += rel;
    rel_first += rel * y;
    h.total = h.total + w;
    const auto it = std::upper_bound(edges.begin(), edges.end(), y);
    if (it == edges.begin()) continue;
    if (it == edges.end()) {
      h.outside = h.outside + w;
      continue;
    }
    const auto bin = static_cast<std::size_t>(it - edges.begin() - 1);
    h.weight[bin] = h.weight[bin] + w;
  }
  h.mean_y = h.empty ? 0.0 : rel_first / rel_total;
  return h;
}

Histogram empirical_distribution(const WalkSpec& spec, std::uint64_t n_paths, std::uint64_t seed,
                                 const std::vector<double>& edges, const RunOptions& options) {
  return histogram_from(spec, simulate_survivors(spec, n_paths, seed, options), edges);
}

WalkSpec two_stage_spec(const WalkSpec& stage_one, analytic::MeasureFraction f, std::uint32_t g,
                        std::int64_t n_events_2) {
  if (n_events_2 < 1) throw DomainError("born_two_stage_mc: stage two needs >= 1 event");
  if (stage_one.split) throw DomainError("born_two_stage_mc: stage one already has a split");
  WalkSpec s = stage_one;
  s.n_events = stage_one.n_events + n_events_2;
  s.split = Split{stage_one.n_events, f, g};
  s.validate();
  return s;
}

PathEnsemble born_two_stage_mc(const WalkSpec& stage_one, analytic::MeasureFraction f,
                               std::uint32_t g, std::int64_t n_events_2, std::uint64_t n_paths,
                               std::uint64_t seed, const RunOptions& options) {
  return simulate_survivors(two_stage_spec(stage_one, f, g, n_events_2), n_paths, seed, options);
}

std::vector<double> trace_path(const WalkSpec& spec, std::uint64_t seed, std::uint64_t path,
                               std::uint32_t stream) {
  const WalkProgram prog = compile(spec, seed, stream);
  const Philox4x32::Key key = Philox4x32::key_from_seed(seed);
  std::vector<double> xs{0.0};
  std::int64_t k = 0;
  for (std::int64_t n = 1; n <= spec.n_events; ++n) {
    const auto block = static_cast<std::uint32_t>((n - 1) / 4);
    const auto draws = Philox4x32::generate(Philox4x32::walk_counter(path, block, stream), key);
    if (draws[static_cast<std::size_t>((n - 1) % 4)] < prog.up_threshold) ++k;
    xs.push_back(position(spec, n, k));
    if (k <= prog.absorb_threshold[static_cast<std::size_t>(n)]) break;
  }
  return xs;
}

void write_ensemble_csv(std::ostream& os, const WalkSpec& spec, const PathEnsemble& ensemble) {
  os << "y,weight\n";
  const double xb = spec.boundary(spec.n_events);
  const double log_n = std::log(static_cast<double>(ensemble.n_paths));
  char buf[96];
  for (std::size_t k = 0; k < ensemble.survivors_by_k.size(); ++k) {
    const std::uint64_t c = ensemble.survivors_by_k[k];
    if (c == 0) continue;
    const double y = position(spec, spec.n_events, static_cast<std::int64_t>(k)) - xb;
    // Share of the estimate carried by this lattice point.
    const double share = std::exp(std::log(static_cast<double>(c)) + ensemble.log_weight_by_k[k] - log_n -
                                  ensemble.estimate.log_magnitude());
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", y, share);
    os << buf;
  }
}

}  // namespace mangled::mc

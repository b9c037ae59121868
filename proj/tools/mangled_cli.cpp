// Batch front end: mangled <subcommand> [--config file.json] [--key value ...]
//
// Settings are layered defaults < config file < flags. Every run writes its
// fully resolved settings to config.json next to its outputs, so
// `mangled <cmd> --config <run>/config.json` repeats it.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mangled/analytic.hpp"
#include "mangled/born_experiment.hpp"
#include "mangled/errors.hpp"
#include "mangled/monte_carlo.hpp"
#include "mangled/pde_solver.hpp"
#include "mangled/quadrature.hpp"
#include "mangled/validation.hpp"

namespace {

using json = nlohmann::json;
using namespace mangled;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr const char* kOutputRootEnv = "MANGLED_OUTPUT_ROOT";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Key {
  std::string name;
  json fallback;  // null: optional number
  std::string help;
};

class Config {
 public:
  Config(std::string command, std::vector<Key> keys) : command_(std::move(command)), keys_(std::move(keys)) {
    for (const Key& k : keys_) values_[k.name] = k.fallback;
  }

  void attach(CLI::App* app) {
    app->add_option("--config", file_, "JSON settings file");
    for (const Key& k : keys_) {
      std::string help = k.help + " [default: " + (k.fallback.is_null() ? "none" : k.fallback.dump()) + "]";
      app->add_option("--" + k.name, flags_[k.name], help);
    }
  }

  void resolve() {
    if (!file_.empty()) {
      std::ifstream in(file_);
      if (!in) throw UsageError("config: cannot open '" + file_ + "'");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw UsageError("config: " + file_ + ": " + e.what());
      }
      if (!doc.is_object()) throw UsageError("config: " + file_ + ": expected a JSON object");
      for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() == "command") {
          if (it.value() != command_) {
            throw UsageError("config: " + file_ + " is for '" + it.value().dump() + "', not '" + command_ + "'");
          }
          continue;
        }
        if (it.key() == "derived") continue;
        set(it.key(), it.value(), file_);
      }
    }
    for (const auto& [name, text] : flags_) {
      if (text.empty()) continue;
      json value;
      try {
        value = json::parse(text);
      } catch (const json::parse_error&) {
        value = text;
      }
      set(name, value, "--" + name);
    }
  }

  bool given(const std::string& name) const { return explicit_.count(name) > 0; }
  bool has(const std::string& name) const { return !values_.at(name).is_null(); }
  const json& raw(const std::string& name) const { return values_.at(name); }

  double num(const std::string& name) const {
    const json& v = values_.at(name);
    if (!v.is_number()) throw UsageError("field '" + name + "': a number is required");
    return v.get<double>();
  }
  std::int64_t integer(const std::string& name) const {
    const double x = num(name);
    if (x != std::floor(x) || std::fabs(x) > 9.0e15) throw UsageError("field '" + name + "': an integer is required");
    return static_cast<std::int64_t>(x);
  }
  std::uint64_t unsigned_integer(const std::string& name) const {
    const json& v = values_.at(name);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const std::int64_t x = integer(name);
    if (x < 0) throw UsageError("field '" + name + "': must be >= 0");
    return static_cast<std::uint64_t>(x);
  }
  std::string str(const std::string& name) const {
    const json& v = values_.at(name);
    if (!v.is_string()) throw UsageError("field '" + name + "': a string is required");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& name) const {
    const json& v = values_.at(name);
    std::vector<double> out;
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw UsageError("field '" + name + "': a list of numbers is required");
    for (const json& x : v) {
      if (!x.is_number()) throw UsageError("field '" + name + "': a list of numbers is required");
      out.push_back(x.get<double>());
    }
    return out;
  }

  void override_value(const std::string& name, json value) { values_[name] = std::move(value); }

  json resolved() const {
    json out;
    out["command"] = command_;
    for (const Key& k : keys_) out[k.name] = values_.at(k.name);
    return out;
  }

 private:
  void set(const std::string& name, const json& value, const std::string& where) {
    const auto it = std::find_if(keys_.begin(), keys_.end(), [&](const Key& k) { return k.name == name; });
    if (it == keys_.end()) throw UsageError(where + ": unknown field '" + name + "' for " + command_);
    const json& d = it->fallback;
    const bool ok = d.is_null() ? (value.is_number() || value.is_null())
                    : d.is_number() ? value.is_number()
                    : d.is_string() ? value.is_string()
                    : d.is_array() ? (value.is_array() || value.is_number() || value.is_string())
                    : d.is_boolean() ? value.is_boolean()
                                     : true;
    if (!ok) throw UsageError(where + ": field '" + name + "' has the wrong type (" + value.dump() + ")");
    // A single value given for a list field becomes a one-element list.
    values_[name] = d.is_array() && !value.is_array() ? json::array({value}) : value;
    explicit_.insert(name);
  }

  std::string command_;
  std::vector<Key> keys_;
  std::map<std::string, json> values_;
  std::map<std::string, std::string> flags_;
  std::set<std::string> explicit_;
  std::string file_;
};

// Files are held in memory and written only once the run has succeeded, each
// through a temporary name and a rename.
class Outputs {
 public:
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

  std::filesystem::path commit(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files_) {
      const std::filesystem::path target = dir / name;
      const std::filesystem::path tmp = dir / ("." + name + ".tmp");
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
      }
      std::filesystem::rename(tmp, target);
    }
    return dir;
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<Key> model_keys(const std::string& model, double eps) {
  return {
      {"model", model, "continuum (v, w) or discrete (p, r)"},
      {"p", 0.55, "branch weight of a binary decoherence event"},
      {"r", 1.0, "decoherence event rate"},
      {"v", 1.0, "drift of median world log-size"},
      {"w", 0.5, "diffusion rate"},
      {"eps", eps, "boundary offset below the median measure"},
  };
}

struct Model {
  std::optional<DecoherenceParams> discrete;
  DiffusionParams continuum;
};

// Picks the parameterization; explicitly given p/r switch to discrete and
// explicitly given v/w to continuum when model itself is not given.
void settle_model(Config& c) {
  if (c.given("model")) return;
  const bool discrete = c.given("p") || c.given("r");
  const bool continuum = c.given("v") || c.given("w");
  if (discrete && continuum) throw UsageError("fields 'p'/'r' and 'v'/'w' both given; set 'model' to choose");
  if (discrete) c.override_value("model", "discrete");
  if (continuum) c.override_value("model", "continuum");
}

Model model_from(const Config& c) {
  const std::string kind = c.str("model");
  const double eps = c.num("eps");
  if (kind == "discrete") {
    const DecoherenceParams dp(c.num("p"), c.num("r"));
    return {dp, to_diffusion(dp, eps)};
  }
  if (kind == "continuum") return {std::nullopt, DiffusionParams(c.num("v"), c.num("w"), eps)};
  throw UsageError("field 'model': expected \"continuum\" or \"discrete\"");
}

json derived_json(const Model& m) {
  return {{"v", m.continuum.v()}, {"w", m.continuum.w()}, {"eps", m.continuum.eps()}};
}

// ---------------------------------------------------------------- analytic

std::vector<Key> analytic_keys() {
  auto keys = model_keys("continuum", 0.1);
  keys.insert(keys.end(), {
                              {"t", 50.0, "time for mu0, mu1 and W"},
                              {"x", json::array(), "points for mu0 (default: 201 around the mean)"},
                              {"y", json::array(), "points for mu1 (default: 201 in [0, tail])"},
                              {"t1", 50.0, "background time before the split"},
                              {"t2", 400.0, "time after the split"},
                              {"log_f", json::array({-2.0, -5.0, -10.0}), "ln F values for lambda and gamma"},
                              {"g", 1.0, "children per world at the split"},
                          });
  return keys;
}

int run_analytic(Config& c, Outputs& out, std::string& summary) {
  const Model m = model_from(c);
  const DiffusionParams& dp = m.continuum;
  dp.require_diffusive("analytic");
  const double t = c.num("t");
  const double wt = dp.w() * t;

  std::vector<double> xs = c.numbers("x");
  if (xs.empty()) {
    const double mean = -dp.v() * t;
    for (int i = 0; i <= 200; ++i) xs.push_back(mean + (i - 100) * 0.05 * std::sqrt(wt));
  }
  std::vector<double> ys = c.numbers("y");
  if (ys.empty()) {
    const double hi = quad::tail_cutoff(wt, dp.eps());
    for (int i = 0; i <= 200; ++i) ys.push_back(hi * i / 200.0);
  }

  std::ostringstream all;
  all << "x,t,log_mu0\n";
  for (double x : xs) all << fmt17(x) << ',' << fmt17(t) << ',' << fmt17(analytic::mu0(x, t, dp).log_magnitude()) << '\n';
  out.add("all_worlds.csv", all.str());

  std::ostringstream unm;
  unm << "y,t,log_mu1_exact,log_mu1_approx\n";
  for (double y : ys) {
    unm << fmt17(y) << ',' << fmt17(t) << ',' << fmt17(analytic::mu1_exact(y, t, dp).log_magnitude()) << ','
        << fmt17(analytic::mu1_approx(y, t, dp).log_magnitude()) << '\n';
  }
  out.add("unmangled.csv", unm.str());

  const double t1 = c.num("t1");
  const double t2 = c.num("t2");
  const double g = c.num("g");
  Diagnostics diag;
  std::ostringstream lam;
  lam << "log_f,g,t1,t2,log_lambda,gamma\n";
  for (double log_f : c.numbers("log_f")) {
    const auto f = analytic::MeasureFraction::from_log(log_f);
    const LogValue l = analytic::lambda_count(f, g, t1, t2, dp, &diag);
    lam << fmt17(log_f) << ',' << fmt17(g) << ',' << fmt17(t1) << ',' << fmt17(t2) << ',' << fmt17(l.log_magnitude())
        << ',' << fmt17(analytic::gamma_correction(f, t1, dp.w())) << '\n';
  }
  out.add("lambda.csv", lam.str());

  const LogValue w_count = analytic::unmangled_count_W(t, dp);
  std::ostringstream s;
  s << "v = " << dp.v() << ", w = " << dp.w() << ", eps = " << dp.eps() << ", t = " << t << " (wt = " << wt << ")\n";
  s << "ln W(t) = " << fmt17(w_count.log_magnitude()) << "  (log10 W = " << w_count.log10() << ")\n";
  s << "mode of mu1_approx at y = " << analytic::mu1_approx_mode(wt) << "\n";
  for (const std::string& w : diag.warnings) s << "warning: " << w << "\n";
  summary = s.str();
  return kExitOk;
}

// ---------------------------------------------------------------- pde

std::vector<Key> pde_keys() {
  auto keys = model_keys("continuum", 0.1);
  keys.insert(keys.end(), {
                              {"t", 50.0, "final time"},
                              {"n_cells", 4096, "grid cells"},
                              {"dt", 0.01, "time step"},
                              {"scheme", "crank_nicolson", "crank_nicolson or explicit"},
                              {"y_max", nullptr, "domain size (default: recommended_y_max)"},
                              {"left", "absorbing", "absorbing or reflecting boundary at y = 0"},
                              {"snapshots", json::array(), "snapshot times (default: final time)"},
                              {"series_every", 100, "survivor series every this many steps"},
                          });
  return keys;
}

pde::Scheme scheme_from(const std::string& s) {
  if (s == "crank_nicolson") return pde::Scheme::CrankNicolson;
  if (s == "explicit") return pde::Scheme::ExplicitUpwind;
  throw UsageError("field 'scheme': expected \"crank_nicolson\" or \"explicit\"");
}

int run_pde(Config& c, Outputs& out, std::string& summary) {
  const Model m = model_from(c);
  const DiffusionParams& dp = m.continuum;
  const double t = c.num("t");
  const double y_max = c.has("y_max") ? c.num("y_max") : pde::recommended_y_max(dp.w(), t, dp.eps());
  const pde::Grid grid(y_max, static_cast<int>(c.integer("n_cells")), c.num("dt"), scheme_from(c.str("scheme")));

  pde::SolveOptions opt;
  const std::string left = c.str("left");
  if (left == "absorbing") {
    opt.left = pde::LeftBoundary::Absorbing;
  } else if (left == "reflecting") {
    opt.left = pde::LeftBoundary::Reflecting;
  } else {
    throw UsageError("field 'left': expected \"absorbing\" or \"reflecting\"");
  }
  opt.snapshot_times = c.numbers("snapshots");
  std::sort(opt.snapshot_times.begin(), opt.snapshot_times.end());
  std::ostringstream snaps;
  snaps << "y,density,t\n";
  opt.on_snapshot = [&](const pde::Field& f) { pde::write_snapshot_csv(snaps, f, false); };
  opt.series_every = static_cast<int>(c.integer("series_every"));
  std::ostringstream series;
  series << "t,log_survivors,absorbed,leaked\n";
  opt.on_series = [&](const pde::Field& f) {
    series << fmt17(f.t) << ',' << fmt17(f.survivor_count().log_magnitude()) << ',' << fmt17(f.absorbed) << ','
           << fmt17(f.leaked) << '\n';
  };

  const pde::Field field = pde::solve(dp, grid, t, opt);
  if (opt.snapshot_times.empty()) pde::write_snapshot_csv(snaps, field, false);
  out.add("snapshots.csv", snaps.str());
  out.add("series.csv", series.str());

  std::ostringstream s;
  s << "grid: y_max = " << grid.y_max() << ", n_cells = " << grid.n_cells() << ", h = " << grid.h()
    << ", dt = " << grid.dt() << "\n";
  s << "ln survivors(t = " << t << ") = " << fmt17(field.survivor_count().log_magnitude()) << "\n";
  if (opt.left == pde::LeftBoundary::Absorbing) {
    const LogValue scaled = field.survivor_count() * LogValue::from_value(analytic::kClosedFormInitialMass);
    const LogValue w_closed = analytic::unmangled_count_W(t, dp);
    s << "survivors x 1/2 vs closed-form W: relative difference "
      << std::expm1(scaled.log_magnitude() - w_closed.log_magnitude()) << "\n";
  }
  s << "mass absorbed at y = 0: " << field.absorbed << ", lost at y_max: " << field.leaked << "\n";
  summary = s.str();
  return kExitOk;
}

// ---------------------------------------------------------------- mc

std::vector<Key> mc_keys() {
  auto keys = model_keys("discrete", 0.2);
  keys.insert(keys.end(), {
                              {"n_events", 200, "decoherence events per path"},
                              {"n_paths", 1000000, "simulated paths"},
                              {"seed", nullptr, "random seed (required)"},
                              {"stream", 0, "random stream index"},
                              {"tilt", "auto", "auto, none or measure"},
                              {"rule", "continuum", "boundary rule: continuum or rate_continuum"},
                              {"kernel", "auto", "auto, scalar or avx2"},
                              {"y_hi", nullptr, "upper edge of the histogram (default: tail cutoff)"},
                          });
  return keys;
}

mc::Tilt tilt_from(const std::string& s, const DecoherenceParams& dp, std::int64_t n) {
  if (s == "auto") return mc::default_tilt(dp, n);
  if (s == "none") return mc::Tilt::None;
  if (s == "measure") return mc::Tilt::Measure;
  throw UsageError("field 'tilt': expected \"auto\", \"none\" or \"measure\"");
}

int run_mc(Config& c, Outputs& out, std::string& summary, unsigned workers) {
  const Model m = model_from(c);
  if (!m.discrete) throw UsageError("field 'model': mc needs the discrete model (p, r)");
  if (!c.has("seed")) throw UsageError("field 'seed': mc requires --seed");
  const std::uint64_t seed = c.unsigned_integer("seed");
  const std::int64_t n_events = c.integer("n_events");

  mc::WalkSpec spec{*m.discrete, m.continuum.eps(), n_events, mc::BoundaryRule::Continuum, mc::Tilt::None,
                    std::nullopt};
  spec.tilt = tilt_from(c.str("tilt"), *m.discrete, n_events);
  const std::string rule = c.str("rule");
  if (rule == "rate_continuum") {
    spec.rule = mc::BoundaryRule::RateContinuum;
  } else if (rule != "continuum") {
    throw UsageError("field 'rule': expected \"continuum\" or \"rate_continuum\"");
  }
  spec.validate();

  mc::RunOptions opt;
  opt.workers = workers;
  opt.stream = static_cast<std::uint32_t>(c.unsigned_integer("stream"));
  const std::string kernel = c.str("kernel");
  if (kernel == "scalar") {
    opt.kernel = mc::KernelKind::Scalar;
  } else if (kernel == "avx2") {
    opt.kernel = mc::KernelKind::Avx2;
  } else if (kernel != "auto") {
    throw UsageError("field 'kernel': expected \"auto\", \"scalar\" or \"avx2\"");
  }

  std::cerr << "mc: " << c.unsigned_integer("n_paths") << " paths of " << n_events << " events\n";
  const mc::PathEnsemble e = mc::simulate_survivors(spec, c.unsigned_integer("n_paths"), seed, opt);

  std::ostringstream ens;
  mc::write_ensemble_csv(ens, spec, e);
  out.add("ensemble.csv", ens.str());

  const double y_hi = c.has("y_hi") ? c.num("y_hi") : quad::tail_cutoff(spec.wt(), spec.eps);
  const mc::Histogram h = mc::histogram_from(spec, e, mc::lattice_edges(spec, y_hi));
  std::ostringstream hist;
  hist << "y_lo,y_hi,log_weight,density\n";
  const std::vector<double> dens = h.normalized_density();
  for (std::size_t i = 0; i < h.weight.size(); ++i) {
    hist << fmt17(h.edges[i]) << ',' << fmt17(h.edges[i + 1]) << ',' << fmt17(h.weight[i].log_magnitude()) << ','
         << fmt17(dens[i]) << '\n';
  }
  out.add("histogram.csv", hist.str());

  json side;
  side["spec"] = {{"p", spec.dp.p()}, {"r", spec.dp.r()}, {"eps", spec.eps}, {"n_events", spec.n_events},
                  {"tilt", spec.tilt == mc::Tilt::None ? "none" : "measure"}, {"rule", rule}};
  side["seed"] = seed;
  side["stream"] = e.stream;
  side["n_paths"] = e.n_paths;
  side["survivor_count"] = e.survivor_count;
  side["log_estimate"] = e.estimate.log_magnitude();
  side["log_std_error"] = e.std_error.log_magnitude();
  side["relative_error"] = e.relative_error();
  out.add("ensemble.json", side.dump(2) + "\n");

  std::ostringstream s;
  s << "p = " << spec.dp.p() << ", eps = " << spec.eps << ", N = " << n_events << " (wt = " << spec.wt()
    << "), tilt = " << (spec.tilt == mc::Tilt::None ? "none" : "measure") << "\n";
  s << "survivors " << e.survivor_count << " of " << e.n_paths << " paths\n";
  s << "ln estimate = " << fmt17(e.estimate.log_magnitude()) << " (log10 " << e.estimate.log10()
    << "), relative error " << e.relative_error() << "\n";
  if (n_events <= mc::kMaxEnumerationEvents) {
    s << "exact count by enumeration = " << mc::enumerate_survivors(spec).count << "\n";
  }
  if (!h.empty) s << "mean y of survivors = " << h.mean_y << "\n";
  summary = s.str();
  return kExitOk;
}

// ---------------------------------------------------------------- born

std::vector<Key> born_keys() {
  auto keys = model_keys("continuum", 0.1);
  keys.insert(keys.end(),
              {
                  {"t1", 50.0, "background time before the split"},
                  {"t2", 400.0, "time after the split"},
                  {"engines", json::array({"analytic", "pde"}), "analytic, pde, mc"},
                  {"outcomes",
                   json::array({{{"label", "a"}, {"f", 0.9}, {"g", 1}}, {{"label", "b"}, {"f", 0.1}, {"g", 1}}}),
                   "list of {label, f or log_f, g}"},
                  {"n_cells", 4096, "PDE grid cells"},
                  {"dt", 0.01, "PDE time step"},
                  {"gamma_series_every", 0, "PDE gamma(t) output every this many steps"},
                  {"n_paths", 1000000, "MC paths per outcome"},
                  {"seed", nullptr, "random seed (required with the mc engine)"},
                  {"tilt", "auto", "MC tilt: auto, none or measure"},
              });
  return keys;
}

std::vector<born::BornOutcomeSpec> outcomes_from(const json& v) {
  if (!v.is_array()) throw UsageError("field 'outcomes': a list is required");
  std::vector<born::BornOutcomeSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& o = v[i];
    const std::string where = "field 'outcomes[" + std::to_string(i) + "]'";
    if (!o.is_object()) throw UsageError(where + ": an object {label, f or log_f, g} is required");
    born::BornOutcomeSpec s;
    s.label = o.value("label", "outcome" + std::to_string(i));
    if (o.contains("log_f") == o.contains("f")) throw UsageError(where + ": give exactly one of f and log_f");
    try {
      s.f = o.contains("f") ? analytic::MeasureFraction::from_value(o.at("f").get<double>())
                            : analytic::MeasureFraction::from_log(o.at("log_f").get<double>());
      const double g = o.value("g", 1.0);
      if (g < 1.0 || g != std::floor(g) || g > 4294967295.0) throw UsageError(where + ": g must be an integer >= 1");
      s.g = static_cast<std::uint32_t>(g);
    } catch (const json::exception& e) {
      throw UsageError(where + ": " + e.what());
    } catch (const DomainError& e) {
      throw UsageError(where + ": " + e.what());
    }
    out.push_back(s);
  }
  return out;
}

int run_born(Config& c, Outputs& out, std::string& summary, unsigned workers) {
  const Model m = model_from(c);
  const double t1 = c.num("t1");
  const double t2 = c.num("t2");
  const born::ExperimentSetup setup = m.discrete ? born::ExperimentSetup::from_discrete(*m.discrete, c.num("eps"), t1, t2)
                                                 : born::ExperimentSetup::from_continuum(m.continuum, t1, t2);
  std::vector<born::Engine> engines;
  for (const json& e : c.raw("engines")) {
    if (!e.is_string()) throw UsageError("field 'engines': names are strings");
    try {
      engines.push_back(born::engine_from_name(e.get<std::string>()));
    } catch (const DomainError& ex) {
      throw UsageError(std::string("field 'engines': ") + ex.what());
    }
  }
  const std::vector<born::BornOutcomeSpec> outcomes = outcomes_from(c.raw("outcomes"));
  try {
    born::check_normalized(outcomes);
  } catch (const DomainError& e) {
    throw UsageError(std::string("field 'outcomes': ") + e.what());
  }

  born::PdeSettings pde;
  pde.n_cells = static_cast<int>(c.integer("n_cells"));
  pde.dt = c.num("dt");
  pde.gamma_series_every = static_cast<int>(c.integer("gamma_series_every"));
  born::McSettings mcs;
  mcs.n_paths = c.unsigned_integer("n_paths");
  mcs.workers = workers;
  const bool uses_mc = std::find(engines.begin(), engines.end(), born::Engine::Mc) != engines.end();
  if (uses_mc) {
    if (!c.has("seed")) throw UsageError("field 'seed': the mc engine requires --seed");
    mcs.seed = c.unsigned_integer("seed");
    const std::string tilt = c.str("tilt");
    if (tilt != "auto") mcs.tilt = tilt_from(tilt, *m.discrete, 1);
  }

  std::cerr << "born: " << outcomes.size() << " outcomes, " << engines.size() << " engines\n";
  const born::DeviationReport report = born::deviation_table(outcomes, setup, engines, pde, mcs);
  std::ostringstream csv;
  born::write_deviation_csv(csv, report);
  out.add("deviation.csv", csv.str());
  out.add("deviation.json", born::deviation_metadata(report).dump(2) + "\n");
  if (!report.gamma_series.empty()) {
    std::ostringstream gs;
    born::write_gamma_series_csv(gs, report);
    out.add("gamma_series.csv", gs.str());
  }

  std::ostringstream s;
  s << "wt1 = " << setup.continuum.w() * t1 << ", wt2 = " << setup.continuum.w() * t2 << "\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-9s %-12s %12s %12s %10s %10s\n", "engine", "outcome", "born", "share", "gamma",
                "erfc");
  s << buf;
  for (const born::OutcomeRow& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-9s %-12s %12.6g %12.6g %10.5f %10.5f %s\n", born::engine_name(r.engine).c_str(),
                  r.label.c_str(), r.born_probability, r.share, r.gamma, r.gamma_analytic,
                  r.status == "ok" ? "" : r.status.c_str());
    s << buf;
  }
  for (const std::string& w : report.diagnostics.warnings) s << "warning: " << w << "\n";
  summary = s.str();
  return report.complete ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------- scan

std::vector<Key> scan_keys() {
  return {
      {"p_values", json::array({0.5, 0.55, 0.6, 0.7, 0.8, 0.9}), "branch weights"},
      {"r_values", json::array({1.0}), "event rates"},
  };
}

int run_scan(Config& c, Outputs& out, std::string& summary) {
  std::vector<DecoherenceParams> grid;
  for (double p : c.numbers("p_values")) {
    for (double r : c.numbers("r_values")) grid.emplace_back(p, r);
  }
  const std::vector<born::ScanRow> rows = born::survival_condition_scan(grid);
  std::ostringstream csv;
  born::write_scan_csv(csv, rows);
  out.add("scan.csv", csv.str());
  std::ostringstream s;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%6s %6s %10s %10s %10s %10s  %s\n", "p", "r", "v", "w", "v-w", "w/2", "flags");
  s << buf;
  for (const born::ScanRow& r : rows) {
    std::string flags = r.degenerate ? "degenerate" : "";
    if (r.count_grows && r.fraction_shrinks) flags = "count grows, fraction shrinks";
    std::snprintf(buf, sizeof buf, "%6.3g %6.3g %10.6f %10.6f %10.6f %10.6f  %s\n", r.p, r.r, r.v, r.w, r.v_minus_w,
                  r.fraction_decay, flags.c_str());
    s << buf;
  }
  summary = s.str();
  return kExitOk;
}

// ---------------------------------------------------------------- headline, validate

int run_headline(Outputs& out, std::string& summary) {
  const born::HeadlineReport h = born::headline_check();
  summary = h.format() + (h.passed() ? "headline check passed\n" : "headline check FAILED\n");
  out.add("headline.txt", summary);
  return h.passed() ? kExitOk : kExitFailed;
}

std::vector<Key> validate_keys() {
  const validation::SuiteOptions d;
  return {
      {"criteria", json::array(), "criterion numbers to run (default: all)"},
      {"seed", d.seed, "random seed for the Monte Carlo criteria"},
      {"gamma_paths", d.gamma_paths, "pooled paths per run for the MC gamma criterion"},
      {"pde_cells", d.pde_cells, "PDE grid cells"},
      {"pde_dt", d.pde_dt, "PDE time step"},
  };
}

int run_validate(Config& c, Outputs& out, std::string& summary, unsigned workers) {
  validation::SuiteOptions opt;
  opt.workers = workers;
  opt.seed = c.unsigned_integer("seed");
  opt.gamma_paths = c.unsigned_integer("gamma_paths");
  opt.pde_cells = static_cast<int>(c.integer("pde_cells"));
  opt.pde_dt = c.num("pde_dt");
  std::vector<int> ids;
  for (double x : c.numbers("criteria")) {
    if (x != std::floor(x) || x < 1 || x > validation::kCriterionCount) {
      throw UsageError("field 'criteria': numbers 1 to " + std::to_string(validation::kCriterionCount));
    }
    ids.push_back(static_cast<int>(x));
  }
  std::ostringstream s;
  int failed = 0;
  validation::run_suite(ids, opt, [&](const validation::CriterionResult& r) {
    std::cout << r.line() << std::endl;
    s << r.line() << "\n";
    for (const std::string& d : r.details) s << "    " << d << "\n";
    if (!r.passed) ++failed;
  });
  s << failed << " criteria failed\n";
  summary = s.str();
  out.add("validation.txt", summary);
  return failed == 0 ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mangled-worlds numerical lab"};
  app.require_subcommand(1);
  std::string out_root;
  std::string run_name;
  unsigned workers = 0;
  app.add_option("--out", out_root, std::string("output root (default: $") + kOutputRootEnv + " or ./runs)");
  app.add_option("--run-name", run_name, "run directory name (default: the subcommand)");
  app.add_option("--workers", workers, "worker threads (default: all cores)");

  std::map<std::string, Config> configs;
  auto add = [&](const std::string& name, const std::string& help, std::vector<Key> keys) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    auto [it, _] = configs.emplace(name, Config(name, std::move(keys)));
    it->second.attach(sub);
    return sub;
  };
  add("analytic", "evaluate closed forms to CSV", analytic_keys());
  add("pde", "solve the absorbing PDE, dump snapshots and survivor series", pde_keys());
  add("mc", "Monte Carlo ensemble, histogram and estimates", mc_keys());
  add("born", "Born-rule deviation table across engines", born_keys());
  add("headline", "the wt1 = 1e10, F = e^-1e5 check", {});
  add("scan", "survival condition scan over (p, r)", scan_keys());
  add("validate", "run the acceptance suite", validate_keys());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Config& config = configs.at(command);
  Outputs outputs;
  std::string summary;
  int code = kExitOk;
  try {
    config.resolve();
    json resolved = config.resolved();
    if (command == "analytic" || command == "pde" || command == "mc" || command == "born") {
      settle_model(config);
      resolved = config.resolved();
      resolved["derived"] = derived_json(model_from(config));
    }
    outputs.add("config.json", resolved.dump(2) + "\n");

    if (command == "analytic") code = run_analytic(config, outputs, summary);
    if (command == "pde") code = run_pde(config, outputs, summary);
    if (command == "mc") code = run_mc(config, outputs, summary, workers);
    if (command == "born") code = run_born(config, outputs, summary, workers);
    if (command == "headline") code = run_headline(outputs, summary);
    if (command == "scan") code = run_scan(config, outputs, summary);
    if (command == "validate") code = run_validate(config, outputs, summary, workers);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kExitFailed;
  }

  outputs.add("summary.txt", summary);
  if (out_root.empty()) {
    const char* env = std::getenv(kOutputRootEnv);
    out_root = env != nullptr && *env != '\0' ? env : "runs";
  }
  const std::filesystem::path dir = std::filesystem::path(out_root) / (run_name.empty() ? command : run_name);
  try {
    outputs.commit(dir);
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kExitFailed;
  }
  if (command != "validate") std::cout << summary;
  std::cout << "wrote " << dir.string() << "\n";
  return code;
}

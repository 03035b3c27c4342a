#include "z2lab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <set>

#include "json.hpp"
#include "z2lab/duality.hpp"
#include "z2lab/parallel.hpp"
#include "z2lab/selftest.hpp"
#include "z2lab/surfaces.hpp"

namespace z2lab {

using nlohmann::json;

namespace {

bool g_verbose = false;

template <class... Args>
void log_line(Args&&... args) {
  if (!g_verbose) return;
  (std::cerr << ... << args) << '\n';
}

std::optional<double> num(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

// ----------------------------------------------------------------- parsing

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

double get_real(const json& j, const std::string& key) {
  if (!j.is_number()) bad("'" + key + "' must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) bad("'" + key + "' must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad("'" + key + "' out of range");
  return static_cast<int>(v);
}

std::vector<double> get_reals(const json& j, const std::string& key) {
  if (!j.is_array()) bad("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(get_real(x, key));
  return out;
}

std::vector<int> get_ints(const json& j, const std::string& key) {
  if (!j.is_array()) bad("'" + key + "' must be an array of integers");
  std::vector<int> out;
  for (const auto& x : j) out.push_back(get_int(x, key));
  return out;
}

Vec4 get_vec4(const json& j, const std::string& key) {
  const auto v = get_ints(j, key);
  if (v.size() != kDim) bad("'" + key + "' must have 4 entries");
  return {v[0], v[1], v[2], v[3]};
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) bad("unknown key '" + k + "' in " + where);
  }
}

Box get_box(const json& j, const std::string& key) {
  only_keys(j, key, {"lo", "hi", "cube"});
  Box b;
  if (j.contains("cube")) {
    if (j.contains("lo") || j.contains("hi")) bad("'" + key + "' mixes cube with lo/hi");
    const auto ab = get_ints(j["cube"], key + ".cube");
    if (ab.size() != 2) bad("'" + key + ".cube' must be [a, b]");
    b = cube(ab[0], ab[1]);
  } else {
    if (!j.contains("lo") || !j.contains("hi")) bad("'" + key + "' needs lo and hi");
    b.lo = get_vec4(j["lo"], key + ".lo");
    b.hi = get_vec4(j["hi"], key + ".hi");
  }
  for (int i = 0; i < kDim; ++i)
    if (b.lo[i] > b.hi[i]) bad("'" + key + "' has lo > hi");
  return b;
}

LoopInput get_loop(const json& j, const std::string& key) {
  only_keys(j, key, {"m", "n", "plane", "offset", "edges"});
  LoopInput loop;
  if (j.contains("edges")) {
    if (j.contains("m") || j.contains("n") || j.contains("plane") || j.contains("offset"))
      bad("'" + key + "' mixes edges with rectangle fields");
    if (!j["edges"].is_array() || j["edges"].empty()) bad("'" + key + ".edges' must be a non-empty array");
    for (const auto& e : j["edges"]) {
      const auto v = get_ints(e, key + ".edges");
      if (v.size() != 5) bad("each edge is [x0, x1, x2, x3, dir]");
      if (v[4] < 0 || v[4] >= kDim) bad("edge direction must be 0..3");
      loop.edges.push_back(make_edge({v[0], v[1], v[2], v[3]}, v[4]));
    }
    return loop;
  }
  if (!j.contains("m") || !j.contains("n")) bad("'" + key + "' needs m and n (or edges)");
  loop.m = get_int(j["m"], key + ".m");
  loop.n = get_int(j["n"], key + ".n");
  if (loop.m < 1 || loop.n < 1) bad("'" + key + "' sides must be >= 1");
  if (j.contains("plane")) {
    const auto p = get_ints(j["plane"], key + ".plane");
    if (p.size() != 2 || p[0] == p[1] || p[0] < 0 || p[1] < 0 || p[0] >= kDim || p[1] >= kDim)
      bad("'" + key + ".plane' must be two distinct directions");
    loop.dir_a = p[0];
    loop.dir_b = p[1];
  }
  if (j.contains("offset")) loop.offset = get_vec4(j["offset"], key + ".offset");
  return loop;
}

CellId get_plaquette(const json& j, const std::string& key) {
  only_keys(j, key, {"base", "dirs"});
  if (!j.contains("base") || !j.contains("dirs")) bad("'" + key + "' needs base and dirs");
  const auto dirs = get_ints(j["dirs"], key + ".dirs");
  if (dirs.size() != 2 || dirs[0] == dirs[1] || dirs[0] < 0 || dirs[1] < 0 || dirs[0] >= kDim || dirs[1] >= kDim)
    bad("'" + key + ".dirs' must be two distinct directions");
  return make_plaquette(get_vec4(j["base"], key + ".base"), dirs[0], dirs[1]);
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::selftest: return "selftest";
    case ExperimentKind::wilson: return "wilson";
    case ExperimentKind::census: return "census";
    case ExperimentKind::duality: return "duality";
    case ExperimentKind::decay: return "decay";
    case ExperimentKind::coupling: return "coupling";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::selftest, ExperimentKind::wilson, ExperimentKind::census,
                 ExperimentKind::duality, ExperimentKind::decay, ExperimentKind::coupling})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

LoopSpec LoopInput::build() const {
  try {
    if (!edges.empty()) return LoopSpec::from_edges(edges);
    return make_rectangle_loop(m, n, dir_a, dir_b, offset);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid loop: ") + e.what());
  }
}

ExperimentSpec parse_spec(const std::string& json_text, std::optional<ExperimentKind> expected) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("config must be a JSON object");

  ExperimentSpec spec;
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) bad("'kind' must be a string");
    spec.kind = parse_kind(j["kind"].get<std::string>());
    if (expected && *expected != spec.kind)
      bad("config kind '" + to_string(spec.kind) + "' does not match command '" + to_string(*expected) + "'");
  } else if (expected) {
    spec.kind = *expected;
  } else {
    bad("config lacks 'kind'");
  }

  switch (spec.kind) {
    case ExperimentKind::wilson:
      only_keys(j, "wilson config", {"kind", "seed", "output", "checks", "burn_in", "spacing", "samples",
                                     "replicas", "betas", "loops", "margin"});
      break;
    case ExperimentKind::census:
      only_keys(j, "census config", {"kind", "seed", "output", "checks", "burn_in", "spacing", "samples",
                                     "replicas", "betas", "box", "window"});
      break;
    case ExperimentKind::duality:
      only_keys(j, "duality config", {"kind", "seed", "output", "checks", "burn_in", "spacing", "samples",
                                      "replicas", "betas", "box", "expectation"});
      break;
    case ExperimentKind::decay:
      only_keys(j, "decay config", {"kind", "seed", "output", "checks", "burn_in", "spacing", "samples",
                                    "replicas", "beta", "loop", "distances", "outer_margin"});
      break;
    case ExperimentKind::coupling:
      only_keys(j, "coupling config", {"kind", "seed", "output", "checks", "burn_in", "spacing", "samples",
                                       "replicas", "lambdas", "distances", "margin"});
      break;
    case ExperimentKind::selftest:
      only_keys(j, "selftest config", {"kind", "seed", "output", "checks", "trials", "size"});
      break;
  }

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("'seed' must be a non-negative integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) bad("'output' must be a string");
    spec.output = j["output"].get<std::string>();
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_boolean()) bad("'checks' must be true or false");
    spec.checks = j["checks"].get<bool>();
  }
  if (j.contains("burn_in")) spec.chain.burn_in = get_int(j["burn_in"], "burn_in");
  if (j.contains("spacing")) spec.chain.spacing = get_int(j["spacing"], "spacing");
  if (j.contains("samples")) spec.chain.samples = get_int(j["samples"], "samples");
  if (j.contains("replicas")) spec.chain.replicas = get_int(j["replicas"], "replicas");
  if (j.contains("betas")) spec.betas = get_reals(j["betas"], "betas");
  if (j.contains("lambdas")) spec.lambdas = get_reals(j["lambdas"], "lambdas");
  if (j.contains("beta")) spec.beta = get_real(j["beta"], "beta");
  if (j.contains("margin")) spec.margin = get_int(j["margin"], "margin");
  if (j.contains("outer_margin")) spec.outer_margin = get_int(j["outer_margin"], "outer_margin");
  if (j.contains("distances")) spec.distances = get_ints(j["distances"], "distances");
  if (j.contains("trials")) spec.trials = get_int(j["trials"], "trials");
  if (j.contains("size")) spec.selftest_size = get_int(j["size"], "size");
  if (j.contains("box")) spec.box = get_box(j["box"], "box");
  if (j.contains("window")) spec.window = get_box(j["window"], "window");
  if (j.contains("loops")) {
    if (!j["loops"].is_array()) bad("'loops' must be an array");
    for (std::size_t i = 0; i < j["loops"].size(); ++i)
      spec.loops.push_back(get_loop(j["loops"][i], "loops[" + std::to_string(i) + "]"));
  }
  if (j.contains("loop")) spec.loops.push_back(get_loop(j["loop"], "loop"));
  if (j.contains("expectation")) {
    const auto& e = j["expectation"];
    only_keys(e, "expectation", {"beta", "plaquette_sets"});
    ExpectationInput in;
    if (e.contains("beta")) in.beta = get_real(e["beta"], "expectation.beta");
    if (!e.contains("plaquette_sets") || !e["plaquette_sets"].is_array())
      bad("'expectation.plaquette_sets' must be an array");
    for (const auto& set : e["plaquette_sets"]) {
      if (!set.is_array()) bad("each plaquette set must be an array");
      std::vector<CellId> ps;
      for (const auto& p : set) ps.push_back(get_plaquette(p, "plaquette"));
      in.plaquette_sets.push_back(std::move(ps));
    }
    spec.expectation = std::move(in);
  }
  spec.validate();
  return spec;
}

void ExperimentSpec::validate() const {
  const auto finite_nonneg = [](double b) { return std::isfinite(b) && b >= 0.0; };
  if (chain.burn_in < 0 || chain.spacing < 0) bad("burn_in and spacing must be >= 0");
  if (chain.samples < 1) bad("samples must be >= 1");
  if (chain.replicas < 1) bad("replicas must be >= 1");

  switch (kind) {
    case ExperimentKind::wilson:
      if (betas.empty()) bad("wilson needs at least one beta");
      for (double b : betas)
        if (!finite_nonneg(b)) bad("beta must be finite and >= 0");
      if (loops.empty()) bad("wilson needs at least one loop");
      if (margin < 6) bad("wilson boxes need a margin of at least 6");
      for (const auto& l : loops) (void)l.build();
      break;
    case ExperimentKind::census: {
      if (betas.empty()) bad("census needs at least one beta");
      for (double b : betas)
        if (!finite_nonneg(b)) bad("beta must be finite and >= 0");
      const Box w = window ? *window : Box{};
      if (window) {
        if (!box.contains_box(w.expanded(kCensusMargin))) bad("census window needs a margin of 6 inside the box");
      } else {
        for (int i = 0; i < kDim; ++i)
          if (box.side(i) < 2 * kCensusMargin) bad("census box too small for a window with margin 6");
      }
      break;
    }
    case ExperimentKind::duality:
      if (betas.empty()) bad("duality needs at least one beta");
      for (double b : betas)
        if (!(b > 0.0) || !std::isfinite(b)) bad("duality betas must be > 0");
      if (!box.is_cube()) bad("duality box must be a cube");
      if (expectation) {
        if (!(expectation->beta > 0.0)) bad("expectation beta must be > 0");
        for (const auto& set : expectation->plaquette_sets)
          for (const auto& p : set)
            if (!box.contains_cell(p)) bad("expectation plaquette outside the box");
      }
      break;
    case ExperimentKind::decay:
      if (!finite_nonneg(beta)) bad("beta must be finite and >= 0");
      if (loops.size() != 1) bad("decay needs exactly one loop");
      (void)loops.front().build();
      if (distances.empty()) bad("decay needs distances");
      for (int l : distances)
        if (l < 0 || l > outer_margin) bad("decay distances must lie in [0, outer_margin]");
      break;
    case ExperimentKind::coupling:
      if (lambdas.empty()) bad("coupling needs at least one lambda");
      for (double l : lambdas)
        if (!finite_nonneg(l)) bad("lambda must be finite and >= 0");
      if (distances.empty()) bad("coupling needs distances");
      for (int l : distances)
        if (l < 1) bad("coupling distances must be >= 1");
      if (margin < 1) bad("coupling margin must be >= 1");
      break;
    case ExperimentKind::selftest:
      if (trials < 1) bad("trials must be >= 1");
      if (selftest_size < 1 || selftest_size > 6) bad("size must be in 1..6");
      break;
  }
}

// ------------------------------------------------------------------ output

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index + 0x9E3779B97F4A7C15ull));
}

void set_verbose(bool on) { g_verbose = on; }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
std::string opt_text(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : ""; }

}  // namespace

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.run_id) << ',' << csv_field(r.kind) << ',' << opt_text(r.beta) << ','
        << opt_text(r.lambda) << ',' << csv_field(r.box) << ',' << opt_text(r.ell) << ',' << opt_text(r.ell0)
        << ',' << csv_field(r.observable) << ',' << opt_text(r.estimate) << ',' << opt_text(r.stderr_value)
        << ',' << opt_text(r.n_samples) << ',' << opt_text(r.prediction) << ',' << r.seed << '\n';
  }
}

void write_json(std::ostream& out, const std::vector<ResultRow>& rows) {
  json arr = json::array();
  const auto put = [](json& o, const char* k, const auto& v) {
    if (v)
      o[k] = *v;
    else
      o[k] = nullptr;
  };
  for (const auto& r : rows) {
    json o = json::object();
    o["run_id"] = r.run_id;
    o["kind"] = r.kind;
    put(o, "beta", r.beta);
    put(o, "lambda", r.lambda);
    o["box"] = r.box;
    put(o, "ell", r.ell);
    put(o, "ell0", r.ell0);
    o["observable"] = r.observable;
    put(o, "estimate", r.estimate);
    put(o, "stderr", r.stderr_value);
    put(o, "n_samples", r.n_samples);
    put(o, "prediction", r.prediction);
    o["seed"] = r.seed;
    arr.push_back(std::move(o));
  }
  out << arr.dump(1) << '\n';
}

bool ExperimentResult::invariants_hold() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const CheckResult& c) { return c.passed; });
}

bool ExperimentResult::thresholds_hold() const {
  return std::all_of(thresholds.begin(), thresholds.end(), [](const CheckResult& c) { return c.passed; });
}

// ----------------------------------------------------------------- runners

namespace {

std::string run_id(ExperimentKind kind, const std::string& tag, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", index);
  return to_string(kind) + (tag.empty() ? "" : "-" + tag) + "-" + buf;
}

ResultRow base_row(const ExperimentSpec& spec, const std::string& id) {
  ResultRow r;
  r.run_id = id;
  r.kind = to_string(spec.kind);
  r.seed = spec.seed;
  return r;
}

RunConfig chain_config(const ExperimentSpec& spec, double beta, const Box& box, Boundary bc, std::uint64_t seed) {
  RunConfig rc;
  rc.beta = beta;
  rc.box = box;
  rc.boundary = bc;
  rc.burn_in_sweeps = spec.chain.burn_in;
  rc.sweeps_per_sample = spec.chain.spacing;
  rc.n_samples = spec.chain.samples;
  rc.replicas = spec.chain.replicas;
  rc.seed = seed;
  return rc;
}

void fill_estimate(ResultRow& r, const Estimate& e) {
  r.estimate = num(e.mean);
  r.stderr_value = num(e.std_error);
  r.n_samples = static_cast<std::int64_t>(e.n_samples);
}

CheckResult check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

ExperimentResult run_wilson(const ExperimentSpec& spec, int threads) {
  spec.validate();
  struct Task {
    std::size_t beta_index, loop_index;
    LoopSpec loop;
    Box box;
    Estimate est;
  };
  std::vector<Task> tasks;
  for (std::size_t b = 0; b < spec.betas.size(); ++b)
    for (std::size_t l = 0; l < spec.loops.size(); ++l) {
      Task t{b, l, spec.loops[l].build(), {}, {}};
      t.box = t.loop.bounding_box().expanded(spec.margin);
      tasks.push_back(std::move(t));
    }
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    auto& t = tasks[i];
    const double beta = spec.betas[t.beta_index];
    t.est = estimate_observable(chain_config(spec, beta, t.box, Boundary::free, derive_seed(spec.seed, i)),
                                wilson_observable(t.loop, t.box));
    log_line("[wilson] beta=", beta, " ell=", t.loop.ell, " W=", t.est.mean, " +- ", t.est.std_error);
  });

  ExperimentResult res;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const double beta = spec.betas[t.beta_index];
    ResultRow r = base_row(spec, run_id(spec.kind, "", i));
    r.beta = beta;
    if (beta > 0.0) r.lambda = num(dual_coupling(beta).lambda);
    r.box = t.box.describe();
    r.ell = t.loop.ell;
    r.ell0 = t.loop.ell0;
    r.observable = "wilson";
    fill_estimate(r, t.est);
    r.prediction = num(wilson_prediction(beta, t.loop.ell));
    res.rows.push_back(r);
    r.observable = "theta_power";
    r.estimate = num(std::pow(edge_factor(beta), t.loop.ell - t.loop.ell0));
    r.stderr_value.reset();
    r.n_samples.reset();
    r.prediction.reset();
    res.rows.push_back(r);

    res.invariants.push_back(check("wilson_bounded", std::fabs(t.est.mean) <= 1.0 && t.est.std_error >= 0.0,
                                   "ell=" + std::to_string(t.loop.ell)));
    const double pred = wilson_prediction(beta, t.loop.ell);
    const double tol = std::max(3.0 * t.est.std_error, 0.15);
    res.thresholds.push_back(check("wilson_near_prediction", std::fabs(t.est.mean - pred) <= tol,
                                   "beta=" + fmt(beta) + " ell=" + std::to_string(t.loop.ell) + " W=" +
                                       fmt(t.est.mean) + " prediction=" + fmt(pred) + " tolerance=" + fmt(tol)));
  }

  // Per-edge decay slope of -log W against ell.
  for (std::size_t b = 0; b < spec.betas.size(); ++b) {
    std::vector<double> x, y, s;
    std::set<int> ells;
    for (const auto& t : tasks) {
      if (t.beta_index != b || !(t.est.mean > 0.0) || !(t.est.std_error > 0.0)) continue;
      x.push_back(t.loop.ell);
      y.push_back(-std::log(t.est.mean));
      s.push_back(t.est.std_error / t.est.mean);
      ells.insert(t.loop.ell);
    }
    if (ells.size() < 2) continue;
    const LinearFit fit = weighted_linear_fit(x, y, s);
    const double beta = spec.betas[b];
    const double target = 2.0 * std::exp(-12.0 * beta);
    ResultRow r = base_row(spec, run_id(spec.kind, "fit", b));
    r.beta = beta;
    if (beta > 0.0) r.lambda = num(dual_coupling(beta).lambda);
    r.observable = "log_slope";
    r.estimate = num(fit.slope);
    r.stderr_value = num(fit.slope_error);
    r.n_samples = static_cast<std::int64_t>(x.size());
    res.rows.push_back(r);
    r.observable = "log_slope_target";
    r.estimate = num(target);
    r.stderr_value.reset();
    r.n_samples.reset();
    res.rows.push_back(r);
    res.thresholds.push_back(check("slope_within_30_percent", std::fabs(fit.slope - target) <= 0.3 * target,
                                   "beta=" + fmt(beta) + " slope=" + fmt(fit.slope) + " +- " +
                                       fmt(fit.slope_error) + " target=" + fmt(target) + " ratio=" +
                                       fmt(fit.slope / target)));
  }
  return res;
}

ExperimentResult run_census(const ExperimentSpec& spec, int threads) {
  spec.validate();
  const Box box = spec.box;
  Box window = box;
  if (spec.window) {
    window = *spec.window;
  } else {
    for (int i = 0; i < kDim; ++i) {
      window.lo[i] += kCensusMargin;
      window.hi[i] -= kCensusMargin;
    }
  }

  std::vector<VortexCensus> results(spec.betas.size());
  parallel_for(spec.betas.size(), threads, [&](std::size_t b) {
    const double beta = spec.betas[b];
    CensusAccumulator acc(box, window);
    const CounterRng root(derive_seed(spec.seed, b));
    for (int r = 0; r < spec.chain.replicas; ++r) {
      HeatBathChain chain(box, Boundary::free, beta, root.split(static_cast<std::uint64_t>(r)));
      chain.sweeps(spec.chain.burn_in);
      for (int i = 0; i < spec.chain.samples; ++i) {
        chain.sweeps(spec.chain.spacing);
        acc.add(negative_plaquettes(chain));
      }
    }
    results[b] = acc.result();
    log_line("[census] beta=", beta, " minimal density=", results[b].minimal_density.mean, " +- ",
             results[b].minimal_density.std_error);
  });

  ExperimentResult res;
  std::size_t row = 0;
  std::vector<double> x, y, s;
  for (std::size_t b = 0; b < results.size(); ++b) {
    const auto& c = results[b];
    const double beta = spec.betas[b];
    ResultRow r = base_row(spec, run_id(spec.kind, "", row++));
    r.beta = beta;
    if (beta > 0.0) r.lambda = num(dual_coupling(beta).lambda);
    r.box = window.describe();

    ResultRow neg = r;
    neg.observable = "negative_density";
    fill_estimate(neg, c.negative_density);
    res.rows.push_back(neg);

    ResultRow minimal = r;
    minimal.observable = "minimal_vortex_density";
    fill_estimate(minimal, c.minimal_density);
    res.rows.push_back(minimal);

    ResultRow conditional = r;
    conditional.observable = "minimal_vortex_conditional_probability";
    conditional.estimate = num(std::exp(-12.0 * beta) / (1.0 + std::exp(-12.0 * beta)));
    res.rows.push_back(conditional);

    ResultRow large = r;
    large.observable = "large_vortex_fraction";
    large.estimate = num(c.large_vortex_fraction());
    large.n_samples = static_cast<std::int64_t>(c.configs);
    res.rows.push_back(large);

    for (const auto& [size, count] : c.histogram) {
      ResultRow h = r;
      h.observable = "vortex_size_" + std::to_string(size);
      h.estimate = static_cast<double>(count);
      h.n_samples = static_cast<std::int64_t>(c.configs);
      res.rows.push_back(h);
    }

    std::uint64_t total = 0;
    for (const auto& [size, count] : c.histogram) total += size * count;
    res.invariants.push_back(check("census_totals", total == c.negative_plaquette_count,
                                   "beta=" + fmt(beta)));

    if (c.minimal_density.mean > 0.0 && c.minimal_density.std_error > 0.0) {
      x.push_back(beta);
      y.push_back(std::log(c.minimal_density.mean));
      s.push_back(c.minimal_density.std_error / c.minimal_density.mean);
    }
    if (beta == 0.0)
      res.thresholds.push_back(check("half_negative_at_zero_beta",
                                     std::fabs(c.negative_density.mean - 0.5) <= 3.0 * c.negative_density.std_error,
                                     "density=" + fmt(c.negative_density.mean)));
  }
  if (x.size() >= 2) {
    const LinearFit fit = weighted_linear_fit(x, y, s);
    ResultRow r = base_row(spec, run_id(spec.kind, "fit", 0));
    r.box = window.describe();
    r.observable = "minimal_density_log_slope";
    r.estimate = num(fit.slope);
    r.stderr_value = num(fit.slope_error);
    r.n_samples = static_cast<std::int64_t>(x.size());
    res.rows.push_back(r);
    res.thresholds.push_back(check("log_slope_minus_12", std::fabs(fit.slope + 12.0) <= 1.0,
                                   "slope=" + fmt(fit.slope) + " +- " + fmt(fit.slope_error)));
  }
  // larger vortices become rarer as beta grows; binomial error on each fraction
  struct Trend {
    double beta, fraction, sigma;
  };
  std::vector<Trend> trend;
  for (std::size_t b = 0; b < results.size(); ++b) {
    const double f = results[b].large_vortex_fraction();
    if (spec.betas[b] <= 0.0 || !std::isfinite(f)) continue;
    std::uint64_t n = 0;
    for (const auto& [size, count] : results[b].histogram) n += count;
    if (n == 0) continue;
    trend.push_back({spec.betas[b], f, std::sqrt(std::max(f * (1.0 - f), 1.0 / n) / n)});
  }
  std::sort(trend.begin(), trend.end(), [](const Trend& a, const Trend& b) { return a.beta < b.beta; });
  for (std::size_t i = 1; i < trend.size(); ++i) {
    const auto& lo = trend[i - 1];
    const auto& hi = trend[i];
    res.thresholds.push_back(check("large_fraction_decreases",
                                   hi.fraction <= lo.fraction + 3.0 * std::hypot(lo.sigma, hi.sigma),
                                   "beta " + fmt(lo.beta) + " -> " + fmt(hi.beta) + ": " + fmt(lo.fraction) +
                                       " -> " + fmt(hi.fraction)));
  }
  return res;
}

ExperimentResult run_duality(const ExperimentSpec& spec, int threads) {
  spec.validate();
  ExperimentResult res;
  std::size_t row = 0;
  for (double beta : spec.betas) {
    const DualityReport rep = verify_partition_identity(spec.box, beta);
    ResultRow r = base_row(spec, run_id(spec.kind, "", row));
    r.beta = beta;
    r.lambda = num(rep.lambda);
    r.box = spec.box.describe();
    const auto emit = [&](const char* name, double value) {
      ResultRow x = r;
      x.observable = name;
      x.estimate = num(value);
      res.rows.push_back(x);
    };
    emit("log_partition_enumerated", static_cast<double>(rep.log_lhs));
    emit("log_partition_dual_sum", static_cast<double>(rep.log_rhs));
    emit("relative_error", rep.relative_error);
    emit("tree_relative_error", rep.tree_relative_error);
    if (rep.zstar_direct_available) emit("dual_partition_relative_error", rep.zstar_relative_error);
    emit("alpha", rep.alpha);
    emit("a_exponent", rep.a_exponent);
    emit("b_count", static_cast<double>(rep.b_count));
    emit("gamma_exponent", static_cast<double>(rep.gamma_exponent));
    emit("zero_bc_exponent", static_cast<double>(rep.zero_bc_exponent));
    ++row;

    const auto dual_vertices = static_cast<int>(dual_box(spec.box).vertex_count());
    res.invariants.push_back(check("counting_identity", rep.counting_holds(),
                                   std::to_string(rep.zero_bc_exponent) + " vs " + std::to_string(rep.a_exponent) +
                                       " + " + std::to_string(rep.gamma_exponent)));
    res.invariants.push_back(check("closed_equals_exact", rep.a_exponent == dual_vertices - 1,
                                   std::to_string(rep.a_exponent)));
    res.thresholds.push_back(check("partition_identity", rep.relative_error <= 1e-9,
                                   "beta=" + fmt(beta) + " relative error " + fmt(rep.relative_error)));
    res.thresholds.push_back(check("tree_independence", rep.tree_relative_error <= 1e-12,
                                   "beta=" + fmt(beta) + " relative error " + fmt(rep.tree_relative_error)));
    if (rep.zstar_direct_available)
      res.thresholds.push_back(check("dual_partition_factorization", rep.zstar_relative_error <= 1e-9,
                                     "beta=" + fmt(beta) + " relative error " + fmt(rep.zstar_relative_error)));
    log_line("[duality] beta=", beta, " relative error=", rep.relative_error);
  }

  if (spec.expectation) {
    const auto& e = *spec.expectation;
    std::vector<ExpectationReport> reports(e.plaquette_sets.size());
    parallel_for(reports.size(), threads, [&](std::size_t i) {
      reports[i] = verify_expectation_duality(
          e.plaquette_sets[i], e.beta, spec.box,
          chain_config(spec, 0.0, spec.box, Boundary::zero, derive_seed(spec.seed, 1000 + i)));
      log_line("[duality] plaquette set ", i, " exact=", reports[i].exact, " dual=", reports[i].dual.mean,
               " z=", reports[i].z_score);
    });
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& rep = reports[i];
      ResultRow r = base_row(spec, run_id(spec.kind, "bridge", i));
      r.beta = e.beta;
      r.lambda = num(rep.lambda);
      r.box = dual_box(spec.box).describe();
      ResultRow exact = r;
      exact.observable = "plaquette_product_exact";
      exact.estimate = num(rep.exact);
      res.rows.push_back(exact);
      ResultRow dual = r;
      dual.observable = "dual_exp_plaquette_sum";
      fill_estimate(dual, rep.dual);
      res.rows.push_back(dual);
      ResultRow z = r;
      z.observable = "z_score";
      z.estimate = num(rep.z_score);
      res.rows.push_back(z);
      res.thresholds.push_back(check("expectation_bridge",
                                     std::fabs(rep.z_score) <= 3.0 && rep.dual.std_error <= 0.01,
                                     "set " + std::to_string(i) + ": exact=" + fmt(rep.exact) + " dual=" +
                                         fmt(rep.dual.mean) + " +- " + fmt(rep.dual.std_error) +
                                         " z=" + fmt(rep.z_score)));
    }
  }
  return res;
}

ExperimentResult run_decay(const ExperimentSpec& spec, int threads) {
  spec.validate();
  const LoopSpec loop = spec.loops.front().build();
  const Box core = loop.bounding_box();
  std::vector<int> ls = spec.distances;
  std::sort(ls.begin(), ls.end());
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());

  // task 0: the outer box; task i: distance ls[i-1]
  std::vector<Box> boxes{core.expanded(spec.outer_margin)};
  for (int l : ls) boxes.push_back(core.expanded(l));
  std::vector<Estimate> est(boxes.size());
  parallel_for(boxes.size(), threads, [&](std::size_t i) {
    est[i] = estimate_observable(chain_config(spec, spec.beta, boxes[i], Boundary::free, derive_seed(spec.seed, i)),
                                 wilson_observable(loop, boxes[i]));
    log_line("[decay] box ", boxes[i].describe(), " W=", est[i].mean, " +- ", est[i].std_error);
  });

  ExperimentResult res;
  ResultRow r = base_row(spec, run_id(spec.kind, "", 0));
  r.beta = spec.beta;
  if (spec.beta > 0.0) r.lambda = num(dual_coupling(spec.beta).lambda);
  r.ell = loop.ell;
  r.ell0 = loop.ell0;
  r.box = boxes[0].describe();
  r.observable = "wilson";
  fill_estimate(r, est[0]);
  r.prediction = num(wilson_prediction(spec.beta, loop.ell));
  res.rows.push_back(r);

  std::vector<double> diff(ls.size()), sigma(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto& e = est[i + 1];
    ResultRow w = r;
    w.run_id = run_id(spec.kind, "", i + 1);
    w.box = boxes[i + 1].describe();
    fill_estimate(w, e);
    res.rows.push_back(w);
    diff[i] = std::fabs(e.mean - est[0].mean);
    sigma[i] = std::hypot(e.std_error, est[0].std_error);
    ResultRow d = w;
    d.observable = "abs_difference";
    d.estimate = num(diff[i]);
    d.stderr_value = num(sigma[i]);
    d.prediction.reset();
    res.rows.push_back(d);
    res.invariants.push_back(check("wilson_bounded", std::fabs(e.mean) <= 1.0, w.box));
    if (boxes[i + 1] == boxes[0])
      res.invariants.push_back(check("identical_boxes_agree", e.mean == est[0].mean, w.box));
  }
  for (std::size_t i = 1; i < ls.size(); ++i)
    res.thresholds.push_back(check("difference_non_increasing",
                                   diff[i] <= diff[i - 1] + 3.0 * std::hypot(sigma[i], sigma[i - 1]),
                                   "l=" + std::to_string(ls[i - 1]) + "->" + std::to_string(ls[i]) + ": " +
                                       fmt(diff[i - 1]) + " -> " + fmt(diff[i])));
  for (std::size_t i = 0; i < ls.size(); ++i)
    if (ls[i] >= 4)
      res.thresholds.push_back(check("difference_below_resolution",
                                     diff[i] <= 3.0 * sigma[i] && est[i + 1].std_error <= 2e-3 &&
                                         est[0].std_error <= 2e-3,
                                     "l=" + std::to_string(ls[i]) + " diff=" + fmt(diff[i]) + " sigma=" +
                                         fmt(sigma[i])));
  return res;
}

ExperimentResult run_coupling(const ExperimentSpec& spec, int threads) {
  spec.validate();
  std::vector<int> ls = spec.distances;
  std::sort(ls.begin(), ls.end());
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
  for (double lam : spec.lambdas)
    if (lam > 0.25) std::cerr << "warning: lambda " << lam << " > 0.25 is outside the small-coupling regime\n";

  struct Task {
    double lambda;
    int l;
    Box inner, outer;
    Estimate est;
  };
  std::vector<Task> tasks;
  for (double lam : spec.lambdas)
    for (int l : ls) {
      const Box inner = cube(-l, l + 1, Lattice::dual);
      tasks.push_back({lam, l, inner, inner.expanded(spec.margin), {}});
    }

  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    auto& t = tasks[i];
    const CounterRng root(derive_seed(spec.seed, i));
    std::vector<std::vector<double>> streams;
    for (int r = 0; r < spec.chain.replicas; ++r) {
      const CounterRng rep = root.split(static_cast<std::uint64_t>(r));
      HeatBathChain full(t.outer, Boundary::zero, t.lambda, rep.split(0));
      HeatBathChain sub(t.outer, t.inner, t.lambda, rep.split(1));
      CounterRng shared = rep.split(2);
      std::vector<std::uint32_t> slots;
      for (int dir = 0; dir < kDim; ++dir)
        slots.push_back(full.geometry().slot_of(make_edge({0, 0, 0, 0}, dir, Lattice::dual)));
      for (int s = 0; s < spec.chain.burn_in; ++s) coupled_sweep(full, sub, shared);
      std::vector<double> samples;
      samples.reserve(static_cast<std::size_t>(spec.chain.samples));
      for (int n = 0; n < spec.chain.samples; ++n) {
        for (int s = 0; s < spec.chain.spacing; ++s) coupled_sweep(full, sub, shared);
        bool differ = false;
        for (auto slot : slots) differ = differ || full.negative(slot) != sub.negative(slot);
        samples.push_back(differ ? 1.0 : 0.0);
      }
      streams.push_back(std::move(samples));
    }
    t.est = batch_means(streams);
    log_line("[coupling] lambda=", t.lambda, " l=", t.l, " disagreement=", t.est.mean, " +- ", t.est.std_error);
  });

  ExperimentResult res;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    ResultRow r = base_row(spec, run_id(spec.kind, "", i));
    if (t.lambda > 0.0) r.beta = num(dual_coupling(t.lambda).lambda);
    r.lambda = t.lambda;
    r.box = t.inner.describe();
    r.observable = "disagreement";
    fill_estimate(r, t.est);
    res.rows.push_back(r);
  }
  for (double lam : spec.lambdas) {
    const Task* first = nullptr;
    const Task* last = nullptr;
    for (const auto& t : tasks)
      if (t.lambda == lam) {
        if (!first) first = &t;
        last = &t;
      }
    if (first == last) continue;
    const double gap = first->est.mean - last->est.mean;
    const double sigma = std::hypot(first->est.std_error, last->est.std_error);
    res.thresholds.push_back(check("disagreement_decreases", gap > 3.0 * sigma,
                                   "lambda=" + fmt(lam) + " l=" + std::to_string(first->l) + ": " +
                                       fmt(first->est.mean) + ", l=" + std::to_string(last->l) + ": " +
                                       fmt(last->est.mean) + ", gap/sigma=" + fmt(gap / sigma)));
  }
  return res;
}

ExperimentResult run_selftest(const ExperimentSpec& spec, int /*threads*/) {
  spec.validate();
  SelftestOptions opt;
  opt.trials = spec.trials;
  opt.solver_trials = std::max(1, spec.trials / 2);
  opt.loop_trials = std::max(1, spec.trials / 5);
  opt.intersection_trials = std::max(1, spec.trials / 5);
  opt.max_side = spec.selftest_size;
  opt.seed = spec.seed;
  ExperimentResult res;
  std::size_t i = 0;
  for (const auto& s : run_all_suites(opt)) {
    ResultRow r = base_row(spec, run_id(spec.kind, "", i++));
    r.observable = s.name;
    r.estimate = s.passed ? 1.0 : 0.0;
    r.n_samples = static_cast<std::int64_t>(s.cases);
    res.rows.push_back(r);
    res.invariants.push_back(check(s.name, s.passed, s.detail));
    log_line("[selftest] ", s.name, s.passed ? " ok" : " FAILED: ", s.detail);
  }
  return res;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  switch (spec.kind) {
    case ExperimentKind::selftest: return run_selftest(spec, threads);
    case ExperimentKind::wilson: return run_wilson(spec, threads);
    case ExperimentKind::census: return run_census(spec, threads);
    case ExperimentKind::duality: return run_duality(spec, threads);
    case ExperimentKind::decay: return run_decay(spec, threads);
    case ExperimentKind::coupling: return run_coupling(spec, threads);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace z2lab

#include "kvwave/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "kvwave/assembly.hpp"
#include "kvwave/carleman.hpp"
#include "kvwave/evolution.hpp"
#include "kvwave/helmholtz.hpp"
#include "kvwave/io.hpp"
#include "kvwave/parallel.hpp"
#include "kvwave/resolvent.hpp"
#include "kvwave/spectral.hpp"
#include "kvwave/svg.hpp"
#include "kvwave/transmission.hpp"

namespace kvwave::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Read-only view of one config object that names the full key path in errors.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: '" + label() + "' must be an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  [[nodiscard]] Section sub(const std::string& key) const {
    if (!has(key)) throw ConfigError("config: missing field '" + name(key) + "'");
    return {j_.at(key), name(key)};
  }

  [[nodiscard]] std::optional<Section> optional_sub(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Section(j_.at(key), name(key));
  }

  [[nodiscard]] double number(const std::string& key) const {
    const Json& v = get(key);
    if (!v.is_number()) throw ConfigError("config: field '" + name(key) + "' must be a number");
    return v.get<double>();
  }
  [[nodiscard]] double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  [[nodiscard]] double positive(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config: field '" + name(key) + "' must be positive");
    return v;
  }
  [[nodiscard]] double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config: field '" + name(key) + "' must be positive");
    return v;
  }

  [[nodiscard]] long integer(const std::string& key) const {
    const Json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError("config: field '" + name(key) + "' must be an integer");
    return v.get<long>();
  }
  [[nodiscard]] long integer(const std::string& key, long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError("config: field '" + name(key) + "' must be a string");
    return v.get<std::string>();
  }

  [[nodiscard]] bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError("config: field '" + name(key) + "' must be true or false");
    return v.get<bool>();
  }

  [[nodiscard]] std::vector<double> numbers(const std::string& key) const {
    const Json& v = get(key);
    if (!v.is_array()) throw ConfigError("config: field '" + name(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError("config: field '" + name(key) + "' must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  [[nodiscard]] std::vector<std::string> strings(const std::string& key) const {
    const Json& v = get(key);
    if (!v.is_array()) throw ConfigError("config: field '" + name(key) + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) throw ConfigError("config: field '" + name(key) + "' must be an array of strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  [[nodiscard]] const Json& raw(const std::string& key) const { return get(key); }

 private:
  [[nodiscard]] std::string label() const { return path_.empty() ? "<root>" : path_; }
  [[nodiscard]] std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[nodiscard]] const Json& get(const std::string& key) const {
    if (!has(key)) throw ConfigError("config: missing field '" + name(key) + "'");
    return j_.at(key);
  }

  const Json& j_;
  std::string path_;
};

Section section_or_empty(const Section& root, const std::string& key) {
  static const Json empty = Json::object();
  return root.has(key) ? root.sub(key) : Section(empty, key);
}

struct Problem {
  Mesh mesh;
  DampingField damping;
  OperatorSet ops;
};

Mesh build_mesh(const Section& geom, Index resolution_override = 0) {
  const long dim = geom.integer("dim");
  const auto check =
      geom.text("interiority", "strict") == "relaxed" ? Interiority::Relaxed : Interiority::Strict;
  const std::vector<double> w = geom.numbers("omega");
  if (dim == 1) {
    if (w.size() != 2) throw ConfigError("config: field 'geometry.omega' must be [a, b] in 1D");
    const Index n = resolution_override > 0 ? resolution_override : geom.integer("n_cells");
    return build_interval_mesh(n, IntervalOmega{w[0], w[1]}, check);
  }
  if (dim == 2) {
    if (w.size() != 4) throw ConfigError("config: field 'geometry.omega' must be [x0, x1, y0, y1] in 2D");
    const Index n = resolution_override > 0 ? resolution_override : geom.integer("n");
    return build_square_mesh(n, RectOmega{w[0], w[1], w[2], w[3]}, check);
  }
  throw ConfigError("config: field 'geometry.dim' must be 1 or 2");
}

OmegaDescriptor descriptor(const Section& geom) {
  const std::vector<double> w = geom.numbers("omega");
  if (w.size() == 2) return IntervalOmega{w[0], w[1]};
  return RectOmega{w[0], w[1], w[2], w[3]};
}

Problem build_problem(const Section& root) {
  const Section geom = root.sub("geometry");
  const Section damp = root.sub("damping");
  Problem p;
  p.mesh = build_mesh(geom);
  p.damping.d = damp.number("d");
  if (p.damping.d < 0.0) throw ConfigError("config: field 'damping.d' must be nonnegative");
  p.damping.omega = descriptor(geom);
  p.ops = assemble_operators(p.mesh, p.damping);
  return p;
}

std::vector<double> read_grid(const Section& s, const std::string& key, std::vector<double> fallback) {
  if (!s.has(key)) return fallback;
  if (s.raw(key).is_array()) return s.numbers(key);
  const Section g = s.sub(key);
  const double start = g.number("start"), stop = g.number("stop"), step = g.positive("step");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(start + step * static_cast<double>(i));
  if (out.empty()) throw ConfigError("config: field '" + key + "' describes an empty grid");
  return out;
}

Json to_json(const Check& c) {
  return Json{{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"tol", c.tol}};
}

class Output {
 public:
  Output(fs::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {}

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    write_text_file(path, content);
    result_.files.push_back(path);
  }

  void plot(const std::string& name, const svg::Plot& p) { write(name, svg::render(p)); }

 private:
  fs::path dir_;
  RunResult& result_;
};

std::vector<double> decimate(const std::vector<double>& v, std::size_t max_points) {
  if (v.size() <= max_points) return v;
  const std::size_t stride = (v.size() + max_points - 1) / max_points;
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
  if ((v.size() - 1) % stride != 0) out.push_back(v.back());
  return out;
}

void add_check(RunResult& r, std::string name, bool pass, double value, double tol) {
  r.checks.push_back({std::move(name), pass, value, tol});
}

State initial_state(const OperatorSet& ops, int k, std::uint64_t seed, double& norm) {
  if (k == 0) {
    State z = random_unit_state(ops, seed);
    norm = energy_norm(ops, z);
    return z;
  }
  DomainData data = make_dAk_data(ops, k, seed);
  norm = data.norm;
  return std::move(data.z);
}

Json trace_results(const EnergyTrace& trace) {
  return Json{{"steps", trace.energies.size() - 1},
              {"E0", trace.energies.front()},
              {"E_final", trace.energies.back()},
              {"identity_residual", trace.identity_residual},
              {"max_drift", trace.max_drift},
              {"monotone", trace.monotone}};
}

void energy_plot(Output& out, const EnergyTrace& trace) {
  svg::Plot p{"Energy", "t", "E(t)", {}};
  p.series.push_back({"E", decimate(trace.times, 2000), decimate(trace.energies, 2000), svg::Style::Line, "#1f77b4"});
  out.plot("energy.svg", p);
}

void run_simulate(const Section& root, std::uint64_t seed, Output& out, RunResult& r) {
  const Section s = root.sub("simulate");
  const Problem p = build_problem(root);
  const double dt = s.positive("dt"), T = s.positive("T");
  const long k = s.integer("k", 0);
  const std::string scheme = s.text("scheme", "midpoint");
  if (scheme != "midpoint" && scheme != "backward-euler")
    throw ConfigError("config: field 'simulate.scheme' must be midpoint or backward-euler");
  const double id_tol = s.positive("identity_tol", 1e-10);
  const double drift_tol = s.positive("drift_tol", 1e-10);

  double norm = 0.0;
  const State z0 = initial_state(p.ops, static_cast<int>(k), seed, norm);
  SimulateOptions opts;
  opts.scheme = scheme == "midpoint" ? Scheme::Midpoint : Scheme::BackwardEuler;
  opts.k = static_cast<int>(k);
  opts.initial_norm = norm;
  const EnergyTrace trace = simulate(p.ops, z0, dt, T, opts);

  std::ostringstream csv;
  write_trace_csv(csv, trace, nullptr);
  out.write("trace.csv", csv.str());
  energy_plot(out, trace);

  if (opts.scheme == Scheme::Midpoint) add_check(r, "energy_identity", trace.identity_residual <= id_tol, trace.identity_residual, id_tol);
  if (p.damping.d == 0.0 && opts.scheme == Scheme::Midpoint)
    add_check(r, "energy_drift", trace.max_drift <= drift_tol, trace.max_drift, drift_tol);
  else
    add_check(r, "energy_monotone", trace.monotone, trace.monotone ? 1.0 : 0.0, 1.0);
  r.summary["results"] = trace_results(trace);
}

void run_decay(const Section& root, std::uint64_t seed, Output& out, RunResult& r) {
  const Section s = root.sub("decay");
  const Problem p = build_problem(root);
  const double dt = s.positive("dt"), T = s.positive("T");
  const long k = s.integer("k");
  if (k < 0 || k > 4) throw ConfigError("config: field 'decay.k' must be in [0, 4]");
  const double threshold = s.positive("threshold", 1.05);

  double norm = 0.0;
  const State z0 = initial_state(p.ops, static_cast<int>(k), seed, norm);
  SimulateOptions opts;
  opts.k = static_cast<int>(k);
  opts.initial_norm = norm;
  const EnergyTrace trace = simulate(p.ops, z0, dt, T, opts);
  const DecayReport rep = fit_log_decay(trace, static_cast<int>(k), norm, threshold);

  std::ostringstream csv;
  write_trace_csv(csv, trace, &rep);
  out.write("trace.csv", csv.str());
  energy_plot(out, trace);
  svg::Plot rp{"Log-weighted energy ratio", "t", "ratio", {}};
  rp.series.push_back({"ratio", decimate(trace.times, 2000), decimate(rep.ratio_series, 2000), svg::Style::Line, "#d62728"});
  out.plot("ratio.svg", rp);

  add_check(r, "tail_growth", rep.bounded, rep.tail_growth, threshold);
  Json res = trace_results(trace);
  res["k"] = k;
  res["domain_norm"] = norm;
  res["sup_ratio"] = rep.sup_ratio;
  res["tail_growth"] = rep.tail_growth;
  res["status"] = rep.status;
  r.summary["results"] = res;
}

void run_spectrum(const Section& root, std::uint64_t, Output& out, RunResult& r) {
  const Section s = section_or_empty(root, "spectrum");
  const Problem p = build_problem(root);
  QepOptions qo;
  const std::string method = s.text("method", "reduced");
  if (method == "qz")
    qo.method = QepMethod::QZ;
  else if (method != "reduced")
    throw ConfigError("config: field 'spectrum.method' must be reduced or qz");
  qo.trust_tol = s.positive("trust_tol", 1e-6);
  const double stab_tol = s.positive("stability_tol", 1e-10);
  const Spectrum spec = solve_qep(p.ops, qo);

  std::ostringstream csv;
  write_spectrum_csv(csv, spec);
  out.write("spectrum.csv", csv.str());
  svg::Plot sp{"Spectrum", "Re", "Im", {}};
  svg::Series pts{"eigenvalues", {}, {}, svg::Style::Points, "#1f77b4"};
  for (Index i = 0; i < spec.size(); ++i) {
    pts.x.push_back(spec.eigenvalues[i].real());
    pts.y.push_back(spec.eigenvalues[i].imag());
  }
  sp.series.push_back(std::move(pts));
  out.plot("spectrum.svg", sp);

  double min_re = std::numeric_limits<double>::infinity(), max_re = -min_re;
  for (Index i = 0; i < spec.size(); ++i) {
    if (!spec.trusted[i]) continue;
    min_re = std::min(min_re, spec.eigenvalues[i].real());
    max_re = std::max(max_re, spec.eigenvalues[i].real());
  }
  const auto expected = static_cast<double>(2 * p.ops.n_dof);
  add_check(r, "eigenvalue_count", static_cast<double>(spec.size()) == expected, static_cast<double>(spec.size()), expected);
  const double gap = conjugate_gap(spec);
  double scale = 1.0;
  for (Index i = 0; i < spec.size(); ++i) scale = std::max(scale, std::abs(spec.eigenvalues[i]));
  add_check(r, "conjugate_symmetry", gap <= 1e-8 * scale, gap, 1e-8 * scale);

  Json res{{"n_dof", p.ops.n_dof},
           {"count", spec.size()},
           {"trusted", spec.trusted_count()},
           {"min_re", min_re},
           {"max_re", max_re}};
  if (p.damping.d > 0.0) {
    const StabilityReport st = verify_strong_stability(spec, stab_tol);
    add_check(r, "strong_stability", st.pass && !st.no_data, static_cast<double>(st.offenders.size()), 0.0);
    res["max_re"] = st.max_real;
  }
  if (s.has("j_max")) {
    BandOptions bo;
    bo.exclude_top_fraction = s.number("exclude_top", 0.2);
    bo.min_contraction = s.number("min_contraction", 0.1);
    const BandReport br = band_abscissa(spec, static_cast<int>(s.integer("j_max")), bo);
    Json bands = Json::array();
    for (const auto& b : br.bands)
      bands.push_back({{"j", b.j}, {"count", b.count}, {"abscissa", b.abscissa ? *b.abscissa : kNaN}});
    res["bands"] = bands;
    res["band_trend"] = br.trend;
    if (s.flag("expect_trend", false)) add_check(r, "band_trend", br.trend, br.trend ? 1.0 : 0.0, 1.0);
  }
  r.summary["results"] = res;
}

void run_resolvent(const Section& root, std::uint64_t seed, Output& out, RunResult& r, unsigned jobs) {
  const Section s = section_or_empty(root, "resolvent");
  const Problem p = build_problem(root);
  ScanOptions so;
  so.jobs = jobs;
  const std::string method = s.text("method", "auto");
  if (method == "dense")
    so.norm.method = NormMethod::Dense;
  else if (method == "iterative")
    so.norm.method = NormMethod::Iterative;
  else if (method != "auto")
    throw ConfigError("config: field 'resolvent.method' must be auto, dense or iterative");
  so.norm.dense_limit = s.integer("dense_limit", so.norm.dense_limit);
  const std::vector<double> grid = read_grid(s, "mu_grid", default_mu_grid());
  const ResolventScan scan = scan_resolvent(p.ops, grid, so);

  std::ostringstream csv;
  write_resolvent_csv(csv, scan);
  out.write("resolvent.csv", csv.str());
  svg::Plot rp{"Resolvent norm on the imaginary axis", "mu", "ln ||R(i mu)||", {}};
  svg::Series pts{"samples", {}, {}, svg::Style::Points, "#1f77b4"};
  for (std::size_t i = 0; i < scan.mu_values.size(); ++i) {
    if (scan.flags[i] != "ok") continue;
    pts.x.push_back(scan.mu_values[i]);
    pts.y.push_back(std::log(scan.norms[i]));
  }
  rp.series.push_back(pts);
  if (std::isfinite(scan.C1) && !pts.x.empty()) {
    const auto [lo, hi] = std::minmax_element(pts.x.begin(), pts.x.end());
    svg::Series env{"envelope", {}, {}, svg::Style::Line, "#d62728"};
    for (double mu : {*lo, *hi}) {
      env.x.push_back(mu);
      env.y.push_back(scan.C1 + scan.C2 * std::abs(mu));
    }
    if (*lo < 0.0 && *hi > 0.0) {
      env.x.insert(env.x.begin() + 1, 0.0);
      env.y.insert(env.y.begin() + 1, scan.C1);
    }
    rp.series.push_back(env);
  }
  out.plot("resolvent.svg", rp);

  const bool finite = std::isfinite(scan.C1) && std::isfinite(scan.C2);
  add_check(r, "envelope_covers_samples", finite && scan.covered, static_cast<double>(scan.fitted),
            static_cast<double>(grid.size()));
  Json res{{"C1", scan.C1}, {"C2", scan.C2}, {"growth_exponent", scan.growth_exponent}, {"fitted", scan.fitted}};

  if (p.damping.d == 0.0) {
    // Skew-adjoint case: ||R(i mu)|| = 1 / dist(mu, undamped frequencies).
    const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(Mat(p.ops.K), Mat(p.ops.M), Eigen::EigenvaluesOnly);
    const Vec freq = ges.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (scan.flags[i] == "singular") continue;
      double dist = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < freq.size(); ++j)
        dist = std::min({dist, std::abs(grid[i] - freq[j]), std::abs(grid[i] + freq[j])});
      worst = std::max(worst, std::abs(scan.norms[i] * dist - 1.0));
    }
    const double tol = s.positive("distance_tol", 1e-3);
    add_check(r, "distance_identity", worst <= tol, worst, tol);
    res["distance_identity_error"] = worst;
  }

  if (const auto ds = s.optional_sub("dissipation")) {
    const std::vector<double> mus = ds->numbers("mu");
    const long samples = ds->integer("samples", 20);
    const DissipationStudy st = interface_dissipation_study(p.ops, mus, static_cast<int>(samples), seed, jobs);
    add_check(r, "dissipation_bound", st.covered, st.max_sample_ratio, st.C_fit);
    Json d{{"C_fit", st.C_fit}, {"max_sample_ratio", st.max_sample_ratio}, {"mu", st.mu_values}, {"sup_ratio", st.sup_ratio}};
    res["dissipation"] = d;
  }
  r.summary["results"] = res;
}

void run_transmission(const Section& root, std::uint64_t seed, Output& out, RunResult& r) {
  const Section s = section_or_empty(root, "transmission");
  const Problem p = build_problem(root);
  const long cases = s.integer("cases", 50);
  if (cases < 1) throw ConfigError("config: field 'transmission.cases' must be positive");
  const std::vector<double> mus = s.has("mu") ? s.numbers("mu") : std::vector<double>{1.0, 10.0, 40.0};
  const double tol = s.positive("tol", 1e-8);
  const double flux_tol = s.positive("flux_tol", 1e-9);

  std::ostringstream csv;
  csv << "case,mu,equivalence,flux_jump\n";
  double worst = 0.0, worst_flux = 0.0;
  for (long c = 0; c < cases; ++c) {
    const double mu = mus[static_cast<std::size_t>(c) % mus.size()];
    const CState data = random_rhs(p.ops, mu, seed + static_cast<std::uint64_t>(c));
    const double eq = transmission_equivalence(p.ops, p.damping, mu, data.u, data.v);
    const TransmissionState st = solve_transmission(p.mesh, p.damping, mu, dofs_to_nodes(p.ops, data.u),
                                                    dofs_to_nodes(p.ops, data.v));
    worst = std::max(worst, eq);
    worst_flux = std::max(worst_flux, st.flux_jump);
    csv << c << ',' << fmt17(mu) << ',' << fmt17(eq) << ',' << fmt17(st.flux_jump) << '\n';
  }
  out.write("transmission.csv", csv.str());
  add_check(r, "equivalence", worst <= tol, worst, tol);
  add_check(r, "flux_continuity", worst_flux <= flux_tol, worst_flux, flux_tol);
  r.summary["results"] = Json{{"cases", cases}, {"max_equivalence", worst}, {"max_flux_jump", worst_flux}};
}

void run_carleman(const Section& root, std::uint64_t, Output& out, RunResult& r) {
  const Section s = root.sub("carleman");
  const std::vector<std::string> names = s.strings("weights");
  if (names.empty()) throw ConfigError("config: field 'carleman.weights' must not be empty");
  carleman::Sampling sm;
  if (const auto ss = s.optional_sub("sampling")) {
    sm.radial = static_cast<int>(ss->integer("radial", sm.radial));
    sm.angular = static_cast<int>(ss->integer("angular", sm.angular));
    sm.tau_levels = static_cast<int>(ss->integer("tau_levels", sm.tau_levels));
    sm.directions = static_cast<int>(ss->integer("directions", sm.directions));
    sm.eps_zero = ss->positive("eps_zero", sm.eps_zero);
    sm.c_min = ss->positive("c_min", sm.c_min);
  }
  const double lambda = s.number("lambda", 0.0);
  const double d = s.number("d", 1.0);

  Json reports = Json::array();
  std::ostringstream csv;
  std::vector<double> margins;
  bool first = true;
  for (const auto& name : names) {
    carleman::WeightSpec w = carleman::named_weight(name, lambda);
    w.tau_min = s.positive("tau_min", w.tau_min);
    w.alpha = cplx(0.0, d);
    const carleman::WeightReport rep = carleman::check_weight_conditions(w, sm);
    Json conds = Json::array();
    for (const auto& c : rep.conditions) {
      conds.push_back({{"id", c.id},
                       {"pass", c.pass},
                       {"margin", c.margin},
                       {"vacuous", c.vacuous},
                       {"samples", c.samples},
                       {"side", c.side},
                       {"where", {c.where[0], c.where[1]}}});
    }
    reports.push_back({{"weight", rep.weight},
                       {"lambda", w.lambda},
                       {"dim", rep.dim},
                       {"pass", rep.pass},
                       {"trace_gap", rep.trace_gap},
                       {"alpha_term_max", rep.alpha_term_max},
                       {"near_zeros", rep.near_zeros.size()},
                       {"conditions", conds}});
    std::ostringstream one;
    carleman::write_subell_csv(one, rep);
    std::string text = one.str();
    if (!first) text = text.substr(text.find('\n') + 1);
    csv << text;
    first = false;
    for (const auto& z : rep.near_zeros) margins.push_back(z.bracket - sm.c_min);
    add_check(r, "weight:" + name, rep.pass, rep.condition("JUMP").margin, 0.0);
  }
  out.write("subell.csv", csv.str());
  out.write("carleman.json", reports.dump(2) + "\n");
  if (!margins.empty())
    out.write("subell.svg", svg::render_histogram(margins, 30, "Sub-ellipticity margin at near-zeros", "bracket - c_min"));
  r.summary["results"] = Json{{"weights", reports}};
}

void run_helmholtz(const Section& root, std::uint64_t seed, Output& out, RunResult& r, unsigned jobs) {
  const Section s = root.sub("helmholtz");
  const Section geom = root.sub("geometry");
  HelmholtzStudyOptions o;
  o.jobs = jobs;
  o.trial.d = s.has("d") ? s.number("d") : root.sub("damping").number("d");
  o.trial.trials = static_cast<int>(s.integer("trials", 100));
  o.trial.seed = seed;
  o.trial.mu0 = s.positive("mu0", 10.0);
  o.trial.boundary_data = s.flag("boundary_data", true);
  if (s.has("mu")) o.mu_values = s.numbers("mu");
  for (double x : s.numbers("resolutions")) o.resolutions.push_back(static_cast<Index>(x));
  o.band = s.positive("band", 0.2);
  const HelmholtzStudy st = helmholtz_study([&](Index n) { return build_mesh(geom, n); }, o);

  std::ostringstream csv;
  csv << "resolution,mu,max_ratio\n";
  svg::Plot hp{"Helmholtz H1 ratio", "mu", "max ratio", {}};
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  for (std::size_t i = 0; i < st.resolutions.size(); ++i) {
    svg::Series line{"n = " + std::to_string(st.resolutions[i]), st.mu_values, st.max_ratio[i], svg::Style::Line,
                     colors[i % 5]};
    hp.series.push_back(line);
    for (std::size_t m = 0; m < st.mu_values.size(); ++m)
      csv << st.resolutions[i] << ',' << fmt17(st.mu_values[m]) << ',' << fmt17(st.max_ratio[i][m]) << '\n';
  }
  out.write("helmholtz.csv", csv.str());
  out.plot("helmholtz.svg", hp);
  add_check(r, "mesh_stable", st.mesh_stable, st.mesh_deviation, o.band);
  add_check(r, "mu_stable", st.mu_stable, st.mu_deviation, o.band);
  add_check(r, "mu_uniform", st.mu_uniform, st.mu_growth, 1.0 + o.band);
  r.summary["results"] = Json{{"max_ratio", st.max_ratio},
                              {"mesh_deviation", st.mesh_deviation},
                              {"mu_deviation", st.mu_deviation},
                              {"mu_growth", st.mu_growth}};
}

}  // namespace

bool RunResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"simulate",           "spectrum",       "resolvent",       "decay",
                                              "transmission-check", "carleman-check", "helmholtz-check"};
  return kinds;
}

Json load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set: empty path component in '" + key + "'");
    if (!node->is_object()) throw ConfigError("--set: '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      const Json parsed = Json::parse(value, nullptr, false);
      (*node)[part] = parsed.is_discarded() ? Json(value) : parsed;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

RunResult run_experiment(const std::string& kind, const Json& config, const fs::path& out_dir, unsigned jobs) {
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw ConfigError("unknown experiment kind '" + kind + "'");
  const Section root(config, "");
  const long seed_value = root.integer("seed", 1);
  if (seed_value < 0) throw ConfigError("config: field 'seed' must be nonnegative");
  const auto seed = static_cast<std::uint64_t>(seed_value);

  RunResult result;
  Output out(out_dir, result);
  try {
    if (kind == "simulate") run_simulate(root, seed, out, result);
    if (kind == "decay") run_decay(root, seed, out, result);
    if (kind == "spectrum") run_spectrum(root, seed, out, result);
    if (kind == "resolvent") run_resolvent(root, seed, out, result, jobs);
    if (kind == "transmission-check") run_transmission(root, seed, out, result);
    if (kind == "carleman-check") run_carleman(root, seed, out, result);
    if (kind == "helmholtz-check") run_helmholtz(root, seed, out, result, jobs);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  Json checks = Json::array();
  for (const auto& c : result.checks) checks.push_back(to_json(c));
  result.summary["kind"] = kind;
  result.summary["config_echo"] = config;
  result.summary["seed"] = seed;
  result.summary["checks"] = checks;
  result.summary["pass"] = result.passed();
  out.write("summary.json", result.summary.dump(2) + "\n");
  return result;
}

}  // namespace kvwave::cli

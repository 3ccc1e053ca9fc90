#include "tumor/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "tumor/errors.hpp"
#include "tumor/linear_evolution.hpp"
#include "tumor/radial_ode.hpp"
#include "tumor/spectrum.hpp"

namespace tumor {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// 17 significant digits round-trip every double
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class T>
T take(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
      throw ValidationError("unknown config field '" + where + key + "'");
  }
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  std::ofstream f(fs::path(cfg.out_dir) / name);
  if (!f) throw ValidationError("cannot write " + (fs::path(cfg.out_dir) / name).string());
  return f;
}

NutrientModel model_of(const RunConfig& cfg) { return NutrientModel::parse(cfg.model); }

double require_A(const RunConfig& cfg) {
  if (!cfg.A) throw ValidationError("A is required (--A or config field \"A\")");
  return *cfg.A;
}

ModelParameters params_of(const RunConfig& cfg) {
  const NutrientModel m = model_of(cfg);
  const double A = require_A(cfg);
  ModelParameters p = cfg.R ? ModelParameters{A, cfg.G, *cfg.R, m} : ModelParameters::at_equilibrium(A, cfg.G, m);
  p.validate();
  return p;
}

json params_json(const ModelParameters& p) {
  return {{"model", p.model.describe()}, {"A", p.A}, {"G", p.G}, {"R", p.R}};
}

// ------------------------------------------------------------------------------------------
// steady

int cmd_steady(const RunConfig& cfg, std::ostream& out) {
  const NutrientModel m = model_of(cfg);
  const SteadyState st = steady_radius(require_A(cfg), m);
  {
    auto f = open_out(cfg, "v0_profile.csv");
    f << "r,v0,v0_prime\n";
    for (std::size_t j = 0; j < st.v0.grid.size(); ++j)
      f << num(st.v0.grid[j]) << ',' << num(st.v0.values[j]) << ',' << num(st.v0.derivs[j]) << '\n';
  }
  const json report = {{"model", m.describe()},
                       {"A", st.A},
                       {"R_A", st.R_A},
                       {"alpha_A", st.alpha_A},
                       {"residual", st.residual},
                       {"v0_prime_at_1", st.v0.deriv_at_1},
                       {"v0_profile", "v0_profile.csv"}};
  open_out(cfg, "steady.json") << report.dump(2) << '\n';
  out << "R_A = " << num(st.R_A) << "\nalpha_A = " << num(st.alpha_A) << '\n';
  return exit_ok;
}

// ------------------------------------------------------------------------------------------
// spectrum

json spectrum_report(const SpectrumTable& t) {
  json r = params_json(t.params);
  r["k_max"] = t.k_max;
  r["assumption_eq_ass_holds"] = t.assumption_eq_ass_holds;
  json mu = json::object(), lam = json::object(), ratio = json::object(), gk = json::object();
  for (int k = 0; k <= t.k_max; ++k) {
    const std::string key = std::to_string(k);
    mu[key] = t.mu[k];
    lam[key] = t.lambda[k];
    ratio[key] = t.ratio[k];
    gk[key] = t.g_threshold[k] ? json(*t.g_threshold[k]) : json(nullptr);
  }
  r["mu"] = mu;
  r["lambda"] = lam;
  r["ratio"] = ratio;
  r["g_threshold"] = gk;
  try {
    const GStar gs = g_star(t);
    r["g_star"] = gs.value;
    r["k0"] = gs.k0;
  } catch (const SolverError& e) {
    r["g_star"] = nullptr;
    r["k0"] = nullptr;
    r["g_star_error"] = e.what();
  }
  try {
    r["l_G"] = l_G_index(t);
  } catch (const std::runtime_error& e) {
    r["l_G"] = nullptr;
    r["l_G_error"] = e.what();
  }
  const StabilityReport rep = classify_stability(t);
  r["classification"] = {{"regime", to_string(rep.regime)},
                         {"unstable_modes", rep.unstable_modes},
                         {"spectral_bound", rep.spectral_bound},
                         {"neutral_mu", rep.neutral_mu}};
  return r;
}

void write_spectrum_csv(const SpectrumTable& t, std::ostream& f) {
  f << "k,lambda_k,ratio_k,mu_k,g_threshold_k\n";
  for (int k = 0; k <= t.k_max; ++k) {
    f << k << ',' << num(t.lambda[k]) << ',' << num(t.ratio[k]) << ',' << num(t.mu[k]) << ','
      << (t.g_threshold[k] ? num(*t.g_threshold[k]) : std::string()) << '\n';
  }
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
  const SpectrumTable t = build_spectrum(params_of(cfg), cfg.k_max);
  {
    auto f = open_out(cfg, "spectrum.csv");
    write_spectrum_csv(t, f);
  }
  const json r = spectrum_report(t);
  open_out(cfg, "report.json") << r.dump(2) << '\n';
  out << "R = " << num(t.params.R) << "\nmu_1 = " << num(t.mu[1]) << "\nregime = "
      << r["classification"]["regime"].get<std::string>() << '\n';
  if (!r["g_star"].is_null()) out << "G* = " << num(r["g_star"].get<double>()) << " at k0 = " << r["k0"] << '\n';
  return exit_ok;
}

// ------------------------------------------------------------------------------------------
// evolve

int cmd_evolve(const RunConfig& cfg, std::ostream& out) {
  const ModelParameters p = params_of(cfg);
  if (!(cfg.t_end >= 0.0)) throw ValidationError("t_end must be >= 0");
  Trajectory tr;
  std::optional<SpectrumTable> table;
  int K = 0;
  if (cfg.mode == "linear") {
    K = cfg.k_max;
    const ShapeState s0 = ShapeState::from_seed(cfg.seed_shape, K, p.R);
    s0.require_in_neighbourhood();
    table = build_spectrum(p, std::max(2, K));
    std::vector<double> times;
    const long n = std::lround(std::ceil(cfg.t_end / cfg.stepper.record_interval - 1e-9));
    for (long i = 0; i < n; ++i) times.push_back(i * cfg.stepper.record_interval);
    times.push_back(cfg.t_end);
    tr = evolve_linear_trajectory(s0, times, *table);
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      if (!tr.states[i].in_neighbourhood()) {
        tr.times.resize(i + 1);
        tr.states.resize(i + 1);
        tr.left_neighbourhood = true;
        tr.halt_reason = "left neighbourhood";
        break;
      }
    }
  } else if (cfg.mode == "nonlinear") {
    K = cfg.grid.mode_cutoff();
    const ShapeState s0 = ShapeState::from_seed(cfg.seed_shape, K, p.R);
    s0.require_in_neighbourhood();
    tr = evolve_nonlinear(s0, cfg.t_end, p, cfg.grid, cfg.stepper);
    table = build_spectrum(p, std::max(2, std::min(K, cfg.k_max)));
  } else {
    throw ValidationError("mode must be linear or nonlinear");
  }

  {
    auto f = open_out(cfg, "trajectory.csv");
    f << "t,sup_norm";
    for (int k = 0; k <= K; ++k) f << ",amp_" << k;
    f << '\n';
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      f << num(tr.times[i]) << ',' << num(tr.states[i].sup_norm());
      for (int k = 0; k <= K; ++k) f << ',' << num(std::abs(tr.states[i].coeff(k)));
      f << '\n';
    }
  }

  const int n_theta = cfg.mode == "nonlinear" ? cfg.grid.n_theta : std::max(64, 4 * K);
  json snaps = {{"theta_points", n_theta}, {"times", tr.times}};
  json shapes = json::array();
  for (const auto& s : tr.states) shapes.push_back(s.sample(n_theta));
  snaps["rho"] = shapes;
  if (!tr.phi_norms.empty()) {
    json norms = json::array();
    for (double v : tr.phi_norms) norms.push_back(num_or_null(v));
    snaps["phi_sup_norm"] = norms;
  }
  open_out(cfg, "snapshots.json") << snaps.dump() << '\n';

  // fitted rates of the seeded modes
  json report = params_json(p);
  report["mode"] = cfg.mode;
  report["seed_shape"] = cfg.seed_shape;
  report["t_end"] = cfg.t_end;
  report["t_final"] = tr.times.back();
  report["left_neighbourhood"] = tr.left_neighbourhood;
  report["halt_reason"] = tr.halt_reason;
  report["fit_sup_norm"] = cfg.fit_sup_norm;
  json rates = json::array();
  const ShapeState& s0 = tr.states.front();
  for (int k = 0; k <= std::min(K, table->k_max); ++k) {
    if (std::abs(s0.coeff(k)) == 0.0) continue;
    std::vector<std::pair<double, double>> series;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const double a = std::abs(tr.states[i].coeff(k));
      if (tr.states[i].sup_norm() <= cfg.fit_sup_norm && a > 0.0) series.push_back({tr.times[i], a});
    }
    json entry = {{"k", k}, {"mu_k", table->mu[k]}};
    if (series.size() >= 3) {
      const GrowthFit fit = fit_growth_rate(series);
      entry["fitted_rate"] = fit.rate;
      entry["fit_residual"] = fit.residual;
      entry["samples"] = series.size();
    } else {
      entry["fitted_rate"] = nullptr;
    }
    rates.push_back(entry);
  }
  report["growth_rates"] = rates;
  open_out(cfg, "report.json") << report.dump(2) << '\n';

  out << "records = " << tr.times.size() << "\nt_final = " << num(tr.times.back()) << '\n';
  for (const auto& e : rates) {
    out << "mode " << e["k"] << ": mu_k = " << num(e["mu_k"].get<double>());
    if (!e["fitted_rate"].is_null()) out << ", fitted = " << num(e["fitted_rate"].get<double>());
    out << '\n';
  }
  if (tr.left_neighbourhood) {
    out << "halted: left neighbourhood ||rho||_inf >= 1/4\n";
    return exit_left_neighbourhood;
  }
  return exit_ok;
}

// ------------------------------------------------------------------------------------------
// appendix-check

int cmd_appendix_check(const RunConfig& cfg, std::ostream& out) {
  const NutrientModel id = NutrientModel::identity();
  const RadialProfile v0 = solve_U(1.0, id);
  const double r0 = boundary_ratio(0, 1.0, v0, id), r1 = boundary_ratio(1, 1.0, v0, id);
  auto three = [](double x) { return std::round(x * 1000.0) / 1000.0; };
  const bool ratios_ok = three(r0) == 0.446 && three(r1) == 0.240;

  const RadialProfile u0 = solve_u_n(0, 1.0, v0, id), u1 = solve_u_n(1, 1.0, v0, id);
  double worst = 0.0;
  json rows = json::array();
  for (int i = 1; i <= 10; ++i) {
    const double r = 0.1 * i;
    const double s0 = appendix_series(AppendixSeries::u0, r, 40), s1 = appendix_series(AppendixSeries::u1, r, 40);
    worst = std::max({worst, std::abs(s0 - u0(r)), std::abs(s1 - u1(r))});
    rows.push_back({{"r", r}, {"u0_series", s0}, {"u0_ode", u0(r)}, {"u1_series", s1}, {"u1_ode", u1(r)}});
  }
  const bool series_ok = worst <= 1e-8;
  const json report = {{"ratio_0", r0},         {"ratio_1", r1},         {"ratio_0_3dp", three(r0)},
                       {"ratio_1_3dp", three(r1)}, {"ratios_match", ratios_ok}, {"series_max_diff", worst},
                       {"series_match", series_ok}, {"series_table", rows}};
  open_out(cfg, "appendix.json") << report.dump(2) << '\n';
  char line[128];
  std::snprintf(line, sizeof line, "u0'(1)/u0(1) = %.3f\nu1'(1)/u1(1) = %.3f\n", r0, r1);
  out << line << "series max |diff| = " << num(worst) << '\n';
  out << (ratios_ok && series_ok ? "appendix check passed\n" : "appendix check FAILED\n");
  return ratios_ok && series_ok ? exit_ok : exit_solver;
}

// ------------------------------------------------------------------------------------------
// sweep

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  std::vector<double> As = cfg.sweep_A, Gs = cfg.sweep_G;
  if (As.empty()) As.push_back(require_A(cfg));
  if (Gs.empty()) Gs.push_back(cfg.G);
  struct Row {
    double A, G, R;
    SpectrumTable table;
  };
  std::vector<std::pair<double, double>> jobs;
  for (double A : As)
    for (double G : Gs) jobs.push_back({A, G});

  // the steady radius and ratios depend on A only
  std::vector<std::future<SpectrumTable>> per_A;
  const NutrientModel m = model_of(cfg);
  for (double A : As) {
    per_A.push_back(std::async(std::launch::async, [&, A] {
      RunConfig c = cfg;
      c.A = A;
      c.G = 0.0;
      return build_spectrum(params_of(c), cfg.k_max);
    }));
  }
  std::vector<SpectrumTable> base;
  for (auto& f : per_A) base.push_back(f.get());

  auto f = open_out(cfg, "sweep.csv");
  f << "A,G,R,mu_0,mu_2,spectral_bound,g_star,k0,l_G,regime\n";
  for (std::size_t a = 0; a < As.size(); ++a) {
    for (double G : Gs) {
      ModelParameters p = base[a].params;
      p.G = G;
      SpectrumTable t = base[a];
      t.params = p;
      for (int k = 0; k <= t.k_max; ++k) t.mu[k] = mu_k(k, p, t.ratio[k]);
      const StabilityReport rep = classify_stability(t);
      std::string l;
      try {
        l = std::to_string(l_G_index(t));
      } catch (const std::runtime_error&) {
      }
      f << num(p.A) << ',' << num(G) << ',' << num(p.R) << ',' << num(t.mu[0]) << ',' << num(t.mu[2]) << ','
        << num(rep.spectral_bound) << ',' << (rep.g_star ? num(rep.g_star->value) : "") << ','
        << (rep.g_star ? std::to_string(rep.g_star->k0) : "") << ',' << l << ',' << to_string(rep.regime) << '\n';
    }
  }
  out << "sweep: " << jobs.size() << " runs written to " << (fs::path(cfg.out_dir) / "sweep.csv").string() << '\n';
  return exit_ok;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j,
                 {"model", "A", "G", "R", "kmax", "grid", "stepper", "out", "seed_shape", "t_end", "mode",
                  "fit_sup_norm", "sweep"},
                 "");
  RunConfig c;
  if (j.contains("model")) c.model = take<std::string>(j, "model");
  if (j.contains("A")) c.A = take<double>(j, "A");
  if (j.contains("G")) c.G = take<double>(j, "G");
  if (j.contains("R") && !j["R"].is_null()) c.R = take<double>(j, "R");
  if (j.contains("kmax")) c.k_max = take<int>(j, "kmax");
  if (j.contains("out")) c.out_dir = take<std::string>(j, "out");
  if (j.contains("seed_shape")) c.seed_shape = take<std::string>(j, "seed_shape");
  if (j.contains("t_end")) c.t_end = take<double>(j, "t_end");
  if (j.contains("mode")) c.mode = take<std::string>(j, "mode");
  if (j.contains("fit_sup_norm")) c.fit_sup_norm = take<double>(j, "fit_sup_norm");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, {"n_theta", "n_r", "newton_tol", "max_newton_iters"}, "grid.");
    if (g.contains("n_theta")) c.grid.n_theta = take<int>(g, "n_theta");
    if (g.contains("n_r")) c.grid.n_r = take<int>(g, "n_r");
    if (g.contains("newton_tol")) c.grid.newton_tol = take<double>(g, "newton_tol");
    if (g.contains("max_newton_iters")) c.grid.max_newton_iters = take<int>(g, "max_newton_iters");
  }
  if (j.contains("stepper")) {
    const json& s = j["stepper"];
    reject_unknown(s, {"dt_initial", "dt_min", "dt_max", "abs_tol", "rel_tol", "record_interval", "stop_sup_norm"},
                   "stepper.");
    if (s.contains("dt_initial")) c.stepper.dt_initial = take<double>(s, "dt_initial");
    if (s.contains("dt_min")) c.stepper.dt_min = take<double>(s, "dt_min");
    if (s.contains("dt_max")) c.stepper.dt_max = take<double>(s, "dt_max");
    if (s.contains("abs_tol")) c.stepper.abs_tol = take<double>(s, "abs_tol");
    if (s.contains("rel_tol")) c.stepper.rel_tol = take<double>(s, "rel_tol");
    if (s.contains("record_interval")) c.stepper.record_interval = take<double>(s, "record_interval");
    if (s.contains("stop_sup_norm") && !s["stop_sup_norm"].is_null())
      c.stepper.stop_sup_norm = take<double>(s, "stop_sup_norm");
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    reject_unknown(s, {"A", "G"}, "sweep.");
    if (s.contains("A")) c.sweep_A = take<std::vector<double>>(s, "A");
    if (s.contains("G")) c.sweep_G = take<std::vector<double>>(s, "G");
  }
  return c;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Free-boundary tumour growth: steady states, spectrum, evolution"};
  app.require_subcommand(1);

  std::string config_path, model, mode, seed, out_dir;
  double A = 0, G = 0, R = 0, t_end = 0;
  int kmax = 0;
  std::vector<CLI::Option*> given;

  struct Opts {
    CLI::Option *config, *A, *G, *R, *model, *kmax, *mode, *t_end, *seed, *out;
  };
  std::map<std::string, Opts> opts;
  const std::pair<const char*, const char*> commands[] = {
      {"steady", "steady radius and radial nutrient profile"},
      {"spectrum", "mode growth rates, thresholds and stability regime"},
      {"evolve", "evolve a seeded boundary perturbation"},
      {"appendix-check", "boundary ratios for f = id, R = 1 against their power series"},
      {"sweep", "stability table over a grid of (A, G)"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    Opts o;
    o.config = sub->add_option("--config", config_path, "JSON run configuration");
    o.A = sub->add_option("--A", A, "apoptosis/mitosis balance A in (0, f(1))");
    o.G = sub->add_option("--G", G, "mitosis rate G");
    o.R = sub->add_option("--R", R, "domain radius (default: steady radius)");
    o.model = sub->add_option("--model", model, "identity | poly:c1,c2,...");
    o.kmax = sub->add_option("--kmax", kmax, "largest mode of the spectral scan");
    o.mode = sub->add_option("--mode", mode, "linear | nonlinear");
    o.t_end = sub->add_option("--t-end", t_end, "final time");
    o.seed = sub->add_option("--seed-shape", seed, "k:amp:phase[,...] meaning sum amp cos(k theta + phase)");
    o.out = sub->add_option("--out", out_dir, "output directory");
    opts[name] = o;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const Opts& o = opts[command];
  try {
    RunConfig cfg = o.config->count() ? load_config(config_path) : RunConfig{};
    if (o.A->count()) cfg.A = A;
    if (o.G->count()) cfg.G = G;
    if (o.R->count()) cfg.R = R;
    if (o.model->count()) cfg.model = model;
    if (o.kmax->count()) cfg.k_max = kmax;
    if (o.mode->count()) cfg.mode = mode;
    if (o.t_end->count()) cfg.t_end = t_end;
    if (o.seed->count()) cfg.seed_shape = seed;
    if (o.out->count()) cfg.out_dir = out_dir;
    cfg.grid.validate();
    cfg.stepper.validate();
    if (cfg.k_max < 2) throw ValidationError("kmax must be >= 2");

    if (command == "steady") return cmd_steady(cfg, out);
    if (command == "spectrum") return cmd_spectrum(cfg, out);
    if (command == "evolve") return cmd_evolve(cfg, out);
    if (command == "appendix-check") return cmd_appendix_check(cfg, out);
    return cmd_sweep(cfg, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return exit_validation;
  } catch (const DomainExitError& e) {
    err << "left neighbourhood: " << e.what() << '\n';
    return exit_left_neighbourhood;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "validation error: " << e.what() << '\n';
    return exit_validation;
  }
}

}  // namespace tumor

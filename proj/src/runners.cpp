#include "runners.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "csv.hpp"
#include "svg.hpp"
#include "vpl/diagnostics.hpp"
#include "vpl/evolution.hpp"

namespace vpl::cli {

namespace fs = std::filesystem;

std::string RunConfig::resolved_line() const {
  std::string s = "vpl " + command;
  s += " omega=" + num(omega);
  s += " lambda=" + num(lambda);
  s += " grid=" + std::to_string(n_r) + "x" + std::to_string(n_theta);
  s += " tol=" + num(tol);
  s += " max_iter=" + std::to_string(max_iter);
  if (command == "sweep") {
    s += " lambdas=";
    for (std::size_t k = 0; k < sweep_lambdas.size(); ++k)
      s += (k ? "," : "") + num(sweep_lambdas[k]);
    s += std::string(" auto_grid=") + (sweep_auto_grid ? "1" : "0");
  }
  if (command == "evolve" || command == "stability") {
    s += " periods=" + num(periods);
    s += " cfl=" + num(cfl);
    s += " p=" + num(p);
    s += " n_angles=" + std::to_string(n_angles);
  }
  if (command == "stability") {
    s += " perturbation=" + perturbation;
    s += " magnitude=" + num(magnitude);
  }
  s += " seed=" + std::to_string(seed);
  s += std::string(" svg=") + (emit_svg ? "1" : "0");
  return s;
}

namespace {

void fail_line(const char* kind, const std::string& msg) {
  std::cerr << "vpl-error kind=" << kind << " msg=\"" << msg << "\"\n";
}

fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
  return dir;
}

struct SolveProducts {
  vpl::PatchState<double> state;
  vpl::SweepRecord<double> record;
};

SolveProducts solve_and_measure(const RunConfig& cfg, double lambda, long n_r, long n_theta) {
  auto grid = vpl::PolarGridd::create(n_r, n_theta);
  vpl::DiskPoissonSolver<double> solver(grid);
  vpl::RotationParams<double> params(cfg.omega, lambda);
  const double r_star = vpl::kr_minimizer_radius(cfg.omega);
  auto init = vpl::disk_patch<double>(grid, lambda, vpl::Vec2d(r_star, 0.0));
  auto state = vpl::solve_patch(params, init, cfg.tol, static_cast<int>(cfg.max_iter));

  vpl::SweepRecord<double> rec;
  rec.lambda = lambda;
  rec.epsilon = 1.0 / std::sqrt(vpl::pi_v<double> * lambda);
  rec.energy = state.energy;
  rec.mu = state.mu;
  rec.center_radius = vpl::moment_center(state.w.w).norm();
  rec.diameter = vpl::patch_diameter(state.w.w, lambda / 2.0);
  rec.diam_over_eps = rec.diameter / rec.epsilon;
  auto prof = vpl::rescaled_profiles(state);
  rec.core_energy = prof.core_energy_direct;
  rec.v_sup_error = prof.v_sup_error;
  rec.zeta_error = prof.zeta_error;
  rec.probe_clipped = prof.probe_clipped;
  rec.grid_n_r = static_cast<int>(n_r);
  rec.grid_n_theta = static_cast<int>(n_theta);
  rec.iterations = state.iterations;
  rec.converged = state.converged;
  return {std::move(state), rec};
}

void write_convergence_csv(const fs::path& dir, const RunConfig& cfg,
                           const vpl::PatchState<double>& state) {
  CsvFile csv((dir / "convergence.csv").string(), cfg.resolved_line(),
              "iteration,energy,mu,patch_mass,symmetric_difference");
  for (const auto& row : state.history)
    csv.row(std::to_string(row.iteration) + "," + num(row.energy) + "," + num(row.mu) + "," +
            num(row.patch_mass) + "," + num(row.symmetric_diff));
}

void write_summary_csv(const fs::path& dir, const RunConfig& cfg,
                       const vpl::SweepRecord<double>& r, bool converged, int iterations,
                       double fractional_mass) {
  CsvFile csv((dir / "summary.csv").string(), cfg.resolved_line(),
              "lambda,epsilon,energy,mu,core_energy,center_radius,diameter,diam_over_eps,"
              "v_sup_error,zeta_error,fractional_mass,iterations,converged");
  csv.row(num(r.lambda) + "," + num(r.epsilon) + "," + num(r.energy) + "," + num(r.mu) + "," +
          num(r.core_energy) + "," + num(r.center_radius) + "," + num(r.diameter) + "," +
          num(r.diam_over_eps) + "," + num(r.v_sup_error) + "," + num(r.zeta_error) + "," +
          num(fractional_mass) + "," + std::to_string(iterations) + "," +
          (converged ? "1" : "0"));
}

void dump_field(const fs::path& path, const vpl::ScalarFieldd& w,
                const std::string& config_line) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path.string());
  os << "# " << config_line << '\n';
  vpl::write_field(os, w);
}

}  // namespace

int run_greens_check(const RunConfig& cfg) {
  const auto dir = ensure_out_dir(cfg);
  vpl::SplitMix64 rng(cfg.seed);
  double sym = 0, boundary = 0, robin_diag = 0;
  for (int k = 0; k < 1000; ++k) {
    const double r1 = std::sqrt(rng.uniform()) * 0.99;
    const double t1 = rng.uniform(0.0, 2.0 * vpl::pi_v<double>);
    const double r2 = std::sqrt(rng.uniform()) * 0.99;
    const double t2 = rng.uniform(0.0, 2.0 * vpl::pi_v<double>);
    const vpl::Vec2d x(r1 * std::cos(t1), r1 * std::sin(t1));
    const vpl::Vec2d y(r2 * std::cos(t2), r2 * std::sin(t2));
    if ((x - y).norm() < 1e-9) continue;
    sym = std::max(sym, std::abs(vpl::greens(x, y) - vpl::greens(y, x)));
    const vpl::Vec2d xb(std::cos(t1), std::sin(t1));
    boundary = std::max(boundary, std::abs(vpl::greens(xb, y)));
    robin_diag = std::max(
        robin_diag, std::abs(vpl::greens_regular_part(x, x) - 2.0 * vpl::robin(x)));
  }
  CsvFile csv((dir / "greens_check.csv").string(), cfg.resolved_line(),
              "identity,max_residual");
  csv.row("symmetry," + num(sym));
  csv.row("boundary_vanishing," + num(boundary));
  csv.row("regular_part_vs_robin," + num(robin_diag));
  const double tol = 1e-10;
  const bool ok = sym < tol && boundary < tol && robin_diag < tol;
  std::cout << "greens-check: symmetry=" << num(sym) << " boundary=" << num(boundary)
            << " robin=" << num(robin_diag) << (ok ? "  [ok]" : "  [FAILED]") << '\n';
  if (!ok) fail_line("numeric", "greens identities above 1e-10");
  return ok ? kOk : kNumericalError;
}

int run_solve(const RunConfig& cfg) {
  const auto dir = ensure_out_dir(cfg);
  auto products = solve_and_measure(cfg, cfg.lambda, cfg.n_r, cfg.n_theta);
  const auto& state = products.state;
  write_convergence_csv(dir, cfg, state);
  write_summary_csv(dir, cfg, products.record, state.converged, state.iterations,
                    state.fractional_mass);
  dump_field(dir / "w.dump", state.w.w, cfg.resolved_line());
  if (cfg.emit_svg) {
    write_patch_svg((dir / "patch.svg").string(), state, cfg.resolved_line());
    write_profile_svg((dir / "profile.svg").string(), state, cfg.resolved_line());
  }
  std::cout << "solve: lambda=" << num(cfg.lambda) << " energy=" << num(state.energy)
            << " mu=" << num(state.mu)
            << " |X|=" << num(products.record.center_radius)
            << " iterations=" << state.iterations
            << (state.converged ? "" : "  [NOT CONVERGED]") << '\n';
  if (!state.converged) {
    fail_line("nonconvergence", "max_iter exhausted before tolerances were met");
    return kNoConvergence;
  }
  return kOk;
}

int run_sweep(const RunConfig& cfg) {
  const auto dir = ensure_out_dir(cfg);
  std::vector<vpl::SweepRecord<double>> records;
  bool all_converged = true;
  for (double lambda : cfg.sweep_lambdas) {
    long n_r = cfg.n_r, n_theta = cfg.n_theta;
    if (cfg.sweep_auto_grid) {
      auto [nr, nt] = vpl::sweep_grid_for(lambda);
      n_r = nr;
      n_theta = nt;
    }
    auto products = solve_and_measure(cfg, lambda, n_r, n_theta);
    records.push_back(products.record);
    all_converged = all_converged && products.state.converged;
    std::cout << "sweep: lambda=" << num(lambda) << " grid=" << n_r << "x" << n_theta
              << " energy=" << num(products.record.energy)
              << " mu=" << num(products.record.mu)
              << " diam/eps=" << num(products.record.diam_over_eps)
              << " v_sup=" << num(products.record.v_sup_error) << '\n';
    if (cfg.emit_svg)
      write_profile_svg((dir / ("profile_" + num(lambda) + ".svg")).string(), products.state,
                        cfg.resolved_line());
  }

  CsvFile csv((dir / "sweep.csv").string(), cfg.resolved_line(),
              "lambda,epsilon,energy,mu,core_energy,center_radius,diameter,diam_over_eps,"
              "v_sup_error,zeta_error");
  for (const auto& r : records)
    csv.row(num(r.lambda) + "," + num(r.epsilon) + "," + num(r.energy) + "," + num(r.mu) +
            "," + num(r.core_energy) + "," + num(r.center_radius) + "," + num(r.diameter) +
            "," + num(r.diam_over_eps) + "," + num(r.v_sup_error) + "," + num(r.zeta_error));

  if (records.size() >= 3) {
    auto fit = vpl::scaling_fit(records);
    CsvFile fcsv((dir / "scaling_fit.csv").string(), cfg.resolved_line(),
                 "quantity,slope,target,rel_dev,intercept");
    const double pi = vpl::pi_v<double>;
    fcsv.row("mu," + num(fit.slope_mu) + "," + num(1.0 / (2.0 * pi)) + "," +
             num(std::abs(fit.slope_mu * 2.0 * pi - 1.0)) + "," + num(fit.intercept_mu));
    fcsv.row("energy," + num(fit.slope_energy) + "," + num(1.0 / (4.0 * pi)) + "," +
             num(std::abs(fit.slope_energy * 4.0 * pi - 1.0)) + "," +
             num(fit.intercept_energy));
    std::cout << "sweep: slope_mu=" << num(fit.slope_mu)
              << " slope_energy=" << num(fit.slope_energy) << '\n';
  }
  if (!all_converged) {
    fail_line("nonconvergence", "at least one sweep point did not converge");
    return kNoConvergence;
  }
  return kOk;
}

int run_evolve(const RunConfig& cfg) {
  const auto dir = ensure_out_dir(cfg);
  auto products = solve_and_measure(cfg, cfg.lambda, cfg.n_r, cfg.n_theta);
  if (!products.state.converged) {
    fail_line("nonconvergence", "reference maximizer did not converge");
    return kNoConvergence;
  }
  const auto& ref = products.state;
  dump_field(dir / "w0.dump", ref.w.w, cfg.resolved_line());

  vpl::DiskPoissonSolver<double> solver(ref.w.w.grid());
  const double period = 2.0 * vpl::pi_v<double> / cfg.omega;
  const double t_final = cfg.periods * period;

  vpl::EvolveOptions<double> opt;
  opt.sample_every = 100;
  opt.dist_reference = &ref.w.w;
  opt.dist_p = cfg.p;
  opt.dist_angles = static_cast<int>(cfg.n_angles);
  opt.dump_path = (dir / "blowup.dump").string();
  long snap_count = 0;
  if (cfg.snapshots > 0) {
    opt.on_sample = [&](const vpl::EvolutionState<double>& s) {
      if (s.time >= snap_count * t_final / static_cast<double>(cfg.snapshots)) {
        dump_field(dir / ("w_t" + num(s.time) + ".dump"), s.w, cfg.resolved_line());
        ++snap_count;
      }
    };
  }

  auto state = vpl::evolve(ref.w.w, t_final, cfg.cfl, solver, opt);
  dump_field(dir / "w_final.dump", state.w, cfg.resolved_line());

  CsvFile csv((dir / "ledger.csv").string(), cfg.resolved_line(),
              "time,mass,J,E,lp15,lp2,lp4,dist_p");
  for (const auto& r : state.ledger)
    csv.row_nums(r.time, r.mass, r.J, r.E, r.lp15, r.lp2, r.lp4, r.dist_p);

  const auto& f = state.ledger.front();
  const auto& l = state.ledger.back();
  std::cout << "evolve: t=" << num(l.time) << " mass_drift=" << num((l.mass - f.mass) / f.mass)
            << " J_drift=" << num((l.J - f.J) / f.J)
            << " E_drift=" << num((l.E - f.E) / f.E)
            << " dist_p=" << num(l.dist_p) << '\n';
  return kOk;
}

int run_stability(const RunConfig& cfg) {
  const auto dir = ensure_out_dir(cfg);
  auto products = solve_and_measure(cfg, cfg.lambda, cfg.n_r, cfg.n_theta);
  if (!products.state.converged) {
    fail_line("nonconvergence", "reference maximizer did not converge");
    return kNoConvergence;
  }
  vpl::DiskPoissonSolver<double> solver(products.state.w.w.grid());

  vpl::PerturbationSpec spec;
  if (cfg.perturbation == "patch-shift")
    spec.kind = vpl::PerturbationSpec::Kind::patch_shift;
  else if (cfg.perturbation == "smooth-bump")
    spec.kind = vpl::PerturbationSpec::Kind::smooth_bump;
  else
    spec.kind = vpl::PerturbationSpec::Kind::amplitude_noise;
  spec.magnitude = cfg.magnitude;
  spec.p = cfg.p;
  spec.seed = cfg.seed;

  auto res = vpl::stability_experiment(products.state, spec, cfg.periods, solver, cfg.cfl,
                                       0.0, 100, static_cast<int>(cfg.n_angles));
  CsvFile csv((dir / "stability.csv").string(), cfg.resolved_line(), "time,dist_p");
  for (const auto& [t, d] : res.rows) csv.row(num(t) + "," + num(d));
  std::cout << "stability: dist0=" << num(res.dist0)
            << " final=" << num(res.rows.back().second)
            << " max=" << num([&] {
                 double m = 0;
                 for (const auto& r : res.rows) m = std::max(m, r.second);
                 return m;
               }())
            << '\n';
  return kOk;
}

int run(const RunConfig& cfg) {
  try {
    if (cfg.command == "greens-check") return run_greens_check(cfg);
    if (cfg.command == "solve") return run_solve(cfg);
    if (cfg.command == "sweep") return run_sweep(cfg);
    if (cfg.command == "evolve") return run_evolve(cfg);
    if (cfg.command == "stability") return run_stability(cfg);
    fail_line("usage", "unknown command " + cfg.command);
    return kUsage;
  } catch (const std::domain_error& e) {
    fail_line("usage", e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    fail_line("usage", e.what());
    return kUsage;
  } catch (const std::logic_error& e) {
    fail_line("numeric", e.what());
    return kNumericalError;
  } catch (const std::ios_base::failure& e) {
    fail_line("io", e.what());
    return kIoError;
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.find("cannot open") != std::string::npos ||
        what.find("cannot create") != std::string::npos) {
      fail_line("io", what);
      return kIoError;
    }
    fail_line("numeric", what);
    return kNumericalError;
  }
}

namespace {

// Flat `key = value` configuration file.  Blank lines and #-comments are
// ignored; unknown keys and malformed values are hard usage errors naming
// the offending key.  Values here sit between built-in defaults and
// command-line flags in precedence.
void apply_config_file(const std::string& path, RunConfig& cfg, std::string& grid_spec) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config file not readable: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const auto as_double = [&](double& dst) {
      try {
        std::size_t used = 0;
        dst = std::stod(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
      } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': malformed value '" + val + "'");
      }
    };
    const auto as_long = [&](long& dst) {
      try {
        std::size_t used = 0;
        dst = std::stol(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
      } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': malformed value '" + val + "'");
      }
    };
    if (key == "omega") as_double(cfg.omega);
    else if (key == "lambda") as_double(cfg.lambda);
    else if (key == "grid") grid_spec = val;
    else if (key == "tol") as_double(cfg.tol);
    else if (key == "max_iter") as_long(cfg.max_iter);
    else if (key == "periods") as_double(cfg.periods);
    else if (key == "cfl") as_double(cfg.cfl);
    else if (key == "p") as_double(cfg.p);
    else if (key == "n_angles") as_long(cfg.n_angles);
    else if (key == "magnitude") as_double(cfg.magnitude);
    else if (key == "kind") cfg.perturbation = val;
    else if (key == "snapshots") as_long(cfg.snapshots);
    else if (key == "seed") { long s = 0; as_long(s); cfg.seed = static_cast<std::uint64_t>(s); }
    else if (key == "out") cfg.out_dir = val;
    else if (key == "svg") cfg.emit_svg = (val == "1" || val == "true");
    else if (key == "auto_grid") cfg.sweep_auto_grid = (val == "1" || val == "true");
    else if (key == "lambdas") {
      cfg.sweep_lambdas.clear();
      std::size_t pos = 0;
      while (pos < val.size()) {
        auto comma = val.find(',', pos);
        if (comma == std::string::npos) comma = val.size();
        try {
          cfg.sweep_lambdas.push_back(std::stod(val.substr(pos, comma - pos)));
        } catch (const std::exception&) {
          throw std::invalid_argument("config key 'lambdas': malformed value '" + val + "'");
        }
        pos = comma + 1;
      }
    } else {
      throw std::invalid_argument("config file: unknown key '" + key + "'");
    }
  }
}

void add_common(CLI::App* sub, RunConfig& cfg, std::string& grid_spec, std::string& config_path) {
  sub->add_option("--config", config_path, "flat key = value configuration file");
  sub->add_option("--omega", cfg.omega, "angular velocity (> 0)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--lambda", cfg.lambda, "vorticity strength (> 1/pi)")
      ->capture_default_str();
  sub->add_option("--grid", grid_spec, "grid as NRxNT, e.g. 256x512")
      ->capture_default_str();
  sub->add_option("--tol", cfg.tol, "relative convergence tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--max-iter", cfg.max_iter, "iteration cap for the maximizer")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "seed for all randomized pieces")
      ->capture_default_str();
  sub->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  sub->add_flag("--svg", cfg.emit_svg, "emit SVG plots");
}

void parse_grid_spec(const std::string& spec, RunConfig& cfg) {
  const auto x = spec.find('x');
  if (x == std::string::npos)
    throw CLI::ValidationError("--grid", "expected NRxNT, e.g. 256x512");
  try {
    cfg.n_r = std::stol(spec.substr(0, x));
    cfg.n_theta = std::stol(spec.substr(x + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--grid", "expected NRxNT, e.g. 256x512");
  }
}

}  // namespace

int parse_and_run(int argc, const char* const* argv) {
  RunConfig cfg;
  std::string grid_spec = "256x512";
  std::string config_path;

  CLI::App app{"rotating vortex patches in the unit disk: variational solver, "
               "asymptotic diagnostics, and direct evolution"};
  app.require_subcommand(1);

  auto* greens = app.add_subcommand("greens-check", "verify disk Green's function identities");
  auto* solve = app.add_subcommand("solve", "compute one constrained maximizer");
  auto* sweep = app.add_subcommand("sweep", "lambda sweep with asymptotic diagnostics");
  auto* evolve = app.add_subcommand("evolve", "evolve the maximizer by semi-Lagrangian transport");
  auto* stability = app.add_subcommand("stability", "perturb the maximizer and track orbit distance");

  for (auto* sub : {greens, solve, sweep, evolve, stability})
    add_common(sub, cfg, grid_spec, config_path);

  // Config-file precedence: apply the file before CLI flags are written
  // into cfg, so explicitly given flags win.
  std::string prescan_config;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--config" && k + 1 < argc) prescan_config = argv[k + 1];
    if (arg.rfind("--config=", 0) == 0) prescan_config = arg.substr(9);
  }
  if (!prescan_config.empty()) {
    try {
      apply_config_file(prescan_config, cfg, grid_spec);
    } catch (const std::invalid_argument& e) {
      fail_line("usage", e.what());
      return kUsage;
    }
  }

  sweep->add_option("--lambdas", cfg.sweep_lambdas, "sweep values of lambda")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_flag("!--no-auto-grid", cfg.sweep_auto_grid,
                  "disable the per-lambda resolution ladder (use --grid instead)");

  for (auto* sub : {evolve, stability}) {
    sub->add_option("--periods", cfg.periods, "run length in rotation periods")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--cfl", cfg.cfl, "CFL number in (0, 1/2]")->capture_default_str();
    sub->add_option("--p", cfg.p, "L^p exponent for the orbit distance")
        ->capture_default_str();
    sub->add_option("--n-angles", cfg.n_angles, "rotation lattice size for dist_p")
        ->capture_default_str();
  }
  evolve->add_option("--snapshots", cfg.snapshots, "number of field snapshots to dump")
      ->capture_default_str();
  stability->add_option("--magnitude", cfg.magnitude, "perturbation size (relative L2)")
      ->capture_default_str();
  stability
      ->add_option("--kind", cfg.perturbation,
                   "perturbation kind: amplitude-noise | patch-shift | smooth-bump")
      ->check(CLI::IsMember({"amplitude-noise", "patch-shift", "smooth-bump"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) fail_line("usage", e.what());
    return app.exit(e);
  }

  try {
    parse_grid_spec(grid_spec, cfg);
  } catch (const CLI::ParseError& e) {
    fail_line("usage", e.what());
    return kUsage;
  }

  if (!(cfg.lambda * vpl::pi_v<double> > 1.0)) {
    fail_line("usage", "lambda <= 1/pi: class K_lambda(D) empty");
    return kUsage;
  }
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 0.5)) {
    fail_line("usage", "cfl must lie in (0, 1/2]");
    return kUsage;
  }

  for (auto* sub : {greens, solve, sweep, evolve, stability})
    if (sub->parsed()) cfg.command = sub->get_name();
  if (cfg.command == "greens-check") cfg.command = "greens-check";

  return run(cfg);
}

}  // namespace vpl::cli

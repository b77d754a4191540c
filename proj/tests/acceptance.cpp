// Acceptance suite: runs every headline requirement end to end at its
// stated parameters and tolerances and prints one pass/fail line per
// criterion.  Heavyweight artifacts (the lambda sweep, reference solves)
// are computed once and shared.  Exit code = number of failed criteria.
//
// Usage: acceptance [criterion-numbers...]   (default: all twelve)

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "vpl/diagnostics.hpp"
#include "vpl/evolution.hpp"

namespace {

const double kPi = vpl::pi_v<double>;
using vpl::Vec2d;

struct Outcome {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Outcome> g_outcomes;
std::vector<double> g_energy_increments;  // min per-solve energy increments (C3)

void report(int id, bool pass, const std::string& detail) {
  g_outcomes.push_back({id, pass, detail});
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void track_history(const vpl::PatchState<double>& state) {
  double min_inc = std::numeric_limits<double>::max();
  double prev = -std::numeric_limits<double>::max();
  bool first = true;
  for (const auto& row : state.history) {
    if (!first) min_inc = std::min(min_inc, row.energy - prev);
    prev = row.energy;
    first = false;
  }
  if (!first && state.history.size() >= 2) g_energy_increments.push_back(min_inc);
  else g_energy_increments.push_back(0.0);
}

vpl::PatchState<double> solve_at(double omega, double lambda, Eigen::Index n_r,
                                 Eigen::Index n_theta) {
  auto grid = vpl::PolarGridd::create(n_r, n_theta);
  vpl::RotationParams<double> params(omega, lambda);
  auto init = vpl::disk_patch<double>(grid, lambda, Vec2d(vpl::kr_minimizer_radius(omega), 0.0));
  auto state = vpl::solve_patch(params, init, 1e-10, 500);
  track_history(state);
  return state;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// --------------------------------------------------------------------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  vpl::SplitMix64 rng(2024);
  double sym = 0, boundary = 0, robin_diag = 0;
  for (int k = 0; k < 1000; ++k) {
    const double r1 = std::sqrt(rng.uniform()) * 0.99;
    const double t1 = rng.uniform(0.0, 2.0 * kPi);
    const double r2 = std::sqrt(rng.uniform()) * 0.99;
    const double t2 = rng.uniform(0.0, 2.0 * kPi);
    const Vec2d x(r1 * std::cos(t1), r1 * std::sin(t1));
    const Vec2d y(r2 * std::cos(t2), r2 * std::sin(t2));
    if ((x - y).norm() < 1e-9) continue;
    sym = std::max(sym, std::abs(vpl::greens(x, y) - vpl::greens(y, x)));
    boundary = std::max(boundary,
                        std::abs(vpl::greens(Vec2d(std::cos(t1), std::sin(t1)), y)));
    robin_diag = std::max(robin_diag,
                          std::abs(vpl::greens_regular_part(x, x) - 2.0 * vpl::robin(x)));
  }
  const double secs = seconds_since(t0);
  const bool pass = sym < 1e-10 && boundary < 1e-10 && robin_diag < 1e-10 && secs < 1.0;
  report(1, pass,
         fmt("greens identities on 1e3 pairs: sym=%.2e boundary=%.2e h(x,x)-2H=%.2e "
             "(tol 1e-10), %.2f s (budget 1 s)",
             sym, boundary, robin_diag, secs));
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  auto source = [](std::shared_ptr<const vpl::PolarGridd> grid) {
    vpl::SplitMix64 rng(404);
    struct Bump {
      Vec2d c;
      double s, a;
    };
    std::vector<Bump> bumps;
    for (int k = 0; k < 5; ++k) {
      const double r = 0.75 * std::sqrt(rng.uniform());
      const double t = rng.uniform(0.0, 2.0 * kPi);
      bumps.push_back({Vec2d(r * std::cos(t), r * std::sin(t)), rng.uniform(0.08, 0.25),
                       rng.uniform(0.2, 1.0)});
    }
    return vpl::make_field<double>(grid, [=](double r, double t) {
      const Vec2d x(r * std::cos(t), r * std::sin(t));
      double v = 0.0;
      for (const auto& b : bumps) v += b.a * std::exp(-(x - b.c).squaredNorm() / (b.s * b.s));
      return v;
    });
  };
  std::vector<double> diffs, hs;
  for (int n : {32, 64, 128}) {
    auto grid = vpl::PolarGridd::create(n, 2 * n);
    auto w = source(grid);
    auto fast = vpl::solve_fast(w);
    auto direct = vpl::solve_direct(w);
    double num = 0, den = 0;
    for (Eigen::Index i = 0; i < grid->n_r(); ++i) {
      const double a = grid->ring_cell_area(i);
      num += a * (fast.psi.values().row(i) - direct.psi.values().row(i)).square().sum();
      den += a * direct.psi.values().row(i).square().sum();
    }
    diffs.push_back(std::sqrt(num / den));
    hs.push_back(1.0 / n);
  }
  // least-squares slope of ln(diff) against ln(h)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    const double x = std::log(hs[k]), y = std::log(diffs[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nobs = static_cast<double>(diffs.size());
  const double order = (nobs * sxy - sx * sy) / (nobs * sxx - sx * sx);
  const double secs = seconds_since(t0);
  const bool pass = diffs.back() < 1e-3 && order >= 1.9 && secs < 60.0;
  report(2, pass,
         fmt("fast-vs-direct rel L2 at 128x256 = %.2e (tol 1e-3), observed order %.2f "
             "(>= 1.9), %.1f s (budget 60 s)",
             diffs.back(), order, secs));
}

void criterion_3() {
  double worst = 0.0;
  for (double inc : g_energy_increments) worst = std::min(worst, inc);
  const bool pass = !g_energy_increments.empty() && worst >= -1e-12;
  report(3, pass,
         fmt("energy monotonicity over %zu solve runs: worst increment %.2e (>= -1e-12)",
             g_energy_increments.size(), worst));
}

}  // namespace

// --------------------------------------------------------------------------

int main(int argc, char** argv) {
  std::set<int> want;
  for (int k = 1; k < argc; ++k) want.insert(std::atoi(argv[k]));
  auto wanted = [&](int id) { return want.empty() || want.count(id) > 0; };

  const double omega = 1.0 / kPi;
  const double lambda_ref = 1e3;

  if (wanted(1)) criterion_1();
  if (wanted(2)) criterion_2();

  // Shared solves: lambda = 1e3 at the stated grid and one refinement.
  std::unique_ptr<vpl::PatchState<double>> ref256, ref512;
  if (wanted(4) || wanted(10) || wanted(11) || wanted(12)) {
    ref256 = std::make_unique<vpl::PatchState<double>>(solve_at(omega, lambda_ref, 256, 512));
  }
  if (wanted(4) || wanted(10)) {
    ref512 = std::make_unique<vpl::PatchState<double>>(solve_at(omega, lambda_ref, 512, 1024));
  }

  if (wanted(4)) {
    const double eps = 1.0 / std::sqrt(kPi * lambda_ref);
    const double rs = vpl::kr_minimizer_radius(omega);
    auto estimate = [&](const vpl::PolarGridd& g) {
      const double d = std::hypot(g.dr(), rs * g.dtheta());
      return lambda_ref * (2.0 * kPi * eps + 4.0 * d) * d;
    };
    const double f1 = ref256->fractional_mass;
    const double f2 = ref512->fractional_mass;
    const double ratio = f2 / f1;
    const bool pass = f1 < 3.0 * estimate(*ref256->w.w.grid()) && ratio <= 0.55;
    report(4, pass,
           fmt("patchness: fractional mass %.3e at 256x512 (< 3x band estimate %.3e), "
               "refinement ratio %.3f (halves or better)",
               f1, 3.0 * estimate(*ref256->w.w.grid()), ratio));
  }

  // The sweep (shared by criteria 5-9).
  std::vector<vpl::SweepRecord<double>> sweep;
  double sweep_secs = 0;
  if (wanted(5) || wanted(6) || wanted(7) || wanted(8) || wanted(9)) {
    const auto t0 = std::chrono::steady_clock::now();
    for (double lambda : {1e2, 1e3, 1e4, 1e5}) {
      std::vector<vpl::IterationRow<double>> history;
      sweep.push_back(vpl::sweep_point(lambda, omega, vpl::SweepOptions<double>{}, &history));
      vpl::PatchState<double> shim{vpl::AdmissibleVorticity<double>{
                                       vpl::ScalarFieldd(vpl::PolarGridd::create(8, 16)), 1.0},
                                   0.0, 0.0, 0, 0.0, true,
                                   vpl::RotationParams<double>(omega, lambda), history};
      track_history(shim);
      std::printf("  [sweep] lambda=%g grid=%dx%d E=%.6f mu=%.6f T=%.6f |X|=%.6f "
                  "diam/eps=%.3f v_sup=%.4f zeta_err=%.4f\n",
                  lambda, sweep.back().grid_n_r, sweep.back().grid_n_theta,
                  sweep.back().energy, sweep.back().mu, sweep.back().core_energy,
                  sweep.back().center_radius, sweep.back().diam_over_eps,
                  sweep.back().v_sup_error, sweep.back().zeta_error);
      std::fflush(stdout);
    }
    sweep_secs = seconds_since(t0);
  }

  if (wanted(5)) {
    auto fit = vpl::scaling_fit(sweep);
    const double dev_mu = std::abs(fit.slope_mu * 2.0 * kPi - 1.0);
    const double dev_e = std::abs(fit.slope_energy * 4.0 * kPi - 1.0);
    const bool pass = dev_mu < 0.05 && dev_e < 0.05 && sweep_secs <= 600.0;
    report(5, pass,
           fmt("scaling slopes: mu %.5f (target %.5f, dev %.1f%%), energy %.5f (target "
               "%.5f, dev %.1f%%), sweep %.0f s (budget 600 s)",
               fit.slope_mu, 1.0 / (2.0 * kPi), 100 * dev_mu, fit.slope_energy,
               1.0 / (4.0 * kPi), 100 * dev_e, sweep_secs));
  }

  if (wanted(6)) {
    const auto& top = sweep.back();  // lambda = 1e5, omega = 1/pi
    const double r_star = vpl::kr_minimizer_radius(omega);
    const double cell_hi = std::max(1.0 / top.grid_n_r,
                                    r_star * 2.0 * kPi / top.grid_n_theta);
    const bool ok_super = std::abs(top.center_radius - r_star) < 2.0 * cell_hi;

    // Subcritical companion: omega = 0.1, lambda = 1e5; the minimizer is
    // the origin.
    auto [nr, nt] = vpl::sweep_grid_for(1e5);
    auto low = solve_at(0.1, 1e5, nr, nt);
    const double low_center = vpl::moment_center(low.w.w).norm();
    const double cell_lo = 1.0 / nr;
    const bool ok_sub = low_center < 2.0 * cell_lo;
    const bool pass = ok_super && ok_sub;
    report(6, pass,
           fmt("center limit at lambda=1e5: omega=1/pi |X|=%.6f vs %.6f (tol %.1e); "
               "omega=0.1 |X|=%.2e (tol %.1e)",
               top.center_radius, r_star, 2.0 * cell_hi, low_center, 2.0 * cell_lo));
  }

  if (wanted(7)) {
    double worst = 0;
    for (const auto& r : sweep) worst = std::max(worst, r.diam_over_eps);
    const double top = sweep.back().diam_over_eps;
    const bool pass = worst <= 4.0 && top >= 1.8 && top <= 3.0;
    report(7, pass,
           fmt("localization: diam/eps across sweep <= %.2f (bounded), at lambda=1e5 "
               "%.3f (in [1.8, 3.0])",
               worst, top));
  }

  if (wanted(8)) {
    bool decreasing = true;
    for (std::size_t k = 1; k < sweep.size(); ++k)
      decreasing = decreasing && sweep[k].v_sup_error < sweep[k - 1].v_sup_error;
    const double v_top = sweep.back().v_sup_error;
    const double zeta_mass = 1.0 - sweep.back().zeta_error;
    const bool pass = decreasing && v_top < 0.05 && zeta_mass > 0.95;
    report(8, pass,
           fmt("Rankine limit: v_sup %.4f/%.4f/%.4f/%.4f (strictly decreasing), top %.4f "
               "(< 0.05); zeta mass in 1.1 ball %.4f (> 0.95)",
               sweep[0].v_sup_error, sweep[1].v_sup_error, sweep[2].v_sup_error,
               sweep[3].v_sup_error, v_top, zeta_mass));
  }

  if (wanted(9)) {
    const double target = 1.0 / (16.0 * kPi);
    const double t_top = sweep.back().core_energy;
    const double dev = std::abs(t_top / target - 1.0);
    const bool pass = dev <= 0.10;
    report(9, pass,
           fmt("core energy at lambda=1e5: T=%.6f vs 1/(16 pi)=%.6f, deviation %.1f%% "
               "(<= 10%%)",
               t_top, target, 100 * dev));
  }

  if (wanted(10)) {
    const double r_coarse = vpl::residual_weak_form(*ref256, 8);
    const double r_fine = vpl::residual_weak_form(*ref512, 8);
    const double order = std::log2(r_coarse / r_fine);

    auto grid_f = ref512->w.w.grid();
    auto blob = vpl::disk_patch<double>(grid_f, lambda_ref, Vec2d(0.3, 0.0));
    vpl::PatchState<double> control{blob, 0.0, 0.0, 0, 0.0, true,
                                    vpl::RotationParams<double>(omega, lambda_ref), {}};
    const double r_control = vpl::residual_weak_form(control, 8);
    const double ratio = r_control / r_fine;
    const bool pass = order >= 1.0 && ratio >= 10.0;
    report(10, pass,
           fmt("weak-form residual: %.3e -> %.3e under refinement (order %.2f >= 1); "
               "off-equilibrium control %.3e, %.0fx the converged residual (>= 10x)",
               r_coarse, r_fine, order, r_control, ratio));
  }

  if (wanted(11)) {
    const auto t0 = std::chrono::steady_clock::now();
    vpl::DiskPoissonSolver<double> solver(ref256->w.w.grid());
    const double period = 2.0 * kPi / omega;
    vpl::EvolveOptions<double> opt;
    opt.sample_every = 500;
    auto state = vpl::evolve(ref256->w.w, period, 0.5, solver, opt);
    const double secs = seconds_since(t0);
    const auto& f = state.ledger.front();
    const auto& l = state.ledger.back();
    const double mass_drift = std::abs(l.mass - f.mass) / f.mass;
    const double j_drift = std::abs(l.J - f.J) / f.J;
    const double e_drift = std::abs(l.E - f.E) / f.E;
    const double l1 = vpl::dist_to_orbit(state.w, ref256->w.w, 1.0, 256) / f.mass;
    const bool pass = l1 < 0.05 && mass_drift < 5e-3 && j_drift < 5e-3 && e_drift < 5e-3 &&
                      secs <= 900.0;
    report(11, pass,
           fmt("rigid rotation over one period at 256x512: min-angle L1/mass %.3f "
               "(< 0.05), drifts mass %.2e J %.2e E %.2e (< 5e-3), %.0f s (budget 900 s)",
               l1, mass_drift, j_drift, e_drift, secs));
  }

  if (wanted(12)) {
    vpl::DiskPoissonSolver<double> solver(ref256->w.w.grid());
    bool all_ok = true;
    std::string detail = "orbital stability, 5% L2 perturbation, 3 periods:";
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      vpl::PerturbationSpec spec;
      spec.kind = vpl::PerturbationSpec::Kind::amplitude_noise;
      spec.magnitude = 0.05;
      spec.p = 2.0;
      spec.seed = seed;
      auto res = vpl::stability_experiment(*ref256, spec, 3.0, solver, 0.5, 10.0, 200, 256);
      double peak = 0;
      for (const auto& r : res.rows) peak = std::max(peak, r.second);
      all_ok = all_ok && !res.exceeded;
      detail += fmt(" seed %llu: dist0=%.3f peak=%.3f %s;",
                    static_cast<unsigned long long>(seed), res.dist0, peak,
                    res.exceeded ? "EXCEEDED 10x" : "stayed below 10x");
    }
    report(12, all_ok, detail);
  }

  if (wanted(3)) criterion_3();

  int failed = 0;
  for (const auto& o : g_outcomes) failed += o.pass ? 0 : 1;
  std::printf("acceptance: %zu criteria run, %d failed\n", g_outcomes.size(), failed);
  return failed;
}

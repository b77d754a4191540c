#pragma once

// Direct time evolution of the vorticity transport equation in the disk:
// semi-Lagrangian advection with the stream-function velocity, a
// conserved-quantity ledger (mass, angular impulse J, kinetic energy E,
// L^p norms), distance to the rotation orbit of a reference patch, and
// seeded perturbation experiments for orbital stability.

#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vpl/maximizer.hpp"

namespace vpl {

template <typename Scalar = double>
struct LedgerRow {
  Scalar time, mass, J, E, lp15, lp2, lp4, dist_p;
};

template <typename Scalar = double>
struct EvolutionState {
  ScalarField<Scalar> w;
  Scalar time;
  std::vector<LedgerRow<Scalar>> ledger;
};

struct PerturbationSpec {
  enum class Kind { patch_shift, amplitude_noise, smooth_bump };
  Kind kind = Kind::amplitude_noise;
  double magnitude = 0.05;  // relative L2 size (shift length for patch_shift)
  double p = 2.0;           // norm for dist_p reporting
  std::uint64_t seed = 1;
};

/// Largest admissible time step: dt <= cfl_max * dr / max|u|, cfl_max = 1/2.
template <typename Scalar>
Scalar cfl_step(const PolarGrid<Scalar>& grid, Scalar speed, Scalar cfl) {
  if (!(cfl > Scalar(0) && cfl <= Scalar(0.5)))
    throw std::invalid_argument("cfl must lie in (0, 1/2]");
  if (speed <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return cfl * grid.dr() / speed;
}

/// One semi-Lagrangian step: trace characteristics backward with a
/// two-stage midpoint rule and resample the field at the foot points.
/// The trace runs in polar coordinates away from the axis (no trig in the
/// hot loop) and in Cartesian coordinates for the innermost rings where
/// the angular rate 1/r stiffens.  Foot points beyond r = 1 are radially
/// clamped (the flow is tangential there, overshoot is truncation-level).
template <typename Scalar>
ScalarField<Scalar> advect(const ScalarField<Scalar>& w, const VelocityField<Scalar>& vel,
                           Scalar dt) {
  const auto& g = *w.grid();
  const Eigen::Index n = g.n_r(), m = g.n_theta();
  ScalarField<Scalar> out(w.grid());
  const Scalar r_cart = Scalar(3) * g.dr();  // Cartesian fallback radius

  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar ri = g.r(i);
    const bool polar_path = ri >= r_cart;
    for (Eigen::Index j = 0; j < m; ++j) {
      const Scalar ur0 = vel.u_r(i, j);
      const Scalar ut0 = vel.u_theta(i, j);
      Scalar rf, tf;
      if (polar_path) {
        const Scalar rm = ri - dt / 2 * ur0;
        const Scalar tm = g.theta(j) - dt / 2 * ut0 / ri;
        const Scalar rm_safe = std::max(rm, g.dr() / 16);
        const Scalar ur1 = sample_rt(vel.u_r, rm_safe, tm);
        const Scalar ut1 = sample_rt(vel.u_theta, rm_safe, tm);
        rf = ri - dt * ur1;
        tf = g.theta(j) - dt * ut1 / rm_safe;
      } else {
        const Scalar c = g.cos_theta(j), s = g.sin_theta(j);
        const Scalar x = ri * c, y = ri * s;
        Scalar ux = ur0 * c - ut0 * s;
        Scalar uy = ur0 * s + ut0 * c;
        const Scalar xm = x - dt / 2 * ux, ym = y - dt / 2 * uy;
        const Scalar rm = std::hypot(xm, ym);
        if (rm > Scalar(1e-14)) {
          const Scalar tm = std::atan2(ym, xm);
          const Scalar ur1 = sample_rt(vel.u_r, rm, tm);
          const Scalar ut1 = sample_rt(vel.u_theta, rm, tm);
          const Scalar cm = xm / rm, sm = ym / rm;
          ux = ur1 * cm - ut1 * sm;
          uy = ur1 * sm + ut1 * cm;
        }
        const Scalar xf = x - dt * ux, yf = y - dt * uy;
        rf = std::hypot(xf, yf);
        tf = rf > Scalar(0) ? std::atan2(yf, xf) : Scalar(0);
      }
      if (rf > Scalar(1)) rf = Scalar(1);
      out(i, j) = sample_rt(w, rf, tf);
    }
  }
  return out;
}

template <typename Scalar>
EvolutionState<Scalar> step(const EvolutionState<Scalar>& state, Scalar dt,
                            const DiskPoissonSolver<Scalar>& solver) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("step: dt must be positive");
  auto sf = solver.solve(state.w);
  auto vel = velocity(sf);
  const Scalar bound = cfl_step(*state.w.grid(), max_speed(vel), Scalar(0.5));
  if (dt > bound * (Scalar(1) + Scalar(1e-9)))
    throw std::invalid_argument("step: dt violates the CFL bound dr/(2 max|u|)");
  EvolutionState<Scalar> next{advect(state.w, vel, dt), state.time + dt, state.ledger};
  return next;
}

template <typename Scalar>
Scalar kinetic_energy(const ScalarField<Scalar>& w, const ScalarField<Scalar>& psi) {
  const auto& g = *w.grid();
  Scalar e = 0;
  for (Eigen::Index i = 0; i < g.n_r(); ++i)
    e += g.ring_cell_area(i) * (psi.values().row(i) * w.values().row(i)).sum();
  return e / Scalar(2);
}

/// Minimum L^p distance to the rotation orbit of a reference vorticity,
/// over n_angles equispaced rotations.  When n_angles divides the angular
/// resolution the rotations are exact index shifts.
template <typename Scalar>
Scalar dist_to_orbit(const ScalarField<Scalar>& w, const ScalarField<Scalar>& reference,
                     Scalar p, int n_angles) {
  if (!(p >= Scalar(1))) throw std::invalid_argument("dist_to_orbit: need p >= 1");
  if (n_angles < 8) throw std::invalid_argument("dist_to_orbit: need n_angles >= 8");
  require_same_grid(w, reference);
  const auto& g = *w.grid();
  const Eigen::Index n = g.n_r(), m = g.n_theta();
  Scalar best = std::numeric_limits<Scalar>::max();
  const bool lattice = (m % n_angles) == 0;
  for (int k = 0; k < n_angles; ++k) {
    Scalar acc = 0;
    if (lattice) {
      const Eigen::Index s = Eigen::Index(k) * (m / n_angles);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar a = g.ring_cell_area(i);
        Scalar row = 0;
        for (Eigen::Index j = 0; j < m; ++j) {
          const Scalar d = w(i, j) - reference(i, (j - s + m) % m);
          if (p == Scalar(1))
            row += std::abs(d);
          else if (p == Scalar(2))
            row += d * d;
          else
            row += std::pow(std::abs(d), p);
        }
        acc += a * row;
      }
    } else {
      auto rot = rotate_field(reference, Scalar(2) * pi_v<Scalar> * k / n_angles);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar a = g.ring_cell_area(i);
        Scalar row = 0;
        for (Eigen::Index j = 0; j < m; ++j) {
          const Scalar d = w(i, j) - rot(i, j);
          if (p == Scalar(1))
            row += std::abs(d);
          else if (p == Scalar(2))
            row += d * d;
          else
            row += std::pow(std::abs(d), p);
        }
        acc += a * row;
      }
    }
    best = std::min(best, acc);
  }
  return std::pow(best, Scalar(1) / p);
}

template <typename Scalar = double>
struct EvolveOptions {
  int sample_every = 50;                       // ledger cadence in steps
  const ScalarField<Scalar>* dist_reference = nullptr;
  Scalar dist_p = Scalar(2);
  int dist_angles = 256;
  std::string dump_path;                       // diagnostic dump on blow-up
  std::function<void(const EvolutionState<Scalar>&)> on_sample;
};

namespace detail {
template <typename Scalar>
LedgerRow<Scalar> make_ledger_row(const ScalarField<Scalar>& w, const ScalarField<Scalar>& psi,
                                  Scalar t, const EvolveOptions<Scalar>& opt) {
  LedgerRow<Scalar> row;
  row.time = t;
  row.mass = integrate(w);
  row.J = second_moment(w);
  row.E = kinetic_energy(w, psi);
  row.lp15 = lp_norm(w, Scalar(1.5));
  row.lp2 = lp_norm(w, Scalar(2));
  row.lp4 = lp_norm(w, Scalar(4));
  row.dist_p = opt.dist_reference
                   ? dist_to_orbit(w, *opt.dist_reference, opt.dist_p, opt.dist_angles)
                   : Scalar(0);
  return row;
}

template <typename Scalar>
void check_finite_or_dump(const LedgerRow<Scalar>& row, const ScalarField<Scalar>& w,
                          const std::string& dump_path) {
  const bool ok = std::isfinite(row.mass) && std::isfinite(row.J) && std::isfinite(row.E);
  if (ok) return;
  if (!dump_path.empty()) {
    std::ofstream os(dump_path);
    if (os) write_field(os, w);
  }
  throw std::runtime_error("evolve: non-finite field (diagnostic dump written)");
}
}  // namespace detail

/// Evolve by repeated semi-Lagrangian steps with dt = cfl dr / max|u|,
/// appending ledger rows at a fixed step cadence (and at both endpoints).
template <typename Scalar>
EvolutionState<Scalar> evolve(const ScalarField<Scalar>& w0, Scalar t_final, Scalar cfl,
                              const DiskPoissonSolver<Scalar>& solver,
                              const EvolveOptions<Scalar>& opt = {}) {
  if (!(t_final > Scalar(0))) throw std::invalid_argument("evolve: t_final must be positive");
  EvolutionState<Scalar> state{w0, Scalar(0), {}};
  long step_index = 0;
  while (state.time < t_final) {
    auto sf = solver.solve(state.w);
    auto vel = velocity(sf);
    if (step_index % opt.sample_every == 0) {
      state.ledger.push_back(detail::make_ledger_row(state.w, sf.psi, state.time, opt));
      detail::check_finite_or_dump(state.ledger.back(), state.w, opt.dump_path);
      if (opt.on_sample) opt.on_sample(state);
    }
    Scalar dt = cfl_step(*state.w.grid(), max_speed(vel), cfl);
    dt = std::min(dt, t_final - state.time);
    if (!(dt > Scalar(0))) break;
    state.w = advect(state.w, vel, dt);
    state.time += dt;
    ++step_index;
  }
  auto sf = solver.solve(state.w);
  state.ledger.push_back(detail::make_ledger_row(state.w, sf.psi, state.time, opt));
  detail::check_finite_or_dump(state.ledger.back(), state.w, opt.dump_path);
  return state;
}

/// Clip to [0, lambda] and rescale (with re-clipping) until the mass is 1;
/// the scale is found by bisection, so the projection is deterministic.
template <typename Scalar>
AdmissibleVorticity<Scalar> project_to_class(const ScalarField<Scalar>& w, Scalar lambda) {
  auto clipped_mass = [&](Scalar c) {
    Scalar mass = 0;
    const auto& g = *w.grid();
    for (Eigen::Index i = 0; i < g.n_r(); ++i) {
      const Scalar a = g.ring_cell_area(i);
      for (Eigen::Index j = 0; j < g.n_theta(); ++j)
        mass += a * std::clamp(c * w(i, j), Scalar(0), lambda);
    }
    return mass;
  };
  Scalar lo = 0, hi = 1;
  while (clipped_mass(hi) < Scalar(1)) {
    hi *= 2;
    if (hi > Scalar(1e12))
      throw std::domain_error("project_to_class: cannot reach unit mass");
  }
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = (lo + hi) / 2;
    (clipped_mass(mid) < Scalar(1) ? lo : hi) = mid;
  }
  const Scalar c = (lo + hi) / 2;
  ScalarField<Scalar> out(w.grid());
  for (Eigen::Index i = 0; i < w.grid()->n_r(); ++i)
    for (Eigen::Index j = 0; j < w.grid()->n_theta(); ++j)
      out(i, j) = std::clamp(c * w(i, j), Scalar(0), lambda);
  return {std::move(out), lambda};
}

/// Seeded perturbation of a reference patch, projected back into the
/// admissible class.
template <typename Scalar>
AdmissibleVorticity<Scalar> perturb(const PatchState<Scalar>& reference,
                                    const PerturbationSpec& spec) {
  const auto& w = reference.w.w;
  const auto grid = w.grid();
  const Scalar lambda = reference.w.lambda;
  SplitMix64 rng(spec.seed);
  ScalarField<Scalar> pert(grid);

  switch (spec.kind) {
    case PerturbationSpec::Kind::patch_shift: {
      const Scalar ang = Scalar(rng.uniform(0.0, 2.0 * pi_v<double>));
      const Vec2<Scalar> delta(Scalar(spec.magnitude) * std::cos(ang),
                               Scalar(spec.magnitude) * std::sin(ang));
      for (Eigen::Index i = 0; i < grid->n_r(); ++i)
        for (Eigen::Index j = 0; j < grid->n_theta(); ++j) {
          const Vec2<Scalar> x(grid->r(i) * grid->cos_theta(j),
                               grid->r(i) * grid->sin_theta(j));
          pert(i, j) = sample(w, Vec2<Scalar>(x - delta));
        }
      break;
    }
    case PerturbationSpec::Kind::amplitude_noise: {
      ScalarField<Scalar> noise(grid);
      for (Eigen::Index i = 0; i < grid->n_r(); ++i)
        for (Eigen::Index j = 0; j < grid->n_theta(); ++j)
          noise(i, j) = w(i, j) * Scalar(rng.uniform(-1.0, 1.0));
      const Scalar target = Scalar(spec.magnitude) * lp_norm(w, Scalar(2));
      const Scalar nn = lp_norm(noise, Scalar(2));
      const Scalar scale = nn > Scalar(0) ? target / nn : Scalar(0);
      pert.values() = w.values() + scale * noise.values();
      break;
    }
    case PerturbationSpec::Kind::smooth_bump: {
      const Vec2<Scalar> center = moment_center(w);
      const Scalar eps = Scalar(1) / std::sqrt(pi_v<Scalar> * lambda);
      const Scalar ang = Scalar(rng.uniform(0.0, 2.0 * pi_v<double>));
      const Vec2<Scalar> c = center + Scalar(2) * eps * Vec2<Scalar>(std::cos(ang), std::sin(ang));
      ScalarField<Scalar> bump = make_field<Scalar>(grid, [&](Scalar r, Scalar t) {
        const Vec2<Scalar> x(r * std::cos(t), r * std::sin(t));
        return std::exp(-(x - c).squaredNorm() / (eps * eps));
      });
      const Scalar target = Scalar(spec.magnitude) * lp_norm(w, Scalar(2));
      const Scalar bn = lp_norm(bump, Scalar(2));
      pert.values() = w.values() + (target / bn) * bump.values();
      break;
    }
  }
  return project_to_class(pert, lambda);
}

template <typename Scalar = double>
struct StabilityResult {
  std::vector<std::pair<Scalar, Scalar>> rows;  // (time, dist_p)
  Scalar dist0;
  bool exceeded;  // dist exceeded abort_factor * dist0 (when abort_factor > 0)
};

/// Evolve a perturbed patch for n_periods rotation periods, logging the
/// orbit distance.  With abort_factor > 0 the run stops as soon as the
/// distance exceeds abort_factor * dist0 (the verdict of a stays-below
/// assertion is already determined at that point).
template <typename Scalar>
StabilityResult<Scalar> stability_experiment(const PatchState<Scalar>& reference,
                                             const PerturbationSpec& spec, Scalar n_periods,
                                             const DiskPoissonSolver<Scalar>& solver,
                                             Scalar cfl = Scalar(0.5),
                                             Scalar abort_factor = Scalar(0),
                                             int sample_every = 50, int dist_angles = 256) {
  const Scalar period = Scalar(2) * pi_v<Scalar> / reference.params.omega;
  const Scalar t_final = n_periods * period;
  auto start = perturb(reference, spec);

  StabilityResult<Scalar> result;
  result.exceeded = false;
  const Scalar p = Scalar(spec.p);
  result.dist0 = dist_to_orbit(start.w, reference.w.w, p, dist_angles);
  result.rows.emplace_back(Scalar(0), result.dist0);

  EvolutionState<Scalar> state{std::move(start.w), Scalar(0), {}};
  long step_index = 0;
  while (state.time < t_final) {
    auto sf = solver.solve(state.w);
    auto vel = velocity(sf);
    Scalar dt = cfl_step(*state.w.grid(), max_speed(vel), cfl);
    dt = std::min(dt, t_final - state.time);
    if (!(dt > Scalar(0))) break;
    state.w = advect(state.w, vel, dt);
    state.time += dt;
    ++step_index;
    if (step_index % sample_every == 0 || state.time >= t_final) {
      const Scalar d = dist_to_orbit(state.w, reference.w.w, p, dist_angles);
      result.rows.emplace_back(state.time, d);
      if (abort_factor > Scalar(0) && d > abort_factor * result.dist0) {
        result.exceeded = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace vpl

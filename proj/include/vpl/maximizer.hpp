#pragma once

// Constrained maximization of the augmented kinetic energy
//     E(w) = 1/2 int G w . w + (Omega/2) int |x|^2 w
// over the class K_lambda = { 0 <= w <= lambda, int w = 1 } by the
// threshold ("bathtub") fixed-point iteration: compute the augmented
// potential Phi = G w + (Omega/2)|x|^2, then refill the mass budget into
// the highest superlevel set of Phi.  The refill below is the *exact*
// discrete bathtub (ties filled uniformly, one fractionally filled value
// group), so each step maximizes the linear functional int Phi w over the
// discrete class exactly and the energy increment
//     E(w') - E(w) = [Q(w') - Q(w)] + E0(w' - w)
// is a sum of two nonnegative terms (E0 is the positive-definite
// interaction form).  Energy monotonicity is therefore certified at
// rounding level, and any decrease beyond 1e-12 is a solver bug.

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "vpl/poisson.hpp"

namespace vpl {

template <typename Scalar = double>
struct AdmissibleVorticity {
  ScalarField<Scalar> w;
  Scalar lambda;
};

template <typename Scalar = double>
struct AugmentedPotential {
  ScalarField<Scalar> phi;
};

template <typename Scalar>
void validate_admissible(const AdmissibleVorticity<Scalar>& av,
                         Scalar bound_tol = Scalar(1e-12),
                         Scalar mass_tol = Scalar(1e-10)) {
  const Scalar lo = av.w.values().minCoeff();
  const Scalar hi = av.w.values().maxCoeff();
  if (lo < -bound_tol * std::max(Scalar(1), av.lambda) ||
      hi > av.lambda * (Scalar(1) + bound_tol))
    throw std::logic_error("vorticity violates 0 <= w <= lambda");
  const Scalar mass = integrate(av.w);
  if (std::abs(mass - Scalar(1)) > mass_tol)
    throw std::logic_error("vorticity mass differs from 1");
}

template <typename Scalar = double>
struct IterationRow {
  int iteration;
  Scalar energy;
  Scalar mu;
  Scalar patch_mass;       // mass carried by cells pinned at w = lambda
  Scalar symmetric_diff;   // L1 distance between consecutive iterates
};

template <typename Scalar = double>
struct PatchState {
  AdmissibleVorticity<Scalar> w;
  Scalar mu;
  Scalar energy;
  int iterations;
  Scalar fractional_mass;  // mass in cells with 0 < w < lambda
  bool converged;
  RotationParams<Scalar> params;
  std::vector<IterationRow<Scalar>> history;
};

/// E(w) given a precomputed stream function for w.
template <typename Scalar>
Scalar energy_given_psi(const ScalarField<Scalar>& w, const ScalarField<Scalar>& psi,
                        Scalar omega) {
  const auto& g = *w.grid();
  Scalar interaction = 0, impulse = 0;
  for (Eigen::Index i = 0; i < g.n_r(); ++i) {
    const Scalar a = g.ring_cell_area(i);
    interaction += a * (psi.values().row(i) * w.values().row(i)).sum();
    impulse += a * g.r(i) * g.r(i) * w.values().row(i).sum();
  }
  return interaction / Scalar(2) + omega / Scalar(2) * impulse;
}

template <typename Scalar>
Scalar energy(const AdmissibleVorticity<Scalar>& av, Scalar omega,
              const DiskPoissonSolver<Scalar>& solver) {
  return energy_given_psi(av.w, solver.solve(av.w).psi, omega);
}

template <typename Scalar>
Scalar energy(const AdmissibleVorticity<Scalar>& av, Scalar omega) {
  return energy(av, omega, DiskPoissonSolver<Scalar>(av.w.grid()));
}

/// Phi = G w + (omega/2) |x|^2.
template <typename Scalar>
AugmentedPotential<Scalar> augmented_potential(const AdmissibleVorticity<Scalar>& av,
                                               Scalar omega,
                                               const DiskPoissonSolver<Scalar>& solver) {
  auto sf = solver.solve(av.w);
  ScalarField<Scalar> phi = std::move(sf.psi);
  const auto& g = *phi.grid();
  for (Eigen::Index i = 0; i < g.n_r(); ++i)
    phi.values().row(i) += omega / Scalar(2) * g.r(i) * g.r(i);
  return {std::move(phi)};
}

template <typename Scalar>
AugmentedPotential<Scalar> augmented_potential(const AdmissibleVorticity<Scalar>& av,
                                               Scalar omega) {
  return augmented_potential(av, omega, DiskPoissonSolver<Scalar>(av.w.grid()));
}

/// Exact discrete bathtub step: fill mass 1 into the highest values of phi
/// subject to 0 <= w <= lambda.  Cells are ranked by phi; equal-phi groups
/// are filled uniformly, and the single marginal group is filled
/// fractionally so the unit-mass constraint holds to rounding.  Returns the
/// multiplier mu = sup of phi over { w < lambda } (min of phi if the class
/// forces w == lambda everywhere) and the refilled vorticity.
template <typename Scalar>
std::pair<Scalar, AdmissibleVorticity<Scalar>> threshold(const ScalarField<Scalar>& phi,
                                                         Scalar lambda) {
  const auto& g = *phi.grid();
  const Eigen::Index n = g.n_r(), m = g.n_theta();
  const Eigen::Index total = n * m;
  const Scalar* pv = phi.values().data();

  long double disk_area = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    disk_area += (long double)g.ring_cell_area(i) * m;
  if ((long double)lambda * disk_area < 1.0L - 1e-9L)
    throw std::logic_error("threshold: lambda too small, unit mass unreachable");

  ScalarField<Scalar> w(phi.grid());
  const Scalar vmin = phi.values().minCoeff();
  const Scalar vmax = phi.values().maxCoeff();

  if (!(vmax > vmin)) {  // constant plateau: uniform fill
    const Scalar value = std::min(lambda, Scalar(1.0L / disk_area));
    w.values().setConstant(value);
    return {vmax, AdmissibleVorticity<Scalar>{std::move(w), lambda}};
  }

  // One histogram pass narrows the waterline to a single bucket; only that
  // bucket is sorted exactly.
  constexpr int kBuckets = 2048;
  const Scalar scale = Scalar(kBuckets) / (vmax - vmin);
  auto bucket_of = [&](Scalar v) {
    int b = static_cast<int>((v - vmin) * scale);
    return std::clamp(b, 0, kBuckets - 1);
  };
  std::vector<long double> bucket_area(kBuckets, 0.0L);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long double a = g.ring_cell_area(i);
    const Scalar* row = pv + i * m;
    for (Eigen::Index j = 0; j < m; ++j) bucket_area[bucket_of(row[j])] += a;
  }

  long double remaining = 1.0L;
  int b = kBuckets - 1;
  for (; b >= 0; --b) {
    const long double bucket_mass = (long double)lambda * bucket_area[b];
    if (bucket_mass < remaining) {
      remaining -= bucket_mass;  // whole bucket pinned at lambda
      continue;
    }
    break;  // waterline lives in bucket b
  }

  // Assign full cells (buckets above b); collect the waterline bucket.
  struct Cell {
    Scalar value;
    Scalar area;
    Eigen::Index flat;
  };
  std::vector<Cell> marginal;
  Scalar* wv = w.values().data();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = g.ring_cell_area(i);
    const Scalar* row = pv + i * m;
    for (Eigen::Index j = 0; j < m; ++j) {
      const int bj = bucket_of(row[j]);
      if (bj > b)
        wv[i * m + j] = lambda;
      else if (bj == b)
        marginal.push_back({row[j], a, i * m + j});
    }
  }

  if (b < 0) {
    // Everything fits below the budget: the class pins w = lambda a.e.
    // (lambda * |D| == 1 within rounding).
    w.values().setConstant(lambda);
    return {vmin, AdmissibleVorticity<Scalar>{std::move(w), lambda}};
  }

  std::sort(marginal.begin(), marginal.end(), [](const Cell& a, const Cell& c) {
    return a.value > c.value || (a.value == c.value && a.flat < c.flat);
  });

  Scalar mu = vmin;
  bool mu_set = false;
  std::size_t k = 0;
  while (k < marginal.size() && remaining > 0.0L) {
    std::size_t e = k;
    long double group_area = 0;
    while (e < marginal.size() && marginal[e].value == marginal[k].value) {
      group_area += marginal[e].area;
      ++e;
    }
    const long double group_mass = (long double)lambda * group_area;
    if (group_mass <= remaining) {
      for (std::size_t q = k; q < e; ++q) wv[marginal[q].flat] = lambda;
      remaining -= group_mass;
    } else {
      const Scalar fill = static_cast<Scalar>(remaining / group_area);
      for (std::size_t q = k; q < e; ++q) wv[marginal[q].flat] = fill;
      remaining = 0.0L;
      mu = marginal[k].value;  // marginal cells are not at the cap
      mu_set = true;
    }
    k = e;
  }

  if (remaining > 1e-12L)
    throw std::logic_error("threshold: failed to place unit mass");

  if (!mu_set) {
    // Fill ended exactly at a group boundary: mu is the highest phi value
    // among cells left strictly below the cap.
    if (k < marginal.size())
      mu = marginal[k].value;
    else {
      mu = vmin;  // waterline bucket fully consumed; scan below it
      bool found = false;
      for (Eigen::Index t = 0; t < total; ++t)
        if (wv[t] < lambda && (!found || pv[t] > mu)) {
          mu = pv[t];
          found = true;
        }
      if (!found) mu = vmin;
    }
  }
  return {mu, AdmissibleVorticity<Scalar>{std::move(w), lambda}};
}

template <typename Scalar>
Scalar fractional_mass_of(const AdmissibleVorticity<Scalar>& av) {
  const auto& g = *av.w.grid();
  const Scalar lo = av.lambda * Scalar(1e-14);
  const Scalar hi = av.lambda * (Scalar(1) - Scalar(1e-14));
  Scalar total = 0;
  for (Eigen::Index i = 0; i < g.n_r(); ++i) {
    const Scalar a = g.ring_cell_area(i);
    for (Eigen::Index j = 0; j < g.n_theta(); ++j) {
      const Scalar v = av.w(i, j);
      if (v > lo && v < hi) total += a * v;
    }
  }
  return total;
}

/// Vortex-patch initial guess: the bathtub fill of mass 1 around `center`
/// (potential = -|x - center|^2), i.e. a lambda-indicator of the disk of
/// area 1/lambda, with exact discrete mass.
template <typename Scalar>
AdmissibleVorticity<Scalar> disk_patch(std::shared_ptr<const PolarGrid<Scalar>> grid,
                                       Scalar lambda, const Vec2<Scalar>& center) {
  auto dist = make_field<Scalar>(grid, [&](Scalar r, Scalar t) {
    const Vec2<Scalar> x(r * std::cos(t), r * std::sin(t));
    return -(x - center).squaredNorm();
  });
  return threshold(dist, lambda).second;
}

/// Seeded random off-center start, for probing the basin structure.
template <typename Scalar>
AdmissibleVorticity<Scalar> random_disk_patch(std::shared_ptr<const PolarGrid<Scalar>> grid,
                                              Scalar lambda, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Scalar r = Scalar(0.85) * std::sqrt(Scalar(rng.uniform()));
  const Scalar t = Scalar(rng.uniform(0.0, 2.0 * pi_v<double>));
  return disk_patch(grid, lambda, Vec2<Scalar>(r * std::cos(t), r * std::sin(t)));
}

/// Threshold fixed-point iteration with monotone-energy certification.
/// Stops when the relative energy increment and the L1 distance between
/// consecutive iterates both fall below tol; returns the best state flagged
/// non-converged if max_iter is exhausted.  An energy decrease beyond 1e-12
/// absolute throws (it contradicts the discrete ascent property).
template <typename Scalar>
PatchState<Scalar> solve_patch(const RotationParams<Scalar>& params,
                               const AdmissibleVorticity<Scalar>& init, Scalar tol = 1e-10,
                               int max_iter = 500) {
  if (init.lambda != params.lambda)
    throw std::logic_error("solve_patch: init.lambda != params.lambda");
  validate_admissible(init);
  DiskPoissonSolver<Scalar> solver(init.w.grid());
  const auto& g = *init.w.grid();

  AdmissibleVorticity<Scalar> w = init;
  ScalarField<Scalar> psi = solver.solve(w.w).psi;
  Scalar e_prev = energy_given_psi(w.w, psi, params.omega);
  Scalar mu = 0;
  std::vector<IterationRow<Scalar>> history;
  bool converged = false;
  int it = 0;

  for (it = 1; it <= max_iter; ++it) {
    ScalarField<Scalar> phi(w.w.grid());
    phi.values() = psi.values();
    for (Eigen::Index i = 0; i < g.n_r(); ++i)
      phi.values().row(i) += params.omega / Scalar(2) * g.r(i) * g.r(i);

    auto [mu_next, w_next] = threshold(phi, params.lambda);
    ScalarField<Scalar> psi_next = solver.solve(w_next.w).psi;
    const Scalar e_next = energy_given_psi(w_next.w, psi_next, params.omega);

    if (e_next < e_prev - Scalar(1e-12))
      throw std::runtime_error("solve_patch: energy decreased; monotone ascent violated");

    Scalar sym_diff = 0, patch_mass = 0;
    for (Eigen::Index i = 0; i < g.n_r(); ++i) {
      const Scalar a = g.ring_cell_area(i);
      sym_diff += a * (w_next.w.values().row(i) - w.w.values().row(i)).abs().sum();
      for (Eigen::Index j = 0; j < g.n_theta(); ++j)
        if (w_next.w(i, j) == params.lambda) patch_mass += a * params.lambda;
    }
    history.push_back({it, e_next, mu_next, patch_mass, sym_diff});

    const bool energy_flat = (e_next - e_prev) < tol * std::abs(e_prev);
    w = std::move(w_next);
    psi = std::move(psi_next);
    mu = mu_next;
    e_prev = e_next;
    if (energy_flat && sym_diff < tol) {
      converged = true;
      break;
    }
  }

  PatchState<Scalar> state{std::move(w), mu,        e_prev, std::min(it, max_iter),
                           Scalar(0),   converged, params, std::move(history)};
  state.fractional_mass = fractional_mass_of(state.w);
  return state;
}

/// Discrete certificate that the state solves the rotating weak equation:
/// max over a family of compactly supported tensor-product bumps phi_c of
///     | int w grad(Phi) . grad_perp(phi_c) |.
template <typename Scalar>
Scalar residual_weak_form(const PatchState<Scalar>& state, int test_count) {
  DiskPoissonSolver<Scalar> solver(state.w.w.grid());
  auto pot = augmented_potential(state.w, state.params.omega, solver);
  auto [dr, dt] = gradient(pot.phi);
  const auto& g = *state.w.w.grid();

  // Cartesian gradient of Phi, weighted by w * area, at support cells.
  struct Pt {
    Scalar x, y, gx, gy, wa;
  };
  std::vector<Pt> pts;
  for (Eigen::Index i = 0; i < g.n_r(); ++i) {
    const Scalar a = g.ring_cell_area(i);
    for (Eigen::Index j = 0; j < g.n_theta(); ++j) {
      const Scalar wv = state.w.w(i, j);
      if (wv == Scalar(0)) continue;
      const Scalar c = g.cos_theta(j), s = g.sin_theta(j);
      pts.push_back({g.r(i) * c, g.r(i) * s, dr(i, j) * c - dt(i, j) * s,
                     dr(i, j) * s + dt(i, j) * c, wv * a});
    }
  }

  const auto bump = [](Scalar t) {
    const Scalar q = Scalar(1) - t * t;
    return q > Scalar(0) ? std::exp(-Scalar(1) / q) : Scalar(0);
  };
  const auto bump_deriv = [&](Scalar t) {
    const Scalar q = Scalar(1) - t * t;
    return q > Scalar(0) ? bump(t) * (Scalar(-2) * t / (q * q)) : Scalar(0);
  };

  const Scalar spacing = Scalar(2) / Scalar(test_count + 1);
  const Scalar s = spacing;  // half-width of each bump factor
  Scalar worst = 0;
  for (int a = 1; a <= test_count; ++a)
    for (int c = 1; c <= test_count; ++c) {
      const Scalar cx = Scalar(-1) + spacing * a;
      const Scalar cy = Scalar(-1) + spacing * c;
      if (std::hypot(std::abs(cx) + s, std::abs(cy) + s) >= Scalar(1)) continue;
      Scalar acc = 0;
      for (const auto& p : pts) {
        const Scalar tx = (p.x - cx) / s, ty = (p.y - cy) / s;
        if (std::abs(tx) >= Scalar(1) || std::abs(ty) >= Scalar(1)) continue;
        const Scalar phix = bump_deriv(tx) / s * bump(ty);
        const Scalar phiy = bump(tx) * bump_deriv(ty) / s;
        // grad_perp(phi) = (phi_y, -phi_x)
        acc += p.wa * (p.gx * phiy - p.gy * phix);
      }
      worst = std::max(worst, std::abs(acc));
    }
  return worst;
}

/// Kinetic energy of the vortex core, T = 1/2 int |grad (Phi - mu)_+|^2.
/// Evaluated through the bulk identity
///     int |grad psi_+|^2 = int (w - 2 omega) psi_+
/// (integrate by parts on { psi > 0 }, where psi vanishes on the free
/// boundary and -Laplace(Phi) = w - 2 omega).  Differentiating the clipped
/// field numerically instead loses ~10% to kink smearing at any affordable
/// resolution, because the integrand concentrates at the free boundary.
template <typename Scalar>
Scalar kinetic_core_energy(const AdmissibleVorticity<Scalar>& av, Scalar omega, Scalar mu,
                           const DiskPoissonSolver<Scalar>& solver) {
  auto pot = augmented_potential(av, omega, solver);
  const auto& g = *av.w.grid();
  Scalar total = 0;
  for (Eigen::Index i = 0; i < g.n_r(); ++i) {
    const Scalar a = g.ring_cell_area(i);
    for (Eigen::Index j = 0; j < g.n_theta(); ++j) {
      const Scalar psi_plus = pot.phi(i, j) - mu;
      if (psi_plus > Scalar(0))
        total += a * (av.w(i, j) - Scalar(2) * omega) * psi_plus;
    }
  }
  return total / Scalar(2);
}

template <typename Scalar>
Scalar kinetic_core_energy(const PatchState<Scalar>& state) {
  DiskPoissonSolver<Scalar> solver(state.w.w.grid());
  return kinetic_core_energy(state.w, state.params.omega, state.mu, solver);
}

}  // namespace vpl

#pragma once

// Dirichlet Poisson solves on the disk, -Laplace(psi) = w with psi = 0 on
// the boundary.  Two routes: a fast spectral-in-angle solver (DFT in theta,
// second-order tridiagonal solve per mode in r) and a slow direct
// Green's-function quadrature used as an independent oracle.  The velocity
// field is the perpendicular gradient of the stream function.

#include <vector>

#include "vpl/fft.hpp"
#include "vpl/geometry.hpp"
#include "vpl/grid.hpp"

namespace vpl {

template <typename Scalar = double>
struct StreamFunction {
  ScalarField<Scalar> psi;
  Scalar source_mass;
};

template <typename Scalar = double>
struct VelocityField {
  ScalarField<Scalar> u_r;
  ScalarField<Scalar> u_theta;
};

/// Spectral-in-angle solver.  Per angular mode m the radial two-point
/// boundary-value problem
///     -(psi'' + psi'/r - m^2 psi / r^2) = w_m,  psi_m(1) = 0
/// is discretized in conservation form on the cell-centered radial grid and
/// solved by Thomas elimination.  The inner face at r = 0 carries zero flux
/// (regularity); the outer face uses a ghost value that is exact for
/// quadratics vanishing at r = 1, keeping the scheme second order up to the
/// boundary while the matrix stays symmetrizable positive definite (which
/// is what makes the discrete interaction energy a nonnegative quadratic
/// form; the maximizer's monotonicity certificate relies on it).
template <typename Scalar = double>
class DiskPoissonSolver {
 public:
  using Grid = PolarGrid<Scalar>;
  using Cplx = std::complex<Scalar>;

  explicit DiskPoissonSolver(std::shared_ptr<const Grid> grid)
      : grid_(std::move(grid)), dft_(grid_->n_theta()) {
    const Eigen::Index n = grid_->n_r();
    const Scalar h = grid_->dr();
    lower_.resize(n);
    upper_.resize(n);
    diag0_.resize(n);
    inv_r2_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar ri = grid_->r(i);
      const Scalar r_in = Scalar(i) * h;        // inner face radius
      const Scalar r_out = Scalar(i + 1) * h;   // outer face radius
      lower_[i] = -r_in / (ri * h * h);
      upper_[i] = -r_out / (ri * h * h);
      diag0_[i] = (r_in + r_out) / (ri * h * h);
      inv_r2_[i] = Scalar(1) / (ri * ri);
    }
    // Outer boundary closure: ghost g with g (1 + h/4) = -psi_a (1 - h/4)
    //                                       - h^2 w_b / 4,
    // exact for quadratic psi with psi(1) = 0.  Folding g into the flux at
    // r = 1 modifies only the last diagonal entry plus a RHS correction
    // proportional to the boundary-cell source.
    const Scalar rn = grid_->r(n - 1);
    const Scalar denom = Scalar(1) + h / Scalar(4);
    diag0_[n - 1] = (Scalar(n - 1) * h) / (rn * h * h)  // inner face of last cell
                    + Scalar(2) / (rn * h * h * denom);
    upper_[n - 1] = Scalar(0);
    rhs_boundary_coeff_ = -Scalar(1) / (Scalar(4) * rn * denom);
  }

  const std::shared_ptr<const Grid>& grid() const { return grid_; }

  StreamFunction<Scalar> solve(const ScalarField<Scalar>& w) const {
    if (w.grid()->n_r() != grid_->n_r() || w.grid()->n_theta() != grid_->n_theta())
      throw std::logic_error("DiskPoissonSolver: field grid does not match solver grid");
    if (!w.values().isFinite().all())
      throw std::logic_error("DiskPoissonSolver: non-finite source");
    const Eigen::Index n = grid_->n_r();
    const Eigen::Index m_cnt = dft_.spectrum_size();

    // Forward DFT ring by ring; spec(i, m).
    Eigen::Array<Cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spec(n, m_cnt);
    {
      std::vector<Cplx> scratch;
      for (Eigen::Index i = 0; i < n; ++i)
        dft_.forward_real(w.values().row(i).data(), spec.row(i).data(), scratch);
    }

    // Per-mode tridiagonal solve (Thomas; coefficients are real, RHS complex).
    std::vector<Scalar> diag(n), cp(n);
    std::vector<Cplx> rhs(n);
    for (Eigen::Index m = 0; m < m_cnt; ++m) {
      const Scalar m2 = Scalar(m) * Scalar(m);
      for (Eigen::Index i = 0; i < n; ++i) {
        diag[i] = diag0_[i] + m2 * inv_r2_[i];
        rhs[i] = spec(i, m);
      }
      rhs[n - 1] += rhs_boundary_coeff_ * spec(n - 1, m);
      // forward sweep
      cp[0] = upper_[0] / diag[0];
      rhs[0] /= diag[0];
      for (Eigen::Index i = 1; i < n; ++i) {
        const Scalar denom = diag[i] - lower_[i] * cp[i - 1];
        cp[i] = upper_[i] / denom;
        rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) / denom;
      }
      // back substitution
      for (Eigen::Index i = n - 2; i >= 0; --i) rhs[i] -= cp[i] * rhs[i + 1];
      for (Eigen::Index i = 0; i < n; ++i) spec(i, m) = rhs[i];
    }

    // Inverse DFT ring by ring.
    ScalarField<Scalar> psi(grid_);
    {
      std::vector<Cplx> scratch;
      for (Eigen::Index i = 0; i < n; ++i)
        dft_.inverse_real(spec.row(i).data(), psi.values().row(i).data(), scratch);
    }
    return {std::move(psi), integrate(w)};
  }

 private:
  std::shared_ptr<const Grid> grid_;
  ThetaDft<Scalar> dft_;
  std::vector<Scalar> lower_, upper_, diag0_, inv_r2_;
  Scalar rhs_boundary_coeff_;
};

/// One-shot convenience wrapper.
template <typename Scalar>
StreamFunction<Scalar> solve_fast(const ScalarField<Scalar>& w) {
  return DiskPoissonSolver<Scalar>(w.grid()).solve(w);
}

/// Direct Green's-function quadrature, psi(x_i) = sum_j G(x_i, y_j) w_j a_j.
/// O(N^2); meant for coarse grids as an oracle for solve_fast.  The
/// self-cell replaces G(x,x) a by the exact integral of the free-space log
/// kernel over an equal-area disk minus h(x,x) a.
template <typename Scalar>
StreamFunction<Scalar> solve_direct(const ScalarField<Scalar>& w) {
  const auto& g = *w.grid();
  const Eigen::Index n = g.n_r(), m = g.n_theta();
  const Eigen::Index total = n * m;
  const Scalar quarter_inv_pi = Scalar(1) / (Scalar(4) * pi_v<Scalar>);

  // Flattened source tables.
  std::vector<Scalar> xs(total), ys(total), wa(total), s2(total);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index k = i * m + j;
      xs[k] = g.r(i) * g.cos_theta(j);
      ys[k] = g.r(i) * g.sin_theta(j);
      wa[k] = w(i, j) * g.ring_cell_area(i);
      s2[k] = g.r(i) * g.r(i);
    }

  ScalarField<Scalar> psi(w.grid());
  Scalar* out = psi.values().data();
#pragma omp parallel for schedule(static)
  for (Eigen::Index kt = 0; kt < total; ++kt) {
    const Scalar x1 = xs[kt], x2 = ys[kt], rt2 = s2[kt];
    Scalar acc = 0;
    for (Eigen::Index ks = 0; ks < total; ++ks) {
      if (ks == kt) continue;
      const Scalar dx = x1 - xs[ks];
      const Scalar dy = x2 - ys[ks];
      const Scalar d2 = dx * dx + dy * dy;
      const Scalar q = rt2 * s2[ks] - Scalar(2) * (x1 * xs[ks] + x2 * ys[ks]) + Scalar(1);
      // G = -(1/4pi) ln(d^2 / q); one log per pair.
      acc -= std::log(d2 / q) * wa[ks];
    }
    acc *= quarter_inv_pi;
    // Self cell: exact log integral over the equal-area disk.
    const Eigen::Index i = kt / m;
    const Scalar a = g.ring_cell_area(i);
    const Scalar rho2 = a / pi_v<Scalar>;
    const Scalar self_log = a * quarter_inv_pi * (Scalar(1) - std::log(rho2));
    const Scalar h_self = -std::log(Scalar(1) - rt2) * Scalar(2) * quarter_inv_pi;
    acc += w.values().data()[kt] * (self_log - h_self * a);
    out[kt] = acc;
  }
  return {std::move(psi), integrate(w)};
}

/// Polar gradient (d/dr, (1/r) d/dtheta) by second-order centered
/// differences, one-sided at the radial boundaries.
template <typename Scalar>
std::pair<ScalarField<Scalar>, ScalarField<Scalar>> gradient(const ScalarField<Scalar>& f) {
  const auto& g = *f.grid();
  const Eigen::Index n = g.n_r(), m = g.n_theta();
  const Scalar h = g.dr();
  ScalarField<Scalar> fr(f.grid()), ft(f.grid());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar inv_r_2dt = Scalar(1) / (g.r(i) * Scalar(2) * g.dtheta());
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index jp = (j + 1) % m, jm = (j + m - 1) % m;
      ft(i, j) = (f(i, jp) - f(i, jm)) * inv_r_2dt;
      if (i == 0)
        fr(i, j) = (Scalar(-3) * f(0, j) + Scalar(4) * f(1, j) - f(2, j)) / (Scalar(2) * h);
      else if (i == n - 1)
        fr(i, j) = (Scalar(3) * f(n - 1, j) - Scalar(4) * f(n - 2, j) + f(n - 3, j)) /
                   (Scalar(2) * h);
      else
        fr(i, j) = (f(i + 1, j) - f(i - 1, j)) / (Scalar(2) * h);
    }
  }
  return {std::move(fr), std::move(ft)};
}

/// v = grad^perp(psi): u_r = (1/r) dpsi/dtheta, u_theta = -dpsi/dr.
template <typename Scalar>
VelocityField<Scalar> velocity(const StreamFunction<Scalar>& sf) {
  auto [fr, ft] = gradient(sf.psi);
  fr.values() = -fr.values();
  return {std::move(ft), std::move(fr)};
}

template <typename Scalar>
Scalar max_speed(const VelocityField<Scalar>& v) {
  const Scalar m2 = (v.u_r.values().square() + v.u_theta.values().square()).maxCoeff();
  return std::sqrt(m2);
}

}  // namespace vpl

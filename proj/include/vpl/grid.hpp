#pragma once

// Cell-centered polar discretization of the unit disk and scalar fields on
// it: quadrature, moments, bilinear sampling with a through-center rule,
// rigid rotation, and a bit-exact text dump format.

#include <charconv>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <utility>

#include "vpl/common.hpp"

namespace vpl {

template <typename Scalar>
using GridArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Cell-centered polar grid on the unit disk.  No node sits at r = 0 or
/// r = 1; radial node i lives at (i + 1/2) dr, angular node j at
/// (j + 1/2) dtheta.  Quadrature weight of cell (i,j) is r_i dr dtheta,
/// which integrates constants exactly (sum of areas == pi to rounding).
template <typename Scalar = double>
class PolarGrid {
 public:
  static std::shared_ptr<const PolarGrid> create(Eigen::Index n_r, Eigen::Index n_theta) {
    return std::shared_ptr<const PolarGrid>(new PolarGrid(n_r, n_theta));
  }

  Eigen::Index n_r() const { return n_r_; }
  Eigen::Index n_theta() const { return n_theta_; }
  Scalar dr() const { return dr_; }
  Scalar dtheta() const { return dtheta_; }
  Scalar r(Eigen::Index i) const { return r_[i]; }
  Scalar theta(Eigen::Index j) const { return theta_[j]; }
  Scalar cos_theta(Eigen::Index j) const { return cos_t_[j]; }
  Scalar sin_theta(Eigen::Index j) const { return sin_t_[j]; }
  /// Area of any cell in ring i.
  Scalar ring_cell_area(Eigen::Index i) const { return ring_area_[i]; }
  const Eigen::Array<Scalar, Eigen::Dynamic, 1>& radii() const { return r_; }
  const Eigen::Array<Scalar, Eigen::Dynamic, 1>& ring_cell_areas() const { return ring_area_; }

 private:
  PolarGrid(Eigen::Index n_r, Eigen::Index n_theta) : n_r_(n_r), n_theta_(n_theta) {
    if (n_r < 8) throw std::invalid_argument("PolarGrid: n_r must be >= 8");
    if (n_theta < 16 || n_theta % 2 != 0)
      throw std::invalid_argument("PolarGrid: n_theta must be even and >= 16");
    dr_ = Scalar(1) / Scalar(n_r);
    dtheta_ = Scalar(2) * pi_v<Scalar> / Scalar(n_theta);
    r_.resize(n_r);
    ring_area_.resize(n_r);
    for (Eigen::Index i = 0; i < n_r; ++i) {
      r_[i] = (Scalar(i) + Scalar(0.5)) * dr_;
      ring_area_[i] = r_[i] * dr_ * dtheta_;
    }
    theta_.resize(n_theta);
    cos_t_.resize(n_theta);
    sin_t_.resize(n_theta);
    for (Eigen::Index j = 0; j < n_theta; ++j) {
      theta_[j] = (Scalar(j) + Scalar(0.5)) * dtheta_;
      cos_t_[j] = std::cos(theta_[j]);
      sin_t_[j] = std::sin(theta_[j]);
    }
  }

  Eigen::Index n_r_, n_theta_;
  Scalar dr_, dtheta_;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> r_, theta_, cos_t_, sin_t_, ring_area_;
};

template <typename Scalar = double>
class ScalarField {
 public:
  using Grid = PolarGrid<Scalar>;
  using GridPtr = std::shared_ptr<const Grid>;

  explicit ScalarField(GridPtr grid)
      : grid_(std::move(grid)),
        v_(GridArray<Scalar>::Zero(grid_->n_r(), grid_->n_theta())) {}

  ScalarField(GridPtr grid, GridArray<Scalar> values)
      : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.rows() != grid_->n_r() || v_.cols() != grid_->n_theta())
      throw std::logic_error("ScalarField: value shape does not match grid");
  }

  const GridPtr& grid() const { return grid_; }
  const GridArray<Scalar>& values() const { return v_; }
  GridArray<Scalar>& values() { return v_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return v_(i, j); }
  Scalar& operator()(Eigen::Index i, Eigen::Index j) { return v_(i, j); }

 private:
  GridPtr grid_;
  GridArray<Scalar> v_;
};

using PolarGridd = PolarGrid<double>;
using ScalarFieldd = ScalarField<double>;

template <typename Scalar, typename F>
ScalarField<Scalar> make_field(std::shared_ptr<const PolarGrid<Scalar>> grid, F&& f) {
  ScalarField<Scalar> out(grid);
  for (Eigen::Index i = 0; i < grid->n_r(); ++i)
    for (Eigen::Index j = 0; j < grid->n_theta(); ++j)
      out(i, j) = f(grid->r(i), grid->theta(j));
  return out;
}

template <typename Scalar>
void require_same_grid(const ScalarField<Scalar>& a, const ScalarField<Scalar>& b) {
  if (a.grid() != b.grid() &&
      (a.grid()->n_r() != b.grid()->n_r() || a.grid()->n_theta() != b.grid()->n_theta()))
    throw std::logic_error("fields live on different grids");
}

/// Midpoint-rule integral over the disk.
template <typename Scalar>
Scalar integrate(const ScalarField<Scalar>& f) {
  const auto& g = *f.grid();
  Scalar total = 0;
  for (Eigen::Index i = 0; i < g.n_r(); ++i)
    total += g.ring_cell_area(i) * f.values().row(i).sum();
  return total;
}

/// Mass centroid of a nonnegative density; throws on nonpositive mass.
template <typename Scalar>
Vec2<Scalar> moment_center(const ScalarField<Scalar>& w) {
  const auto& g = *w.grid();
  Scalar mass = 0, mx = 0, my = 0;
  for (Eigen::Index i = 0; i < g.n_r(); ++i) {
    const Scalar a = g.ring_cell_area(i);
    Scalar ring_sum = 0, ring_c = 0, ring_s = 0;
    for (Eigen::Index j = 0; j < g.n_theta(); ++j) {
      const Scalar v = w(i, j);
      ring_sum += v;
      ring_c += v * g.cos_theta(j);
      ring_s += v * g.sin_theta(j);
    }
    mass += a * ring_sum;
    mx += a * g.r(i) * ring_c;
    my += a * g.r(i) * ring_s;
  }
  if (!(mass > Scalar(0))) throw std::domain_error("moment_center: nonpositive mass");
  return Vec2<Scalar>(mx / mass, my / mass);
}

/// Angular impulse integrand: integral of |x|^2 w.
template <typename Scalar>
Scalar second_moment(const ScalarField<Scalar>& w) {
  const auto& g = *w.grid();
  Scalar total = 0;
  for (Eigen::Index i = 0; i < g.n_r(); ++i)
    total += g.ring_cell_area(i) * g.r(i) * g.r(i) * w.values().row(i).sum();
  return total;
}

/// Discrete L^p norm, (sum |f|^p area)^(1/p).
template <typename Scalar>
Scalar lp_norm(const ScalarField<Scalar>& f, Scalar p) {
  const auto& g = *f.grid();
  Scalar total = 0;
  if (p == Scalar(1)) {
    for (Eigen::Index i = 0; i < g.n_r(); ++i)
      total += g.ring_cell_area(i) * f.values().row(i).abs().sum();
    return total;
  }
  if (p == Scalar(2)) {
    for (Eigen::Index i = 0; i < g.n_r(); ++i)
      total += g.ring_cell_area(i) * f.values().row(i).square().sum();
    return std::sqrt(total);
  }
  for (Eigen::Index i = 0; i < g.n_r(); ++i)
    total += g.ring_cell_area(i) * f.values().row(i).abs().pow(p).sum();
  return std::pow(total, Scalar(1) / p);
}

namespace detail {

// Linear interpolation along ring i at angle theta (periodic).
template <typename Scalar>
Scalar ring_interp(const ScalarField<Scalar>& f, Eigen::Index i, Scalar theta) {
  const auto& g = *f.grid();
  const Eigen::Index m = g.n_theta();
  const Scalar dt = g.dtheta();
  Scalar u = theta / dt - Scalar(0.5);
  Scalar fl = std::floor(u);
  Scalar t = u - fl;
  Eigen::Index j0 = static_cast<Eigen::Index>(fl) % m;
  if (j0 < 0) j0 += m;
  const Eigen::Index j1 = (j0 + 1) % m;
  return (Scalar(1) - t) * f(i, j0) + t * f(i, j1);
}

}  // namespace detail

/// Bilinear sample in (r, theta) with angular periodicity.  Below the
/// innermost ring the value is blended through the disk center using the
/// ring mean (which reproduces fields of the form a + b x1 + c x2 exactly);
/// beyond the outermost ring the boundary ring value is used.
template <typename Scalar>
Scalar sample_rt(const ScalarField<Scalar>& f, Scalar r, Scalar theta) {
  const auto& g = *f.grid();
  const Eigen::Index n = g.n_r();
  if (r < Scalar(0)) {  // polar continuation through the origin
    r = -r;
    theta += pi_v<Scalar>;
  }
  const Scalar r0 = g.r(0);
  if (r < r0) {
    const Scalar mean = f.values().row(0).mean();
    const Scalar edge = detail::ring_interp(f, 0, theta);
    const Scalar t = r / r0;
    return (Scalar(1) - t) * mean + t * edge;
  }
  const Scalar rn = g.r(n - 1);
  if (r >= rn) return detail::ring_interp(f, n - 1, theta);
  const Scalar u = (r - r0) / g.dr();
  Eigen::Index i0 = static_cast<Eigen::Index>(u);
  if (i0 > n - 2) i0 = n - 2;
  const Scalar t = u - Scalar(i0);
  return (Scalar(1) - t) * detail::ring_interp(f, i0, theta) +
         t * detail::ring_interp(f, i0 + 1, theta);
}

/// Cartesian-point sample; |p| > 1 clamps to the boundary ring value.
template <typename Scalar>
Scalar sample(const ScalarField<Scalar>& f, const Vec2<Scalar>& p) {
  const Scalar r = p.norm();
  const Scalar theta = std::atan2(p.y(), p.x());
  return sample_rt(f, r, theta);
}

/// g(r, theta) = f(r, theta - angle).  When the angle is a lattice multiple
/// of dtheta the result is an exact circular index shift.
template <typename Scalar>
ScalarField<Scalar> rotate_field(const ScalarField<Scalar>& f, Scalar angle) {
  const auto& g = *f.grid();
  const Eigen::Index m = g.n_theta();
  const Scalar shift = angle / g.dtheta();
  const Scalar rounded = std::round(shift);
  ScalarField<Scalar> out(f.grid());
  if (std::abs(shift - rounded) < Scalar(1e-12)) {
    Eigen::Index k = static_cast<Eigen::Index>(std::fmod(rounded, Scalar(m)));
    if (k < 0) k += m;
    for (Eigen::Index i = 0; i < f.grid()->n_r(); ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        out(i, j) = f(i, (j - k + m) % m);
    return out;
  }
  const Scalar fl = std::floor(shift);
  const Scalar t = shift - fl;
  Eigen::Index k0 = static_cast<Eigen::Index>(std::fmod(fl, Scalar(m)));
  if (k0 < 0) k0 += m;
  for (Eigen::Index i = 0; i < f.grid()->n_r(); ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index ja = (j - k0 + m) % m;  // f index for the floor shift
      const Eigen::Index jb = (ja - 1 + m) % m;  // one further back
      out(i, j) = (Scalar(1) - t) * f(i, ja) + t * f(i, jb);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Text dump format: header "polar-field v1 n_r n_theta", then one ring per
// line, comma separated, 17 significant digits (bit-exact round trip).

template <typename Scalar>
void write_field(std::ostream& os, const ScalarField<Scalar>& f) {
  const auto& g = *f.grid();
  os << "polar-field v1 " << g.n_r() << ' ' << g.n_theta() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < g.n_r(); ++i) {
    for (Eigen::Index j = 0; j < g.n_theta(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof(buf), static_cast<double>(f(i, j)),
                               std::chars_format::general, 17);
      if (j) os << ',';
      os.write(buf, res.ptr - buf);
    }
    os << '\n';
  }
}

template <typename Scalar = double>
ScalarField<Scalar> read_field(std::istream& is) {
  // Leading comment lines (e.g. a resolved-config record) are skipped.
  while (is.peek() == '#') {
    std::string comment;
    std::getline(is, comment);
  }
  std::string tag, version;
  long n_r = 0, n_theta = 0;
  is >> tag >> version >> n_r >> n_theta;
  if (tag != "polar-field" || version != "v1" || n_r <= 0 || n_theta <= 0)
    throw std::runtime_error("read_field: bad header");
  auto grid = PolarGrid<Scalar>::create(n_r, n_theta);
  ScalarField<Scalar> f(grid);
  std::string line;
  std::getline(is, line);  // consume end of header line
  for (long i = 0; i < n_r; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("read_field: truncated dump");
    const char* p = line.c_str();
    char* end = nullptr;
    for (long j = 0; j < n_theta; ++j) {
      f(i, j) = static_cast<Scalar>(std::strtod(p, &end));
      if (end == p) throw std::runtime_error("read_field: malformed row");
      p = (*end == ',') ? end + 1 : end;
    }
  }
  return f;
}

}  // namespace vpl

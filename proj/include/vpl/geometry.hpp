#pragma once

// Closed-form potential theory for the unit disk: Green's function of the
// Dirichlet Laplacian, its regular part, the Robin function, and the
// rotating Kirchhoff-Routh landscape whose minima locate vortex cores.

#include "vpl/common.hpp"

namespace vpl {

/// Parameters of a rotating configuration: angular velocity `omega` and
/// vorticity strength `lambda`.  The admissible class of unit-mass
/// vorticities bounded by lambda is nonempty only for lambda > 1/pi.
template <typename Scalar = double>
struct RotationParams {
  Scalar omega;
  Scalar lambda;

  RotationParams(Scalar omega_in, Scalar lambda_in)
      : omega(omega_in), lambda(lambda_in) {
    if (!(omega > Scalar(0)))
      throw std::domain_error("RotationParams: omega must be positive");
    if (!(lambda * pi_v<Scalar> > Scalar(1)))
      throw std::domain_error(
          "RotationParams: lambda must exceed 1/pi, otherwise the "
          "admissible class K_lambda is empty");
  }
};

namespace detail {
template <typename Scalar>
void require_in_closed_disk(const Vec2<Scalar>& x, const char* who) {
  if (x.squaredNorm() > Scalar(1) + Scalar(16) * std::numeric_limits<Scalar>::epsilon())
    throw std::domain_error(std::string(who) + ": point outside the closed unit disk");
}
}  // namespace detail

/// Regular part h(x,y) of the disk Green's function, evaluated in the
/// algebraically stabilized form
///     h(x,y) = -(1/4pi) * ln(|x|^2 |y|^2 - 2 x.y + 1),
/// which is finite and smooth through y = 0 (the image-charge form
/// |y| * |x - y/|y|^2| is singular to evaluate there).
template <typename Scalar>
Scalar greens_regular_part(const Vec2<Scalar>& x, const Vec2<Scalar>& y) {
  detail::require_in_closed_disk(x, "greens_regular_part");
  detail::require_in_closed_disk(y, "greens_regular_part");
  const Scalar q = x.squaredNorm() * y.squaredNorm() - Scalar(2) * x.dot(y) + Scalar(1);
  // q = |x|^2|y|^2 - 2x.y + 1 >= (1 - |x||y|)^2 >= 0; clamp rounding noise.
  const Scalar q_safe = q > Scalar(0) ? q : std::numeric_limits<Scalar>::min();
  return -std::log(q_safe) / (Scalar(4) * pi_v<Scalar>);
}

/// Green's function of -Laplace on the unit disk with zero Dirichlet data:
///     G(x,y) = -(1/2pi) ln|x-y| - h(x,y).
/// Symmetric, vanishes when either argument reaches the boundary.
template <typename Scalar>
Scalar greens(const Vec2<Scalar>& x, const Vec2<Scalar>& y) {
  detail::require_in_closed_disk(x, "greens");
  detail::require_in_closed_disk(y, "greens");
  const Scalar d2 = (x - y).squaredNorm();
  if (d2 == Scalar(0))
    throw std::domain_error("greens: coincident points (logarithmic singularity)");
  return -std::log(d2) / (Scalar(4) * pi_v<Scalar>) - greens_regular_part(x, y);
}

/// Robin function H(x) = h(x,x)/2 = -(1/4pi) ln(1 - |x|^2).
template <typename Scalar>
Scalar robin(const Vec2<Scalar>& x) {
  const Scalar r2 = x.squaredNorm();
  if (!(r2 < Scalar(1)))
    throw std::domain_error("robin: point must lie in the open unit disk");
  return -std::log(Scalar(1) - r2) / (Scalar(4) * pi_v<Scalar>);
}

/// Rotating Kirchhoff-Routh landscape H(x) - (omega/2)|x|^2.  Its global
/// minimizers are the concentration points of rotating vortex cores.
template <typename Scalar>
Scalar kr_landscape(const Vec2<Scalar>& x, Scalar omega) {
  return robin(x) - omega / Scalar(2) * x.squaredNorm();
}

/// Radius of the circle of global minimizers of the rotating landscape.
/// The minimizer sits at the origin up to the critical angular velocity
/// 1/(2pi); past it the minimum detaches onto the circle of radius
/// sqrt(1 - 1/(2 pi omega)).  The threshold is confirmed by the identity
/// point_vortex_angular_velocity(kr_minimizer_radius(omega)) == omega.
template <typename Scalar>
Scalar kr_minimizer_radius(Scalar omega) {
  if (!(omega > Scalar(0)))
    throw std::domain_error("kr_minimizer_radius: omega must be positive");
  const Scalar omega_c = Scalar(1) / (Scalar(2) * pi_v<Scalar>);
  if (omega <= omega_c) return Scalar(0);
  return std::sqrt(Scalar(1) - Scalar(1) / (Scalar(2) * pi_v<Scalar> * omega));
}

/// Angular velocity of a unit point vortex orbiting at radius r_star,
/// 1 / (2 pi (1 - r_star^2)).
template <typename Scalar>
Scalar point_vortex_angular_velocity(Scalar r_star) {
  if (!(r_star >= Scalar(0) && r_star < Scalar(1)))
    throw std::domain_error("point_vortex_angular_velocity: need 0 <= r_star < 1");
  return Scalar(1) / (Scalar(2) * pi_v<Scalar> * (Scalar(1) - r_star * r_star));
}

}  // namespace vpl

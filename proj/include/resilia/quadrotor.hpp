#pragma once

#include <utility>

#include "resilia/problem.hpp"

namespace resilia {

/// Linearized quadrotor about hover. State order
/// (x, y, z, φ, θ, ψ, u, v, w, p, q, r); inputs (f_t, τ_x, τ_y, τ_z) are
/// deviations from hover; wind (f_wx, f_wy, f_wz, τ_wx, τ_wy, τ_wz).
struct QuadrotorParams {
  double m = 0.5;
  double M = 0.341;
  double m_prime = 0.0398;
  double l = 0.17;
  double R = 0.0812;
  double Ix = 3.2e-3;
  double Iy = 3.2e-3;
  double Iz = 5.5e-3;
  double g = 9.81;
  double Ts = 0.1;

  /// Sphere-plus-point-masses inertias: 2MR²/5 + 2l²m′ about x and y, 2MR²/5 + 4l²m′ about z.
  void derive_inertias();
  /// Parameters with inertias recomputed from geometry.
  static QuadrotorParams hummingbird();
  void validate() const;
};

inline constexpr int kStateDim = 12;
inline constexpr int kInputDim = 4;
inline constexpr int kWindDim = 6;

struct StateSpace {
  Matrix A;
  Matrix B;
  Matrix W;
};

StateSpace continuous_matrices(const QuadrotorParams& params);

/// Zero-order-hold discretization using the finite series of the nilpotent A_c:
/// A = Σ_{k<4} (A_c T)^k / k!, B = Σ_{k<4} A_c^k T^{k+1} / (k+1)! · B_c.
///
/// @throws std::invalid_argument unless T > 0 and A_c⁴ = 0.
StateSpace discretize(const Matrix& Ac, const Matrix& Bc, const Matrix& Wc, double Ts);

StateSpace discrete_model(const QuadrotorParams& params);

Vector step(const StateSpace& sys, const Vector& x, const Vector& u, const Vector& w);

/// A box of mass Δ sticks to the vehicle: linear velocities scale by m/(m+Δ),
/// m and M grow by Δ and the inertias are recomputed.
std::pair<Vector, QuadrotorParams> collision_update(const Vector& state, const QuadrotorParams& params, double delta);

/// Diagonal map applied to the state at a collision.
Matrix collision_reset(const QuadrotorParams& params, double delta);

}  // namespace resilia

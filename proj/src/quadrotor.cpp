#include "resilia/quadrotor.hpp"

#include <cmath>
#include <stdexcept>

namespace resilia {

void QuadrotorParams::derive_inertias() {
  const double sphere = 2.0 * M * R * R / 5.0;
  Ix = sphere + 2.0 * l * l * m_prime;
  Iy = Ix;
  Iz = sphere + 4.0 * l * l * m_prime;
}

QuadrotorParams QuadrotorParams::hummingbird() {
  QuadrotorParams p;
  p.derive_inertias();
  return p;
}

void QuadrotorParams::validate() const {
  for (double v : {m, M, m_prime, l, R, Ix, Iy, Iz, g, Ts}) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw std::invalid_argument("quadrotor parameters must be positive and finite");
    }
  }
}

StateSpace continuous_matrices(const QuadrotorParams& p) {
  p.validate();
  StateSpace c;
  c.A = Matrix::Zero(kStateDim, kStateDim);
  // Positions and angles integrate the body rates.
  for (int k = 0; k < 6; ++k) {
    c.A(k, k + 6) = 1.0;
  }
  c.A(6, 4) = -p.g;
  c.A(7, 3) = p.g;

  c.B = Matrix::Zero(kStateDim, kInputDim);
  c.B(8, 0) = 1.0 / p.m;
  c.B(9, 1) = 1.0 / p.Ix;
  c.B(10, 2) = 1.0 / p.Iy;
  c.B(11, 3) = 1.0 / p.Iz;

  c.W = Matrix::Zero(kStateDim, kWindDim);
  c.W(6, 0) = 1.0 / p.m;
  c.W(7, 1) = 1.0 / p.m;
  c.W(8, 2) = 1.0 / p.m;
  c.W(9, 3) = 1.0 / p.Ix;
  c.W(10, 4) = 1.0 / p.Iy;
  c.W(11, 5) = 1.0 / p.Iz;
  return c;
}

StateSpace discretize(const Matrix& Ac, const Matrix& Bc, const Matrix& Wc, double Ts) {
  if (!(Ts > 0.0)) {
    throw std::invalid_argument("sample time must be positive");
  }
  const auto n = Ac.rows();
  if (Ac.cols() != n || Bc.rows() != n || Wc.rows() != n) {
    throw std::invalid_argument("state-space shapes are inconsistent");
  }
  const Matrix a2 = Ac * Ac;
  const Matrix a3 = a2 * Ac;
  if (!(a3 * Ac).isZero(0.0)) {
    throw std::invalid_argument("series discretization needs a nilpotent A_c of index at most four");
  }
  const Matrix id = Matrix::Identity(n, n);
  const double t2 = Ts * Ts;
  const double t3 = t2 * Ts;
  const double t4 = t3 * Ts;
  const Matrix integral = id * Ts + Ac * (t2 / 2.0) + a2 * (t3 / 6.0) + a3 * (t4 / 24.0);
  StateSpace d;
  d.A = id + Ac * Ts + a2 * (t2 / 2.0) + a3 * (t3 / 6.0);
  d.B = integral * Bc;
  d.W = integral * Wc;
  return d;
}

StateSpace discrete_model(const QuadrotorParams& params) {
  const StateSpace c = continuous_matrices(params);
  return discretize(c.A, c.B, c.W, params.Ts);
}

Vector step(const StateSpace& sys, const Vector& x, const Vector& u, const Vector& w) {
  if (x.size() != sys.A.cols() || u.size() != sys.B.cols() || w.size() != sys.W.cols()) {
    throw std::invalid_argument("state, input or disturbance has the wrong dimension");
  }
  return sys.A * x + sys.B * u + sys.W * w;
}

Matrix collision_reset(const QuadrotorParams& params, double delta) {
  if (!(delta >= 0.0)) {
    throw std::invalid_argument("collision mass must be nonnegative");
  }
  Matrix d = Matrix::Identity(kStateDim, kStateDim);
  const double ratio = params.m / (params.m + delta);
  for (int k = 6; k < 9; ++k) {
    d(k, k) = ratio;
  }
  return d;
}

std::pair<Vector, QuadrotorParams> collision_update(const Vector& state, const QuadrotorParams& params, double delta) {
  if (state.size() != kStateDim) {
    throw std::invalid_argument("quadrotor state must have twelve entries");
  }
  const Vector next = collision_reset(params, delta) * state;
  if (delta == 0.0) {
    return {next, params};
  }
  QuadrotorParams p = params;
  p.m += delta;
  p.M += delta;
  p.derive_inertias();
  return {next, p};
}

}  // namespace resilia

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "qbe/errors.hpp"
#include "qbe/qtensor.hpp"

namespace qbe {

/// Right-hand side of the local reaction ODE
///   dQ/dt = -a Q + b (Q^2 - tr(Q^2) I/3) - c tr(Q^2) Q.
/// Algebraically equal to -bulk_gradient(Q, p); written out independently so
/// the identity can be asserted in tests.
inline QTensor reaction_rhs(const QTensor& q, const Params& p) {
  double t2 = q.norm2();
  double z = q.q33();
  double m11 = q.q11 * q.q11 + q.q12 * q.q12 + q.q13 * q.q13;
  double m12 = q.q12 * (q.q11 + q.q22) + q.q13 * q.q23;
  double m13 = q.q13 * (q.q11 + z) + q.q12 * q.q23;
  double m22 = q.q12 * q.q12 + q.q22 * q.q22 + q.q23 * q.q23;
  double m23 = q.q23 * (q.q22 + z) + q.q12 * q.q13;
  double lin = -p.a - p.c * t2;
  QTensor r;
  r.q11 = lin * q.q11 + p.b * (m11 - t2 / 3.0);
  r.q12 = lin * q.q12 + p.b * m12;
  r.q13 = lin * q.q13 + p.b * m13;
  r.q22 = lin * q.q22 + p.b * (m22 - t2 / 3.0);
  r.q23 = lin * q.q23 + p.b * m23;
  return r;
}

struct EigenPair {
  double l1 = 0.0, l2 = 0.0;  // third eigenvalue = -l1-l2 implied
};

enum class OdeMethod { rk4, eigenframe };

struct OdeConfig {
  double dt = 1e-3;
  OdeMethod method = OdeMethod::rk4;
  double t_end = 0.0;
  double tol = 1e-10;
};

/// Reduced flow of the two independent eigenvalues. The eigenvectors are
/// invariant under the reaction ODE, so this captures the full dynamics in a
/// frozen eigenframe.
inline EigenPair eigenvalue_rhs(const EigenPair& l, const Params& p) {
  double quad = l.l1 * l.l1 + l.l2 * l.l2 + l.l1 * l.l2;
  double common = 2.0 * p.c * quad + p.a;
  EigenPair r;
  r.l1 = -l.l1 * common +
         p.b * (l.l1 * l.l1 / 3.0 - 2.0 / 3.0 * l.l2 * l.l2 - 2.0 / 3.0 * l.l1 * l.l2);
  r.l2 = -l.l2 * common +
         p.b * (l.l2 * l.l2 / 3.0 - 2.0 / 3.0 * l.l1 * l.l1 - 2.0 / 3.0 * l.l1 * l.l2);
  return r;
}

inline EigenPair eigenvalue_flow(const EigenPair& l0, const Params& p,
                                 const OdeConfig& cfg) {
  EigenPair y = l0;
  double t = 0.0;
  long step = 0;
  while (t < cfg.t_end - 1e-15) {
    double h = std::min(cfg.dt, cfg.t_end - t);
    EigenPair k1 = eigenvalue_rhs(y, p);
    EigenPair k2 = eigenvalue_rhs({y.l1 + 0.5 * h * k1.l1, y.l2 + 0.5 * h * k1.l2}, p);
    EigenPair k3 = eigenvalue_rhs({y.l1 + 0.5 * h * k2.l1, y.l2 + 0.5 * h * k2.l2}, p);
    EigenPair k4 = eigenvalue_rhs({y.l1 + h * k3.l1, y.l2 + h * k3.l2}, p);
    y.l1 += h / 6.0 * (k1.l1 + 2.0 * k2.l1 + 2.0 * k3.l1 + k4.l1);
    y.l2 += h / 6.0 * (k1.l2 + 2.0 * k2.l2 + 2.0 * k3.l2 + k4.l2);
    t += h;
    ++step;
    if (!std::isfinite(y.l1) || !std::isfinite(y.l2))
      throw divergence_error("eigenvalue_flow diverged", t, step);
  }
  return y;
}

namespace detail {

inline QTensor rk4_reaction(QTensor y, const Params& p, double t_end, double dt) {
  double t = 0.0;
  long step = 0;
  while (t < t_end - 1e-15) {
    double h = std::min(dt, t_end - t);
    QTensor k1 = reaction_rhs(y, p);
    QTensor k2 = reaction_rhs(y + k1 * (0.5 * h), p);
    QTensor k3 = reaction_rhs(y + k2 * (0.5 * h), p);
    QTensor k4 = reaction_rhs(y + k3 * h, p);
    y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    t += h;
    ++step;
    if (!y.finite())
      throw divergence_error("integrate_reaction diverged", t, step);
  }
  return y;
}

}  // namespace detail

/// Flow map of the reaction ODE over [0, t_end]. The eigenframe method
/// diagonalizes once, runs the reduced eigenvalue ODE and rotates back; rk4
/// integrates the full five-component system. Both agree to ~1e-8 at
/// dt <= 1e-3.
inline QTensor integrate_reaction(const QTensor& q0, const Params& p,
                                  const OdeConfig& cfg) {
  if (cfg.method == OdeMethod::rk4)
    return detail::rk4_reaction(q0, p, cfg.t_end, cfg.dt);
  EigenSystem es = eigen_decomposition(q0);
  EigenPair l = eigenvalue_flow({es.vals[0], es.vals[1]}, p,
                                {cfg.dt, OdeMethod::rk4, cfg.t_end, cfg.tol});
  Mat3 d = Mat3::zero();
  d.m[0][0] = l.l1;
  d.m[1][1] = l.l2;
  d.m[2][2] = -l.l1 - l.l2;
  Mat3 out = es.vecs * d * es.vecs.transpose();
  return QTensor::from_matrix(out);
}

/// Long-time limit T[Q0] = s_plus (n (x) n - I/3) with n the eigenvector of
/// the largest eigenvalue of Q0. Throws std::domain_error when the top two
/// eigenvalues coincide to within 1e-10 (the limit map is discontinuous
/// there).
inline QTensor long_time_limit(const QTensor& q0, const Params& p) {
  if (!(p.a < 0.0 && p.b > 0.0 && p.c > 0.0))
    throw std::domain_error("long_time_limit requires a<0, b>0, c>0");
  StationaryScalars s = stationary_scalars(p);
  EigenSystem es = eigen_decomposition(q0);
  if (es.vals[2] - es.vals[1] < 1e-10)
    throw std::domain_error(
        "long_time_limit: leading eigenvector ambiguous (top eigenvalues "
        "within 1e-10)");
  return QTensor::uniaxial(s.s_plus, es.vecs.m[0][2], es.vecs.m[1][2],
                           es.vecs.m[2][2]);
}

/// Eigenvalues of the linearization of the reduced eigenvalue flow at the
/// uniaxial stationary point (-s+/3, -s+/3):
///   h1 = -a - 2 b s+ - 18 c s+^2,  h2 = -a + 2 b s+ - 6 c s+^2.
/// Both are negative whenever a<0, b>0, c>0.
inline std::pair<double, double> hessian_spectrum(const Params& p) {
  double sp = stationary_scalars(p).s_plus;
  double h1 = -p.a - 2.0 * p.b * sp - 18.0 * p.c * sp * sp;
  double h2 = -p.a + 2.0 * p.b * sp - 6.0 * p.c * sp * sp;
  return {h1, h2};
}

/// RHS of the strain-driven ODE that governs the frozen-flow limit of the
/// non-corotational transport,
///   dR/dt = D R + R D + (2/3) D - 2 (R + I/3) tr(R D),
/// for a symmetric trace-free strain matrix D. At R = 0 this equals (2/3) D,
/// so R leaves the origin whenever D != 0.
inline QTensor strain_ode_rhs(const QTensor& r, const Mat3& d) {
  Mat3 rm = r.matrix();
  double trRD = ddot(rm, d);  // d symmetric, so ddot = tr(R D)
  Mat3 rhs = d * rm + rm * d + (2.0 / 3.0) * d;
  Mat3 shift = rm + (1.0 / 3.0) * Mat3::identity();
  rhs = rhs - 2.0 * trRD * shift;
  return QTensor::from_matrix(rhs);
}

/// RK4 integration of strain_ode_rhs with a per-step visitor; the visitor may
/// return false to stop early (used by first-exit searches).
inline QTensor integrate_strain_ode(
    QTensor r, const Mat3& d, double t_end, double dt,
    const std::function<bool(double, const QTensor&)>& visit = {}) {
  double t = 0.0;
  long step = 0;
  while (t < t_end - 1e-15) {
    double h = std::min(dt, t_end - t);
    QTensor k1 = strain_ode_rhs(r, d);
    QTensor k2 = strain_ode_rhs(r + k1 * (0.5 * h), d);
    QTensor k3 = strain_ode_rhs(r + k2 * (0.5 * h), d);
    QTensor k4 = strain_ode_rhs(r + k3 * h, d);
    r += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    t += h;
    ++step;
    if (!r.finite()) throw divergence_error("strain ODE diverged", t, step);
    if (visit && !visit(t, r)) break;
  }
  return r;
}

}  // namespace qbe

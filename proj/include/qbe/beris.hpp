#pragma once

#include <cstdio>
#include <string>

#include "qbe/bulk_ode.hpp"
#include "qbe/diag.hpp"
#include "qbe/errors.hpp"
#include "qbe/field.hpp"
#include "qbe/flows.hpp"
#include "qbe/parallel.hpp"
#include "qbe/spectral.hpp"

namespace qbe {

/// Commutator W Q - Q W for the antisymmetric matrix with independent
/// entries (w01, w02, w12), written out on the reduced components.
inline QTensor corotation(double w01, double w02, double w12, const QTensor& q) {
  double q33 = q.q33();
  QTensor c;
  c.q11 = 2.0 * (w01 * q.q12 + w02 * q.q13);
  c.q22 = 2.0 * (-w01 * q.q12 + w12 * q.q23);
  c.q12 = w01 * (q.q22 - q.q11) + w02 * q.q23 + w12 * q.q13;
  c.q13 = w01 * q.q23 + w02 * (q33 - q.q11) - w12 * q.q12;
  c.q23 = -w01 * q.q13 - w02 * q.q12 + w12 * (q33 - q.q22);
  return c;
}

/// Velocity gradient coupling of the Q-equation,
///   S(grad u, Q) = (xi D + W)(Q + I/3) + (Q + I/3)(xi D - W) - 2 xi (Q + I/3) tr(Q grad u),
/// with D and W the symmetric and antisymmetric parts of grad u. At xi = 0
/// this reduces to the corotation commutator W Q - Q W.
inline QTensor flow_coupling(const Mat3& grad_u, const QTensor& q, double xi) {
  double w01 = 0.5 * (grad_u.m[0][1] - grad_u.m[1][0]);
  double w02 = 0.5 * (grad_u.m[0][2] - grad_u.m[2][0]);
  double w12 = 0.5 * (grad_u.m[1][2] - grad_u.m[2][1]);
  if (xi == 0.0) return corotation(w01, w02, w12, q);
  Mat3 d, w;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      d.m[i][j] = 0.5 * (grad_u.m[i][j] + grad_u.m[j][i]);
      w.m[i][j] = 0.5 * (grad_u.m[i][j] - grad_u.m[j][i]);
    }
  Mat3 qm = q.matrix();
  Mat3 M = qm + (1.0 / 3.0) * Mat3::identity();
  double trqg = ddot(qm, d);
  Mat3 s = (xi * d + w) * M + M * (xi * d - w) - (2.0 * xi * trqg) * M;
  return QTensor::from_matrix(s);
}

/// Field version: grad u is taken spectrally from u.
inline Field flow_coupling(const Field& u, const Field& q, double xi) {
  Grid g = u.grid;
  std::vector<Field> du;
  for (int axis = 0; axis < 2; ++axis) du.push_back(derivative(u, axis, 1));
  Field out = Field::qtensor(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    Mat3 gu = Mat3::zero();
    for (int i = 0; i < 3; ++i)
      for (int axis = 0; axis < 2; ++axis) gu.m[i][axis] = du[axis].c[i][p];
    out.set_q(p, flow_coupling(gu, q.q_at(p), xi));
  }
  return out;
}

/// Divergence of the elastic and bulk stresses entering the momentum
/// equation, assembled spectrally with two-thirds dealiasing:
///   - eps^2 div(grad Q (.) grad Q + (Lap Q) Q - Q Lap Q)
///   - eps^2 xi div(Lap Q M + M Lap Q - 2 M (Q : Lap Q))
///   - 2 eps xi kappa div(M (a tr Q^2 - b tr Q^3 + c tr^2 Q^2))
///   + 2 eps xi kappa div(M (a Q - b (Q^2 - tr(Q^2) I/3) + c Q tr Q^2))
/// with M = Q + I/3. Lap Q is computed once and shared by all blocks.
class StressAssembler {
 public:
  explicit StressAssembler(Grid g)
      : g_(g),
        q_(g, PayloadKind::qtensor),
        dq_(10, std::vector<double>(g.size())),
        lap_(5, std::vector<double>(g.size())),
        sigma_(6, std::vector<double>(g.size())),
        work_(g.spec_size()),
        shat_(g.spec_size()) {}

  void assemble(const SpecField& qh, const Params& p, SpecField& force) {
    const Fft2D& fft = Fft2D::get(g_.n);
    std::size_t np = g_.size();
    int nyq = g_.n / 2;

    to_phys_into(qh, q_);
    for (int m = 0; m < 5; ++m) {
      for (int axis = 0; axis < 2; ++axis) {
        work_ = qh.c[m];
        spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
          int k = axis == 0 ? kx : ky;
          work_[s] = spec::times_ik(work_[s], std::abs(k) == nyq ? 0.0 : double(k));
        });
        fft.backward(work_.data(), dq_[2 * m + axis].data());
      }
      work_ = qh.c[m];
      spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
        work_[s] *= -double(kx * kx + ky * ky);
      });
      fft.backward(work_.data(), lap_[m].data());
    }

    // sigma rows i = 0..2, columns j = 0..1; force_i = -d_j sigma_ij
    const double wq[5] = {1.0, 2.0, 2.0, 1.0, 2.0};
    double e2 = p.eps * p.eps;
    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t pt = lo; pt < hi; ++pt) {
        QTensor qp = q_.q_at(pt);
        Mat3 qm = qp.matrix();
        QTensor lq{lap_[0][pt], lap_[1][pt], lap_[2][pt], lap_[3][pt], lap_[4][pt]};
        Mat3 lm = lq.matrix();

        // distortion block d_iQ : d_jQ on the five components plus implied q33
        double a00 = 0.0, a01 = 0.0, a11 = 0.0;
        for (int m = 0; m < 5; ++m) {
          a00 += wq[m] * dq_[2 * m][pt] * dq_[2 * m][pt];
          a01 += wq[m] * dq_[2 * m][pt] * dq_[2 * m + 1][pt];
          a11 += wq[m] * dq_[2 * m + 1][pt] * dq_[2 * m + 1][pt];
        }
        double dz0 = -dq_[0][pt] - dq_[6][pt];  // d_x q33
        double dz1 = -dq_[1][pt] - dq_[7][pt];  // d_y q33
        a00 += dz0 * dz0;
        a01 += dz0 * dz1;
        a11 += dz1 * dz1;

        Mat3 anti = lm * qm - qm * lm;
        Mat3 sig;
        sig.m[0][0] = e2 * (a00 + anti.m[0][0]);
        sig.m[0][1] = e2 * (a01 + anti.m[0][1]);
        sig.m[1][0] = e2 * (a01 + anti.m[1][0]);
        sig.m[1][1] = e2 * (a11 + anti.m[1][1]);
        sig.m[2][0] = e2 * anti.m[2][0];
        sig.m[2][1] = e2 * anti.m[2][1];

        if (p.xi != 0.0) {
          Mat3 M = qm + (1.0 / 3.0) * Mat3::identity();
          double qdlq = ddot(qm, lm);
          Mat3 csym = lm * M + M * lm - (2.0 * qdlq) * M;
          double t2 = qp.norm2();
          double f3 = p.a * t2 - p.b * qp.trace3() + p.c * t2 * t2;
          Mat3 gm = bulk_gradient(qp, p).matrix();
          Mat3 bulk = (2.0 * p.eps * p.xi * p.kappa) * (f3 * M - M * gm);
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j)
              sig.m[i][j] += e2 * p.xi * csym.m[i][j] + bulk.m[i][j];
        }
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 2; ++j) sigma_[2 * i + j][pt] = sig.m[i][j];
      }
    });

    for (int i = 0; i < 3; ++i) {
      for (std::size_t s = 0; s < g_.spec_size(); ++s) force.c[i][s] = 0.0;
      for (int j = 0; j < 2; ++j) {
        fft.forward(sigma_[2 * i + j].data(), shat_.data());
        spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
          int k = j == 0 ? kx : ky;
          force.c[i][s] -=
              spec::times_ik(shat_[s], std::abs(k) == nyq ? 0.0 : double(k));
        });
      }
    }
    spec::dealias_inplace(force);
  }

 private:
  Grid g_;
  Field q_;
  std::vector<std::vector<double>> dq_, lap_, sigma_;
  std::vector<std::complex<double>> work_, shat_;
};

inline SpecField stress_divergence_spec(const SpecField& qh, const Params& p) {
  SpecField force(qh.grid, 3);
  StressAssembler(qh.grid).assemble(qh, p, force);
  return force;
}

inline Field elastic_stress_divergence(const Field& q, const Params& p) {
  return to_phys(stress_divergence_spec(to_spec(q), p), PayloadKind::vec3);
}

struct StepConfig {
  double dt = 1e-3;
  std::string scheme = "imex2";
  double cfl_max = 0.9;
};

struct SimState {
  Field u;
  Field Q;
  double t = 0.0;
  long step = 0;
};

/// Time stepper for the coupled system. Diffusion (eps Lap on both u and Q,
/// diagonal in k-space) is handled by its exact propagator; advection,
/// rotation, stress and bulk terms are explicit at second order (midpoint
/// rule in integrating-factor variables). Velocity is Leray-projected after
/// every stage.
class BerisSolver {
 public:
  BerisSolver(Grid g, Params p, StepConfig cfg)
      : g_(g),
        p_(p),
        cfg_(cfg),
        uh_(g, 3),
        qh_(g, 5),
        stress_(g),
        force_(g, 3),
        uw_(g, PayloadKind::vec3),
        qw_(g, PayloadKind::qtensor),
        du_(6, std::vector<double>(g.size())),
        dq_(10, std::vector<double>(g.size())),
        nqp_(5, std::vector<double>(g.size())),
        adv_(3, std::vector<double>(g.size())),
        cwork_(g.spec_size()),
        nu1_(g, 3),
        nq1_(g, 5),
        nu2_(g, 3),
        nq2_(g, 5),
        um_(g, 3),
        qm_(g, 5) {
    if (cfg.scheme != "imex2")
      throw validation_error("unknown scheme: " + cfg.scheme);
    if (cfg.dt <= 0.0) throw validation_error("dt must be positive");
  }

  void init(const Field& u0, const Field& q0) {
    uh_ = to_spec(u0);
    qh_ = to_spec(q0);
    spec::dealias_inplace(uh_);
    spec::dealias_inplace(qh_);
    spec::leray_inplace(uh_);
    t_ = 0.0;
    step_ = 0;
  }

  void step() {
    rhs(uh_, qh_, nu1_, nq1_);
    double dt = cfg_.dt;
    if (umax_ * dt / g_.dx() > cfg_.cfl_max && !cfl_warned_) {
      std::fprintf(stderr,
                   "warning: advective CFL %.3f exceeds cfl_max %.3f at t=%g\n",
                   umax_ * dt / g_.dx(), cfg_.cfl_max, t_);
      cfl_warned_ = true;
    }

    apply_heat_stage(uh_, nu1_, 0.5 * dt, 0.5 * dt, um_);
    apply_heat_stage(qh_, nq1_, 0.5 * dt, 0.5 * dt, qm_);
    rhs(um_, qm_, nu2_, nq2_);

    finish_step(uh_, nu2_, dt);
    finish_step(qh_, nq2_, dt);
    spec::leray_inplace(uh_);
    t_ += dt;
    ++step_;
    if (!uh_.finite() || !qh_.finite())
      throw divergence_error("beris solver diverged", t_, step_);
  }

  void advance_to(double t_end) {
    while (t_ < t_end - 0.5 * cfg_.dt) step();
  }

  double time() const { return t_; }
  long steps() const { return step_; }
  const SpecField& u_spec() const { return uh_; }
  const SpecField& q_spec() const { return qh_; }

  SimState state() const {
    return {to_phys(uh_, PayloadKind::vec3), to_phys(qh_, PayloadKind::qtensor),
            t_, step_};
  }

  double divergence_l2() const { return spec::divergence_l2(uh_); }

  DiagRecord monitor() const {
    DiagRecord r;
    r.t = t_;
    Field q = to_phys(qh_, PayloadKind::qtensor);
    double mn = 1e300, mx = -1e300, linf = 0.0, fb_sum = 0.0;
    for (std::size_t pt = 0; pt < g_.size(); ++pt) {
      QTensor qp = q.q_at(pt);
      EigenTriple e = eigenvalues(qp);
      mn = std::min(mn, e.l1);
      mx = std::max(mx, e.l3);
      linf = std::max(linf, qp.norm());
      fb_sum += bulk_energy(qp, p_);
    }
    r.min_eig = mn;
    r.max_eig = mx;
    r.linf_Q = linf;
    double l2u = spec::l2_norm(uh_);
    r.kinetic = 0.5 * l2u * l2u;
    r.free_energy = 0.5 * p_.eps * grad_q_l2sq() +
                    fb_sum / double(g_.size()) * 4.0 * M_PI * M_PI;
    r.max_gradQ = max_gradient(q);
    r.resolved = spec::tail_fraction(qh_) <= 1e-8;
    return r;
  }

  /// || grad Q ||_{L2}^2 over the full tensor (off-diagonal entries twice,
  /// implied q33 once).
  double grad_q_l2sq() const {
    const double wq[5] = {1.0, 2.0, 2.0, 1.0, 2.0};
    double sum = 0.0;
    for (int m = 0; m < 5; ++m) {
      spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
        double w = (ky == 0 || ky == g_.n / 2) ? 1.0 : 2.0;
        sum += wq[m] * w * double(kx * kx + ky * ky) * std::norm(qh_.c[m][s]);
      });
    }
    spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
      double w = (ky == 0 || ky == g_.n / 2) ? 1.0 : 2.0;
      sum += w * double(kx * kx + ky * ky) * std::norm(qh_.c[0][s] + qh_.c[3][s]);
    });
    return 4.0 * M_PI * M_PI * sum;
  }

 private:
  void apply_heat_stage(const SpecField& base, const SpecField& slope,
                        double dt_slope, double tau, SpecField& out) const {
    for (int m = 0; m < base.ncomp(); ++m) {
      spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
        double e = std::exp(-p_.eps * double(kx * kx + ky * ky) * tau);
        out.c[m][s] = e * (base.c[m][s] + dt_slope * slope.c[m][s]);
      });
    }
  }

  /// state <- E(dt) state + dt E(dt/2) slope
  void finish_step(SpecField& state, const SpecField& slope, double dt) const {
    for (int m = 0; m < state.ncomp(); ++m) {
      spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
        double k2 = double(kx * kx + ky * ky);
        double ef = std::exp(-p_.eps * k2 * dt);
        double eh = std::exp(-p_.eps * k2 * 0.5 * dt);
        state.c[m][s] = ef * state.c[m][s] + dt * eh * slope.c[m][s];
      });
    }
  }

  void rhs(const SpecField& uh, const SpecField& qh, SpecField& nu,
           SpecField& nq) {
    const Fft2D& fft = Fft2D::get(g_.n);
    std::size_t np = g_.size();
    int nyq = g_.n / 2;

    stress_.assemble(qh, p_, force_);

    to_phys_into(uh, uw_);
    to_phys_into(qh, qw_);
    auto deriv = [&](const std::vector<std::complex<double>>& src, int axis,
                     std::vector<double>& dst) {
      cwork_ = src;
      spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
        int k = axis == 0 ? kx : ky;
        cwork_[s] = spec::times_ik(cwork_[s], std::abs(k) == nyq ? 0.0 : double(k));
      });
      fft.backward(cwork_.data(), dst.data());
    };
    for (int m = 0; m < 3; ++m)
      for (int axis = 0; axis < 2; ++axis) deriv(uh.c[m], axis, du_[2 * m + axis]);
    for (int m = 0; m < 5; ++m)
      for (int axis = 0; axis < 2; ++axis) deriv(qh.c[m], axis, dq_[2 * m + axis]);

    double um = 0.0;
    for (std::size_t pt = 0; pt < np; ++pt) {
      double u0 = uw_.c[0][pt], u1 = uw_.c[1][pt], u2 = uw_.c[2][pt];
      um = std::max(um, std::sqrt(u0 * u0 + u1 * u1 + u2 * u2));
    }
    umax_ = um;

    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t pt = lo; pt < hi; ++pt) {
        double u0 = uw_.c[0][pt], u1 = uw_.c[1][pt];
        QTensor qp = qw_.q_at(pt);
        QTensor dxq{dq_[0][pt], dq_[2][pt], dq_[4][pt], dq_[6][pt], dq_[8][pt]};
        QTensor dyq{dq_[1][pt], dq_[3][pt], dq_[5][pt], dq_[7][pt], dq_[9][pt]};
        QTensor s;
        if (p_.xi == 0.0) {
          double w01 = 0.5 * (du_[1][pt] - du_[2][pt]);
          double w02 = -0.5 * du_[4][pt];
          double w12 = -0.5 * du_[5][pt];
          s = corotation(w01, w02, w12, qp);
        } else {
          Mat3 gu = Mat3::zero();
          for (int i = 0; i < 3; ++i)
            for (int axis = 0; axis < 2; ++axis)
              gu.m[i][axis] = du_[2 * i + axis][pt];
          s = flow_coupling(gu, qp, p_.xi);
        }
        QTensor rhs_q = s + reaction_rhs(qp, p_) + dxq * (-u0) + dyq * (-u1);
        nqp_[0][pt] = rhs_q.q11;
        nqp_[1][pt] = rhs_q.q12;
        nqp_[2][pt] = rhs_q.q13;
        nqp_[3][pt] = rhs_q.q22;
        nqp_[4][pt] = rhs_q.q23;
        for (int i = 0; i < 3; ++i)
          adv_[i][pt] = u0 * du_[2 * i][pt] + u1 * du_[2 * i + 1][pt];
      }
    });

    for (int m = 0; m < 5; ++m) fft.forward(nqp_[m].data(), nq.c[m].data());
    for (int i = 0; i < 3; ++i) {
      fft.forward(adv_[i].data(), cwork_.data());
      for (std::size_t s = 0; s < g_.spec_size(); ++s)
        nu.c[i][s] = force_.c[i][s] - cwork_[s];
    }
    spec::dealias_inplace(nu);
    spec::dealias_inplace(nq);
    spec::leray_inplace(nu);
  }

  Grid g_;
  Params p_;
  StepConfig cfg_;
  SpecField uh_, qh_;
  double t_ = 0.0;
  long step_ = 0;
  double umax_ = 0.0;
  bool cfl_warned_ = false;

  // workspaces, allocated once
  StressAssembler stress_;
  SpecField force_;
  Field uw_, qw_;
  std::vector<std::vector<double>> du_, dq_, nqp_, adv_;
  std::vector<std::complex<double>> cwork_;
  SpecField nu1_, nq1_, nu2_, nq2_, um_, qm_;
};

}  // namespace qbe

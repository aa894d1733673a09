#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "qbe/beris.hpp"
#include "qbe/bulk_ode.hpp"
#include "qbe/errors.hpp"
#include "qbe/flows.hpp"
#include "qbe/parallel.hpp"
#include "qbe/spectral.hpp"
#include "qbe/stats.hpp"

namespace qbe {

/// State of the inviscid limit system: in-plane vorticity, passively
/// transported third velocity component, and the Q-tensor field.
struct LimitState {
  Field omega;  // scalar
  Field v3;     // scalar
  Field R;      // qtensor
  double t = 0.0;

  LimitState() = default;
  explicit LimitState(Grid g)
      : omega(Field::scalar(g)), v3(Field::scalar(g)), R(Field::qtensor(g)) {}
};

namespace limit_detail {

/// Recover (u1, u2) from vorticity via the stream function and attach v3.
inline void velocity_spec(const SpecField& wh, const SpecField& v3h,
                          SpecField& uh) {
  const Grid& g = wh.grid;
  spec::for_each_mode(g, [&](std::size_t p, int kx, int ky) {
    double k2 = double(kx * kx + ky * ky);
    std::complex<double> psi = k2 == 0.0 ? 0.0 : wh.c[0][p] / k2;
    uh.c[0][p] = spec::times_ik(psi, double(ky));   // d_y psi
    uh.c[1][p] = spec::times_ik(psi, -double(kx));  // -d_x psi
    uh.c[2][p] = v3h.c[0][p];
  });
}

}  // namespace limit_detail

/// Coupled pseudo-spectral solver for the limit system: 2-D Euler in
/// vorticity-stream form, v3 as a passive scalar, and the Q-transport with
/// general xi. Classical RK4 on the joint state, all products dealiased.
/// An optional exponential high-mode filter exists for long inviscid runs
/// and is off by default (and in every oracle comparison).
class LimitSolver {
 public:
  LimitSolver(Grid g, Params p, double dt)
      : g_(g),
        p_(p),
        dt_(dt),
        wh_(g, 1),
        v3h_(g, 1),
        rh_(g, 5),
        uhw_(g, 3),
        uw_(g, PayloadKind::vec3),
        rw_(g, PayloadKind::qtensor),
        du_(6, std::vector<double>(g.size())),
        dr_(10, std::vector<double>(g.size())),
        dwx_(g.size()),
        dwy_(g.size()),
        dvx_(g.size()),
        dvy_(g.size()),
        nwp_(g.size()),
        nvp_(g.size()),
        nrp_(5, std::vector<double>(g.size())),
        cwork_(g.spec_size()),
        wt_(g, 1),
        vt_(g, 1),
        rt_(g, 5) {
    if (dt <= 0.0) throw validation_error("dt must be positive");
    for (int s = 0; s < 4; ++s) {
      kw_.emplace_back(g, 1);
      kv_.emplace_back(g, 1);
      kr_.emplace_back(g, 5);
    }
  }

  void init(const Field& omega0, const Field& v30, const Field& r0) {
    wh_ = to_spec(omega0);
    v3h_ = to_spec(v30);
    rh_ = to_spec(r0);
    spec::dealias_inplace(wh_);
    spec::dealias_inplace(v3h_);
    spec::dealias_inplace(rh_);
    // zero-mean vorticity gauge
    wh_.c[0][0] = 0.0;
    t_ = 0.0;
    step_ = 0;
  }

  /// Initialize from a velocity field: omega = d_x u2 - d_y u1, v3 = u3.
  /// Any mean in-plane flow is dropped by the vorticity formulation.
  void init_from_velocity(const Field& u0, const Field& r0) {
    SpecField uh = to_spec(u0);
    SpecField oh(g_, 1);
    spec::for_each_mode(g_, [&](std::size_t p, int kx, int ky) {
      oh.c[0][p] = spec::times_ik(uh.c[1][p], double(kx)) -
                   spec::times_ik(uh.c[0][p], double(ky));
    });
    Field w = to_phys(oh, PayloadKind::scalar);
    Field v3 = Field::scalar(g_);
    v3.c[0] = u0.c[2];
    init(w, v3, r0);
  }

  void enable_filter(bool on) { filter_ = on; }
  void freeze_flow(bool on) { frozen_flow_ = on; }

  void step() {
    auto axpy = [&](SpecField& dst, const SpecField& base, const SpecField& k,
                    double coef) {
      for (int m = 0; m < dst.ncomp(); ++m)
        for (std::size_t p = 0; p < dst.c[m].size(); ++p)
          dst.c[m][p] = base.c[m][p] + coef * k.c[m][p];
    };

    rhs(wh_, v3h_, rh_, kw_[0], kv_[0], kr_[0]);
    axpy(wt_, wh_, kw_[0], 0.5 * dt_);
    axpy(vt_, v3h_, kv_[0], 0.5 * dt_);
    axpy(rt_, rh_, kr_[0], 0.5 * dt_);

    rhs(wt_, vt_, rt_, kw_[1], kv_[1], kr_[1]);
    axpy(wt_, wh_, kw_[1], 0.5 * dt_);
    axpy(vt_, v3h_, kv_[1], 0.5 * dt_);
    axpy(rt_, rh_, kr_[1], 0.5 * dt_);

    rhs(wt_, vt_, rt_, kw_[2], kv_[2], kr_[2]);
    axpy(wt_, wh_, kw_[2], dt_);
    axpy(vt_, v3h_, kv_[2], dt_);
    axpy(rt_, rh_, kr_[2], dt_);

    rhs(wt_, vt_, rt_, kw_[3], kv_[3], kr_[3]);
    auto combine = [&](SpecField& state, const std::vector<SpecField>& k) {
      for (int m = 0; m < state.ncomp(); ++m)
        for (std::size_t p = 0; p < state.c[m].size(); ++p)
          state.c[m][p] += dt_ / 6.0 *
                           (k[0].c[m][p] + 2.0 * k[1].c[m][p] +
                            2.0 * k[2].c[m][p] + k[3].c[m][p]);
    };
    combine(wh_, kw_);
    combine(v3h_, kv_);
    combine(rh_, kr_);
    if (filter_) apply_filter();
    t_ += dt_;
    ++step_;
    if (!wh_.finite() || !rh_.finite())
      throw divergence_error("limit solver diverged", t_, step_);
  }

  void advance_to(double t_end) {
    while (t_ < t_end - 0.5 * dt_) step();
  }

  double time() const { return t_; }

  LimitState state() const {
    LimitState s(g_);
    s.omega = to_phys(wh_, PayloadKind::scalar);
    s.v3 = to_phys(v3h_, PayloadKind::scalar);
    s.R = to_phys(rh_, PayloadKind::qtensor);
    s.t = t_;
    return s;
  }

  Field velocity() const {
    SpecField uh(g_, 3);
    limit_detail::velocity_spec(wh_, v3h_, uh);
    return to_phys(uh, PayloadKind::vec3);
  }

  const SpecField& r_spec() const { return rh_; }
  const SpecField& omega_spec() const { return wh_; }
  double r_tail_fraction() const { return spec::tail_fraction(rh_); }

 private:
  void rhs(const SpecField& wh, const SpecField& v3h, const SpecField& rh,
           SpecField& nw, SpecField& nv3, SpecField& nr) {
    const Fft2D& fft = Fft2D::get(g_.n);
    std::size_t np = g_.size();
    int nyq = g_.n / 2;

    limit_detail::velocity_spec(wh, v3h, uhw_);
    to_phys_into(uhw_, uw_);
    to_phys_into(rh, rw_);

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
      for (int axis = 0; axis < 2; ++axis) deriv(uhw_.c[m], axis, du_[2 * m + axis]);
    deriv(wh.c[0], 0, dwx_);
    deriv(wh.c[0], 1, dwy_);
    deriv(v3h.c[0], 0, dvx_);
    deriv(v3h.c[0], 1, dvy_);
    for (int m = 0; m < 5; ++m)
      for (int axis = 0; axis < 2; ++axis) deriv(rh.c[m], axis, dr_[2 * m + axis]);

    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t pt = lo; pt < hi; ++pt) {
        double u0 = uw_.c[0][pt], u1 = uw_.c[1][pt];
        nwp_[pt] = -(u0 * dwx_[pt] + u1 * dwy_[pt]);
        nvp_[pt] = -(u0 * dvx_[pt] + u1 * dvy_[pt]);
        QTensor rp = rw_.q_at(pt);
        QTensor dxr{dr_[0][pt], dr_[2][pt], dr_[4][pt], dr_[6][pt], dr_[8][pt]};
        QTensor dyr{dr_[1][pt], dr_[3][pt], dr_[5][pt], dr_[7][pt], dr_[9][pt]};
        QTensor n;
        if (p_.xi == 0.0) {
          double w01 = 0.5 * (du_[1][pt] - du_[2][pt]);
          double w02 = -0.5 * du_[4][pt];
          double w12 = -0.5 * du_[5][pt];
          n = corotation(w01, w02, w12, rp);
        } else {
          Mat3 gu = Mat3::zero();
          for (int i = 0; i < 3; ++i)
            for (int axis = 0; axis < 2; ++axis)
              gu.m[i][axis] = du_[2 * i + axis][pt];
          n = flow_coupling(gu, rp, p_.xi);
        }
        n += reaction_rhs(rp, p_);
        n += dxr * (-u0) + dyr * (-u1);
        nrp_[0][pt] = n.q11;
        nrp_[1][pt] = n.q12;
        nrp_[2][pt] = n.q13;
        nrp_[3][pt] = n.q22;
        nrp_[4][pt] = n.q23;
      }
    });

    if (frozen_flow_) {
      for (auto& v : nwp_) v = 0.0;
      for (auto& v : nvp_) v = 0.0;
    }
    fft.forward(nwp_.data(), nw.c[0].data());
    fft.forward(nvp_.data(), nv3.c[0].data());
    for (int m = 0; m < 5; ++m) fft.forward(nrp_[m].data(), nr.c[m].data());
    spec::dealias_inplace(nw);
    spec::dealias_inplace(nv3);
    spec::dealias_inplace(nr);
  }

  void apply_filter() {
    // 36th-power exponential filter, ~1 at low modes, ~1e-16 at the cutoff
    int cutoff = g_.n / 3;
    spec::for_each_mode(g_, [&](std::size_t p, int kx, int ky) {
      double s = double(std::max(std::abs(kx), std::abs(ky))) / cutoff;
      double damp = std::exp(-36.0 * std::pow(s, 36.0));
      for (int m = 0; m < 5; ++m) rh_.c[m][p] *= damp;
    });
  }

  Grid g_;
  Params p_;
  double dt_;
  SpecField wh_, v3h_, rh_;
  double t_ = 0.0;
  long step_ = 0;
  bool filter_ = false;
  bool frozen_flow_ = false;

  // step/rhs workspaces, allocated once
  SpecField uhw_;
  Field uw_, rw_;
  std::vector<std::vector<double>> du_, dr_;
  std::vector<double> dwx_, dwy_, dvx_, dvy_, nwp_, nvp_;
  std::vector<std::vector<double>> nrp_;
  std::vector<std::complex<double>> cwork_;
  SpecField wt_, vt_, rt_;
  std::vector<SpecField> kw_, kv_, kr_;
};

/// Advance only (omega, v3) of a state by one RK4 step (R untouched).
inline void euler_step(LimitState& s, double dt) {
  LimitSolver solver(s.omega.grid, Params{}, dt);
  solver.init(s.omega, s.v3, Field::qtensor(s.omega.grid));
  solver.step();
  LimitState out = solver.state();
  s.omega = out.omega;
  s.v3 = out.v3;
  s.t += dt;
}

/// Advance only R by one RK4 step with the state's velocity held fixed.
inline void transport_q_step(LimitState& s, const Params& p, double xi, double dt) {
  Params px = p;
  px.xi = xi;
  LimitSolver solver(s.omega.grid, px, dt);
  solver.init(s.omega, s.v3, s.R);
  solver.freeze_flow(true);
  solver.step();
  s.R = solver.state().R;
  s.t += dt;
}

/// Particle trajectories of an analytic stationary flow, co-integrating the
/// rotation matrix dB/dt = W(X(t)) B from B(0) = I, where W is the
/// antisymmetric part of grad v (so the in-plane rotation rate is omega/2).
/// Positions are advanced by RK4 in unwrapped coordinates; vorticity is
/// reported along the path.
struct Trajectory {
  double x0 = 0.0, y0 = 0.0;
  std::vector<double> t, x, y, omega;
  Mat3 B = Mat3::identity();
};

struct TrajectorySet {
  std::vector<Trajectory> seeds;
};

inline TrajectorySet trace_particles(const StationaryFlow& flow,
                                     const std::vector<std::array<double, 2>>& seeds,
                                     double t_end, double dt, int direction = +1,
                                     int store_every = 1) {
  TrajectorySet out;
  out.seeds.resize(seeds.size());
  double dir = direction >= 0 ? 1.0 : -1.0;
  parallel_for(seeds.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      Trajectory& tr = out.seeds[s];
      tr.x0 = seeds[s][0];
      tr.y0 = seeds[s][1];
      double x = tr.x0, y = tr.y0;
      Mat3 B = Mat3::identity();
      long nstep = std::lround(t_end / dt);
      auto vel = [&](double px, double py, double* vx, double* vy) {
        auto v = flow.velocity(px, py);
        *vx = dir * v[0];
        *vy = dir * v[1];
      };
      auto record = [&](double tt) {
        tr.t.push_back(tt);
        tr.x.push_back(x);
        tr.y.push_back(y);
        tr.omega.push_back(flow.omega(x, y));
      };
      record(0.0);
      for (long k = 0; k < nstep; ++k) {
        double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
        vel(x, y, &k1x, &k1y);
        vel(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, &k2x, &k2y);
        vel(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, &k3x, &k3y);
        vel(x + dt * k3x, y + dt * k3y, &k4x, &k4y);
        double xm = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        double ym = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);

        // W at the four position stages (in-plane rotation by omega/2)
        auto wmat = [&](double px, double py) {
          Mat3 w = Mat3::zero();
          double om = flow.omega(px, py);
          w.m[0][1] = -0.5 * dir * om;
          w.m[1][0] = 0.5 * dir * om;
          return w;
        };
        Mat3 b1 = wmat(x, y) * B;
        Mat3 b2 = wmat(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y) * (B + (0.5 * dt) * b1);
        Mat3 b3 = wmat(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y) * (B + (0.5 * dt) * b2);
        Mat3 b4 = wmat(x + dt * k3x, y + dt * k3y) * (B + dt * b3);
        B = B + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        x = xm;
        y = ym;
        if ((k + 1) % store_every == 0 || k + 1 == nstep) record((k + 1) * dt);
      }
      tr.B = B;
    }
  });
  return out;
}

/// Exact solution of the corotational transport for initial data on the
/// uniaxial stationary manifold: R(x,t) = B Q0(X(x,-t)) B^T, where B is the
/// accumulated in-plane rotation by angle theta = int omega/2 along the
/// (backward) trajectory. q0_eval must return tensors of the form
/// s_plus (n (x) n - I/3); this is checked on the grid and violated input is
/// rejected.
inline Field lagrangian_solution(
    const std::function<QTensor(double, double)>& q0_eval,
    const StationaryFlow& flow, const Params& p, double t, Grid g,
    double dt = 1e-3) {
  StationaryScalars sc = stationary_scalars(p);
  // manifold check at grid points
  for (int i = 0; i < g.n; i += std::max(1, g.n / 16))
    for (int j = 0; j < g.n; j += std::max(1, g.n / 16)) {
      QTensor q = q0_eval(g.x(i), g.y(j));
      EigenSystem es = eigen_decomposition(q);
      QTensor proj = QTensor::uniaxial(sc.s_plus, es.vecs.m[0][2], es.vecs.m[1][2],
                                       es.vecs.m[2][2]);
      if ((q - proj).norm() > 1e-8)
        throw std::domain_error(
            "lagrangian_solution: initial data leaves the uniaxial manifold");
    }

  Field out = Field::qtensor(g);
  long nstep = std::lround(t / dt);
  parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t pt = lo; pt < hi; ++pt) {
      int i = int(pt / g.n), j = int(pt % g.n);
      double x = g.x(i), y = g.y(j);
      double theta = 0.0;
      // backward trajectory; the rotation angle accumulates omega/2 along
      // the path (order-free since all in-plane rotations commute)
      for (long k = 0; k < nstep; ++k) {
        auto vel = [&](double px, double py, double* vx, double* vy) {
          auto v = flow.velocity(px, py);
          *vx = -v[0];
          *vy = -v[1];
        };
        double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
        vel(x, y, &k1x, &k1y);
        vel(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, &k2x, &k2y);
        vel(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, &k3x, &k3y);
        vel(x + dt * k3x, y + dt * k3y, &k4x, &k4y);
        double o1 = flow.omega(x, y);
        double o2 = flow.omega(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y);
        double o3 = flow.omega(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y);
        double o4 = flow.omega(x + dt * k3x, y + dt * k3y);
        theta += dt / 12.0 * (o1 + 2.0 * o2 + 2.0 * o3 + o4);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
      }
      Mat3 rot = rotation_z(theta);
      QTensor q0 = q0_eval(x, y);
      out.set_q(pt, QTensor::from_matrix(rot * q0.matrix() * rot.transpose()));
    }
  });
  return out;
}

/// Y = ||w||_{L2}^2 + eps^2 ||grad S||_{L2}^2 + eps ||S||_{L2}^2.
inline double error_functional(const Field& w, const Field& S, double eps) {
  double nw = sobolev_norm(w, 0);
  SpecField sh = to_spec(S);
  const Grid& g = S.grid;
  const double wq[5] = {1.0, 2.0, 2.0, 1.0, 2.0};
  double s_l2sq = 0.0, grad_sq = 0.0;
  for (int m = 0; m < 5; ++m) {
    spec::for_each_mode(g, [&](std::size_t p, int kx, int ky) {
      double pw = (ky == 0 || ky == g.n / 2) ? 1.0 : 2.0;
      double k2 = double(kx * kx + ky * ky);
      double e = wq[m] * pw * std::norm(sh.c[m][p]);
      s_l2sq += e;
      grad_sq += k2 * e;
    });
  }
  spec::for_each_mode(g, [&](std::size_t p, int kx, int ky) {
    double pw = (ky == 0 || ky == g.n / 2) ? 1.0 : 2.0;
    double e = pw * std::norm(sh.c[0][p] + sh.c[3][p]);
    s_l2sq += e;
    grad_sq += double(kx * kx + ky * ky) * e;
  });
  double four_pi2 = 4.0 * M_PI * M_PI;
  return nw * nw + eps * eps * four_pi2 * grad_sq + eps * four_pi2 * s_l2sq;
}

struct EricksenRow {
  double eps = 0.0;
  double sup_Y = 0.0;
  double slope_running = 0.0;
};

struct EricksenStudy {
  std::vector<EricksenRow> rows;
  double slope = 0.0;
  std::vector<double> halving_ratios;  // supY(eps_{i+1}) / supY(eps_i) for halved eps
};

/// Run the full solver at each eps against one limit-system run from the
/// same initial data; record sup over sampled times of the error functional.
inline EricksenStudy ericksen_study(const Field& u0, const Field& q0,
                                    const Params& base, double xi,
                                    const std::vector<double>& eps_list, double T,
                                    double dt, int n_samples = 20) {
  if (eps_list.empty()) throw validation_error("ericksen_study: empty eps list");
  Grid g = u0.grid;
  Params pl = base;
  pl.xi = xi;
  LimitSolver limit(g, pl, dt);
  limit.init_from_velocity(u0, q0);
  std::vector<double> sample_times;
  std::vector<Field> v_snap, r_snap;
  for (int s = 1; s <= n_samples; ++s) {
    double ts = T * s / n_samples;
    limit.advance_to(ts);
    sample_times.push_back(limit.time());
    v_snap.push_back(limit.velocity());
    r_snap.push_back(limit.state().R);
  }

  EricksenStudy out;
  std::vector<double> xs, ys;
  for (double eps : eps_list) {
    Params p = base;
    p.eps = eps;
    p.xi = xi;
    BerisSolver full(g, p, {dt, "imex2", 100.0});
    full.init(u0, q0);
    double sup = 0.0;
    for (std::size_t s = 0; s < sample_times.size(); ++s) {
      full.advance_to(sample_times[s]);
      SimState st = full.state();
      Field w = st.u;
      Field S = st.Q;
      for (int m = 0; m < 3; ++m)
        for (std::size_t pt = 0; pt < g.size(); ++pt)
          w.c[m][pt] -= v_snap[s].c[m][pt];
      for (int m = 0; m < 5; ++m)
        for (std::size_t pt = 0; pt < g.size(); ++pt)
          S.c[m][pt] -= r_snap[s].c[m][pt];
      sup = std::max(sup, error_functional(w, S, eps));
    }
    EricksenRow row;
    row.eps = eps;
    row.sup_Y = sup;
    xs.push_back(eps);
    ys.push_back(sup);
    row.slope_running = xs.size() >= 2 ? fit_loglog_slope(xs, ys) : 0.0;
    out.rows.push_back(row);
  }
  out.slope = fit_loglog_slope(xs, ys);
  for (std::size_t i = 0; i + 1 < out.rows.size(); ++i)
    if (std::abs(out.rows[i + 1].eps - 0.5 * out.rows[i].eps) < 1e-12)
      out.halving_ratios.push_back(out.rows[i + 1].sup_Y / out.rows[i].sup_Y);
  return out;
}

}  // namespace qbe

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "qbe/bulk_ode.hpp"
#include "qbe/errors.hpp"
#include "qbe/limit.hpp"

namespace qbe {

enum class StagnationKind { elliptic, hyperbolic, degenerate };

struct StagnationPoint {
  double x = 0.0, y = 0.0;
  StagnationKind kind = StagnationKind::degenerate;
  double omega = 0.0;
  bool isolated = true;   // Newton Jacobian nonsingular
  bool standard = false;  // nearby vorticity differs from the on-point value
};

namespace defect_detail {

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

}  // namespace defect_detail

/// Newton refinement of velocity zeros seeded from a coarse scan, classified
/// by the Hessian of the stream function. Points on non-isolated zero sets
/// (singular Jacobian) are flagged degenerate. The "standard" flag checks
/// that the vorticity is non-constant on a shrinking sequence of circles
/// around the point.
inline std::vector<StagnationPoint> find_stagnation_points(
    const StationaryFlow& flow, int scan_n = 48) {
  const double h = 1e-6;
  double vmax = 0.0;
  for (int i = 0; i < scan_n; ++i)
    for (int j = 0; j < scan_n; ++j) {
      auto v = flow.velocity(-M_PI + 2.0 * M_PI * i / scan_n,
                             -M_PI + 2.0 * M_PI * j / scan_n);
      vmax = std::max(vmax, std::hypot(v[0], v[1]));
    }
  if (vmax < 1e-12)
    throw validation_error("find_stagnation_points: flow velocity vanishes "
                           "identically (every point stagnates)");

  std::vector<StagnationPoint> found;
  for (int i = 0; i < scan_n; ++i)
    for (int j = 0; j < scan_n; ++j) {
      double x = -M_PI + 2.0 * M_PI * (i + 0.5) / scan_n;
      double y = -M_PI + 2.0 * M_PI * (j + 0.5) / scan_n;
      bool converged = false;
      bool singular = false;
      for (int it = 0; it < 60; ++it) {
        auto v = flow.velocity(x, y);
        if (std::hypot(v[0], v[1]) < 1e-13) {
          converged = true;
          break;
        }
        auto vxp = flow.velocity(x + h, y), vxm = flow.velocity(x - h, y);
        auto vyp = flow.velocity(x, y + h), vym = flow.velocity(x, y - h);
        double j00 = (vxp[0] - vxm[0]) / (2.0 * h);
        double j01 = (vyp[0] - vym[0]) / (2.0 * h);
        double j10 = (vxp[1] - vxm[1]) / (2.0 * h);
        double j11 = (vyp[1] - vym[1]) / (2.0 * h);
        double det = j00 * j11 - j01 * j10;
        if (std::abs(det) < 1e-9 * vmax * vmax) {
          // descent on F = |v|^2/2 along its gradient J^T v with the
          // F/|grad F| step length; lines of zeros land here
          singular = true;
          double g0 = j00 * v[0] + j10 * v[1];
          double g1 = j01 * v[0] + j11 * v[1];
          double gn2 = g0 * g0 + g1 * g1;
          if (gn2 < 1e-28) break;
          double fval = 0.5 * (v[0] * v[0] + v[1] * v[1]);
          x -= fval / gn2 * g0;
          y -= fval / gn2 * g1;
          continue;
        }
        x -= (j11 * v[0] - j01 * v[1]) / det;
        y -= (-j10 * v[0] + j00 * v[1]) / det;
      }
      auto vf = flow.velocity(x, y);
      if (std::hypot(vf[0], vf[1]) > 1e-10) continue;  // dropped with no record
      StagnationPoint p;
      p.x = defect_detail::wrap_angle(x);
      p.y = defect_detail::wrap_angle(y);
      p.omega = flow.omega(p.x, p.y);
      p.isolated = !singular;

      const double hh = 1e-4;
      double pxx = (flow.psi(p.x + hh, p.y) - 2.0 * flow.psi(p.x, p.y) +
                    flow.psi(p.x - hh, p.y)) /
                   (hh * hh);
      double pyy = (flow.psi(p.x, p.y + hh) - 2.0 * flow.psi(p.x, p.y) +
                    flow.psi(p.x, p.y - hh)) /
                   (hh * hh);
      double pxy = (flow.psi(p.x + hh, p.y + hh) - flow.psi(p.x + hh, p.y - hh) -
                    flow.psi(p.x - hh, p.y + hh) + flow.psi(p.x - hh, p.y - hh)) /
                   (4.0 * hh * hh);
      double det = pxx * pyy - pxy * pxy;
      if (!p.isolated || std::abs(det) < 1e-6)
        p.kind = StagnationKind::degenerate;
      else
        p.kind = det > 0.0 ? StagnationKind::elliptic : StagnationKind::hyperbolic;

      p.standard = true;
      for (int l = 0; l <= 10; ++l) {
        double r = std::pow(0.5, l);
        double dev = 0.0;
        for (int s = 0; s < 16; ++s) {
          double a = 2.0 * M_PI * s / 16.0;
          dev = std::max(dev, std::abs(flow.omega(p.x + r * std::cos(a),
                                                  p.y + r * std::sin(a)) -
                                       p.omega));
        }
        if (dev <= 1e-12) {
          p.standard = false;
          break;
        }
      }

      bool dup = false;
      for (const auto& q : found) {
        double dx = defect_detail::wrap_angle(p.x - q.x);
        double dy = defect_detail::wrap_angle(p.y - q.y);
        if (std::hypot(dx, dy) < 1e-5) {
          dup = true;
          break;
        }
      }
      if (!dup) found.push_back(p);
    }
  return found;
}

struct GrowthRow {
  double t = 0.0;
  double max_grad = 0.0;
  bool resolved = true;
  double probe_angle = std::nan("");
};

struct PhaseMismatchResult {
  std::vector<GrowthRow> rows;
  Field final_R;
};

/// Flow-free defect generation: per grid point the reaction ODE drives the
/// uniaxial amplitude s(x) = x1 exp(-x1^2) to s- for x1 < 0 and s+ for
/// x1 > 0, steepening the profile across x1 = 0. max |grad R| is measured
/// spectrally at the sample times. The seed's Gaussian envelope is below
/// 6e-5 at |x1| = pi, so the periodic seam contributes no visible gradient.
inline PhaseMismatchResult phase_mismatch_run(const Params& p, Grid g,
                                              const std::vector<double>& times,
                                              double dt = 2e-3) {
  if (!(p.a < 0.0 && p.b > 0.0 && p.c > 0.0))
    throw validation_error("phase_mismatch_run requires a<0, b>0, c>0");
  Field r = Field::qtensor(g);
  for (int i = 0; i < g.n; ++i) {
    double x = g.x(i);
    double s = x * std::exp(-x * x);
    QTensor q = QTensor::uniaxial(s, 1.0, 0.0, 0.0);
    for (int j = 0; j < g.n; ++j) r.set_q(g.idx(i, j), q);
  }
  PhaseMismatchResult out;
  double t = 0.0;
  for (double target : times) {
    long nstep = std::lround((target - t) / dt);
    if (nstep > 0) {
      parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t pt = lo; pt < hi; ++pt) {
          QTensor q = r.q_at(pt);
          for (long k = 0; k < nstep; ++k) {
            QTensor k1 = reaction_rhs(q, p);
            QTensor k2 = reaction_rhs(q + k1 * (0.5 * dt), p);
            QTensor k3 = reaction_rhs(q + k2 * (0.5 * dt), p);
            QTensor k4 = reaction_rhs(q + k3 * dt, p);
            q += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
          }
          r.set_q(pt, q);
        }
      });
      t += nstep * dt;
    }
    GrowthRow row;
    row.t = t;
    row.max_grad = max_gradient(r);
    row.resolved = spec::tail_fraction(to_spec(r)) <= 1e-8;
    out.rows.push_back(row);
  }
  out.final_R = r;
  return out;
}

struct VortexReport {
  std::vector<GrowthRow> rows;  // PDE measurements
  std::vector<double> oracle_max_grad;
  std::vector<double> rel_gap;  // |pde - oracle| / oracle per sample
  double probe_delta_omega = 0.0;
  double probe_time = 0.0;       // pi / |delta omega|: predicted right angle
  double probe_angle_at_tk = 0.0;  // measured director angle at probe_time
};

namespace defect_detail {

/// Director separation angle in [0, pi/2] between B1 e1 and B2 e1.
inline double director_angle(const Mat3& b1, const Mat3& b2) {
  double dot = 0.0;
  for (int i = 0; i < 3; ++i) dot += b1.m[i][0] * b2.m[i][0];
  return std::acos(std::clamp(std::abs(dot), 0.0, 1.0));
}

}  // namespace defect_detail

/// Vorticity-driven defect growth: uniform s+ data under a stationary flow.
/// Evolves the limit transport and the Lagrangian exact solution, reports
/// max |grad R| for both at the requested times, and measures the director
/// angle between two probe points straddling a stagnation point. The probe
/// time is pi/|delta omega|, the time at which the differential rotation at
/// rate omega/2 predicts a right angle.
inline VortexReport vortex_defect_run(const StationaryFlow& flow, const Params& p,
                                      Grid g, const std::vector<double>& times,
                                      double dt = 1e-3,
                                      std::array<double, 2> probe_center = {0.0, 0.0},
                                      double probe_offset = 0.35) {
  StationaryScalars sc = stationary_scalars(p);
  QTensor uniform = QTensor::uniaxial(sc.s_plus, 1.0, 0.0, 0.0);
  Field r0 = Field::qtensor(g);
  for (std::size_t pt = 0; pt < g.size(); ++pt) r0.set_q(pt, uniform);

  LimitSolver solver(g, p, dt);
  solver.init(flow.sample_vorticity(g), Field::scalar(g), r0);
  solver.freeze_flow(true);

  auto q0 = [&](double, double) { return uniform; };
  VortexReport out;
  for (double target : times) {
    solver.advance_to(target);
    Field pde = solver.state().R;
    GrowthRow row;
    row.t = solver.time();
    row.max_grad = max_gradient(pde);
    row.resolved = solver.r_tail_fraction() <= 1e-8;
    Field oracle = lagrangian_solution(q0, flow, p, solver.time(), g, 1e-2);
    double og = max_gradient(oracle);
    out.oracle_max_grad.push_back(og);
    out.rel_gap.push_back(og > 0.0 ? std::abs(row.max_grad - og) / og : 0.0);
    out.rows.push_back(row);
  }

  // probe pair: the stagnation point itself and a nearby point
  double cx = probe_center[0], cy = probe_center[1];
  double px = cx + probe_offset, py = cy;
  out.probe_delta_omega = flow.omega(px, py) - flow.omega(cx, cy);
  if (out.probe_delta_omega != 0.0) {
    out.probe_time = M_PI / std::abs(out.probe_delta_omega);
    TrajectorySet ts =
        trace_particles(flow, {{cx, cy}, {px, py}}, out.probe_time, 1e-3, +1,
                        1 << 30);
    out.probe_angle_at_tk =
        defect_detail::director_angle(ts.seeds[0].B, ts.seeds[1].B);
    for (auto& row : out.rows) {
      TrajectorySet tr =
          trace_particles(flow, {{cx, cy}, {px, py}}, row.t, 1e-3, +1, 1 << 30);
      row.probe_angle = defect_detail::director_angle(tr.seeds[0].B, tr.seeds[1].B);
    }
  }
  return out;
}

struct EscapeReport {
  Params scaled;          // lambda-scaled coefficient set actually run
  double m_interval = 0.0;  // interval radius m(lambda)
  double first_exit_t = -1.0;
  double margin_reached_t = -1.0;  // first time the excursion exceeds 5% width
  double max_margin = 0.0;         // max excursion / interval width
  double ode_exit_t = -1.0;        // pointwise strain-ODE cross-check
  bool control_exited = false;     // xi = 0 control from identical data
  std::vector<std::array<double, 3>> trace;  // (t, min_eig, max_eig)
};

/// Eigenvalue escape for xi != 0: runs the non-corotational limit transport
/// from Q0 = 0 under a stationary flow with nonzero strain, with coefficients
/// a = lambda a0, b = sqrt(lambda) b0, c = c0. The preserved interval shrinks
/// like sqrt(lambda) while the strain forcing does not, so the eigenvalues
/// exit in finite time; the corotational control from the same data stays
/// inside. A pointwise strain ODE at the maximum-strain point cross-checks
/// the first-exit time.
inline EscapeReport xi_escape_run(double a0, double b0, double c0, double lambda,
                                  double xi, const StationaryFlow& flow, Grid g,
                                  double T, double dt = 1e-3,
                                  double margin_target = 0.05) {
  if (xi == 0.0) throw validation_error("xi_escape_run requires xi != 0");
  if (!(b0 > 0.0 && c0 > 0.0 && std::abs(a0) < b0 * b0 / (3.0 * c0)))
    throw validation_error("xi_escape_run: base coefficients violate b0>0, "
                           "c0>0, |a0| < b0^2/(3 c0)");
  Params p;
  p.a = lambda * a0;
  p.b = std::sqrt(lambda) * b0;
  p.c = c0;
  p.xi = xi;
  p.eps = 0.0;  // inviscid limit system
  EscapeReport out;
  out.scaled = p;
  StationaryScalars sc = stationary_scalars(p);
  out.m_interval = sc.m;
  double width = 3.0 * sc.m;

  auto eig_range = [&](const Field& r, double* mn, double* mx) {
    *mn = 1e300;
    *mx = -1e300;
    for (std::size_t pt = 0; pt < r.grid.size(); ++pt) {
      EigenTriple e = eigenvalues(r.q_at(pt));
      *mn = std::min(*mn, e.l1);
      *mx = std::max(*mx, e.l3);
    }
  };

  {
    LimitSolver solver(g, p, dt);
    solver.init(flow.sample_vorticity(g), Field::scalar(g), Field::qtensor(g));
    solver.freeze_flow(true);
    while (solver.time() < T) {
      solver.step();
      double mn, mx;
      Field r = solver.state().R;
      eig_range(r, &mn, &mx);
      out.trace.push_back({solver.time(), mn, mx});
      double excess = std::max(-sc.m - mn, mx - 2.0 * sc.m);
      double margin = excess / width;
      out.max_margin = std::max(out.max_margin, margin);
      if (excess > 0.0 && out.first_exit_t < 0.0) out.first_exit_t = solver.time();
      if (margin >= margin_target && out.margin_reached_t < 0.0) {
        out.margin_reached_t = solver.time();
        break;  // located the escape with the requested margin
      }
    }
  }

  {
    // corotational control from identical data and horizon
    Params pc = p;
    pc.xi = 0.0;
    double t_control = std::min(T, 2.0);
    LimitSolver control(g, pc, dt);
    control.init(flow.sample_vorticity(g), Field::scalar(g), Field::qtensor(g));
    control.freeze_flow(true);
    control.advance_to(t_control);
    double mn, mx;
    Field r = control.state().R;
    eig_range(r, &mn, &mx);
    out.control_exited = mn < -sc.m - 1e-12 || mx > 2.0 * sc.m + 1e-12;
  }

  {
    // strain ODE at the maximum-strain point of the flow
    const double h = 1e-6;
    double best = -1.0;
    Mat3 dbest = Mat3::zero();
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        double x = g.x(i), y = g.y(j);
        auto vxp = flow.velocity(x + h, y), vxm = flow.velocity(x - h, y);
        auto vyp = flow.velocity(x, y + h), vym = flow.velocity(x, y - h);
        Mat3 gu = Mat3::zero();
        for (int m = 0; m < 3; ++m) {
          gu.m[m][0] = (vxp[m] - vxm[m]) / (2.0 * h);
          gu.m[m][1] = (vyp[m] - vym[m]) / (2.0 * h);
        }
        Mat3 d;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            d.m[a][b] = 0.5 * (gu.m[a][b] + gu.m[b][a]);
        if (d.frobenius() > best) {
          best = d.frobenius();
          dbest = d;
        }
      }
    Mat3 deff = xi * dbest;
    integrate_strain_ode(QTensor::zero(), deff, T, 1e-4,
                         [&](double t, const QTensor& r) {
                           EigenTriple e = eigenvalues(r);
                           if (e.l1 < -sc.m || e.l3 > 2.0 * sc.m) {
                             out.ode_exit_t = t;
                             return false;
                           }
                           return true;
                         });
  }
  return out;
}

}  // namespace qbe

#pragma once

#include <cmath>
#include <vector>

#include "qbe/bulk_ode.hpp"
#include "qbe/errors.hpp"
#include "qbe/stats.hpp"
#include "qbe/flows.hpp"
#include "qbe/parallel.hpp"
#include "qbe/spectral.hpp"

namespace qbe {

struct SplitConfig {
  int n_split = 1;     // composition intervals over [0, T]
  double T = 1.0;      // horizon
  double dt_sub = 1e-3;  // substep for each half-flow
};

namespace detail {

/// Velocity and rotation samples reused by every substep of a prescribed
/// stationary flow.
struct FlowSamples {
  std::vector<double> u0, u1;
  std::vector<double> w01, w02, w12;  // independent entries of (grad u - grad u^T)/2

  FlowSamples(const PrescribedFlow& flow, Grid g) {
    std::size_t np = g.size();
    u0 = flow.u.c[0];
    u1 = flow.u.c[1];
    Field dux = derivative(flow.u, 0, 1);
    Field duy = derivative(flow.u, 1, 1);
    w01.resize(np);
    w02.resize(np);
    w12.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
      // (grad u)_{ij} = du_i/dx_j; only x and y derivatives are nonzero
      w01[p] = 0.5 * (duy.c[0][p] - dux.c[1][p]);
      w02[p] = -0.5 * dux.c[2][p];
      w12[p] = -0.5 * duy.c[2][p];
    }
  }

  Mat3 omega(std::size_t p) const {
    Mat3 w = Mat3::zero();
    w.m[0][1] = w01[p];
    w.m[1][0] = -w01[p];
    w.m[0][2] = w02[p];
    w.m[2][0] = -w02[p];
    w.m[1][2] = w12[p];
    w.m[2][1] = -w12[p];
    return w;
  }
};

/// One integrating-factor RK2 substep of dR/dt = eps Lap R + N(R), where
/// N(R) = -u.grad R + W R - R W (+ optionally the reaction term). The heat
/// part is advanced by its exact propagator, so u = 0 reproduces mode-wise
/// exponential decay to rounding.
class EvolutionStepper {
 public:
  EvolutionStepper(Grid g, const FlowSamples& fs, double eps, bool with_reaction,
                   const Params& p)
      : g_(g), fs_(fs), eps_(eps), with_reaction_(with_reaction), p_(p) {}

  void rhs(const SpecField& rh, SpecField& nr) const {
    const Fft2D& fft = Fft2D::get(g_.n);
    std::size_t np = g_.size();
    int nyq = g_.n / 2;
    Field r = to_phys(rh, PayloadKind::qtensor);
    std::vector<std::vector<double>> dr(10, std::vector<double>(np));
    std::vector<std::complex<double>> work(g_.spec_size());
    for (int m = 0; m < 5; ++m)
      for (int axis = 0; axis < 2; ++axis) {
        work = rh.c[m];
        spec::for_each_mode(g_, [&](std::size_t s, int kx, int ky) {
          int k = axis == 0 ? kx : ky;
          work[s] = spec::times_ik(work[s], std::abs(k) == nyq ? 0.0 : double(k));
        });
        fft.backward(work.data(), dr[2 * m + axis].data());
      }
    std::vector<std::vector<double>> out(5, std::vector<double>(np));
    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t pt = lo; pt < hi; ++pt) {
        QTensor rp = r.q_at(pt);
        Mat3 rm = rp.matrix();
        Mat3 rot = commutator(fs_.omega(pt), rm);
        QTensor dxr{dr[0][pt], dr[2][pt], dr[4][pt], dr[6][pt], dr[8][pt]};
        QTensor dyr{dr[1][pt], dr[3][pt], dr[5][pt], dr[7][pt], dr[9][pt]};
        QTensor n = QTensor::from_matrix(rot) - dxr * fs_.u0[pt] - dyr * fs_.u1[pt];
        if (with_reaction_) n += reaction_rhs(rp, p_);
        out[0][pt] = n.q11;
        out[1][pt] = n.q12;
        out[2][pt] = n.q13;
        out[3][pt] = n.q22;
        out[4][pt] = n.q23;
      }
    });
    for (int m = 0; m < 5; ++m) fft.forward(out[m].data(), nr.c[m].data());
    spec::dealias_inplace(nr);
  }

  void advance(SpecField& rh, double span, double dt) const {
    int nsub = std::max(1, int(std::ceil(span / dt - 1e-12)));
    double h = span / nsub;
    SpecField k1(g_, 5), k2(g_, 5), mid(g_, 5);
    for (int s = 0; s < nsub; ++s) {
      rhs(rh, k1);
      heat_combine(rh, k1, 0.5 * h, 0.5 * h, mid);
      rhs(mid, k2);
      for (int m = 0; m < 5; ++m) {
        spec::for_each_mode(g_, [&](std::size_t q, int kx, int ky) {
          double k2sq = double(kx * kx + ky * ky);
          double ef = std::exp(-eps_ * k2sq * h);
          double eh = std::exp(-eps_ * k2sq * 0.5 * h);
          rh.c[m][q] = ef * rh.c[m][q] + h * eh * k2.c[m][q];
        });
      }
      if (!rh.finite())
        throw divergence_error("evolution substep diverged", (s + 1) * h, s + 1);
    }
  }

 private:
  void heat_combine(const SpecField& base, const SpecField& slope, double dts,
                    double tau, SpecField& out) const {
    for (int m = 0; m < 5; ++m) {
      spec::for_each_mode(g_, [&](std::size_t q, int kx, int ky) {
        double e = std::exp(-eps_ * double(kx * kx + ky * ky) * tau);
        out.c[m][q] = e * (base.c[m][q] + dts * slope.c[m][q]);
      });
    }
  }

  Grid g_;
  const FlowSamples& fs_;
  double eps_;
  bool with_reaction_;
  Params p_;
};

}  // namespace detail

/// Linear non-autonomous half-flow: dR/dt - eps Lap R = -u.grad R + W R - R W
/// advanced from time s to t for a prescribed flow.
inline Field advection_diffusion_substep(const Field& r, const PrescribedFlow& flow,
                                         double s, double t, double eps,
                                         double dt_sub = 1e-3) {
  if (t <= s) throw validation_error("substep requires t > s");
  Grid g = r.grid;
  detail::FlowSamples fs(flow, g);
  detail::EvolutionStepper stepper(g, fs, eps, false, Params{});
  SpecField rh = to_spec(r);
  spec::dealias_inplace(rh);
  stepper.advance(rh, t - s, dt_sub);
  return to_phys(rh, PayloadKind::qtensor);
}

/// Composition solver: on each of the n_split intervals applies the reaction
/// flow over T/n first and the advection-rotation-diffusion evolution second.
/// The reaction half-flow runs per grid point in the frozen eigenframe.
inline Field splitting_solve(const Field& q0, const PrescribedFlow& flow,
                             const Params& p, const SplitConfig& cfg) {
  if (cfg.n_split < 1) throw validation_error("n_split must be >= 1");
  Grid g = q0.grid;
  detail::FlowSamples fs(flow, g);
  detail::EvolutionStepper stepper(g, fs, p.eps, false, p);
  double tau = cfg.T / cfg.n_split;
  bool trivial_reaction = p.a == 0.0 && p.b == 0.0 && p.c == 0.0;

  SpecField rh = to_spec(q0);
  spec::dealias_inplace(rh);
  OdeConfig ode{std::min(1e-3, tau), OdeMethod::eigenframe, tau, 1e-12};
  for (int k = 0; k < cfg.n_split; ++k) {
    if (!trivial_reaction) {
      Field q = to_phys(rh, PayloadKind::qtensor);
      parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t pt = lo; pt < hi; ++pt)
          q.set_q(pt, integrate_reaction(q.q_at(pt), p, ode));
      });
      rh = to_spec(q);
      spec::dealias_inplace(rh);
    }
    stepper.advance(rh, tau, cfg.dt_sub);
  }
  return to_phys(rh, PayloadKind::qtensor);
}

/// Unsplit reference: one integrating-factor RK2 integration of the full
/// Q-equation (advection + rotation + reaction) at a fine step.
inline Field direct_solve(const Field& q0, const PrescribedFlow& flow,
                          const Params& p, double T, double dt) {
  Grid g = q0.grid;
  detail::FlowSamples fs(flow, g);
  detail::EvolutionStepper stepper(g, fs, p.eps, true, p);
  SpecField rh = to_spec(q0);
  spec::dealias_inplace(rh);
  stepper.advance(rh, T, dt);
  return to_phys(rh, PayloadKind::qtensor);
}

struct RateRow {
  int n = 0;
  double h2_error = 0.0;
  double slope_so_far = 0.0;  // running least-squares slope of log err vs log n
};

struct RateStudy {
  std::vector<RateRow> rows;
  double slope = 0.0;
  double reference_error = 0.0;  // dt-halving estimate of the reference's own error
  double dt_ref = 0.0;
};

/// Splitting error against the fine-dt direct reference for each n in
/// n_list. The reference step obeys dt_ref <= T/(16 max n) and its own
/// discretization error is estimated by dt halving.
inline RateStudy rate_study(const Field& q0, const PrescribedFlow& flow,
                            const Params& p, double T,
                            const std::vector<int>& n_list) {
  if (n_list.empty()) throw validation_error("rate_study: empty n list");
  int n_max = n_list.back();
  RateStudy out;
  out.dt_ref = T / (16.0 * n_max);
  Field ref = direct_solve(q0, flow, p, T, out.dt_ref);
  Field ref2 = direct_solve(q0, flow, p, T, 0.5 * out.dt_ref);
  {
    SpecField d = to_spec(ref);
    SpecField d2 = to_spec(ref2);
    for (int m = 0; m < 5; ++m)
      for (std::size_t s = 0; s < d.c[m].size(); ++s) d.c[m][s] -= d2.c[m][s];
    out.reference_error = spec::sobolev_norm(d, 2);
  }
  std::vector<double> xs, ys;
  for (int n : n_list) {
    Field u = splitting_solve(q0, flow, p, {n, T, out.dt_ref});
    SpecField d = to_spec(u);
    SpecField r = to_spec(ref);
    for (int m = 0; m < 5; ++m)
      for (std::size_t s = 0; s < d.c[m].size(); ++s) d.c[m][s] -= r.c[m][s];
    RateRow row;
    row.n = n;
    row.h2_error = spec::sobolev_norm(d, 2);
    xs.push_back(double(n));
    ys.push_back(row.h2_error);
    row.slope_so_far = xs.size() >= 2 ? fit_loglog_slope(xs, ys) : 0.0;
    out.rows.push_back(row);
  }
  out.slope = fit_loglog_slope(xs, ys);
  return out;
}

}  // namespace qbe

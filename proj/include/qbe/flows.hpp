#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "qbe/errors.hpp"
#include "qbe/field.hpp"
#include "qbe/spectral.hpp"

namespace qbe {

/// Stationary solution of the 2-D incompressible Euler equations given by an
/// analytic stream function psi, with v = (d_y psi, -d_x psi, 0) and
/// vorticity omega = -Lap psi. Analytic closures allow exact evaluation at
/// off-grid points (particle tracing, Newton refinement).
struct StationaryFlow {
  std::string name;
  std::function<double(double, double)> psi;
  std::function<std::array<double, 3>(double, double)> velocity;
  std::function<double(double, double)> omega;

  Field sample_velocity(Grid g) const {
    Field u = Field::velocity(g);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        auto v = velocity(g.x(i), g.y(j));
        std::size_t p = g.idx(i, j);
        u.c[0][p] = v[0];
        u.c[1][p] = v[1];
        u.c[2][p] = v[2];
      }
    return u;
  }

  Field sample_vorticity(Grid g) const {
    Field w = Field::scalar(g);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) w.c[0][g.idx(i, j)] = omega(g.x(i), g.y(j));
    return w;
  }
};

/// Built-in stationary flows: taylor_green (psi = cos x cos y), shear
/// (v = (sin y, 0, 0)) and zero.
inline StationaryFlow builtin_flow(const std::string& name) {
  if (name == "taylor_green") {
    return StationaryFlow{
        name,
        [](double x, double y) { return std::cos(x) * std::cos(y); },
        [](double x, double y) -> std::array<double, 3> {
          return {-std::cos(x) * std::sin(y), std::sin(x) * std::cos(y), 0.0};
        },
        [](double x, double y) { return 2.0 * std::cos(x) * std::cos(y); }};
  }
  if (name == "shear") {
    return StationaryFlow{
        name, [](double, double y) { return -std::cos(y); },
        [](double, double y) -> std::array<double, 3> {
          return {std::sin(y), 0.0, 0.0};
        },
        [](double, double y) { return -std::cos(y); }};
  }
  if (name == "zero") {
    return StationaryFlow{name, [](double, double) { return 0.0; },
                          [](double, double) -> std::array<double, 3> {
                            return {0.0, 0.0, 0.0};
                          },
                          [](double, double) { return 0.0; }};
  }
  throw validation_error("unknown builtin flow: " + name);
}

/// Velocity prescribed for the Q-equation solvers, sampled on the grid.
/// The divergence of the in-plane components must vanish to 1e-10.
struct PrescribedFlow {
  Field u;  // vec3 sample

  explicit PrescribedFlow(Field sampled) : u(std::move(sampled)) {
    if (spec::divergence_l2(to_spec(u)) > 1e-10)
      throw validation_error("PrescribedFlow: velocity is not divergence-free");
  }

  PrescribedFlow(const StationaryFlow& flow, Grid g)
      : PrescribedFlow(flow.sample_velocity(g)) {}
};

}  // namespace qbe

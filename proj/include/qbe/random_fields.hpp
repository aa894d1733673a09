#pragma once

#include <random>

#include "qbe/field.hpp"
#include "qbe/spectral.hpp"

namespace qbe {

/// Band-limited random scalar: modes 0 < max(|kx|,|ky|) <= kmax with
/// seed-deterministic normal coefficients weighted by 1/(1+|k|^2). Fixed
/// mode ordering keeps a given seed reproducible.
inline Field band_limited_scalar(Grid g, std::mt19937_64& rng, int kmax = 4) {
  std::normal_distribution<double> coef(0.0, 1.0);
  struct Mode {
    double kx, ky, ca, cb;
  };
  std::vector<Mode> modes;
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      double w = 1.0 / (1.0 + double(kx * kx + ky * ky));
      modes.push_back({double(kx), double(ky), w * coef(rng), w * coef(rng)});
    }
  Field f = Field::scalar(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      double x = g.x(i), y = g.y(j);
      double v = 0.0;
      for (const auto& m : modes)
        v += m.ca * std::cos(m.kx * x + m.ky * y) +
             m.cb * std::sin(m.kx * x + m.ky * y);
      f.c[0][g.idx(i, j)] = v;
    }
  return f;
}

inline void rescale_linf(Field& f, double target) {
  double peak = 0.0;
  for (const auto& comp : f.c)
    for (double v : comp) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return;
  for (auto& comp : f.c)
    for (auto& v : comp) v *= target / peak;
}

/// Divergence-free band-limited velocity with the requested max amplitude.
inline Field random_velocity(Grid g, std::uint64_t seed, double amplitude,
                             int kmax = 4) {
  std::mt19937_64 rng(seed);
  Field u = Field::velocity(g);
  for (int m = 0; m < 3; ++m) u.c[m] = band_limited_scalar(g, rng, kmax).c[0];
  u = leray_project(u);
  rescale_linf(u, amplitude);
  return u;
}

/// Band-limited Q-tensor field; symmetric traceless by construction. When
/// rescale_to_interval is set the field is scaled so every grid eigenvalue
/// lies inside fill * [-m, 2m].
inline Field random_qfield(Grid g, std::uint64_t seed, const Params& p,
                           bool rescale_to_interval, double amplitude = 0.2,
                           int kmax = 4, double fill = 0.95) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  Field q = Field::qtensor(g);
  for (int m = 0; m < 5; ++m) q.c[m] = band_limited_scalar(g, rng, kmax).c[0];
  if (rescale_to_interval) {
    StationaryScalars s = stationary_scalars(p);
    double lo = 0.0, hi = 0.0;
    for (std::size_t pt = 0; pt < g.size(); ++pt) {
      EigenTriple e = eigenvalues(q.q_at(pt));
      lo = std::min(lo, e.l1);
      hi = std::max(hi, e.l3);
    }
    double scale = 1.0;
    if (lo < 0.0) scale = std::min(scale, -s.m / lo);
    if (hi > 0.0) scale = std::min(scale, 2.0 * s.m / hi);
    for (auto& comp : q.c)
      for (auto& v : comp) v *= fill * scale;
  } else {
    double peak = 0.0;
    for (std::size_t pt = 0; pt < g.size(); ++pt)
      peak = std::max(peak, q.q_at(pt).norm());
    if (peak > 0.0)
      for (auto& comp : q.c)
        for (auto& v : comp) v *= amplitude / peak;
  }
  return q;
}

}  // namespace qbe

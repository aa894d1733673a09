#pragma once

#include <cmath>
#include <complex>

#include "qbe/fft.hpp"
#include "qbe/field.hpp"

namespace qbe {

inline void to_spec_into(const Field& f, SpecField& s) {
  const Fft2D& fft = Fft2D::get(f.grid.n);
  for (int m = 0; m < f.ncomp(); ++m) fft.forward(f.c[m].data(), s.c[m].data());
}

inline void to_phys_into(const SpecField& s, Field& f) {
  const Fft2D& fft = Fft2D::get(s.grid.n);
  for (int m = 0; m < s.ncomp(); ++m) fft.backward(s.c[m].data(), f.c[m].data());
}

inline SpecField to_spec(const Field& f) {
  SpecField s(f.grid, f.ncomp());
  to_spec_into(f, s);
  return s;
}

inline Field to_phys(const SpecField& s, PayloadKind kind) {
  Field f(s.grid, kind);
  to_phys_into(s, f);
  return f;
}

namespace spec {

/// v * (i k) without the library complex-multiply call.
inline std::complex<double> times_ik(std::complex<double> v, double k) {
  return {-v.imag() * k, v.real() * k};
}

/// Visit every retained mode as (flat index, kx, ky).
template <typename Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  int cols = g.spec_cols();
  for (int i = 0; i < g.n; ++i) {
    int kx = g.kx(i);
    for (int j = 0; j < cols; ++j) fn(std::size_t(i) * cols + j, kx, g.ky(j));
  }
}

/// d/d{axis} of given order. The Nyquist mode is zeroed for odd orders, so
/// differentiation is exact for trigonometric polynomials with |k| < n/2.
inline void derivative_inplace(SpecField& s, int axis, int order) {
  const Grid& g = s.grid;
  int nyq = g.n / 2;
  for (auto& comp : s.c) {
    for_each_mode(g, [&](std::size_t p, int kx, int ky) {
      int k = axis == 0 ? kx : ky;
      if (order == 1)
        comp[p] = times_ik(comp[p], std::abs(k) == nyq ? 0.0 : double(k));
      else
        comp[p] *= -double(k) * k;
    });
  }
}

inline void laplacian_inplace(SpecField& s) {
  for (auto& comp : s.c) {
    for_each_mode(s.grid, [&](std::size_t p, int kx, int ky) {
      comp[p] *= -double(kx * kx + ky * ky);
    });
  }
}

/// Two-thirds rule: zero all modes with max(|kx|, |ky|) > n/3.
inline void dealias_inplace(SpecField& s) {
  int cutoff = s.grid.n / 3;
  for (auto& comp : s.c) {
    for_each_mode(s.grid, [&](std::size_t p, int kx, int ky) {
      if (std::abs(kx) > cutoff || std::abs(ky) > cutoff) comp[p] = 0.0;
    });
  }
}

/// Project the in-plane components (0,1) of a velocity spectrum onto the
/// divergence-free subspace with I - k k^T/|k|^2; the third component has no
/// x3 dependence and passes through. The k = 0 mode (mean flow) is kept.
inline void leray_inplace(SpecField& u) {
  for_each_mode(u.grid, [&](std::size_t p, int kx, int ky) {
    double k2 = double(kx * kx + ky * ky);
    if (k2 == 0.0) return;
    std::complex<double> div = (double(kx) * u.c[0][p] + double(ky) * u.c[1][p]) / k2;
    u.c[0][p] -= double(kx) * div;
    u.c[1][p] -= double(ky) * div;
  });
}

/// L2 norm of the spectral divergence of the in-plane components.
inline double divergence_l2(const SpecField& u) {
  double sum = 0.0;
  for_each_mode(u.grid, [&](std::size_t p, int kx, int ky) {
    std::complex<double> d =
        times_ik(u.c[0][p], double(kx)) + times_ik(u.c[1][p], double(ky));
    double w = (ky == 0 || ky == u.grid.n / 2) ? 1.0 : 2.0;
    sum += w * std::norm(d);
  });
  return 2.0 * M_PI * std::sqrt(sum);
}

/// Sobolev norm sqrt( sum_k (1+|k|^2)^s |f_k|^2 ) over all components,
/// normalized so that s = 0 coincides with the L2(T^2) norm.
inline double sobolev_norm(const SpecField& f, int s) {
  double sum = 0.0;
  for (const auto& comp : f.c) {
    for_each_mode(f.grid, [&](std::size_t p, int kx, int ky) {
      double w = (ky == 0 || ky == f.grid.n / 2) ? 1.0 : 2.0;
      double k2 = double(kx * kx + ky * ky);
      double mult = 1.0;
      for (int q = 0; q < s; ++q) mult *= 1.0 + k2;
      sum += w * mult * std::norm(comp[p]);
    });
  }
  return 2.0 * M_PI * std::sqrt(sum);
}

inline double l2_norm(const SpecField& f) { return sobolev_norm(f, 0); }

/// Solve -Lap psi = omega; the mean of psi is gauged to zero.
inline void stream_from_vorticity(const SpecField& omega, SpecField& psi) {
  psi = omega;
  for_each_mode(omega.grid, [&](std::size_t p, int kx, int ky) {
    double k2 = double(kx * kx + ky * ky);
    psi.c[0][p] = k2 == 0.0 ? 0.0 : omega.c[0][p] / k2;
  });
}

/// Fraction of spectral energy in the outer shell just below the dealias
/// cutoff; a proxy for loss of resolution.
inline double tail_fraction(const SpecField& f) {
  int cutoff = f.grid.n / 3;
  int inner = (3 * cutoff) / 4;
  double tail = 0.0, total = 0.0;
  for (const auto& comp : f.c) {
    for_each_mode(f.grid, [&](std::size_t p, int kx, int ky) {
      int kmax = std::max(std::abs(kx), std::abs(ky));
      if (kmax > cutoff) return;
      double w = (ky == 0 || ky == f.grid.n / 2) ? 1.0 : 2.0;
      double e = w * std::norm(comp[p]);
      total += e;
      if (kmax > inner) tail += e;
    });
  }
  return total == 0.0 ? 0.0 : tail / total;
}

/// Evaluate a component at an arbitrary point by direct Fourier summation.
inline double eval_at(const SpecField& f, int comp, double x, double y) {
  const Grid& g = f.grid;
  double u = x + M_PI, v = y + M_PI;
  std::complex<double> acc = 0.0;
  int cols = g.spec_cols();
  for (int i = 0; i < g.n; ++i) {
    int kx = g.kx(i);
    for (int j = 0; j < cols; ++j) {
      std::complex<double> ck = f.c[comp][std::size_t(i) * cols + j];
      if (ck == std::complex<double>(0.0, 0.0)) continue;
      double w = (j == 0 || j == g.n / 2) ? 1.0 : 2.0;
      double phase = kx * u + g.ky(j) * v;
      std::complex<double> e(std::cos(phase), std::sin(phase));
      if (w == 1.0)
        acc += ck * e;
      else
        acc += 2.0 * (ck * e).real();
    }
  }
  return acc.real();
}

}  // namespace spec

inline Field derivative(const Field& f, int axis, int order) {
  SpecField s = to_spec(f);
  spec::derivative_inplace(s, axis, order);
  return to_phys(s, f.kind);
}

inline Field leray_project(const Field& u) {
  SpecField s = to_spec(u);
  spec::leray_inplace(s);
  return to_phys(s, PayloadKind::vec3);
}

inline double sobolev_norm(const Field& f, int s) {
  return spec::sobolev_norm(to_spec(f), s);
}

inline Field dealias(const Field& f) {
  SpecField s = to_spec(f);
  spec::dealias_inplace(s);
  return to_phys(s, f.kind);
}

/// Pointwise max over the grid of the Frobenius norm of the spatial gradient
/// (all components, both derivatives), gradient taken spectrally.
inline double max_gradient(const Field& f) {
  SpecField s = to_spec(f);
  const Fft2D& fft = Fft2D::get(f.grid.n);
  std::vector<double> acc(f.grid.size(), 0.0);
  std::vector<double> buf(f.grid.size());
  std::vector<std::complex<double>> ds(f.grid.spec_size());
  for (int m = 0; m < f.ncomp(); ++m) {
    // Q-tensor payloads carry their off-diagonal entries twice and the
    // implied q33 once in the Frobenius norm.
    double weight = 1.0;
    bool qk = f.kind == PayloadKind::qtensor;
    if (qk && (m == 1 || m == 2 || m == 4)) weight = 2.0;
    for (int axis = 0; axis < 2; ++axis) {
      ds = s.c[m];
      int nyq = f.grid.n / 2;
      spec::for_each_mode(f.grid, [&](std::size_t p, int kx, int ky) {
        int k = axis == 0 ? kx : ky;
        ds[p] = spec::times_ik(ds[p], std::abs(k) == nyq ? 0.0 : double(k));
      });
      fft.backward(ds.data(), buf.data());
      for (std::size_t p = 0; p < acc.size(); ++p)
        acc[p] += weight * buf[p] * buf[p];
    }
  }
  if (f.kind == PayloadKind::qtensor) {
    // gradient of the implied q33 = -(q11 + q22)
    for (int axis = 0; axis < 2; ++axis) {
      for (std::size_t p = 0; p < f.grid.spec_size(); ++p)
        ds[p] = s.c[0][p] + s.c[3][p];
      int nyq = f.grid.n / 2;
      spec::for_each_mode(f.grid, [&](std::size_t p, int kx, int ky) {
        int k = axis == 0 ? kx : ky;
        ds[p] = spec::times_ik(ds[p], std::abs(k) == nyq ? 0.0 : double(k));
      });
      fft.backward(ds.data(), buf.data());
      for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += buf[p] * buf[p];
    }
  }
  double best = 0.0;
  for (double v : acc) best = std::max(best, v);
  return std::sqrt(best);
}

}  // namespace qbe

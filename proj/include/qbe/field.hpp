#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qbe/grid.hpp"
#include "qbe/qtensor.hpp"

namespace qbe {

enum class PayloadKind { scalar, vec3, qtensor };

inline int component_count(PayloadKind k) {
  switch (k) {
    case PayloadKind::scalar: return 1;
    case PayloadKind::vec3: return 3;
    case PayloadKind::qtensor: return 5;
  }
  return 0;
}

/// Doubly periodic field on the grid. Scalar fields hold one component,
/// velocities (u1,u2,u3), Q-tensor fields the five reduced components
/// (q11,q12,q13,q22,q23), each as an n x n row-major array.
struct Field {
  Grid grid;
  PayloadKind kind = PayloadKind::scalar;
  std::vector<std::vector<double>> c;

  Field() = default;
  Field(Grid g, PayloadKind k)
      : grid(g), kind(k), c(component_count(k), std::vector<double>(g.size(), 0.0)) {}

  static Field scalar(Grid g) { return Field(g, PayloadKind::scalar); }
  static Field velocity(Grid g) { return Field(g, PayloadKind::vec3); }
  static Field qtensor(Grid g) { return Field(g, PayloadKind::qtensor); }

  int ncomp() const { return int(c.size()); }

  QTensor q_at(std::size_t p) const {
    return {c[0][p], c[1][p], c[2][p], c[3][p], c[4][p]};
  }
  void set_q(std::size_t p, const QTensor& q) {
    c[0][p] = q.q11;
    c[1][p] = q.q12;
    c[2][p] = q.q13;
    c[3][p] = q.q22;
    c[4][p] = q.q23;
  }

  std::array<double, 3> v_at(std::size_t p) const {
    return {c[0][p], c[1][p], c[2][p]};
  }

  bool finite() const {
    for (const auto& comp : c)
      for (double v : comp)
        if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Spectral mirror of a Field: per component, n x (n/2+1) complex Fourier
/// coefficients in the r2c layout.
struct SpecField {
  Grid grid;
  std::vector<std::vector<std::complex<double>>> c;

  SpecField() = default;
  SpecField(Grid g, int ncomp)
      : grid(g),
        c(ncomp, std::vector<std::complex<double>>(g.spec_size(), {0.0, 0.0})) {}

  int ncomp() const { return int(c.size()); }

  bool finite() const {
    for (const auto& comp : c)
      for (const auto& v : comp)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

}  // namespace qbe

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "qbe/mat3.hpp"

namespace qbe {

/// Symmetric traceless 3x3 tensor stored by its five independent components.
/// q33 = -q11-q22 and q_ji = q_ij are implied, so tracelessness and symmetry
/// hold exactly by construction.
struct QTensor {
  double q11 = 0.0, q12 = 0.0, q13 = 0.0, q22 = 0.0, q23 = 0.0;

  double q33() const { return -q11 - q22; }

  static QTensor zero() { return QTensor{}; }

  /// Uniaxial state s (n (x) n - I/3) for a unit director n.
  static QTensor uniaxial(double s, double nx, double ny, double nz) {
    QTensor q;
    q.q11 = s * (nx * nx - 1.0 / 3.0);
    q.q12 = s * nx * ny;
    q.q13 = s * nx * nz;
    q.q22 = s * (ny * ny - 1.0 / 3.0);
    q.q23 = s * ny * nz;
    return q;
  }

  Mat3 matrix() const {
    Mat3 a;
    a.m[0] = {q11, q12, q13};
    a.m[1] = {q12, q22, q23};
    a.m[2] = {q13, q23, q33()};
    return a;
  }

  /// Symmetrize and remove the trace; inverse of matrix() on its range.
  static QTensor from_matrix(const Mat3& a) {
    double tr3 = a.trace() / 3.0;
    QTensor q;
    q.q11 = a.m[0][0] - tr3;
    q.q12 = 0.5 * (a.m[0][1] + a.m[1][0]);
    q.q13 = 0.5 * (a.m[0][2] + a.m[2][0]);
    q.q22 = a.m[1][1] - tr3;
    q.q23 = 0.5 * (a.m[1][2] + a.m[2][1]);
    return q;
  }

  QTensor operator+(const QTensor& o) const {
    return {q11 + o.q11, q12 + o.q12, q13 + o.q13, q22 + o.q22, q23 + o.q23};
  }
  QTensor operator-(const QTensor& o) const {
    return {q11 - o.q11, q12 - o.q12, q13 - o.q13, q22 - o.q22, q23 - o.q23};
  }
  QTensor operator*(double s) const {
    return {q11 * s, q12 * s, q13 * s, q22 * s, q23 * s};
  }
  QTensor& operator+=(const QTensor& o) {
    q11 += o.q11;
    q12 += o.q12;
    q13 += o.q13;
    q22 += o.q22;
    q23 += o.q23;
    return *this;
  }

  /// tr(Q^2) = |Q|^2
  double norm2() const {
    double z = q33();
    return q11 * q11 + q22 * q22 + z * z + 2.0 * (q12 * q12 + q13 * q13 + q23 * q23);
  }

  double norm() const { return std::sqrt(norm2()); }

  /// tr(Q^3); for traceless symmetric Q this equals 3 det(Q).
  double trace3() const {
    double z = q33();
    return q11 * q11 * q11 + q22 * q22 * q22 + z * z * z +
           3.0 * (q12 * q12 * (q11 + q22) + q13 * q13 * (q11 + z) +
                  q23 * q23 * (q22 + z)) +
           6.0 * q12 * q13 * q23;
  }

  double det() const {
    double z = q33();
    return q11 * (q22 * z - q23 * q23) - q12 * (q12 * z - q23 * q13) +
           q13 * (q12 * q23 - q22 * q13);
  }

  bool finite() const {
    return std::isfinite(q11) && std::isfinite(q12) && std::isfinite(q13) &&
           std::isfinite(q22) && std::isfinite(q23);
  }
};

inline QTensor operator*(double s, const QTensor& q) { return q * s; }

/// Q1 : Q2 over the full 3x3 matrices.
inline double ddot(const QTensor& a, const QTensor& b) {
  return a.q11 * b.q11 + a.q22 * b.q22 + a.q33() * b.q33() +
         2.0 * (a.q12 * b.q12 + a.q13 * b.q13 + a.q23 * b.q23);
}

/// Coefficient set of the non-dimensional system plus the flow-alignment
/// parameter xi and the bulk-stress weight kappa.
struct Params {
  double eps = 1.0;
  double xi = 0.0;
  double kappa = 1.0;
  double a = -0.2;
  double b = 1.0;
  double c = 1.0;

  /// |a| < b^2/(3c), required by the eigenvalue-preservation setting.
  bool coeff_restriction_ok() const { return std::abs(a) < b * b / (3.0 * c); }

  double discriminant() const { return b * b - 24.0 * a * c; }
};

struct EigenTriple {
  double l1 = 0.0, l2 = 0.0, l3 = 0.0;  // ascending, sum = 0
};

/// Stationary amplitudes of the bulk potential and the eigenvalue-interval
/// radius m = s_plus/3. The preserved interval is [-m, 2m].
struct StationaryScalars {
  double s_minus = 0.0;
  double s_plus = 0.0;
  double m = 0.0;
};

inline StationaryScalars stationary_scalars(const Params& p) {
  double disc = p.discriminant();
  if (disc < 0.0)
    throw std::domain_error("stationary_scalars: b^2 - 24ac < 0");
  double root = std::sqrt(disc);
  StationaryScalars s;
  s.s_minus = (p.b - root) / (4.0 * p.c);
  s.s_plus = (p.b + root) / (4.0 * p.c);
  s.m = s.s_plus / 3.0;
  return s;
}

namespace detail {

inline EigenTriple sorted_triple(double a, double b, double c) {
  // + 0.0 canonicalizes negative zeros from the implied q33
  std::array<double, 3> v{a + 0.0, b + 0.0, c + 0.0};
  std::sort(v.begin(), v.end());
  return {v[0], v[1], v[2]};
}

}  // namespace detail

/// Eigenvalues of Q, ascending. Uses the trigonometric solution of
/// lambda^3 - (tr(Q^2)/2) lambda - det(Q) = 0 with the acos argument clamped
/// to [-1,1]. Diagonal input is returned exactly; |Q| < 1e-14 short-circuits
/// to (0,0,0).
inline EigenTriple eigenvalues(const QTensor& q) {
  if (q.q12 == 0.0 && q.q13 == 0.0 && q.q23 == 0.0)
    return detail::sorted_triple(q.q11, q.q22, q.q33());
  double p = 0.5 * q.norm2();
  if (p < 1e-28) return {0.0, 0.0, 0.0};
  double d = q.det();
  double r = std::sqrt(p / 3.0);
  double arg = d / (2.0 * r * r * r);
  arg = std::clamp(arg, -1.0, 1.0);
  double phi = std::acos(arg) / 3.0;
  double l0 = 2.0 * r * std::cos(phi);
  double l1 = 2.0 * r * std::cos(phi - 2.0 * M_PI / 3.0);
  double l2 = 2.0 * r * std::cos(phi - 4.0 * M_PI / 3.0);
  return detail::sorted_triple(l0, l1, l2);
}

/// f_B(Q) = (a/2) tr(Q^2) - (b/3) tr(Q^3) + (c/4) tr^2(Q^2)
inline double bulk_energy(const QTensor& q, const Params& p) {
  double t2 = q.norm2();
  double t3 = q.trace3();
  return 0.5 * p.a * t2 - p.b / 3.0 * t3 + 0.25 * p.c * t2 * t2;
}

/// Traceless gradient of f_B: a Q - b (Q^2 - tr(Q^2) I/3) + c Q tr(Q^2).
inline QTensor bulk_gradient(const QTensor& q, const Params& p) {
  double t2 = q.norm2();
  double z = q.q33();
  // entries of Q^2 that are needed for the reduced representation
  double m11 = q.q11 * q.q11 + q.q12 * q.q12 + q.q13 * q.q13;
  double m12 = q.q12 * (q.q11 + q.q22) + q.q13 * q.q23;
  double m13 = q.q13 * (q.q11 + z) + q.q12 * q.q23;
  double m22 = q.q12 * q.q12 + q.q22 * q.q22 + q.q23 * q.q23;
  double m23 = q.q23 * (q.q22 + z) + q.q12 * q.q13;
  double lin = p.a + p.c * t2;
  QTensor g;
  g.q11 = lin * q.q11 - p.b * (m11 - t2 / 3.0);
  g.q12 = lin * q.q12 - p.b * m12;
  g.q13 = lin * q.q13 - p.b * m13;
  g.q22 = lin * q.q22 - p.b * (m22 - t2 / 3.0);
  g.q23 = lin * q.q23 - p.b * m23;
  return g;
}

/// True iff all eigenvalues lie in [-m - tol, 2m + tol].
inline bool in_physical_interval(const QTensor& q, const Params& p, double tol) {
  StationaryScalars s = stationary_scalars(p);
  EigenTriple e = eigenvalues(q);
  return e.l1 >= -s.m - tol && e.l3 <= 2.0 * s.m + tol;
}

/// Full eigendecomposition of a symmetric traceless tensor by cyclic Jacobi
/// rotations. Columns of vecs are the eigenvectors matching vals (ascending).
/// Independent of the trigonometric eigenvalue path, so the two can be used
/// to cross-check each other.
struct EigenSystem {
  std::array<double, 3> vals{};
  Mat3 vecs;  // vecs.m[i][k] = component i of eigenvector k
};

inline EigenSystem eigen_decomposition(const QTensor& q) {
  Mat3 a = q.matrix();
  Mat3 v = Mat3::identity();
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = a.m[0][1] * a.m[0][1] + a.m[0][2] * a.m[0][2] +
                 a.m[1][2] * a.m[1][2];
    if (off < 1e-60) break;
    for (int p = 0; p < 2; ++p) {
      for (int r = p + 1; r < 3; ++r) {
        double apr = a.m[p][r];
        if (std::abs(apr) < 1e-300) continue;
        double theta = (a.m[r][r] - a.m[p][p]) / (2.0 * apr);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < 3; ++k) {
          double akp = a.m[k][p], akr = a.m[k][r];
          a.m[k][p] = c * akp - s * akr;
          a.m[k][r] = s * akp + c * akr;
        }
        for (int k = 0; k < 3; ++k) {
          double apk = a.m[p][k], ark = a.m[r][k];
          a.m[p][k] = c * apk - s * ark;
          a.m[r][k] = s * apk + c * ark;
        }
        for (int k = 0; k < 3; ++k) {
          double vkp = v.m[k][p], vkr = v.m[k][r];
          v.m[k][p] = c * vkp - s * vkr;
          v.m[k][r] = s * vkp + c * vkr;
        }
      }
    }
  }
  std::array<int, 3> idx{0, 1, 2};
  std::array<double, 3> d{a.m[0][0], a.m[1][1], a.m[2][2]};
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return d[i] < d[j]; });
  EigenSystem es;
  for (int k = 0; k < 3; ++k) {
    es.vals[k] = d[idx[k]];
    for (int i = 0; i < 3; ++i) es.vecs.m[i][k] = v.m[i][idx[k]];
  }
  return es;
}

}  // namespace qbe

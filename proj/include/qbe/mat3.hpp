#pragma once

#include <array>
#include <cmath>

namespace qbe {

/// Dense 3x3 matrix with value semantics. Used for pointwise tensor algebra;
/// field-level storage keeps the reduced 5-component form instead.
struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  static Mat3 zero() { return Mat3{}; }

  static Mat3 identity() {
    Mat3 r;
    r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
    return r;
  }

  double& operator()(int i, int j) { return m[i][j]; }
  double operator()(int i, int j) const { return m[i][j]; }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
    return r;
  }

  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
    return r;
  }

  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
    return r;
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
        r.m[i][j] = s;
      }
    return r;
  }

  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }

  double trace() const { return m[0][0] + m[1][1] + m[2][2]; }

  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += m[i][j] * m[i][j];
    return std::sqrt(s);
  }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

/// A : B = tr(A^T B)
inline double ddot(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a.m[i][j] * b.m[i][j];
  return s;
}

inline Mat3 commutator(const Mat3& a, const Mat3& b) { return a * b - b * a; }

/// Rotation about a unit axis by angle (Rodrigues form).
inline Mat3 rotation(double ax, double ay, double az, double angle) {
  double n = std::sqrt(ax * ax + ay * ay + az * az);
  ax /= n;
  ay /= n;
  az /= n;
  double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Mat3 r;
  r.m[0] = {t * ax * ax + c, t * ax * ay - s * az, t * ax * az + s * ay};
  r.m[1] = {t * ax * ay + s * az, t * ay * ay + c, t * ay * az - s * ax};
  r.m[2] = {t * ax * az - s * ay, t * ay * az + s * ax, t * az * az + c};
  return r;
}

/// In-plane rotation by angle theta about the z axis.
inline Mat3 rotation_z(double theta) {
  Mat3 r = Mat3::identity();
  double c = std::cos(theta), s = std::sin(theta);
  r.m[0][0] = c;
  r.m[0][1] = -s;
  r.m[1][0] = s;
  r.m[1][1] = c;
  return r;
}

}  // namespace qbe

#include "qbe/qtensor.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qbe;

namespace {

std::mt19937_64 rng(12345);

QTensor random_q(double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng), g(rng), g(rng), g(rng)};
}

Mat3 random_rotation() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double ax = u(rng), ay = u(rng), az = u(rng);
  std::uniform_real_distribution<double> th(0.0, 2.0 * M_PI);
  return rotation(ax, ay, az, th(rng));
}

double random_unit(double* nx, double* ny, double* nz) {
  std::normal_distribution<double> g(0.0, 1.0);
  double x = g(rng), y = g(rng), z = g(rng);
  double n = std::sqrt(x * x + y * y + z * z);
  *nx = x / n;
  *ny = y / n;
  *nz = z / n;
  return n;
}

const Params kRef{0.5, 0.0, 1.0, -0.2, 1.0, 1.0};

}  // namespace

TEST(QTensor, Representation) {
  QTensor q{0.3, -0.1, 0.2, 0.05, 0.4};
  Mat3 m = q.matrix();
  EXPECT_DOUBLE_EQ(m.trace(), 0.0);
  EXPECT_DOUBLE_EQ(m(0, 1), m(1, 0));
  QTensor back = QTensor::from_matrix(m);
  EXPECT_DOUBLE_EQ(back.q11, q.q11);
  EXPECT_DOUBLE_EQ(back.q23, q.q23);
}

TEST(Eigenvalues, ZeroTensor) {
  EigenTriple e = eigenvalues(QTensor::zero());
  EXPECT_EQ(e.l1, 0.0);
  EXPECT_EQ(e.l2, 0.0);
  EXPECT_EQ(e.l3, 0.0);
}

TEST(Eigenvalues, DiagonalExact) {
  QTensor q;
  q.q11 = -1.0 / 3.0;
  q.q22 = -1.0 / 3.0;
  EigenTriple e = eigenvalues(q);
  EXPECT_EQ(e.l1, -1.0 / 3.0);
  EXPECT_EQ(e.l2, -1.0 / 3.0);
  EXPECT_EQ(e.l3, 2.0 / 3.0);
}

TEST(Eigenvalues, UniaxialClosedForm) {
  StationaryScalars s = stationary_scalars(kRef);
  // rotate the director off-axis so the trigonometric path is exercised
  Mat3 r = rotation(1.0, 2.0, -0.5, 0.83);
  double nx = r(0, 0), ny = r(1, 0), nz = r(2, 0);
  QTensor q = QTensor::uniaxial(s.s_plus, nx, ny, nz);
  EigenTriple e = eigenvalues(q);
  EXPECT_NEAR(e.l1, -0.284027, 1e-6);
  EXPECT_NEAR(e.l2, -0.284027, 1e-6);
  EXPECT_NEAR(e.l3, 0.568053, 1e-6);
}

TEST(Eigenvalues, SumZeroAndRotationInvariance) {
  for (int it = 0; it < 1000; ++it) {
    QTensor q = random_q();
    EigenTriple e = eigenvalues(q);
    EXPECT_LE(std::abs(e.l1 + e.l2 + e.l3), 1e-12 * (1.0 + q.norm()));
    Mat3 r = random_rotation();
    QTensor qr = QTensor::from_matrix(r * q.matrix() * r.transpose());
    EigenTriple er = eigenvalues(qr);
    EXPECT_NEAR(e.l1, er.l1, 1e-10);
    EXPECT_NEAR(e.l2, er.l2, 1e-10);
    EXPECT_NEAR(e.l3, er.l3, 1e-10);
  }
}

TEST(Eigenvalues, MatchesJacobiDecomposition) {
  for (int it = 0; it < 500; ++it) {
    QTensor q = random_q();
    EigenTriple e = eigenvalues(q);
    EigenSystem es = eigen_decomposition(q);
    EXPECT_NEAR(e.l1, es.vals[0], 1e-12 * (1.0 + q.norm()));
    EXPECT_NEAR(e.l2, es.vals[1], 1e-12 * (1.0 + q.norm()));
    EXPECT_NEAR(e.l3, es.vals[2], 1e-12 * (1.0 + q.norm()));
    // eigenvectors reconstruct the tensor
    Mat3 d = Mat3::zero();
    for (int k = 0; k < 3; ++k) d.m[k][k] = es.vals[k];
    Mat3 rec = es.vecs * d * es.vecs.transpose();
    EXPECT_LE((rec - q.matrix()).frobenius(), 1e-12 * (1.0 + q.norm()));
  }
}

TEST(BulkEnergy, Values) {
  EXPECT_EQ(bulk_energy(QTensor::zero(), kRef), 0.0);
  Params p{1.0, 0.0, 1.0, 1.0, 0.0, 1.0};
  QTensor q;
  q.q11 = 1.0 / std::sqrt(2.0);
  q.q22 = -1.0 / std::sqrt(2.0);
  // tr(Q^2) = 1, tr(Q^3) = 0
  EXPECT_NEAR(bulk_energy(q, p), 0.75, 1e-15);
}

TEST(BulkEnergy, UniaxialPlusIsGlobalMinimum) {
  StationaryScalars s = stationary_scalars(kRef);
  QTensor qmin = QTensor::uniaxial(s.s_plus, 1.0, 0.0, 0.0);
  double fmin = bulk_energy(qmin, kRef);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 100000; ++it) {
    QTensor q = random_q(0.6);
    if (q.norm() > 2.0) continue;
    EXPECT_GE(bulk_energy(q, kRef), fmin - 1e-12);
  }
}

TEST(BulkGradient, VanishesAtStationaryStates) {
  StationaryScalars s = stationary_scalars(kRef);
  EXPECT_EQ(bulk_gradient(QTensor::zero(), kRef).norm(), 0.0);
  for (int it = 0; it < 100; ++it) {
    double nx, ny, nz;
    random_unit(&nx, &ny, &nz);
    for (double amp : {s.s_minus, s.s_plus}) {
      QTensor q = QTensor::uniaxial(amp, nx, ny, nz);
      EXPECT_LE(bulk_gradient(q, kRef).norm(), 1e-12);
    }
  }
}

TEST(BulkGradient, MatchesFiniteDifferences) {
  const double h = 1e-5;
  for (int it = 0; it < 1000; ++it) {
    QTensor q = random_q(0.5);
    if (q.norm() > 2.0) continue;
    QTensor g = bulk_gradient(q, kRef);
    // df_B = G : dQ over the five independent components; off-diagonal
    // perturbations enter twice through symmetry.
    double* comps[5] = {&q.q11, &q.q12, &q.q13, &q.q22, &q.q23};
    double gc[5] = {g.q11 - g.q33(), 2.0 * g.q12, 2.0 * g.q13, g.q22 - g.q33(),
                    2.0 * g.q23};
    for (int m = 0; m < 5; ++m) {
      double saved = *comps[m];
      *comps[m] = saved + h;
      double fp = bulk_energy(q, kRef);
      *comps[m] = saved - h;
      double fm = bulk_energy(q, kRef);
      *comps[m] = saved;
      double fd = (fp - fm) / (2.0 * h);
      EXPECT_NEAR(fd, gc[m], 1e-6 * std::max(1.0, std::abs(gc[m])));
    }
  }
}

TEST(StationaryScalars, ClosedForms) {
  StationaryScalars s = stationary_scalars(kRef);
  EXPECT_NEAR(s.s_minus, -0.352080, 1e-6);
  EXPECT_NEAR(s.s_plus, 0.852080, 1e-6);
  EXPECT_NEAR(s.m, 0.284027, 1e-6);

  Params p0{1.0, 0.0, 1.0, 0.0, 1.0, 1.0};
  StationaryScalars s0 = stationary_scalars(p0);
  EXPECT_DOUBLE_EQ(s0.s_minus, 0.0);
  EXPECT_DOUBLE_EQ(s0.s_plus, 0.5);
  EXPECT_DOUBLE_EQ(s0.m, 0.5 / 3.0);
}

TEST(StationaryScalars, MIsThirdOfSPlus) {
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int it = 0; it < 200; ++it) {
    Params p{1.0, 0.0, 1.0, -u(rng), u(rng), u(rng)};
    StationaryScalars s = stationary_scalars(p);
    EXPECT_EQ(s.m, s.s_plus / 3.0);
    // interval endpoints against the direct closed forms
    double root = std::sqrt(p.b * p.b - 24.0 * p.a * p.c);
    EXPECT_NEAR(-s.m, -(p.b + root) / (12.0 * p.c), 4e-16 * std::abs(s.m));
    EXPECT_NEAR(2.0 * s.m, (p.b + root) / (6.0 * p.c), 8e-16 * std::abs(s.m));
  }
}

TEST(StationaryScalars, NegativeDiscriminantThrows) {
  Params p{1.0, 0.0, 1.0, 1.0, 1.0, 1.0};  // b^2 - 24ac = -23
  EXPECT_THROW(stationary_scalars(p), std::domain_error);
}

TEST(PhysicalInterval, Membership) {
  StationaryScalars s = stationary_scalars(kRef);
  EXPECT_TRUE(in_physical_interval(QTensor::zero(), kRef, 0.0));
  QTensor boundary = QTensor::uniaxial(s.s_plus, 1.0, 0.0, 0.0);
  EXPECT_TRUE(in_physical_interval(boundary, kRef, 1e-12));
  QTensor outside = boundary * 1.1;
  EXPECT_FALSE(in_physical_interval(outside, kRef, 1e-9));
}

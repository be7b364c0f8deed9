#include "rough/lie.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace rough;
using testutil::homogeneous;
using testutil::rand_skew;
using testutil::rand_skew_mat;
using testutil::rand_rotation;
using testutil::rand_unit;
using testutil::rand_vec;
using testutil::taylor_exp;

namespace {

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Mat rot2(double t) {
  Mat m(2, 2);
  m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return m;
}

}  // namespace

TEST_CASE("wedge of the first two basis vectors in the plane is the quarter turn generator") {
  const SkewMatrix j = wedge(vec2(1, 0), vec2(0, 1));
  Mat expected(2, 2);
  expected << 0, -1, 1, 0;
  CHECK((j.matrix() - expected).norm() == doctest::Approx(0.0));
  // and it maps e1 to e2
  CHECK((j.apply(vec2(1, 0)) - vec2(0, 1)).norm() == doctest::Approx(0.0));
}

TEST_CASE("wedge of a vector with itself vanishes") {
  Rng rng(7);
  const Vec a = rand_vec(5, rng);
  CHECK(wedge(a, a).norm() == doctest::Approx(0.0));
}

TEST_CASE("wedge rejects mismatched dimensions") {
  Rng rng(1);
  const Vec a = rand_vec(2, rng), b = rand_vec(3, rng);
  CHECK_THROWS_AS(wedge(a, b), std::invalid_argument);
}

TEST_CASE("wedge action identity on random 4d vectors") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const Vec a = rand_vec(4, rng), b = rand_vec(4, rng), u = rand_vec(4, rng);
    const Vec lhs = wedge(a, b).apply(u);
    const Vec rhs = a.dot(u) * b - b.dot(u) * a;
    CHECK((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("wedge transpose swaps the factors") {
  Rng rng(13);
  const Vec a = rand_vec(4, rng), b = rand_vec(4, rng);
  CHECK((wedge(a, b).matrix().transpose() - wedge(b, a).matrix()).norm() < 1e-14);
}

TEST_CASE("conjugation moves a wedge through the rotation") {
  Rng rng(17);
  for (int n : {2, 3, 4}) {
    const Mat a = rand_rotation(n, rng);
    const Vec u = rand_vec(n, rng), v = rand_vec(n, rng);
    const Mat lhs = adjoint(a, wedge(u, v)).matrix();
    const Mat rhs = wedge(a * u, a * v).matrix();
    CHECK((lhs - rhs).norm() < 1e-12);
  }
}

TEST_CASE("trace of a wedge against a skew matrix") {
  Rng rng(19);
  for (int t = 0; t < 100; ++t) {
    const Vec a = rand_vec(4, rng), b = rand_vec(4, rng);
    const SkewMatrix z = rand_skew(4, rng);
    const double lhs = (wedge(a, b).matrix() * z.matrix().transpose()).trace();
    const double rhs = 2.0 * z.apply(a).dot(b);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("trace pairing of two wedges follows the entrywise bilinear formula") {
  // Tr((a^b)(c^d)^T) = 2[(a.c)(b.d) - (a.d)(b.c)] for all vectors.
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const Vec a = rand_vec(4, rng), b = rand_vec(4, rng);
    const Vec c = rand_vec(4, rng), d = rand_vec(4, rng);
    const double lhs = (wedge(a, b).matrix() * wedge(c, d).matrix().transpose()).trace();
    const double rhs = 2.0 * (a.dot(c) * b.dot(d) - a.dot(d) * b.dot(c));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("group multiplication against identity and inverse") {
  Rng rng(29);
  const EuclideanElement g{rand_rotation(3, rng), rand_vec(3, rng)};
  const EuclideanElement id = EuclideanElement::identity(3);

  const EuclideanElement gi = group_mul(g, id);
  CHECK((gi.A - g.A).norm() < 1e-14);
  CHECK((gi.a - g.a).norm() < 1e-14);

  const EuclideanElement e = group_mul(g, group_inv(g));
  CHECK((e.A - Mat::Identity(3, 3)).norm() < 1e-12);
  CHECK(e.a.norm() < 1e-12);
}

TEST_CASE("group multiplication worked example in the plane") {
  // (rot(pi/2), 0) * (I, e1) = (rot(pi/2), e2)
  const EuclideanElement lhs =
      group_mul({rot2(M_PI_2), vec2(0, 0)}, {Mat::Identity(2, 2), vec2(1, 0)});
  CHECK((lhs.A - rot2(M_PI_2)).norm() < 1e-15);
  CHECK((lhs.a - vec2(0, 1)).norm() < 1e-15);
}

TEST_CASE("inverse of a pure translation and double inverse") {
  Rng rng(31);
  const Vec a = rand_vec(3, rng);
  const EuclideanElement t{Mat::Identity(3, 3), a};
  CHECK((group_inv(t).a + a).norm() < 1e-14);

  const EuclideanElement g{rand_rotation(3, rng), rand_vec(3, rng)};
  const EuclideanElement gg = group_inv(group_inv(g));
  CHECK((gg.A - g.A).norm() < 1e-13);
  CHECK((gg.a - g.a).norm() < 1e-13);
}

TEST_CASE("exponential of zero is the identity") {
  for (int n : {1, 2, 3, 4, 5})
    CHECK((so_exp(SkewMatrix::zero(n)) - Mat::Identity(n, n)).norm() == doctest::Approx(0.0));
}

TEST_CASE("exponential of an orthonormal wedge rotates its plane and fixes the complement") {
  Rng rng(37);
  for (int t = 0; t < 50; ++t) {
    const int n = 4;
    const Vec a = rand_unit(n, rng);
    Vec b = rand_vec(n, rng);
    b -= b.dot(a) * a;
    b /= b.norm();
    const double theta = rng.uniform(-6.0, 6.0);

    const Mat r = so_exp(SkewMatrix(theta * wedge(a, b).matrix()));
    const Mat p = a * a.transpose() + b * b.transpose();
    const Mat expected = std::cos(theta) * p + std::sin(theta) * wedge(a, b).matrix() +
                         (Mat::Identity(n, n) - p);
    CHECK((r - expected).norm() < 1e-12);
  }
}

TEST_CASE("quarter turn about the third axis sends e1 to e2") {
  Mat z(3, 3);
  z << 0, -1, 0, 1, 0, 0, 0, 0, 0;  // omega(e3)
  const Mat r = so_exp(SkewMatrix(M_PI_2 * z));
  Vec e1(3), e2(3);
  e1 << 1, 0, 0;
  e2 << 0, 1, 0;
  CHECK((r * e1 - e2).norm() < 1e-15);
}

TEST_CASE("exponential stays in the rotation group for large random inputs") {
  Rng rng(41);
  for (int n : {2, 3, 4, 5}) {
    for (int t = 0; t < 40; ++t) {
      SkewMatrix x = rand_skew(n, rng, 3.0);
      if (x.norm() > 10.0) x = (10.0 / x.norm()) * x;
      const Mat r = so_exp(x);
      CHECK((r.transpose() * r - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(r.determinant() > 0.0);
      CHECK((r - taylor_exp(x.matrix())).norm() < 1e-12);
    }
  }
}

TEST_CASE("screw exponential with zero rotation is a straight translation") {
  Rng rng(43);
  const Vec w = rand_vec(3, rng);
  const EuclideanElement g = se_exp(SkewMatrix::zero(3), w, 1.7);
  CHECK((g.A - Mat::Identity(3, 3)).norm() < 1e-15);
  CHECK((g.a - 1.7 * w).norm() < 1e-14);
}

TEST_CASE("screw exponential with zero drift is a pure rotation") {
  Rng rng(47);
  const SkewMatrix x = rand_skew(3, rng);
  const EuclideanElement g = se_exp(x, Vec::Zero(3), 2.0);
  CHECK(g.a.norm() < 1e-14);
  CHECK((g.A - taylor_exp(2.0 * x.matrix())).norm() < 1e-12);
}

TEST_CASE("screw exponential matches the homogeneous matrix exponential") {
  Rng rng(53);
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + t % 3;
    const SkewMatrix x = rand_skew(n, rng, 2.0);
    const Vec w = rand_vec(n, rng, 2.0);
    const double time = rng.uniform(-2.0, 2.0);

    Mat h = Mat::Zero(n + 1, n + 1);
    h.topLeftCorner(n, n) = x.matrix();
    h.topRightCorner(n, 1) = w;
    const Mat oracle = taylor_exp(time * h);

    const EuclideanElement g = se_exp(x, w, time);
    CHECK((homogeneous(g) - oracle).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("screw exponentials compose along the one-parameter subgroup") {
  Rng rng(59);
  for (int t = 0; t < 50; ++t) {
    const int n = 3;
    const SkewMatrix x = rand_skew(n, rng);
    const Vec w = rand_vec(n, rng);
    const double s = rng.uniform(-2.0, 2.0), u = rng.uniform(-2.0, 2.0);

    const EuclideanElement lhs = se_exp(x, w, s + u);
    const EuclideanElement rhs = group_mul(se_exp(x, w, u), se_exp(x, w, s));
    CHECK((lhs.A - rhs.A).norm() < 1e-10);
    CHECK((lhs.a - rhs.a).norm() < 1e-10);
  }
}

TEST_CASE("skew matrices split into the in-plane block and a wedge with the last axis") {
  Rng rng(61);
  const int n = 4;
  const SkewMatrix z = rand_skew(n, rng);
  Mat proj = Mat::Identity(n, n);
  proj(n - 1, n - 1) = 0.0;
  const Vec en = Vec::Unit(n, n - 1);
  const Mat rebuilt = proj * z.matrix() * proj + wedge(en, z.apply(en)).matrix();
  CHECK((rebuilt - z.matrix()).norm() < 1e-13);
}

TEST_CASE("three dimensional wedges are cross product generators") {
  Rng rng(67);
  const Vec a = rand_vec(3, rng), b = rand_vec(3, rng);
  Vec cross(3);
  cross << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];

  Mat omega(3, 3);
  omega << 0, -cross[2], cross[1], cross[2], 0, -cross[0], -cross[1], cross[0], 0;
  CHECK((wedge(a, b).matrix() - omega).norm() < 1e-13);

  const Mat rot = rand_rotation(3, rng);
  Mat omega_a(3, 3);
  omega_a << 0, -a[2], a[1], a[2], 0, -a[0], -a[1], a[0], 0;
  const Vec ra = rot * a;
  Mat omega_ra(3, 3);
  omega_ra << 0, -ra[2], ra[1], ra[2], 0, -ra[0], -ra[1], ra[0], 0;
  CHECK((rot * omega_a * rot.transpose() - omega_ra).norm() < 1e-12);
}

TEST_CASE("planar wedge is a multiple of the quarter turn") {
  Rng rng(71);
  const Vec a = rand_vec(2, rng), b = rand_vec(2, rng);
  Mat j(2, 2);
  j << 0, -1, 1, 0;
  const double coeff = b.dot(j * a);
  CHECK((wedge(a, b).matrix() - coeff * j).norm() < 1e-13);
}

TEST_CASE("adjoint by the identity changes nothing and preserves the trace form") {
  Rng rng(73);
  const SkewMatrix z = rand_skew(4, rng);
  CHECK((adjoint(Mat::Identity(4, 4), z).matrix() - z.matrix()).norm() == doctest::Approx(0.0));

  const Mat a = rand_rotation(4, rng);
  const SkewMatrix az = adjoint(a, z);
  CHECK((az.matrix() * az.matrix().transpose()).trace() ==
        doctest::Approx((z.matrix() * z.matrix().transpose()).trace()).epsilon(1e-12));
}

TEST_CASE("construction antisymmetrizes") {
  Mat m(2, 2);
  m << 1.0, 2.0, 4.0, -1.0;
  const SkewMatrix z(m);
  CHECK((z.matrix() + z.matrix().transpose()).norm() == doctest::Approx(0.0));
  CHECK(z.matrix()(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("coordinates round trip through the wedge basis") {
  Rng rng(79);
  for (int n : {2, 3, 4, 5}) {
    const SkewMatrix z = rand_skew(n, rng);
    CHECK((skew_from_coords(skew_coords(z), n).matrix() - z.matrix()).norm() < 1e-14);

    const AlgebraVector v{z, rand_vec(n, rng)};
    const AlgebraVector w = algebra_from_coords(algebra_coords(v), n);
    CHECK((w.Z.matrix() - v.Z.matrix()).norm() < 1e-14);
    CHECK((w.z - v.z).norm() < 1e-14);
  }
}

TEST_CASE("polar projection recovers a nearby rotation") {
  Rng rng(83);
  const Mat r = rand_rotation(3, rng);
  Mat drifted = r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) drifted(i, j) += 1e-8 * rng.normal();
  const Mat fixed = polar_rotation(drifted);
  CHECK((fixed.transpose() * fixed - Mat::Identity(3, 3)).norm() < 1e-14);
  CHECK((fixed - r).norm() < 1e-7);
}

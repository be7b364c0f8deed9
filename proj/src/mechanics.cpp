#include "rough/mechanics.hpp"

#include <cmath>

namespace rough {

double ball_inertia(double radius, int n) {
  if (radius <= 0.0) throw std::invalid_argument("ball_inertia: radius must be positive");
  if (n < 1) throw std::invalid_argument("ball_inertia: dimension must be >= 1");
  return radius * radius / static_cast<double>(n + 2);
}

RigidBody RigidBody::ball(int n, double radius, double mass) {
  RigidBody b;
  b.mass = mass;
  b.inertia = ball_inertia(radius, n) * Mat::Identity(n, n);
  b.model = MassModel::ball;
  b.ball_radius = radius;
  return b;
}

RigidBody RigidBody::from_samples(const std::vector<Vec>& points,
                                  const std::vector<double>& weights) {
  if (points.empty() || points.size() != weights.size())
    throw std::invalid_argument("from_samples: need matching nonempty points and weights");
  const int n = static_cast<int>(points.front().size());
  double mass = 0.0;
  Vec first_moment = Vec::Zero(n);
  for (size_t k = 0; k < points.size(); ++k) {
    if (weights[k] < 0.0) throw std::invalid_argument("from_samples: negative weight");
    mass += weights[k];
    first_moment += weights[k] * points[k];
  }
  if (mass <= 0.0) throw std::invalid_argument("from_samples: total weight must be positive");

  const Vec center = first_moment / mass;
  Mat second = Mat::Zero(n, n);
  for (size_t k = 0; k < points.size(); ++k) {
    const Vec b = points[k] - center;
    second += weights[k] * (b * b.transpose());
  }

  RigidBody body;
  body.mass = mass;
  body.inertia = second / mass;
  body.model = MassModel::sampled;
  return body;
}

int RigidBody::inertia_rank(double tol) const {
  Eigen::SelfAdjointEigenSolver<Mat> es(inertia);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  int rank = 0;
  for (int i = 0; i < inertia.rows(); ++i)
    if (es.eigenvalues()[i] > tol * scale) ++rank;
  return rank;
}

SkewMatrix l_apply(const Mat& inertia, const SkewMatrix& z) {
  return SkewMatrix(inertia * z.matrix() + z.matrix() * inertia);
}

SkewMatrix l_inverse(const Mat& inertia, const SkewMatrix& z) {
  const int n = static_cast<int>(inertia.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(inertia);
  const Vec lambda = es.eigenvalues();
  const Mat& u = es.eigenvectors();
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);

  Mat zt = u.transpose() * z.matrix() * u;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double pair_sum = lambda[i] + lambda[j];
      if (pair_sum <= 1e-12 * scale) throw SingularInertiaError(i, j, pair_sum);
      zt(i, j) /= pair_sum;
    }
  }
  return SkewMatrix(u * zt * u.transpose());
}

double body_inner(const RigidBody& body, const AlgebraVector& u, const AlgebraVector& v) {
  const double angular =
      0.5 * (l_apply(body.inertia, u.Z).matrix().cwiseProduct(v.Z.matrix())).sum();
  return body.mass * (angular + u.z.dot(v.z));
}

double kinetic_inner(const TwoBodySystem& sys, const PairVelocity& u, const PairVelocity& v) {
  return body_inner(sys.first, u.first, v.first) + body_inner(sys.second, u.second, v.second);
}

double algebra_pairing(const AlgebraVector& p, const AlgebraVector& xi) {
  return p.Z.matrix().cwiseProduct(xi.Z.matrix()).sum() + p.z.dot(xi.z);
}

AlgebraVector momentum_map(const RigidBody& body, const EuclideanElement& g,
                           const AlgebraVector& xi) {
  const Vec vc = g.A * xi.z;
  const SkewMatrix angular =
      0.5 * (adjoint(g.A, l_apply(body.inertia, xi.Z)) + wedge(g.a, vc));
  return {body.mass * angular, body.mass * vc};
}

AlgebraVector b_tensor(const Mat& inertia, const AlgebraVector& u, const AlgebraVector& v) {
  // Angular part: the unique skew B with Tr(B L W^T) = Tr(C W^T) for all
  // skew W, where C = [L Z1, Z2] + z1 ^ z2 / 2 (the sign of the wedge term
  // follows from (Z w1).w2 = -(Z w2).w1).  C L^-1 itself leaves so(n) when L
  // is not scalar, so solve L B + B L = C - C^T instead.
  const Mat lz1 = inertia * u.Z.matrix();
  const Mat bracket = lz1 * v.Z.matrix() - v.Z.matrix() * lz1;
  const Mat c = bracket + 0.5 * wedge(u.z, v.z).matrix();
  return {l_inverse(inertia, SkewMatrix(2.0 * c)), -v.Z.apply(u.z)};
}

AlgebraVector b_tensor_scalar(double lambda, const AlgebraVector& u, const AlgebraVector& v) {
  if (lambda <= 0.0) throw std::invalid_argument("b_tensor_scalar: lambda must be positive");
  const SkewMatrix angular = commutator(u.Z, v.Z) + (0.5 / lambda) * wedge(u.z, v.z);
  return {angular, -v.Z.apply(u.z)};
}

std::pair<EuclideanElement, AlgebraVector> free_flight(const EuclideanElement& g,
                                                       const AlgebraVector& xi, double tau) {
  if (tau < 0.0) throw std::invalid_argument("free_flight: negative time");
  const Mat rot = so_exp(SkewMatrix(tau * xi.Z.matrix()));
  EuclideanElement g2{g.A * rot, g.a + tau * (g.A * xi.z)};
  // exp(-tau Z) = exp(tau Z)^T for skew Z.
  return {g2, {xi.Z, rot.transpose() * xi.z}};
}

namespace {

// Truncated dexp^-1 at -u on se(n): v + [u,v]/2 + [u,[u,v]]/12.  The pose
// advances by right increments g exp(sigma) (the velocity field is
// left-invariant), which evaluates dexp^-1 at the negated argument; two
// bracket orders suffice for a 4th-order Munthe-Kaas step.
AlgebraVector dexpinv(const AlgebraVector& u, const AlgebraVector& v) {
  const AlgebraVector uv = se_bracket(u, v);
  const AlgebraVector uuv = se_bracket(u, uv);
  return v + 0.5 * uv + (1.0 / 12.0) * uuv;
}

}  // namespace

std::vector<GeodesicSample> geodesic_integrate(const Mat& inertia, const EuclideanElement& g0,
                                               const AlgebraVector& xi0, double total_time,
                                               double dt) {
  if (dt <= 0.0) throw std::invalid_argument("geodesic_integrate: step size must be positive");
  const int steps = static_cast<int>(std::llround(total_time / dt));

  std::vector<GeodesicSample> out;
  out.reserve(steps + 1);
  EuclideanElement g = g0;
  AlgebraVector xi = xi0;
  out.push_back({0.0, g, xi});

  // State (g, xi) on SE(n) x se(n); the pose advances through se_exp of the
  // combined Munthe-Kaas increment, the algebra part additively.
  const auto field = [&](const EuclideanElement&, const AlgebraVector& v) {
    return std::pair<AlgebraVector, AlgebraVector>{v, b_tensor(inertia, v, v)};
  };
  const auto at = [&](const AlgebraVector& ug, const AlgebraVector& uxi) {
    return std::pair<EuclideanElement, AlgebraVector>{group_mul(g, se_exp(ug, 1.0)), xi + uxi};
  };

  for (int s = 1; s <= steps; ++s) {
    auto [k1g, k1x] = field(g, xi);

    auto y2 = at(0.5 * dt * k1g, 0.5 * dt * k1x);
    auto f2 = field(y2.first, y2.second);
    const AlgebraVector k2g = dexpinv(0.5 * dt * k1g, f2.first);
    const AlgebraVector k2x = f2.second;

    auto y3 = at(0.5 * dt * k2g, 0.5 * dt * k2x);
    auto f3 = field(y3.first, y3.second);
    const AlgebraVector k3g = dexpinv(0.5 * dt * k2g, f3.first);
    const AlgebraVector k3x = f3.second;

    auto y4 = at(dt * k3g, dt * k3x);
    auto f4 = field(y4.first, y4.second);
    const AlgebraVector k4g = dexpinv(dt * k3g, f4.first);
    const AlgebraVector k4x = f4.second;

    const AlgebraVector vg = (dt / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    const AlgebraVector vx = (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    g = group_mul(g, se_exp(vg, 1.0));
    xi = xi + vx;
    if (g.rotation_drift() > 1e-9) g = g.normalized();
    out.push_back({s * dt, g, xi});
  }
  return out;
}

}  // namespace rough

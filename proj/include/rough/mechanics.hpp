#pragma once

#include "rough/lie.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace rough {

/// Thrown by l_inverse when some eigenvalue pair of the inertia matrix sums
/// to (numerically) zero, i.e. the mass distribution is concentrated on a
/// subspace of codimension >= 2.
class SingularInertiaError : public std::runtime_error {
 public:
  SingularInertiaError(int i, int j, double pair_sum)
      : std::runtime_error("inertia operator singular: eigenvalue pair (" + std::to_string(i) +
                           "," + std::to_string(j) + ") sums to " + std::to_string(pair_sum)),
        i(i),
        j(j),
        pair_sum(pair_sum) {}
  int i, j;
  double pair_sum;
};

/// Uniform-ball inertia coefficient: L = lambda I with lambda = R^2 / (n+2).
double ball_inertia(double radius, int n);

/// Mass m and matrix of second moments L (second moments of the mass
/// distribution divided by m).  L must be symmetric non-negative; the induced
/// operator Z -> LZ + ZL is invertible iff rank(L) >= n-1.
struct RigidBody {
  double mass = 1.0;
  Mat inertia;

  enum class MassModel { ball, sampled };
  MassModel model = MassModel::ball;
  double ball_radius = 0.0;  // meaningful for MassModel::ball

  static RigidBody ball(int n, double radius, double mass = 1.0);

  /// Weighted point cloud; recenters to zero first moment if needed.
  static RigidBody from_samples(const std::vector<Vec>& points, const std::vector<double>& weights);

  int dim() const { return static_cast<int>(inertia.rows()); }
  int inertia_rank(double tol = 1e-12) const;
  bool l_invertible() const { return inertia_rank() >= dim() - 1; }
};

/// L(Z) = LZ + ZL.
SkewMatrix l_apply(const Mat& inertia, const SkewMatrix& z);

/// Solves LW + WL = Z in the eigenbasis of L, dividing component (i,j) by
/// lambda_i + lambda_j.  Throws SingularInertiaError when a pair sum is ~0.
SkewMatrix l_inverse(const Mat& inertia, const SkewMatrix& z);

struct PairPlacement {
  EuclideanElement first, second;
};

struct PairVelocity {
  AlgebraVector first, second;

  PairVelocity operator+(const PairVelocity& o) const { return {first + o.first, second + o.second}; }
  PairVelocity operator-(const PairVelocity& o) const { return {first - o.first, second - o.second}; }
  friend PairVelocity operator*(double s, const PairVelocity& v) { return {s * v.first, s * v.second}; }
};

struct TwoBodySystem {
  RigidBody first, second;
};

struct SystemState {
  PairPlacement q;
  PairVelocity xi;
};

/// Single-body kinetic-energy inner product m [ Tr(L(Z) W^T)/2 + z.w ].
double body_inner(const RigidBody& body, const AlgebraVector& u, const AlgebraVector& v);

/// Two-body kinetic-energy metric: sum of body_inner over the pair.
double kinetic_inner(const TwoBodySystem& sys, const PairVelocity& u, const PairVelocity& v);

inline double kinetic_energy(const TwoBodySystem& sys, const PairVelocity& xi) {
  return 0.5 * kinetic_inner(sys, xi, xi);
}

inline double kinetic_energy(const RigidBody& body, const AlgebraVector& xi) {
  return 0.5 * body_inner(body, xi, xi);
}

/// Bi-invariant pairing Tr(Z W^T) + z.w used to express momentum values.
double algebra_pairing(const AlgebraVector& p, const AlgebraVector& xi);

/// Momentum of state (g, xi) as an algebra vector P with
/// P = m ( (Ad_A L(Z) + x_c ^ v_c)/2, v_c ),  x_c = a,  v_c = A z,
/// so that algebra_pairing(P, (W,w)) evaluates the momentum map on (W,w).
AlgebraVector momentum_map(const RigidBody& body, const EuclideanElement& g, const AlgebraVector& xi);

/// Connection tensor B of the left-invariant metric of a body with inertia L:
/// B(u, v) = ( ([L Z1, Z2] - z1 ^ z2 / 2) L^-1, -Z2 z1 ),
/// characterized by <B(u,v), w> = <[v, w], u>.
AlgebraVector b_tensor(const Mat& inertia, const AlgebraVector& u, const AlgebraVector& v);

/// Shortcut valid for L = lambda I (no inversion).
AlgebraVector b_tensor_scalar(double lambda, const AlgebraVector& u, const AlgebraVector& v);

/// Free (geodesic) motion of a ball body over time tau:
/// A' = A exp(tau Z), a' = a + tau A z, Z' = Z, z' = exp(-tau Z) z.
/// Returns the advanced placement and the body-frame velocity at tau.
std::pair<EuclideanElement, AlgebraVector> free_flight(const EuclideanElement& g,
                                                       const AlgebraVector& xi, double tau);

struct GeodesicSample {
  double t;
  EuclideanElement g;
  AlgebraVector xi;
};

/// Fixed-step 4th-order integrator (Munthe-Kaas RK4) for the geodesic system
/// dxi/dt = B(xi, xi), dg/dt = g xi, for a general invertible inertia matrix.
/// Rotations are reconstructed through se_exp each step.  Validation tool;
/// the billiard path uses the scalar-inertia closed form.
std::vector<GeodesicSample> geodesic_integrate(const Mat& inertia, const EuclideanElement& g0,
                                               const AlgebraVector& xi0, double total_time,
                                               double dt);

}  // namespace rough

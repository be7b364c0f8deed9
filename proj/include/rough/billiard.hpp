#pragma once

#include "rough/lie.hpp"
#include "rough/mechanics.hpp"
#include "rough/rng.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rough {

// Fixed tables for a moving ball of radius R.  Each variant answers two
// closed-form queries: inward boundary normal at a boundary point, and the
// next intersection of the center ray with the boundary offset inward by R.

struct CircleTable {
  double r = 1.0;
};

/// Planar wedge with apex at the origin, opening along +y; walls at angles
/// +-half_angle from the bisector.  half_angle in (0, pi/2).
struct WedgeTable {
  double half_angle = 0.5;
};

/// Infinite strip between the lines y = 0 and y = width.
struct StripTable {
  double width = 1.0;
};

/// Two parallel planes z = 0 and z = gap in dimension 3.
struct Plates3dTable {
  double gap = 1.0;
};

/// Rectangle [0, width] x [0, height].
struct BoxTable {
  double width = 1.0;
  double height = 1.0;
};

using Table = std::variant<CircleTable, WedgeTable, StripTable, Plates3dTable, BoxTable>;

int table_dim(const Table& table);
std::string table_name(const Table& table);
int table_face_count(const Table& table);
/// Normal at boundary point b pointing into the region of free motion.
Vec table_inward_normal(const Table& table, const Vec& b);
/// Face index of a boundary point (0-based; see next_collision for layout).
int table_face_at(const Table& table, const Vec& b);
/// Throws std::invalid_argument if the geometry cannot host a ball of radius R.
void validate_table(const Table& table, double radius);

enum class StopReason { no_collision, grazing, corner_hit };
std::string to_string(StopReason reason);

struct StepFailure {
  StopReason reason;
  std::string detail;
};

struct Hit {
  double tau = 0.0;
  Vec point;  // contact point on the table boundary
  int face = 0;
};

/// Smallest tau > tau_min (= 1e-9 R/|v|) at which the ball centered on
/// a + tau v touches the boundary.  Faces: circle {0}; wedge {0 right wall,
/// 1 left wall}; strip/plates {0 bottom, 1 top}; box {0 y=0, 1 x=w, 2 y=h,
/// 3 x=0}.  Fails with no_collision when the ray escapes, grazing when the
/// normal velocity at impact is below 1e-12 |v|, corner_hit within 1e-9 of a
/// boundary junction.
std::variant<Hit, StepFailure> next_collision(const Table& table, const Vec& a, const Vec& v,
                                              double radius);

/// Contact point pulled back to the ball's reference configuration,
/// b_ref = g^-1(b_world); throws if its distance from the center is not R.
Vec reference_contact(const EuclideanElement& g, const Vec& b_world, double radius);

/// Post-collision velocities from pre-collision velocities:
///   Z' = Z - (alpha / 2 lambda) b_ref ^ (I - T) V,
///   z' = z - alpha (I - T) V - 2 (z . nu) nu,
/// with alpha = 1 / (1 + R^2 / 2 lambda), V the tangential part of
/// Z b_ref + z at the contact, nu = b_ref / R, and T a linear involution of
/// the tangent plane of the ball at b_ref (T = I is specular reflection,
/// T = -I completely rough).  Throws if T fails to be an involution of the
/// tangent plane to 1e-9.
std::pair<SkewMatrix, Vec> collide(const SkewMatrix& z_angular, const Vec& z_linear,
                                   const Vec& b_ref, const Mat& t_involution, double lambda,
                                   double radius);

/// Planar completely rough collision of a uniform disc in the scaled
/// coordinates (x0, x1, x2) = (R theta / sqrt(2), x, y):
///   v0' = -v0/3 + (2 sqrt2 / 3) v . J nu,
///   v'  = [ (2 sqrt2 / 3) v0 + (v . J nu)/3 ] J nu - (v . nu) nu,
/// where nu is the unit table normal at the contact.
std::pair<double, Vec> collide_2d(double v0, const Vec& v, const Vec& nu);

/// Post-collision state of the moving ball: placement at the collision
/// instant, body-frame velocities, and the table contact point.
struct BilliardState {
  EuclideanElement g;
  AlgebraVector xi;
  Vec contact;
  int face = 0;
  double t = 0.0;
};

struct BilliardParams {
  double radius = 1.0;
  double lambda = 0.0;  // scalar inertia coefficient; R^2/(n+2) for a uniform ball
  double mass = 1.0;
};

inline double billiard_energy(const BilliardParams& p, const AlgebraVector& xi) {
  return 0.5 * p.mass * (p.lambda * xi.Z.matrix().squaredNorm() + xi.z.squaredNorm());
}

// Boundary conditions: the rule selecting the tangent-plane involution T at
// each collision.

struct SpecularBC {};

/// Fixed roughness rank with directions constant over each face, given as
/// angles in the face's deterministic tangent frame (adapted_frame of the
/// inward normal).  Empty angles take the first `rank` frame vectors.
struct ConstantRoughBC {
  int rank = 0;
  std::vector<double> angles;
};

/// Rough on the half of the ball surface where b_ref . axis >= 0, smooth on
/// the other half.
struct HemisphereBC {
  Vec axis;
};

/// Completely rough with probability p_rough, smooth otherwise.
struct RandomRoughBC {
  double p_rough = 0.5;
};

/// Roughness rank 1 with the direction angle drawn uniformly from `angles`
/// at every collision.
struct RandomDirectionBC {
  std::vector<double> angles;
};

using BoundaryCondition =
    std::variant<SpecularBC, ConstantRoughBC, HemisphereBC, RandomRoughBC, RandomDirectionBC>;

struct TangentInvolution {
  Mat T;
  int rank = 0;
};

/// Assignment of a boundary condition to every table face, with optional
/// per-face overrides.
class BoundaryField {
 public:
  explicit BoundaryField(BoundaryCondition everywhere) : default_(std::move(everywhere)) {}

  void set_face(int face, BoundaryCondition bc);
  const BoundaryCondition& at_face(int face) const;

  /// Involution for a collision on `face` with world inward normal nu_world,
  /// ball contact b_ref, and ball orientation A.
  TangentInvolution evaluate(int face, const Vec& nu_world, const Vec& b_ref, const Mat& A,
                             Rng& rng) const;

 private:
  BoundaryCondition default_;
  std::vector<std::pair<int, BoundaryCondition>> overrides_;
};

/// Rough directions in the tangent plane of a face, in world coordinates:
/// angle theta maps to cos(theta) f0 + sin(theta) f1 in the deterministic
/// frame of the inward normal.  Returns an n x k orthonormal matrix.
Mat face_rough_directions(const Vec& nu_world, int rank, const std::vector<double>& angles);

struct StepOutcome {
  BilliardState state;
  double tau = 0.0;
  int rough_rank = 0;
};

/// One step of the billiard map: next collision of the center ray, free
/// flight, pull-back of the contact, boundary-condition evaluation, and the
/// collision update.
std::variant<StepOutcome, StepFailure> step(const BilliardState& state, const Table& table,
                                            const BoundaryField& field,
                                            const BilliardParams& params, Rng& rng);

struct TrajectoryRecord {
  std::vector<BilliardState> states;  // states[0] is the initial state
  std::vector<double> flight_times;
  std::vector<int> rough_ranks;
  std::optional<StepFailure> failure;

  int steps() const { return static_cast<int>(flight_times.size()); }
};

/// Runs `count` steps (fewer on failure, which is recorded with its reason).
/// Deterministic for a given rng state.
TrajectoryRecord simulate(const BilliardState& initial, const Table& table,
                          const BoundaryField& field, const BilliardParams& params, int count,
                          Rng& rng);

/// Post-collision state with contact point b on the table boundary, body
/// rotation A, body-frame spin Z and world center velocity v_world (must not
/// point out of the free region).
BilliardState contact_state(const Table& table, const BilliardParams& params, const Vec& b,
                            const SkewMatrix& z_angular, const Vec& v_world, const Mat& rotation);
BilliardState contact_state(const Table& table, const BilliardParams& params, const Vec& b,
                            const SkewMatrix& z_angular, const Vec& v_world);

}  // namespace rough

#pragma once

#include "rough/mechanics.hpp"
#include "rough/rng.hpp"

namespace rough {

/// Two placements touching at a single point, with the contact data needed
/// to assemble the kinematic relations: reference contact points b_j, outward
/// unit normals nu_j, adapted frames sigma_j (sigma_j e_n = -(-1)^j nu_j),
/// and optional shape operators in the adapted frames.
struct ContactConfiguration {
  EuclideanElement g1, g2;
  Vec b1, b2;
  Vec nu1, nu2;
  Mat sigma1, sigma2;
  Mat S1, S2;  // (n-1)x(n-1); empty when unknown

  int dim() const { return g1.dim(); }
  Vec world_contact() const { return g1.apply(b1); }
  /// Outward normal of body 1 at the contact, in world coordinates.
  Vec world_normal() const { return g1.A * nu1; }

  /// Throws std::invalid_argument when the contact invariants fail:
  /// g1(b1)=g2(b2), A1 sigma1 = A2 sigma2, unit normals, frames in SO(n).
  void validate(double tol = 1e-9) const;
};

/// Random valid contact configuration: independent contact points and
/// normals on both bodies (a generic smooth body realizes any such pair),
/// rotations aligning the contact, and random SPD shape operators.
ContactConfiguration random_contact(int n, Rng& rng);

/// Random masses in [0.5, 2] and random SPD inertia matrices.
TwoBodySystem random_two_body_system(int n, Rng& rng);

// ---------------------------------------------------------------------------
// Flat coordinates on the two-body velocity space g + g (dimension n(n+1)).

inline int pair_dim(int n) { return 2 * se_dim(n); }

Vec pair_coords(const PairVelocity& v);
PairVelocity pair_from_coords(const Vec& c, int n);

/// Gram matrix of the kinetic-energy metric in flat coordinates.
Mat metric_matrix(const TwoBodySystem& sys, int n);

/// Span of tangent vectors, stored as flattened columns.
struct SubspaceBasis {
  Mat coords;  // pair_dim(n) x count
  int n = 0;
  bool orthonormal = false;  // Gram under the kinetic metric == identity

  int count() const { return static_cast<int>(coords.cols()); }
  PairVelocity vector(int i) const { return pair_from_coords(coords.col(i), n); }
};

/// Metric-orthonormal basis of the column span of V; columns whose singular
/// direction falls below tol * max are dropped.
Mat metric_orthonormalize(const Mat& v, const Mat& metric, double tol = 1e-9);

// Kinematic subspaces at a contact configuration.  Each is extracted as the
// null space of the corresponding stacked linear relations (SVD, rank cut at
// 1e-9 of the largest singular value) and returned metric-orthonormal.

/// Tangency relation alone: equal normal velocities of the contact points.
SubspaceBasis boundary_tangent_subspace(const ContactConfiguration& q, const TwoBodySystem& sys);

/// Non-slipping: contact points share their full world velocity.  Dimension
/// 2 dim g - n.
SubspaceBasis nonslipping_subspace(const ContactConfiguration& q, const TwoBodySystem& sys);

/// Rolling: non-slipping plus non-twisting (the tangent planes at the
/// contact do not rotate relative to each other).  The shared rotation W and
/// the in-plane vectors w_j of the non-twisting relation enter as slack
/// columns and are eliminated by the null-space projection.
SubspaceBasis rolling_subspace(const ContactConfiguration& q, const TwoBodySystem& sys);

/// Simultaneous rigid motion of both bodies.  Dimension dim g.
SubspaceBasis diagonal_subspace(const ContactConfiguration& q, const TwoBodySystem& sys);

/// Velocity changes realizable by a single impulse at the contact point with
/// opposite impulses on the two bodies:
///   (L_1^-1(b1 ^ u1), u1, L_2^-1(b2 ^ u2), u2),  m1 A1 u1 + m2 A2 u2 = 0.
/// Dimension n.
SubspaceBasis impulse_subspace(const ContactConfiguration& q, const TwoBodySystem& sys);

/// Unit normal to the boundary of the configuration manifold, pointing into
/// the interior (separating direction increases):
///   n_q = (c1 (L_1^-1(b1 ^ nu1), nu1), c2 (L_2^-1(b2 ^ nu2), nu2)),
/// with m1 c1 = m2 c2 and unit kinetic norm.
PairVelocity unit_normal(const ContactConfiguration& q, const TwoBodySystem& sys);

/// Metric-orthonormal basis of the impulse subspace minus the normal line
/// (the home of every roughness subspace); n-1 columns.
SubspaceBasis impulse_complement(const ContactConfiguration& q, const TwoBodySystem& sys);

/// Random k-dimensional roughness subspace, metric-orthonormal columns.
Mat random_roughness(const ContactConfiguration& q, const TwoBodySystem& sys, int k, Rng& rng);

/// Linear isometric involution of the two-body velocity space that fixes the
/// non-slipping subspace pointwise: identity on the orthogonal complement of
/// span{n_q} + roughness, and -1 there.  Uniquely determined by the
/// roughness subspace.
class CollisionMap {
 public:
  CollisionMap(int n, Mat metric, Vec normal_coords, Mat roughness);

  int dim() const { return n_; }
  /// Roughness rank k (the -1 eigenspace has dimension k + 1).
  int rank() const { return static_cast<int>(roughness_.cols()); }

  Vec apply_coords(const Vec& v) const;
  PairVelocity apply(const PairVelocity& v) const;

  /// Dense matrix of the map in flat coordinates.
  Mat matrix() const;

  const Vec& normal_coords() const { return normal_; }
  const Mat& roughness_coords() const { return roughness_; }
  const Mat& metric() const { return metric_; }

 private:
  int n_;
  Mat metric_;
  Vec normal_;     // unit normal, flat coordinates
  Mat roughness_;  // pair_dim x k, metric-orthonormal, orthogonal to normal
};

/// Validates that the roughness columns are metric-orthonormal, orthogonal
/// to the unit normal, and inside the impulse subspace (all to 1e-9), then
/// assembles the map.
CollisionMap build_collision_map(const ContactConfiguration& q, const TwoBodySystem& sys,
                                 const Mat& roughness);

/// Residuals of the strict-collision conditions on random states:
/// isometry, involution, identity on the non-slipping subspace, impulse
/// membership of C v - v, and momentum (identity on the diagonal subspace).
struct StrictnessReport {
  double isometry = 0.0;
  double involution = 0.0;
  double nonslip_identity = 0.0;
  double impulse_membership = 0.0;
  double momentum = 0.0;

  bool isometry_ok(double tol = 1e-9) const { return isometry < tol; }
  bool involution_ok(double tol = 1e-9) const { return involution < tol; }
  bool nonslip_ok(double tol = 1e-9) const { return nonslip_identity < tol; }
  bool impulse_ok(double tol = 1e-9) const { return impulse_membership < tol; }
  bool momentum_ok(double tol = 1e-9) const { return momentum < tol; }
  bool pass(double tol = 1e-9) const {
    return isometry_ok(tol) && involution_ok(tol) && nonslip_ok(tol) && impulse_ok(tol) &&
           momentum_ok(tol);
  }
  double max_residual() const;
};

StrictnessReport verify_strict(const CollisionMap& map, const ContactConfiguration& q,
                               const TwoBodySystem& sys, int trials = 32,
                               std::uint64_t seed = 12345);

/// Dimension of the family of collision maps with roughness rank k in
/// ambient dimension n: k (n - k - 1).
int grassmannian_dim(int n, int k);

struct RegularityResult {
  bool nonsingular = false;
  double smallest_singular_value = 0.0;
};

/// Smallest singular value of S1 + S2; nonsingular iff it exceeds 1e-9.
RegularityResult regularity_check(const Mat& s1, const Mat& s2);

}  // namespace rough

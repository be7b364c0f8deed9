#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace rough {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Skew-symmetric n-by-n matrix (an element of so(n)).
///
/// Construction antisymmetrizes the input, (Z - Z^T)/2, so the invariant
/// Z^T = -Z survives long chains of products and round-off.
class SkewMatrix {
 public:
  SkewMatrix() = default;
  explicit SkewMatrix(const Mat& z) : m_(0.5 * (z - z.transpose())) {}

  static SkewMatrix zero(int n) { return SkewMatrix(Mat::Zero(n, n)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }

  Vec apply(const Vec& v) const { return m_ * v; }
  double norm() const { return m_.norm(); }

  SkewMatrix operator+(const SkewMatrix& o) const { return SkewMatrix(m_ + o.m_); }
  SkewMatrix operator-(const SkewMatrix& o) const { return SkewMatrix(m_ - o.m_); }
  SkewMatrix operator-() const { return SkewMatrix(-m_); }
  SkewMatrix& operator+=(const SkewMatrix& o) {
    m_ += o.m_;
    return *this;
  }

  friend SkewMatrix operator*(double s, const SkewMatrix& z) { return SkewMatrix(s * z.m_); }

 private:
  Mat m_;
};

/// Wedge product of two vectors: the skew matrix with entries
/// (a ^ b)_ij = a_j b_i - a_i b_j.  For orthonormal a, b this generates the
/// rotation taking a toward b in their plane.
SkewMatrix wedge(const Vec& a, const Vec& b);

/// [Z, W] = ZW - WZ.
SkewMatrix commutator(const SkewMatrix& z, const SkewMatrix& w);

/// Conjugation Ad_A Z = A Z A^-1 for A in SO(n).
SkewMatrix adjoint(const Mat& rotation, const SkewMatrix& z);

/// Rigid placement (A, a): x -> A x + a with A in SO(n).
struct EuclideanElement {
  Mat A;
  Vec a;

  static EuclideanElement identity(int n);

  int dim() const { return static_cast<int>(a.size()); }
  Vec apply(const Vec& b) const { return A * b + a; }

  /// Max-norm of A^T A - I; grows with accumulated round-off.
  double rotation_drift() const;

  /// Nearest rotation by polar decomposition (applied when drift exceeds 1e-9).
  EuclideanElement normalized() const;
};

EuclideanElement group_mul(const EuclideanElement& g2, const EuclideanElement& g1);
EuclideanElement group_inv(const EuclideanElement& g);

inline EuclideanElement operator*(const EuclideanElement& g2, const EuclideanElement& g1) {
  return group_mul(g2, g1);
}

/// Left-translated velocity (Z, z) in se(n).
struct AlgebraVector {
  SkewMatrix Z;
  Vec z;

  static AlgebraVector zero(int n) { return {SkewMatrix::zero(n), Vec::Zero(n)}; }
  int dim() const { return static_cast<int>(z.size()); }

  AlgebraVector operator+(const AlgebraVector& o) const { return {Z + o.Z, z + o.z}; }
  AlgebraVector operator-(const AlgebraVector& o) const { return {Z - o.Z, z - o.z}; }
  AlgebraVector operator-() const { return {-Z, -z}; }
  friend AlgebraVector operator*(double s, const AlgebraVector& v) { return {s * v.Z, s * v.z}; }
};

/// se(n) bracket [(Z,z),(W,w)] = (ZW - WZ, Zw - Wz).
AlgebraVector se_bracket(const AlgebraVector& u, const AlgebraVector& v);

/// exp(X) for skew X.  Closed forms for n <= 3 (planar angle formula,
/// Rodrigues); scaling-and-squaring with a [6/6] Pade approximant otherwise.
/// Accurate to ~1e-12 on inputs with norm up to ~10.
Mat so_exp(const SkewMatrix& x);

/// One-parameter subgroup of SE(n): (exp(tX), int_0^t exp(sX) w ds).
/// The translation integral is summed as t(I + tX/2! + t^2 X^2/3! + ...)
/// with argument scaling and doubling, so singular X needs no inversion.
EuclideanElement se_exp(const SkewMatrix& x, const Vec& w, double t);

inline EuclideanElement se_exp(const AlgebraVector& xi, double t) { return se_exp(xi.Z, xi.z, t); }

/// Nearest rotation to a (possibly drifted) matrix, via SVD polar decomposition.
Mat polar_rotation(const Mat& m);

/// Deterministic rotation with frame e_n = sign * nu for a unit vector nu.
/// The remaining columns come from Gram-Schmidt over the standard basis in
/// index order, skipping the basis vector most parallel to nu; a negative
/// determinant is fixed by flipping the first completed column.
Mat adapted_frame(const Vec& nu, int sign);

// Coordinates on so(n) and se(n), used to flatten tangent vectors into
// column vectors for null-space and Gram computations.

inline int so_dim(int n) { return n * (n - 1) / 2; }
inline int se_dim(int n) { return n * (n + 1) / 2; }

/// Index pairs (i, j), i < j, enumerating the basis e_i ^ e_j of so(n).
const std::vector<std::pair<int, int>>& so_index_pairs(int n);

/// Coefficients of Z in the basis e_i ^ e_j (coefficient of pair (i,j) is Z(j,i)).
Vec skew_coords(const SkewMatrix& z);
SkewMatrix skew_from_coords(const Vec& c, int n);

Vec algebra_coords(const AlgebraVector& v);
AlgebraVector algebra_from_coords(const Vec& c, int n);

}  // namespace rough

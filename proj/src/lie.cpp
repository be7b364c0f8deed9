#include "rough/lie.hpp"

#include <cmath>
#include <stdexcept>

namespace rough {

SkewMatrix wedge(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wedge: dimension mismatch");
  // (a ^ b)_ij = a_j b_i - a_i b_j  ==  b a^T - a b^T
  return SkewMatrix(b * a.transpose() - a * b.transpose());
}

SkewMatrix commutator(const SkewMatrix& z, const SkewMatrix& w) {
  return SkewMatrix(z.matrix() * w.matrix() - w.matrix() * z.matrix());
}

SkewMatrix adjoint(const Mat& rotation, const SkewMatrix& z) {
  return SkewMatrix(rotation * z.matrix() * rotation.transpose());
}

EuclideanElement EuclideanElement::identity(int n) {
  return {Mat::Identity(n, n), Vec::Zero(n)};
}

double EuclideanElement::rotation_drift() const {
  const int n = dim();
  return (A.transpose() * A - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
}

EuclideanElement EuclideanElement::normalized() const { return {polar_rotation(A), a}; }

EuclideanElement group_mul(const EuclideanElement& g2, const EuclideanElement& g1) {
  if (g2.dim() != g1.dim()) throw std::invalid_argument("group_mul: dimension mismatch");
  return {g2.A * g1.A, g2.A * g1.a + g2.a};
}

EuclideanElement group_inv(const EuclideanElement& g) {
  Mat ainv = g.A.transpose();
  return {ainv, -(ainv * g.a)};
}

AlgebraVector se_bracket(const AlgebraVector& u, const AlgebraVector& v) {
  return {commutator(u.Z, v.Z), u.Z.apply(v.z) - v.Z.apply(u.z)};
}

namespace {

// [6/6] Pade approximant with scaling and squaring.  Adequate for the small
// dense matrices used here (argument scaled to 1-norm <= 0.25).
Mat exp_pade(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  const Mat id = Mat::Identity(n, n);

  int squarings = 0;
  double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  while (norm > 0.25) {
    norm /= 2.0;
    ++squarings;
  }
  const Mat a = m / std::pow(2.0, squarings);

  // c_k = 6! (12-k)! / (12! k! (6-k)!)
  double c[7];
  c[0] = 1.0;
  for (int k = 0; k < 6; ++k) c[k + 1] = c[k] * (6.0 - k) / ((12.0 - k) * (k + 1.0));

  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u = a * (c[1] * id + c[3] * a2 + c[5] * a4);
  const Mat v = c[0] * id + c[2] * a2 + c[4] * a4 + c[6] * a6;

  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace

Mat so_exp(const SkewMatrix& x) {
  const int n = x.dim();
  const Mat& z = x.matrix();
  if (n <= 1) return Mat::Identity(n, n);
  if (n == 2) {
    const double t = z(1, 0);
    Mat r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
  }
  if (n == 3) {
    // Rodrigues. theta^2 = |omega|^2 = ||Z||_F^2 / 2.
    const double theta = z.norm() / std::sqrt(2.0);
    if (theta < 1e-8) {
      // Series for the two trig coefficients near zero.
      return Mat::Identity(3, 3) + (1.0 - theta * theta / 6.0) * z +
             (0.5 - theta * theta / 24.0) * (z * z);
    }
    return Mat::Identity(3, 3) + (std::sin(theta) / theta) * z +
           ((1.0 - std::cos(theta)) / (theta * theta)) * (z * z);
  }
  return exp_pade(z);
}

EuclideanElement se_exp(const SkewMatrix& x, const Vec& w, double t) {
  const int n = x.dim();
  if (w.size() != n) throw std::invalid_argument("se_exp: dimension mismatch");
  const SkewMatrix tx(t * x.matrix());
  const Mat rot = so_exp(tx);

  // phi(B) = sum_k B^k / (k+1)!, so the translation is t * phi(tX) w.
  // Scale B until small, sum the series, then double with
  // phi(2B) = (I + exp(B)) phi(B) / 2.
  const Mat b_full = tx.matrix();
  int doublings = 0;
  double norm = b_full.cwiseAbs().colwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2.0;
    ++doublings;
  }
  const Mat b = b_full / std::pow(2.0, doublings);
  const Mat id = Mat::Identity(n, n);

  Mat phi = id;
  Mat term = id;
  for (int k = 1; k < 30; ++k) {
    term = term * b / static_cast<double>(k);  // B^k / k!
    const Mat add = term / static_cast<double>(k + 1);
    phi += add;
    if (add.cwiseAbs().maxCoeff() < 1e-18) break;
  }

  Mat e = so_exp(SkewMatrix(b));
  for (int i = 0; i < doublings; ++i) {
    phi = 0.5 * ((id + e) * phi);
    e = e * e;
  }
  return {rot, t * (phi * w)};
}

Mat polar_rotation(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU();
  const Mat v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(u.cols() - 1) *= -1.0;
  return u * v.transpose();
}

Mat adapted_frame(const Vec& nu, int sign) {
  const int n = static_cast<int>(nu.size());
  if (std::abs(nu.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("adapted_frame: normal must be a unit vector");
  const Vec u = static_cast<double>(sign) * nu;

  int skip = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(u[i]) > std::abs(u[skip])) skip = i;

  Mat frame(n, n);
  frame.col(n - 1) = u;
  int col = 0;
  for (int i = 0; i < n && col < n - 1; ++i) {
    if (i == skip) continue;
    Vec v = Vec::Zero(n);
    v[i] = 1.0;
    v -= v.dot(u) * u;
    for (int c = 0; c < col; ++c) v -= v.dot(frame.col(c)) * frame.col(c);
    frame.col(col++) = v / v.norm();
  }
  if (frame.determinant() < 0.0) frame.col(0) *= -1.0;
  return frame;
}

const std::vector<std::pair<int, int>>& so_index_pairs(int n) {
  constexpr int kMaxDim = 16;
  if (n < 0 || n > kMaxDim) throw std::invalid_argument("so_index_pairs: dimension out of range");
  // Built once; safe to call from concurrent workers afterwards.
  static const auto table = [] {
    std::vector<std::vector<std::pair<int, int>>> all(kMaxDim + 1);
    for (int dim = 0; dim <= kMaxDim; ++dim)
      for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) all[dim].emplace_back(i, j);
    return all;
  }();
  return table[n];
}

Vec skew_coords(const SkewMatrix& z) {
  const auto& pairs = so_index_pairs(z.dim());
  Vec c(static_cast<int>(pairs.size()));
  for (size_t p = 0; p < pairs.size(); ++p) c[static_cast<int>(p)] = z.matrix()(pairs[p].second, pairs[p].first);
  return c;
}

SkewMatrix skew_from_coords(const Vec& c, int n) {
  const auto& pairs = so_index_pairs(n);
  if (c.size() != static_cast<int>(pairs.size()))
    throw std::invalid_argument("skew_from_coords: wrong coordinate count");
  Mat m = Mat::Zero(n, n);
  for (size_t p = 0; p < pairs.size(); ++p) {
    m(pairs[p].second, pairs[p].first) = c[static_cast<int>(p)];
    m(pairs[p].first, pairs[p].second) = -c[static_cast<int>(p)];
  }
  return SkewMatrix(m);
}

Vec algebra_coords(const AlgebraVector& v) {
  const int n = v.dim();
  Vec c(se_dim(n));
  c.head(so_dim(n)) = skew_coords(v.Z);
  c.tail(n) = v.z;
  return c;
}

AlgebraVector algebra_from_coords(const Vec& c, int n) {
  if (c.size() != se_dim(n)) throw std::invalid_argument("algebra_from_coords: wrong coordinate count");
  return {skew_from_coords(c.head(so_dim(n)), n), c.tail(n)};
}

}  // namespace rough

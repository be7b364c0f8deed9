#include "rough/contact.hpp"

#include <cmath>
#include <stdexcept>

namespace rough {

namespace {

Vec random_gaussian(int n, Rng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Vec random_unit(int n, Rng& rng) {
  Vec v = random_gaussian(n, rng);
  while (v.norm() < 1e-6) v = random_gaussian(n, rng);
  return v / v.norm();
}

Mat random_rotation(int n, Rng& rng) {
  if (n == 1) return Mat::Identity(1, 1);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

Mat random_spd(int n, Rng& rng, double lo = 0.3, double hi = 2.0) {
  const Mat q = random_rotation(n, rng);
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = rng.uniform(lo, hi);
  return q * d.asDiagonal() * q.transpose();
}

Mat null_space(const Mat& rel, double tol = 1e-9) {
  Eigen::JacobiSVD<Mat> svd(rel, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * std::max(smax, 1e-300)) ++rank;
  return svd.matrixV().rightCols(static_cast<int>(rel.cols()) - rank);
}

// Columns of the so(n) basis acting on a point: A (E_p b) for each pair p.
Mat so_action_columns(const Mat& a, const Vec& b) {
  const int n = static_cast<int>(b.size());
  const auto& pairs = so_index_pairs(n);
  Mat cols(n, static_cast<int>(pairs.size()));
  for (size_t p = 0; p < pairs.size(); ++p) {
    Vec eb = Vec::Zero(n);
    // (e_i ^ e_j) b = b_i e_j - b_j e_i
    eb[pairs[p].second] = b[pairs[p].first];
    eb[pairs[p].first] = -b[pairs[p].second];
    cols.col(static_cast<int>(p)) = a * eb;
  }
  return cols;
}

// Coordinates of Ad_A E_p for each basis pair p, as columns.
Mat adjoint_columns(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  const auto& pairs = so_index_pairs(n);
  Mat cols(so_dim(n), static_cast<int>(pairs.size()));
  for (size_t p = 0; p < pairs.size(); ++p) {
    const SkewMatrix e = wedge(a.col(pairs[p].first), a.col(pairs[p].second));
    // Ad_A (e_i ^ e_j) = (A e_i) ^ (A e_j)
    cols.col(static_cast<int>(p)) = skew_coords(e);
  }
  return cols;
}

struct RelationBlocks {
  int n = 0;
  Mat act1, act2;  // A_j (E_p b_j)
  Mat adj1, adj2;  // coords(Ad_{A_j} E_p)
};

RelationBlocks relation_blocks(const ContactConfiguration& q) {
  RelationBlocks rb;
  rb.n = q.dim();
  rb.act1 = so_action_columns(q.g1.A, q.b1);
  rb.act2 = so_action_columns(q.g2.A, q.b2);
  rb.adj1 = adjoint_columns(q.g1.A);
  rb.adj2 = adjoint_columns(q.g2.A);
  return rb;
}

// Equal world velocities of the two contact points; n rows over the flat
// coordinates [c1, z1, c2, z2].
Mat relation_nonslip(const ContactConfiguration& q, const RelationBlocks& rb) {
  const int n = rb.n;
  Mat rel = Mat::Zero(n, pair_dim(n));
  int c = 0;
  rel.block(0, c, n, so_dim(n)) = rb.act1;
  c += so_dim(n);
  rel.block(0, c, n, n) = q.g1.A;
  c += n;
  rel.block(0, c, n, so_dim(n)) = -rb.act2;
  c += so_dim(n);
  rel.block(0, c, n, n) = -q.g2.A;
  return rel;
}

// Non-twisting: Ad_{A_j} Z_j = W + nhat ^ w_j with shared W in so(n) and w_j
// in the world contact plane.  Variables: [xi | W | w_1 | w_2].
Mat relation_nontwist(const ContactConfiguration& q, const RelationBlocks& rb) {
  const int n = rb.n;
  const int sd = so_dim(n);
  const Vec nhat = q.world_normal();
  const Mat frame = adapted_frame(nhat, 1);

  Mat wedge_cols(sd, n - 1);
  for (int t = 0; t < n - 1; ++t) wedge_cols.col(t) = skew_coords(wedge(nhat, frame.col(t)));

  Mat rel = Mat::Zero(2 * sd, pair_dim(n) + sd + 2 * (n - 1));
  // body 1 rows
  rel.block(0, 0, sd, sd) = rb.adj1;
  rel.block(0, pair_dim(n), sd, sd) = -Mat::Identity(sd, sd);
  rel.block(0, pair_dim(n) + sd, sd, n - 1) = -wedge_cols;
  // body 2 rows
  rel.block(sd, se_dim(n), sd, sd) = rb.adj2;
  rel.block(sd, pair_dim(n), sd, sd) = -Mat::Identity(sd, sd);
  rel.block(sd, pair_dim(n) + sd + (n - 1), sd, n - 1) = -wedge_cols;
  return rel;
}

// Equal world angular velocities.
Mat relation_diagonal_rotation(const RelationBlocks& rb) {
  const int n = rb.n;
  const int sd = so_dim(n);
  Mat rel = Mat::Zero(sd, pair_dim(n));
  rel.block(0, 0, sd, sd) = rb.adj1;
  rel.block(0, se_dim(n), sd, sd) = -rb.adj2;
  return rel;
}

SubspaceBasis from_null_space(const Mat& rel, const TwoBodySystem& sys, int n, int expected,
                              const char* what) {
  const Mat ker = null_space(rel);
  const Mat xi_part = ker.topRows(pair_dim(n));
  const Mat metric = metric_matrix(sys, n);
  const Mat basis = metric_orthonormalize(xi_part, metric);
  if (expected >= 0 && basis.cols() != expected)
    throw std::runtime_error(std::string(what) + ": unexpected subspace dimension " +
                             std::to_string(basis.cols()) + " (expected " +
                             std::to_string(expected) + "); bad contact configuration?");
  return {basis, n, true};
}

}  // namespace

void ContactConfiguration::validate(double tol) const {
  const int n = dim();
  const auto check = [&](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("ContactConfiguration: ") + msg);
  };
  check(std::abs(nu1.norm() - 1.0) < tol && std::abs(nu2.norm() - 1.0) < tol,
        "normals must be unit vectors");
  check((g1.apply(b1) - g2.apply(b2)).norm() < tol, "contact points disagree in world frame");
  check((g1.A * sigma1 - g2.A * sigma2).cwiseAbs().maxCoeff() < tol,
        "adapted frames disagree in world frame");
  const Mat id = Mat::Identity(n, n);
  check((sigma1.transpose() * sigma1 - id).cwiseAbs().maxCoeff() < tol &&
            sigma1.determinant() > 0.0,
        "sigma1 not in SO(n)");
  check((sigma2.transpose() * sigma2 - id).cwiseAbs().maxCoeff() < tol &&
            sigma2.determinant() > 0.0,
        "sigma2 not in SO(n)");
  check((sigma1.col(n - 1) - nu1).norm() < tol, "sigma1 e_n must equal nu1");
  check((sigma2.col(n - 1) + nu2).norm() < tol, "sigma2 e_n must equal -nu2");
}


ContactConfiguration random_contact(int n, Rng& rng) {
  ContactConfiguration q;
  q.b1 = random_gaussian(n, rng);
  q.b2 = random_gaussian(n, rng);
  q.nu1 = random_unit(n, rng);
  q.nu2 = random_unit(n, rng);

  q.g1.A = random_rotation(n, rng);
  q.g1.a = random_gaussian(n, rng);
  const Vec nhat = q.g1.A * q.nu1;

  // A2 maps nu2 to -nhat; a random stabilizer factor keeps the rest generic.
  Mat h = Mat::Identity(n, n);
  h.topLeftCorner(n - 1, n - 1) = random_rotation(n - 1, rng);
  q.g2.A = adapted_frame(-nhat, 1) * h * adapted_frame(q.nu2, 1).transpose();
  q.g2.a = q.g1.apply(q.b1) - q.g2.A * q.b2;

  q.sigma1 = adapted_frame(q.nu1, 1);
  q.sigma2 = q.g2.A.transpose() * q.g1.A * q.sigma1;

  q.S1 = random_spd(n - 1, rng);
  q.S2 = random_spd(n - 1, rng);
  q.validate();
  return q;
}

TwoBodySystem random_two_body_system(int n, Rng& rng) {
  TwoBodySystem sys;
  sys.first.mass = rng.uniform(0.5, 2.0);
  sys.second.mass = rng.uniform(0.5, 2.0);
  sys.first.inertia = random_spd(n, rng);
  sys.second.inertia = random_spd(n, rng);
  sys.first.model = RigidBody::MassModel::sampled;
  sys.second.model = RigidBody::MassModel::sampled;
  return sys;
}

Vec pair_coords(const PairVelocity& v) {
  const int n = v.first.dim();
  Vec c(pair_dim(n));
  c.head(se_dim(n)) = algebra_coords(v.first);
  c.tail(se_dim(n)) = algebra_coords(v.second);
  return c;
}

PairVelocity pair_from_coords(const Vec& c, int n) {
  if (c.size() != pair_dim(n)) throw std::invalid_argument("pair_from_coords: wrong size");
  return {algebra_from_coords(c.head(se_dim(n)), n), algebra_from_coords(c.tail(se_dim(n)), n)};
}

Mat metric_matrix(const TwoBodySystem& sys, int n) {
  const int d = pair_dim(n);
  Mat metric(d, d);
  std::vector<PairVelocity> basis;
  basis.reserve(d);
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = 1.0;
    basis.push_back(pair_from_coords(e, n));
  }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) metric(i, j) = metric(j, i) = kinetic_inner(sys, basis[i], basis[j]);
  return metric;
}

Mat metric_orthonormalize(const Mat& v, const Mat& metric, double tol) {
  if (v.cols() == 0) return v;
  // Rank decisions happen on singular values of M^(1/2) V; squaring into a
  // Gram matrix would push near-null directions below the eigensolver noise
  // floor and let them survive the cut.
  Eigen::SelfAdjointEigenSolver<Mat> ms(metric);
  const Mat root = ms.operatorSqrt();

  Mat basis = v;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::JacobiSVD<Mat> svd(root * basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double smax = sv[0];
    int rank = 0;
    while (rank < sv.size() && sv[rank] > tol * smax) ++rank;
    Mat next(basis.rows(), rank);
    for (int k = 0; k < rank; ++k) next.col(k) = basis * svd.matrixV().col(k) / sv[k];
    basis = next;
  }
  return basis;
}

SubspaceBasis boundary_tangent_subspace(const ContactConfiguration& q, const TwoBodySystem& sys) {
  const int n = q.dim();
  const RelationBlocks rb = relation_blocks(q);
  // nu1.(Z1 b1 + z1) + nu2.(Z2 b2 + z2) = 0; with this sign the non-slipping
  // relation implies tangency.
  Mat rel = Mat::Zero(1, pair_dim(n));
  int c = 0;
  rel.block(0, c, 1, so_dim(n)) = q.nu1.transpose() * (q.g1.A.transpose() * rb.act1);
  c += so_dim(n);
  rel.block(0, c, 1, n) = q.nu1.transpose();
  c += n;
  rel.block(0, c, 1, so_dim(n)) = q.nu2.transpose() * (q.g2.A.transpose() * rb.act2);
  c += so_dim(n);
  rel.block(0, c, 1, n) = q.nu2.transpose();
  return from_null_space(rel, sys, n, pair_dim(n) - 1, "boundary_tangent_subspace");
}

SubspaceBasis nonslipping_subspace(const ContactConfiguration& q, const TwoBodySystem& sys) {
  const int n = q.dim();
  const RelationBlocks rb = relation_blocks(q);
  return from_null_space(relation_nonslip(q, rb), sys, n, pair_dim(n) - n,
                         "nonslipping_subspace");
}

SubspaceBasis rolling_subspace(const ContactConfiguration& q, const TwoBodySystem& sys) {
  const int n = q.dim();
  const RelationBlocks rb = relation_blocks(q);
  const Mat twist = relation_nontwist(q, rb);
  Mat rel = Mat::Zero(n + twist.rows(), twist.cols());
  rel.topLeftCorner(n, pair_dim(n)) = relation_nonslip(q, rb);
  rel.bottomRows(twist.rows()) = twist;
  return from_null_space(rel, sys, n, se_dim(n) + n - 1, "rolling_subspace");
}

SubspaceBasis diagonal_subspace(const ContactConfiguration& q, const TwoBodySystem& sys) {
  const int n = q.dim();
  const RelationBlocks rb = relation_blocks(q);
  const Mat twist = relation_nontwist(q, rb);
  const int cols = static_cast<int>(twist.cols());
  Mat rel = Mat::Zero(n + twist.rows() + so_dim(n), cols);
  rel.topLeftCorner(n, pair_dim(n)) = relation_nonslip(q, rb);
  rel.block(n, 0, twist.rows(), cols) = twist;
  rel.bottomLeftCorner(so_dim(n), pair_dim(n)) = relation_diagonal_rotation(rb);
  return from_null_space(rel, sys, n, se_dim(n), "diagonal_subspace");
}

SubspaceBasis impulse_subspace(const ContactConfiguration& q, const TwoBodySystem& sys) {
  const int n = q.dim();
  const double mass_ratio = sys.second.mass / sys.first.mass;
  const Mat u1_of_u2 = -mass_ratio * (q.g1.A.transpose() * q.g2.A);

  Mat raw(pair_dim(n), n);
  for (int i = 0; i < n; ++i) {
    const Vec u2 = Vec::Unit(n, i);
    const Vec u1 = u1_of_u2 * u2;
    const PairVelocity v{{l_inverse(sys.first.inertia, wedge(q.b1, u1)), u1},
                         {l_inverse(sys.second.inertia, wedge(q.b2, u2)), u2}};
    raw.col(i) = pair_coords(v);
  }
  const Mat metric = metric_matrix(sys, n);
  const Mat basis = metric_orthonormalize(raw, metric);
  if (basis.cols() != n) throw std::runtime_error("impulse_subspace: degenerate configuration");
  return {basis, n, true};
}

PairVelocity unit_normal(const ContactConfiguration& q, const TwoBodySystem& sys) {
  const AlgebraVector part1{l_inverse(sys.first.inertia, wedge(q.b1, q.nu1)), q.nu1};
  const AlgebraVector part2{l_inverse(sys.second.inertia, wedge(q.b2, q.nu2)), q.nu2};
  PairVelocity base{(1.0 / sys.first.mass) * part1, (1.0 / sys.second.mass) * part2};

  const double norm2 = kinetic_inner(sys, base, base);
  if (!(norm2 > 0.0)) throw std::runtime_error("unit_normal: normalization failed");
  base = (1.0 / std::sqrt(norm2)) * base;

  // Point into the configuration manifold: positive pairing with the motion
  // translating body 2 along the world normal (separation increases).
  const int n = q.dim();
  PairVelocity separating{AlgebraVector::zero(n),
                          {SkewMatrix::zero(n), q.g2.A.transpose() * q.world_normal()}};
  if (kinetic_inner(sys, base, separating) < 0.0) base = -1.0 * base;
  return base;
}

SubspaceBasis impulse_complement(const ContactConfiguration& q, const TwoBodySystem& sys) {
  const int n = q.dim();
  const SubspaceBasis impulse = impulse_subspace(q, sys);
  const Mat metric = metric_matrix(sys, n);
  const Vec normal = pair_coords(unit_normal(q, sys));

  // Metric Gram-Schmidt against the normal first, then over the impulse basis.
  Mat kept(pair_dim(n), n - 1);
  int count = 0;
  for (int i = 0; i < impulse.count() && count < n - 1; ++i) {
    Vec v = impulse.coords.col(i);
    v -= (normal.transpose() * metric * v)(0) * normal;
    for (int c = 0; c < count; ++c) v -= (kept.col(c).transpose() * metric * v)(0) * kept.col(c);
    const double len = std::sqrt(v.transpose() * metric * v);
    if (len > 1e-8) kept.col(count++) = v / len;
  }
  if (count != n - 1) throw std::runtime_error("impulse_complement: rank deficiency");
  return {kept, n, true};
}

Mat random_roughness(const ContactConfiguration& q, const TwoBodySystem& sys, int k, Rng& rng) {
  const int n = q.dim();
  if (k < 0 || k > n - 1) throw std::invalid_argument("random_roughness: rank out of range");
  const SubspaceBasis comp = impulse_complement(q, sys);
  if (k == 0) return Mat(pair_dim(n), 0);
  Mat coeff(n - 1, k);
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < k; ++j) coeff(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(coeff);
  const Mat qfull = qr.householderQ();
  return comp.coords * qfull.leftCols(k);
}

CollisionMap::CollisionMap(int n, Mat metric, Vec normal_coords, Mat roughness)
    : n_(n), metric_(std::move(metric)), normal_(std::move(normal_coords)),
      roughness_(std::move(roughness)) {}

Vec CollisionMap::apply_coords(const Vec& v) const {
  Vec out = v - 2.0 * (normal_.transpose() * metric_ * v)(0)*normal_;
  if (roughness_.cols() > 0) out -= 2.0 * roughness_ * (roughness_.transpose() * (metric_ * v));
  return out;
}

PairVelocity CollisionMap::apply(const PairVelocity& v) const {
  return pair_from_coords(apply_coords(pair_coords(v)), n_);
}

Mat CollisionMap::matrix() const {
  const int d = pair_dim(n_);
  Mat m = Mat::Identity(d, d) - 2.0 * normal_ * (normal_.transpose() * metric_);
  if (roughness_.cols() > 0) m -= 2.0 * roughness_ * (roughness_.transpose() * metric_);
  return m;
}

CollisionMap build_collision_map(const ContactConfiguration& q, const TwoBodySystem& sys,
                                 const Mat& roughness) {
  const int n = q.dim();
  const int k = static_cast<int>(roughness.cols());
  if (k > n - 1) throw std::invalid_argument("build_collision_map: roughness rank exceeds n-1");

  const Mat metric = metric_matrix(sys, n);
  const Vec normal = pair_coords(unit_normal(q, sys));

  if (k > 0) {
    const Mat gram = roughness.transpose() * metric * roughness;
    if ((gram - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument("build_collision_map: roughness basis not orthonormal");
    if ((normal.transpose() * metric * roughness).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument("build_collision_map: roughness basis not orthogonal to the normal");

    const SubspaceBasis impulse = impulse_subspace(q, sys);
    const Mat proj = impulse.coords * (impulse.coords.transpose() * metric * roughness);
    if ((roughness - proj).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument("build_collision_map: roughness basis outside the impulse subspace");
  }
  return CollisionMap(n, metric, normal, roughness);
}

double StrictnessReport::max_residual() const {
  return std::max({isometry, involution, nonslip_identity, impulse_membership, momentum});
}

StrictnessReport verify_strict(const CollisionMap& map, const ContactConfiguration& q,
                               const TwoBodySystem& sys, int trials, std::uint64_t seed) {
  const int n = q.dim();
  const int d = pair_dim(n);
  const Mat& metric = map.metric();
  Rng rng(seed);

  const auto mnorm = [&](const Vec& v) { return std::sqrt(v.transpose() * metric * v); };
  const auto minner = [&](const Vec& u, const Vec& v) -> double {
    return u.transpose() * metric * v;
  };

  StrictnessReport rep;
  const SubspaceBasis nonslip = nonslipping_subspace(q, sys);
  const SubspaceBasis diag = diagonal_subspace(q, sys);
  const SubspaceBasis impulse = impulse_subspace(q, sys);

  for (int t = 0; t < trials; ++t) {
    Vec u = random_gaussian(d, rng);
    Vec v = random_gaussian(d, rng);
    const Vec cu = map.apply_coords(u);
    const Vec cv = map.apply_coords(v);

    rep.isometry = std::max(rep.isometry,
                            std::abs(minner(cu, cv) - minner(u, v)) / (mnorm(u) * mnorm(v)));
    rep.involution = std::max(rep.involution, mnorm(map.apply_coords(cv) - v) / mnorm(v));

    const Vec diff = cv - v;
    const Vec proj = impulse.coords * (impulse.coords.transpose() * (metric * diff));
    rep.impulse_membership = std::max(rep.impulse_membership, mnorm(diff - proj) / mnorm(v));
  }
  for (int i = 0; i < nonslip.count(); ++i) {
    const Vec s = nonslip.coords.col(i);
    rep.nonslip_identity = std::max(rep.nonslip_identity, mnorm(map.apply_coords(s) - s));
  }
  for (int i = 0; i < diag.count(); ++i) {
    const Vec s = diag.coords.col(i);
    rep.momentum = std::max(rep.momentum, mnorm(map.apply_coords(s) - s));
  }
  return rep;
}

int grassmannian_dim(int n, int k) {
  if (k < 0 || k > n - 1) throw std::invalid_argument("grassmannian_dim: rank out of range");
  return k * (n - k - 1);
}

RegularityResult regularity_check(const Mat& s1, const Mat& s2) {
  if (s1.rows() != s2.rows() || s1.cols() != s2.cols() || s1.rows() != s1.cols())
    throw std::invalid_argument("regularity_check: shape operators must be square of equal size");
  Eigen::JacobiSVD<Mat> svd(s1 + s2);
  const double smin = svd.singularValues().minCoeff();
  return {smin > 1e-9, smin};
}

}  // namespace rough

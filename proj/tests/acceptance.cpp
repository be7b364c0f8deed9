// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Every tolerance is pinned here; nothing is deferred to later
// calibration.

#include "rough/billiard.hpp"
#include "rough/contact.hpp"
#include "rough/experiments.hpp"
#include "rough/io.hpp"

#include "test_helpers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace rough;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

SkewMatrix spin2(double r) {
  Mat z(2, 2);
  z << 0, -r, r, 0;
  return SkewMatrix(z);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 1. Strictness: 500 random configurations per dimension, random roughness
//    rank, all residuals below 1e-9.
Outcome strictness_suite() {
  Rng rng(1001);
  double worst = 0.0;
  long trials = 0;
  for (int n : {2, 3, 4}) {
    for (int t = 0; t < 500; ++t) {
      const ContactConfiguration q = random_contact(n, rng);
      const TwoBodySystem sys = random_two_body_system(n, rng);
      const int k = rng.pick(n);
      const CollisionMap map = build_collision_map(q, sys, random_roughness(q, sys, k, rng));
      const StrictnessReport rep = verify_strict(map, q, sys, 16, 55 + t);
      worst = std::max(worst, rep.max_residual());
      ++trials;
    }
  }
  std::ostringstream os;
  os << trials << " configurations, max residual " << format_double(worst);
  return {worst < 1e-9, os.str()};
}

// 2. Orthogonal decomposition: subspace dimensions, mutual inner products,
//    and membership of the unit normal.
Outcome orthogonality_suite() {
  Rng rng(2002);
  double worst = 0.0;
  bool dims_ok = true;
  for (int n : {2, 3, 4}) {
    for (int t = 0; t < 500; ++t) {
      const ContactConfiguration q = random_contact(n, rng);
      const TwoBodySystem sys = random_two_body_system(n, rng);
      const Mat metric = metric_matrix(sys, n);

      const SubspaceBasis nonslip = nonslipping_subspace(q, sys);
      const SubspaceBasis impulse = impulse_subspace(q, sys);
      dims_ok = dims_ok && nonslip.count() == 2 * se_dim(n) - n && impulse.count() == n;

      const Mat cross = nonslip.coords.transpose() * metric * impulse.coords;
      worst = std::max(worst, cross.cwiseAbs().maxCoeff());

      const Vec normal = pair_coords(unit_normal(q, sys));
      const Vec resid = normal - impulse.coords * (impulse.coords.transpose() * metric * normal);
      worst = std::max(worst, std::sqrt(resid.transpose() * metric * resid));
    }
  }
  std::ostringstream os;
  os << "dims " << (dims_ok ? "ok" : "WRONG") << ", max residual " << format_double(worst);
  return {dims_ok && worst < 1e-9, os.str()};
}

// 3. Grassmannian dimension table for n <= 5.
Outcome grassmannian_table() {
  const int expected[5][5] = {{0, -1, -1, -1, -1},
                              {0, 0, -1, -1, -1},
                              {0, 1, 0, -1, -1},
                              {0, 2, 2, 0, -1},
                              {0, 3, 4, 3, 0}};
  for (int n = 1; n <= 5; ++n)
    for (int k = 0; k <= n - 1; ++k)
      if (grassmannian_dim(n, k) != expected[n - 1][k])
        return {false, "mismatch at n=" + std::to_string(n) + ", k=" + std::to_string(k)};
  return {true, "all 15 entries exact"};
}

// 4. Planar closed form vs the general update, and the tetrahedral angle.
Outcome planar_closed_form() {
  Rng rng(4004);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double radius = rng.uniform(0.3, 2.0);
    const double lambda = radius * radius / 4.0;
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    Mat a(2, 2);
    a << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Vec b_ref = radius * testutil::rand_unit(2, rng);
    const SkewMatrix z = spin2(rng.normal());
    const Vec lin = testutil::rand_vec(2, rng);
    const Vec nu_table = -(a * b_ref) / radius;

    const auto [z_gen, lin_gen] = collide(z, lin, b_ref, -Mat::Identity(2, 2), lambda, radius);
    const auto [v0_out, v_out] =
        collide_2d(radius * z.matrix()(1, 0) / std::sqrt(2.0), (a * lin).eval(), nu_table);

    worst = std::max(worst,
                     std::abs(v0_out - radius * z_gen.matrix()(1, 0) / std::sqrt(2.0)));
    worst = std::max(worst, (v_out - a * lin_gen).cwiseAbs().maxCoeff());
  }

  // recover the update coefficients by probing unit states at nu = e2
  const Vec nu = vec2(0, 1), jnu = vec2(-1, 0);
  const auto probe_v0 = collide_2d(1.0, vec2(0, 0), nu);
  const auto probe_t = collide_2d(0.0, jnu, nu);
  const double c_self = probe_v0.first;                 // -1/3
  const double c_cross = probe_t.first;                 // 2 sqrt2 / 3
  const double cos_beta = probe_t.second.dot(jnu) / 1.0;  // tangential diagonal = 1/3

  const bool coeffs = std::abs(c_self + 1.0 / 3.0) < 1e-15 &&
                      std::abs(c_cross - 2.0 * std::sqrt(2.0) / 3.0) < 1e-15 &&
                      std::abs(probe_v0.second.dot(jnu) - 2.0 * std::sqrt(2.0) / 3.0) < 1e-15 &&
                      std::abs(cos_beta - 1.0 / 3.0) < 1e-15;

  std::ostringstream os;
  os << "1000 states, max deviation " << format_double(worst) << ", cos beta = "
     << format_double(cos_beta);
  return {worst < 1e-12 && coeffs, os.str()};
}

// 5. Energy conservation over 1e4 steps on every table variant, plus the
//    velocity-reversal round trip through the collision update.
Outcome energy_and_reversibility() {
  struct Case {
    Table table;
    BoundaryCondition bc;
    Vec b, v;
    double spin;
  };
  const std::vector<Case> cases = {
      {CircleTable{2.0}, ConstantRoughBC{1, {}}, vec2(2, 0), vec2(-0.8, 0.55), 0.7},
      {WedgeTable{0.6}, ConstantRoughBC{1, {}},
       vec2(1.5 * std::sin(0.6), 1.5 * std::cos(0.6)),
       Vec(), -0.6},
      {StripTable{2.0}, HemisphereBC{vec2(1, 0)}, vec2(0, 0), vec2(0.3, 1.0), 0.4},
      {BoxTable{3.0, 2.0}, RandomRoughBC{0.5}, vec2(0.7, 0), vec2(0.3, 1.0), 0.4},
      {Plates3dTable{2.0}, ConstantRoughBC{2, {}}, vec3(0, 0, 0), vec3(0.4, 0.25, 1.0), 0.0},
  };

  double worst_drift = 0.0;
  std::string failed;
  for (const auto& c : cases) {
    const int n = table_dim(c.table);
    const double radius = n == 2 ? (std::holds_alternative<WedgeTable>(c.table) ? 0.2 : 0.4) : 0.4;
    const BilliardParams params{radius, ball_inertia(radius, n), 1.0};

    Vec v = c.v;
    if (std::holds_alternative<WedgeTable>(c.table)) {
      // inward launch rotated off the wall normal (a long-lived rough orbit)
      const double half = 0.6, ang = -0.6;
      const Vec nrm = vec2(-std::cos(half), std::sin(half));
      const Vec tan = vec2(std::sin(half), std::cos(half));
      v = std::cos(ang) * nrm + std::sin(ang) * tan;
    }
    SkewMatrix z = SkewMatrix::zero(n);
    if (n == 2) z = spin2(std::sqrt(2.0) * c.spin / radius);

    const BilliardState initial = contact_state(c.table, params, c.b, z, v);
    Rng rng(5005);
    const TrajectoryRecord record =
        simulate(initial, c.table, BoundaryField{c.bc}, params, 10000, rng);
    if (record.failure) {
      failed = table_name(c.table) + " stopped early: " + record.failure->detail;
      break;
    }
    const double e0 = billiard_energy(params, initial.xi);
    for (const auto& s : record.states)
      worst_drift = std::max(worst_drift, std::abs(billiard_energy(params, s.xi) - e0) / e0);
  }

  // reversal through the collision update
  Rng rng(5055);
  double worst_rev = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 2;
    const double radius = rng.uniform(0.3, 1.5);
    const double lambda = ball_inertia(radius, n);
    const Vec b_ref = radius * testutil::rand_unit(n, rng);
    const int k = rng.pick(n);
    const Mat frame = adapted_frame((b_ref / radius).eval(), 1);
    Mat dirs(n, k);
    for (int i = 0; i < k; ++i) dirs.col(i) = frame.col(i);
    const Mat t_inv = Mat::Identity(n, n) - 2.0 * dirs * dirs.transpose();

    const SkewMatrix z = testutil::rand_skew(n, rng);
    const Vec lin = testutil::rand_vec(n, rng);
    const auto [z1, l1] = collide(z, lin, b_ref, t_inv, lambda, radius);
    const auto [z2, l2] = collide(-1.0 * z1, -l1, b_ref, t_inv, lambda, radius);
    worst_rev = std::max(worst_rev, (z2.matrix() + z.matrix()).cwiseAbs().maxCoeff());
    worst_rev = std::max(worst_rev, (l2 + lin).cwiseAbs().maxCoeff());
  }

  std::ostringstream os;
  if (!failed.empty()) {
    os << failed;
    return {false, os.str()};
  }
  os << "max relative energy drift " << format_double(worst_drift) << ", max reversal residual "
     << format_double(worst_rev);
  return {worst_drift < 1e-9 && worst_rev < 1e-10, os.str()};
}

// 6. Circle caustics over 1000 collisions.
Outcome circle_caustics() {
  const Table table = CircleTable{2.0};
  const BilliardParams params{0.4, ball_inertia(0.4, 2), 1.0};
  const BilliardState initial =
      contact_state(table, params, vec2(2, 0), spin2(0.7), vec2(-0.8, 0.55));
  Rng rng(6006);
  const TrajectoryRecord record =
      simulate(initial, table, BoundaryField{ConstantRoughBC{1, {}}}, params, 1000, rng);
  if (record.failure) return {false, "trajectory stopped early"};

  const ExperimentReport rep = caustic_analysis(record);
  std::ostringstream os;
  os << "vertex spread " << format_double(rep.stat("vertex_angle_spread")) << ", radius spread "
     << format_double(rep.stat("radius_spread")) << ", tangency "
     << format_double(rep.stat("tangency_residual"));
  return {rep.stat("vertex_angle_spread") < 1e-9 && rep.stat("radius_spread") < 1e-9 &&
              rep.stat("tangency_residual") < 1e-7,
          os.str()};
}

// 7. Measure invariance on the rectangle: flux-density launches return with
//    the sin(2 phi) law; a uniform-angle injection is flagged.
Outcome measure_invariance() {
  const BoxTable box{40.0, 2.0};
  const BilliardParams params{0.5, ball_inertia(0.5, 2), 1.0};

  ReturnAngleOptions honest;
  honest.count = 100000;
  honest.seed = 1;
  const ExperimentReport rep = return_angle_experiment(box, params, honest);

  ReturnAngleOptions control = honest;
  control.uniform_control = true;
  const ExperimentReport ctrl = return_angle_experiment(box, params, control);

  std::ostringstream os;
  os << "ks " << format_double(rep.stat("ks_distance")) << " (dropped "
     << format_double(rep.stat("dropped_fraction")) << "), control ks "
     << format_double(ctrl.stat("ks_distance"));
  const bool pass = rep.stat("ks_distance") < 0.01 && rep.stat("dropped_fraction") < 1e-3 &&
                    ctrl.stat("ks_distance") > 0.1;
  return {pass, os.str()};
}

// 8. Strip flight times equal after the first collision.
Outcome strip_flight_times() {
  const Table table = StripTable{2.0};
  const BilliardParams params{0.5, ball_inertia(0.5, 2), 1.0};
  const BilliardState initial =
      contact_state(table, params, vec2(0, 0), spin2(0.6), vec2(0.3, 1.0));
  Rng rng(8008);
  const TrajectoryRecord record =
      simulate(initial, table, BoundaryField{HemisphereBC{vec2(1, 0)}}, params, 10000, rng);
  if (record.failure) return {false, "trajectory stopped early"};
  const LongitudinalTrace trace = longitudinal_trace(record);
  std::ostringstream os;
  os << "max flight-time deviation " << format_double(trace.flight_time_spread);
  return {trace.flight_time_spread < 1e-10, os.str()};
}

// 9. Boundedness contrast between full roughness and rank-1 roughness on the
//    parallel plates.
Outcome plates_boundedness() {
  const Table table = Plates3dTable{2.0};
  const BilliardParams params{0.4, ball_inertia(0.4, 3), 1.0};
  Mat z = Mat::Zero(3, 3);
  z(0, 1) = -0.7;
  z(1, 0) = 0.7;
  z(1, 2) = -0.3;
  z(2, 1) = 0.3;
  const BilliardState initial =
      contact_state(table, params, vec3(0, 0, 0), SkewMatrix(z), vec3(0.4, 0.25, 1.0));

  Rng rng_full(9009);
  const TrajectoryRecord rough =
      simulate(initial, table, BoundaryField{ConstantRoughBC{2, {}}}, params, 10000, rng_full);
  Rng rng_rank1(9010);
  const TrajectoryRecord drift =
      simulate(initial, table, BoundaryField{ConstantRoughBC{1, {}}}, params, 10000, rng_rank1);
  if (rough.failure || drift.failure) return {false, "trajectory stopped early"};

  const ExperimentReport bounded = boundedness_report(rough, {0, 1});
  const ExperimentReport unbounded = boundedness_report(drift, {0, 1});
  std::ostringstream os;
  os << "rank-2 excursion " << format_double(bounded.stat("excursion_second_half"))
     << " (bounded=" << bounded.stat("bounded") << "), rank-1 excursion "
     << format_double(unbounded.stat("excursion_second_half"))
     << " (bounded=" << unbounded.stat("bounded") << ")";
  return {bounded.pass && !unbounded.pass, os.str()};
}

// 10. Diffusive longitudinal spreading in the strip under random roughness.
Outcome strip_diffusion_exponent() {
  const StripTable strip{2.0};
  const BilliardParams params{0.5, ball_inertia(0.5, 2), 1.0};
  DiffusionOptions opts;
  opts.seeds = 100;
  opts.steps = 10000;
  opts.seed = 1010;
  const ExperimentReport rep = strip_diffusion(strip, params, RandomRoughBC{0.5}, opts);
  std::ostringstream os;
  os << "exponent " << format_double(rep.stat("exponent")) << " over "
     << rep.stat("seeds_used") << " seeds";
  return {rep.pass, os.str()};
}

// 11. Lie-layer oracles: the screw exponential against the homogeneous
//     matrix exponential, and the wedge-product identities.
Outcome lie_oracles() {
  Rng rng(1111);
  double worst_exp = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 3;
    const SkewMatrix x = testutil::rand_skew(n, rng, 2.0);
    const Vec w = testutil::rand_vec(n, rng, 2.0);
    const double time = rng.uniform(-2.0, 2.0);

    Mat h = Mat::Zero(n + 1, n + 1);
    h.topLeftCorner(n, n) = x.matrix();
    h.topRightCorner(n, 1) = w;
    const Mat oracle = testutil::taylor_exp(time * h);
    const EuclideanElement g = se_exp(x, w, time);
    worst_exp = std::max(worst_exp,
                         (testutil::homogeneous(g) - oracle).cwiseAbs().maxCoeff());
  }

  double worst_id = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int n = 4;
    const Vec a = testutil::rand_vec(n, rng), b = testutil::rand_vec(n, rng);
    const Vec u = testutil::rand_vec(n, rng);
    const SkewMatrix z = testutil::rand_skew(n, rng);
    const Mat rot = testutil::rand_rotation(n, rng);

    // action, transpose, conjugation, trace pairing
    worst_id = std::max(worst_id,
                        (wedge(a, b).apply(u) - (a.dot(u) * b - b.dot(u) * a)).norm());
    worst_id = std::max(
        worst_id, (wedge(a, b).matrix().transpose() - wedge(b, a).matrix()).cwiseAbs().maxCoeff());
    worst_id = std::max(worst_id, (adjoint(rot, wedge(a, b)).matrix() -
                                   wedge(rot * a, rot * b).matrix())
                                      .cwiseAbs()
                                      .maxCoeff());
    worst_id = std::max(
        worst_id, std::abs((wedge(a, b).matrix() * z.matrix().transpose()).trace() -
                           2.0 * z.apply(a).dot(b)));

    // rotation generated by an orthonormal pair
    Vec p = a / a.norm();
    Vec q = b - b.dot(p) * p;
    q /= q.norm();
    const double theta = rng.uniform(-3.0, 3.0);
    const Mat plane = p * p.transpose() + q * q.transpose();
    const Mat expected = std::cos(theta) * plane + std::sin(theta) * wedge(p, q).matrix() +
                         (Mat::Identity(n, n) - plane);
    worst_id = std::max(
        worst_id,
        (so_exp(SkewMatrix(theta * wedge(p, q).matrix())) - expected).cwiseAbs().maxCoeff());

    // split along the last axis
    Mat proj = Mat::Identity(n, n);
    proj(n - 1, n - 1) = 0.0;
    const Vec en = Vec::Unit(n, n - 1);
    worst_id = std::max(worst_id, (proj * z.matrix() * proj +
                                   wedge(en, z.apply(en)).matrix() - z.matrix())
                                      .cwiseAbs()
                                      .maxCoeff());

    // three dimensions: cross-product generators
    const Vec a3 = testutil::rand_vec(3, rng), b3 = testutil::rand_vec(3, rng);
    Vec cr(3);
    cr << a3[1] * b3[2] - a3[2] * b3[1], a3[2] * b3[0] - a3[0] * b3[2],
        a3[0] * b3[1] - a3[1] * b3[0];
    Mat omega(3, 3);
    omega << 0, -cr[2], cr[1], cr[2], 0, -cr[0], -cr[1], cr[0], 0;
    worst_id = std::max(worst_id,
                        (wedge(a3, b3).matrix() - omega).cwiseAbs().maxCoeff());
    const Mat rot3 = testutil::rand_rotation(3, rng);
    Mat om_a(3, 3);
    om_a << 0, -a3[2], a3[1], a3[2], 0, -a3[0], -a3[1], a3[0], 0;
    const Vec ra = rot3 * a3;
    Mat om_ra(3, 3);
    om_ra << 0, -ra[2], ra[1], ra[2], 0, -ra[0], -ra[1], ra[0], 0;
    worst_id = std::max(
        worst_id, (rot3 * om_a * rot3.transpose() - om_ra).cwiseAbs().maxCoeff());

    // two dimensions: multiples of the quarter turn
    const Vec a2 = testutil::rand_vec(2, rng), b2 = testutil::rand_vec(2, rng);
    Mat j(2, 2);
    j << 0, -1, 1, 0;
    worst_id = std::max(worst_id, (wedge(a2, b2).matrix() - b2.dot(j * a2) * j).cwiseAbs()
                                      .maxCoeff());
  }

  std::ostringstream os;
  os << "exp deviation " << format_double(worst_exp) << ", identity deviation "
     << format_double(worst_id);
  return {worst_exp < 1e-10 && worst_id < 1e-12, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"strictness of collision maps", strictness_suite},
      {"orthogonal decomposition", orthogonality_suite},
      {"grassmannian dimension table", grassmannian_table},
      {"planar closed form", planar_closed_form},
      {"energy and reversibility", energy_and_reversibility},
      {"circle caustics", circle_caustics},
      {"measure invariance", measure_invariance},
      {"strip flight times", strip_flight_times},
      {"plates boundedness contrast", plates_boundedness},
      {"strip diffusion exponent", strip_diffusion_exponent},
      {"lie-layer oracles", lie_oracles},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %-32s %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

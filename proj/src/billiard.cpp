#include "rough/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rough {

namespace {

constexpr double kCornerTol = 1e-9;
constexpr double kGrazingTol = 1e-12;

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

// Wall directions and inward normals of the wedge.
struct WedgeWalls {
  Vec dir[2];
  Vec normal[2];
};

WedgeWalls wedge_walls(const WedgeTable& w) {
  const double s = std::sin(w.half_angle), c = std::cos(w.half_angle);
  WedgeWalls ww;
  ww.dir[0] = vec2(s, c);    // right wall
  ww.dir[1] = vec2(-s, c);   // left wall
  ww.normal[0] = vec2(-c, s);
  ww.normal[1] = vec2(c, s);
  return ww;
}

}  // namespace

int table_dim(const Table& table) {
  return std::holds_alternative<Plates3dTable>(table) ? 3 : 2;
}

std::string table_name(const Table& table) {
  struct Visitor {
    std::string operator()(const CircleTable&) const { return "circle"; }
    std::string operator()(const WedgeTable&) const { return "wedge"; }
    std::string operator()(const StripTable&) const { return "strip"; }
    std::string operator()(const Plates3dTable&) const { return "plates3d"; }
    std::string operator()(const BoxTable&) const { return "box"; }
  };
  return std::visit(Visitor{}, table);
}

int table_face_count(const Table& table) {
  struct Visitor {
    int operator()(const CircleTable&) const { return 1; }
    int operator()(const WedgeTable&) const { return 2; }
    int operator()(const StripTable&) const { return 2; }
    int operator()(const Plates3dTable&) const { return 2; }
    int operator()(const BoxTable&) const { return 4; }
  };
  return std::visit(Visitor{}, table);
}

Vec table_inward_normal(const Table& table, const Vec& b) {
  if (std::holds_alternative<CircleTable>(table)) return Vec(-b / b.norm());
  if (const auto* wedge = std::get_if<WedgeTable>(&table)) {
    const WedgeWalls ww = wedge_walls(*wedge);
    return b[0] >= 0.0 ? ww.normal[0] : ww.normal[1];
  }
  if (const auto* strip = std::get_if<StripTable>(&table)) {
    return b[1] < 0.5 * strip->width ? vec2(0.0, 1.0) : vec2(0.0, -1.0);
  }
  if (const auto* plates = std::get_if<Plates3dTable>(&table)) {
    Vec nu = Vec::Zero(3);
    nu[2] = b[2] < 0.5 * plates->gap ? 1.0 : -1.0;
    return nu;
  }
  const auto& box = std::get<BoxTable>(table);
  const double d0 = b[1], d1 = box.width - b[0], d2 = box.height - b[1], d3 = b[0];
  const double dmin = std::min({d0, d1, d2, d3});
  if (dmin == d0) return vec2(0.0, 1.0);
  if (dmin == d1) return vec2(-1.0, 0.0);
  if (dmin == d2) return vec2(0.0, -1.0);
  return vec2(1.0, 0.0);
}

int table_face_at(const Table& table, const Vec& b) {
  if (std::holds_alternative<CircleTable>(table)) return 0;
  if (std::holds_alternative<WedgeTable>(table)) return b[0] >= 0.0 ? 0 : 1;
  if (const auto* strip = std::get_if<StripTable>(&table))
    return b[1] < 0.5 * strip->width ? 0 : 1;
  if (const auto* plates = std::get_if<Plates3dTable>(&table))
    return b[2] < 0.5 * plates->gap ? 0 : 1;
  const auto& box = std::get<BoxTable>(table);
  const double d0 = b[1], d1 = box.width - b[0], d2 = box.height - b[1], d3 = b[0];
  const double dmin = std::min({d0, d1, d2, d3});
  if (dmin == d0) return 0;
  if (dmin == d1) return 1;
  if (dmin == d2) return 2;
  return 3;
}

void validate_table(const Table& table, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ball radius must be positive");
  struct Visitor {
    double radius;
    void operator()(const CircleTable& t) const {
      if (t.r <= radius) throw std::invalid_argument("circle table radius must exceed ball radius");
    }
    void operator()(const WedgeTable& t) const {
      if (t.half_angle <= 0.0 || t.half_angle >= 1.5707963267948966)
        throw std::invalid_argument("wedge half-angle must lie in (0, pi/2)");
    }
    void operator()(const StripTable& t) const {
      if (t.width <= 2.0 * radius) throw std::invalid_argument("strip width must exceed ball diameter");
    }
    void operator()(const Plates3dTable& t) const {
      if (t.gap <= 2.0 * radius) throw std::invalid_argument("plate gap must exceed ball diameter");
    }
    void operator()(const BoxTable& t) const {
      if (t.width <= 2.0 * radius || t.height <= 2.0 * radius)
        throw std::invalid_argument("box sides must exceed ball diameter");
    }
  };
  std::visit(Visitor{radius}, table);
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::no_collision: return "no_collision";
    case StopReason::grazing: return "grazing";
    case StopReason::corner_hit: return "corner_hit";
  }
  return "unknown";
}

namespace {

using HitOrFail = std::variant<Hit, StepFailure>;

HitOrFail finish_hit(const Table& table, const Vec& v, double tau, const Vec& point, int face) {
  const Vec nu = table_inward_normal(table, point);
  if (std::abs(v.dot(nu)) < kGrazingTol * v.norm())
    return StepFailure{StopReason::grazing, "normal velocity below tolerance at impact"};
  return Hit{tau, point, face};
}

HitOrFail circle_hit(const CircleTable& t, const Vec& a, const Vec& v, double radius,
                     double tau_min) {
  const double rc = t.r - radius;  // center orbit radius
  const double aa = v.squaredNorm();
  const double bb = 2.0 * a.dot(v);
  const double cc = a.squaredNorm() - rc * rc;
  const double disc = bb * bb - 4.0 * aa * cc;
  if (disc < 0.0) return StepFailure{StopReason::no_collision, "center ray misses the boundary"};
  const double sq = std::sqrt(disc);
  double tau = std::numeric_limits<double>::infinity();
  for (const double cand : {(-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)})
    if (cand > tau_min && cand < tau) tau = cand;
  if (!std::isfinite(tau))
    return StepFailure{StopReason::no_collision, "center ray misses the boundary"};
  const Vec center = a + tau * v;
  const Vec point = (t.r / center.norm()) * center;
  return finish_hit(Table{t}, v, tau, point, 0);
}

HitOrFail slab_hit(const Table& table, int axis, double lo_wall, double hi_wall, const Vec& a,
                   const Vec& v, double radius, double tau_min) {
  const double vn = v[axis];
  if (std::abs(vn) < kGrazingTol * v.norm())
    return StepFailure{StopReason::no_collision, "velocity parallel to the walls"};
  const double target = vn < 0.0 ? lo_wall + radius : hi_wall - radius;
  const int face = vn < 0.0 ? 0 : 1;
  const double tau = (target - a[axis]) / vn;
  if (tau <= tau_min) return StepFailure{StopReason::no_collision, "no forward wall crossing"};
  Vec point = a + tau * v;
  point[axis] = vn < 0.0 ? lo_wall : hi_wall;
  return finish_hit(table, v, tau, point, face);
}

HitOrFail wedge_hit(const WedgeTable& t, const Vec& a, const Vec& v, double radius,
                    double tau_min) {
  const WedgeWalls ww = wedge_walls(t);
  double taus[2];
  bool valid[2] = {false, false};
  for (int w = 0; w < 2; ++w) {
    const double vn = v.dot(ww.normal[w]);
    if (vn >= -kGrazingTol * v.norm()) continue;  // not approaching this wall
    const double tau = (radius - a.dot(ww.normal[w])) / vn;
    if (tau > tau_min) {
      taus[w] = tau;
      valid[w] = true;
    }
  }
  if (!valid[0] && !valid[1])
    return StepFailure{StopReason::no_collision, "trajectory escapes the wedge"};
  // simultaneous contact with both walls: the ball is pinched at the apex
  if (valid[0] && valid[1] && std::abs(taus[0] - taus[1]) * v.norm() < kCornerTol)
    return StepFailure{StopReason::corner_hit, "simultaneous contact with both walls"};
  const int best = (!valid[1] || (valid[0] && taus[0] < taus[1])) ? 0 : 1;
  const Vec center = a + taus[best] * v;
  const Vec point = center - radius * ww.normal[best];
  if (point.dot(ww.dir[best]) < kCornerTol)
    return StepFailure{StopReason::corner_hit, "impact within tolerance of the apex"};
  return finish_hit(Table{t}, v, taus[best], point, best);
}

HitOrFail box_hit(const BoxTable& t, const Vec& a, const Vec& v, double radius, double tau_min) {
  // Faces 0: y=0, 1: x=w, 2: y=h, 3: x=0.
  double best_tau = std::numeric_limits<double>::infinity();
  double second_tau = best_tau;
  int best = -1;
  const double speed = v.norm();
  const auto consider = [&](int face, double tau) {
    if (tau <= tau_min) return;
    if (tau < best_tau) {
      second_tau = best_tau;
      best_tau = tau;
      best = face;
    } else {
      second_tau = std::min(second_tau, tau);
    }
  };
  if (v[1] < -kGrazingTol * speed) consider(0, (radius - a[1]) / v[1]);
  if (v[0] > kGrazingTol * speed) consider(1, (t.width - radius - a[0]) / v[0]);
  if (v[1] > kGrazingTol * speed) consider(2, (t.height - radius - a[1]) / v[1]);
  if (v[0] < -kGrazingTol * speed) consider(3, (radius - a[0]) / v[0]);
  if (best < 0) return StepFailure{StopReason::no_collision, "velocity parallel to the walls"};
  // simultaneous contact with two walls: the ball is touching a corner
  if (std::isfinite(second_tau) && (second_tau - best_tau) * speed < kCornerTol)
    return StepFailure{StopReason::corner_hit, "simultaneous contact with two walls"};

  const Vec center = a + best_tau * v;
  Vec point = center;
  switch (best) {
    case 0: point[1] = 0.0; break;
    case 1: point[0] = t.width; break;
    case 2: point[1] = t.height; break;
    case 3: point[0] = 0.0; break;
  }
  const Vec corners[4] = {vec2(0, 0), vec2(t.width, 0), vec2(t.width, t.height),
                          vec2(0, t.height)};
  for (const Vec& c : corners)
    if ((point - c).norm() < kCornerTol)
      return StepFailure{StopReason::corner_hit, "impact within tolerance of a box corner"};
  return finish_hit(Table{t}, v, best_tau, point, best);
}

}  // namespace

std::variant<Hit, StepFailure> next_collision(const Table& table, const Vec& a, const Vec& v,
                                              double radius) {
  const double speed = v.norm();
  if (speed <= 0.0) return StepFailure{StopReason::no_collision, "zero velocity"};
  const double tau_min = 1e-9 * radius / speed;

  if (const auto* c = std::get_if<CircleTable>(&table)) return circle_hit(*c, a, v, radius, tau_min);
  if (const auto* w = std::get_if<WedgeTable>(&table)) return wedge_hit(*w, a, v, radius, tau_min);
  if (const auto* s = std::get_if<StripTable>(&table))
    return slab_hit(table, 1, 0.0, s->width, a, v, radius, tau_min);
  if (const auto* p = std::get_if<Plates3dTable>(&table))
    return slab_hit(table, 2, 0.0, p->gap, a, v, radius, tau_min);
  return box_hit(std::get<BoxTable>(table), a, v, radius, tau_min);
}

Vec reference_contact(const EuclideanElement& g, const Vec& b_world, double radius) {
  const Vec b_ref = g.A.transpose() * (b_world - g.a);
  if (std::abs(b_ref.norm() - radius) > 1e-9 * std::max(radius, 1.0))
    throw std::runtime_error("reference_contact: contact point is not on the ball surface");
  return b_ref;
}

std::pair<SkewMatrix, Vec> collide(const SkewMatrix& z_angular, const Vec& z_linear,
                                   const Vec& b_ref, const Mat& t_involution, double lambda,
                                   double radius) {
  if (lambda <= 0.0) throw std::invalid_argument("collide: lambda must be positive");
  const int n = static_cast<int>(b_ref.size());
  // Work with the actual contact radius: round-off pushed onto |b_ref| would
  // otherwise break the exact-isometry balance between alpha and the wedge
  // coefficient and leak energy over long trajectories.
  const double r_contact = b_ref.norm();
  if (std::abs(r_contact - radius) > 1e-9 * std::max(radius, 1.0))
    throw std::invalid_argument("collide: contact point is not on the ball surface");
  const Vec nu = b_ref / r_contact;
  const Mat tangent_proj = Mat::Identity(n, n) - nu * nu.transpose();

  // T must restrict to an involution of the tangent plane at b_ref.
  const Mat tp = tangent_proj * t_involution * tangent_proj;
  if ((tp * tp - tangent_proj).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("collide: boundary map is not an involution of the contact plane");

  const double alpha = 1.0 / (1.0 + r_contact * r_contact / (2.0 * lambda));
  const Vec v_contact = tangent_proj * (z_angular.apply(b_ref) + z_linear);
  const Vec u = v_contact - t_involution * v_contact;

  const SkewMatrix z_out = z_angular - (alpha / (2.0 * lambda)) * wedge(b_ref, u);
  const Vec lin_out = z_linear - alpha * u - 2.0 * z_linear.dot(nu) * nu;
  return {z_out, lin_out};
}

std::pair<double, Vec> collide_2d(double v0, const Vec& v, const Vec& nu) {
  if (nu.size() != 2 || v.size() != 2) throw std::invalid_argument("collide_2d: planar only");
  if (std::abs(nu.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("collide_2d: normal must be a unit vector");
  const Vec jnu = vec2(-nu[1], nu[0]);
  const double tangential = v.dot(jnu);
  const double normal = v.dot(nu);
  const double c = 2.0 * std::sqrt(2.0) / 3.0;

  const double v0_out = -v0 / 3.0 + c * tangential;
  const Vec v_out = (c * v0 + tangential / 3.0) * jnu - normal * nu;
  return {v0_out, v_out};
}

void BoundaryField::set_face(int face, BoundaryCondition bc) {
  for (auto& entry : overrides_)
    if (entry.first == face) {
      entry.second = std::move(bc);
      return;
    }
  overrides_.emplace_back(face, std::move(bc));
}

const BoundaryCondition& BoundaryField::at_face(int face) const {
  for (const auto& entry : overrides_)
    if (entry.first == face) return entry.second;
  return default_;
}

Mat face_rough_directions(const Vec& nu_world, int rank, const std::vector<double>& angles) {
  const int n = static_cast<int>(nu_world.size());
  if (rank < 0 || rank > n - 1) throw std::invalid_argument("rough rank out of range");
  const Mat frame = adapted_frame(nu_world, 1);

  Mat dirs(n, rank);
  if (angles.empty() || n == 2) {
    dirs = frame.leftCols(rank);
  } else {
    if (static_cast<int>(angles.size()) != rank)
      throw std::invalid_argument("rough direction count must match rank");
    for (int i = 0; i < rank; ++i)
      dirs.col(i) = std::cos(angles[i]) * frame.col(0) + std::sin(angles[i]) * frame.col(1);
  }
  // Orthonormalize the span; the involution depends only on the subspace.
  Mat out(n, rank);
  int kept = 0;
  for (int i = 0; i < rank; ++i) {
    Vec d = dirs.col(i);
    for (int c = 0; c < kept; ++c) d -= d.dot(out.col(c)) * out.col(c);
    if (d.norm() < 1e-9) throw std::invalid_argument("rough directions must be linearly independent");
    out.col(kept++) = d / d.norm();
  }
  return out;
}

TangentInvolution BoundaryField::evaluate(int face, const Vec& nu_world, const Vec& b_ref,
                                          const Mat& A, Rng& rng) const {
  const int n = static_cast<int>(nu_world.size());
  const Mat id = Mat::Identity(n, n);
  const BoundaryCondition& bc = at_face(face);

  const auto reflect_world = [&](const Mat& dirs_world) {
    // Pull back through A, then re-orthonormalize inside the actual tangent
    // plane at b_ref: accumulated drift in A would otherwise make T an
    // inexact involution and leak energy over long trajectories.
    const Vec nu_ref = b_ref / b_ref.norm();
    Mat dirs = A.transpose() * dirs_world;
    for (int i = 0; i < dirs.cols(); ++i) {
      Vec d = dirs.col(i) - dirs.col(i).dot(nu_ref) * nu_ref;
      for (int c = 0; c < i; ++c) d -= d.dot(dirs.col(c)) * dirs.col(c);
      dirs.col(i) = d / d.norm();
    }
    return TangentInvolution{id - 2.0 * dirs * dirs.transpose(),
                             static_cast<int>(dirs_world.cols())};
  };

  if (std::holds_alternative<SpecularBC>(bc)) return {id, 0};
  if (const auto* c = std::get_if<ConstantRoughBC>(&bc)) {
    if (c->rank == 0) return {id, 0};
    return reflect_world(face_rough_directions(nu_world, c->rank, c->angles));
  }
  if (const auto* h = std::get_if<HemisphereBC>(&bc)) {
    if (b_ref.dot(h->axis) >= 0.0) return {-id, n - 1};
    return {id, 0};
  }
  if (const auto* r = std::get_if<RandomRoughBC>(&bc)) {
    if (rng.uniform() < r->p_rough) return {-id, n - 1};
    return {id, 0};
  }
  const auto& rd = std::get<RandomDirectionBC>(bc);
  if (rd.angles.empty()) throw std::invalid_argument("random-direction condition needs angles");
  const double angle = rd.angles[static_cast<size_t>(rng.pick(static_cast<int>(rd.angles.size())))];
  return reflect_world(face_rough_directions(nu_world, 1, {angle}));
}

std::variant<StepOutcome, StepFailure> step(const BilliardState& state, const Table& table,
                                            const BoundaryField& field,
                                            const BilliardParams& params, Rng& rng) {
  const Vec v_world = state.g.A * state.xi.z;
  const auto hit_or_fail = next_collision(table, state.g.a, v_world, params.radius);
  if (const auto* fail = std::get_if<StepFailure>(&hit_or_fail)) return *fail;
  const Hit& hit = std::get<Hit>(hit_or_fail);

  auto [g_next, xi_pre] = free_flight(state.g, state.xi, hit.tau);
  // Keep the orientation tightly orthonormal; letting it drift toward the
  // 1e-9 validity tolerance degrades long-run conservation statistics.
  if (g_next.rotation_drift() > 1e-12) g_next = g_next.normalized();

  const Vec b_ref = reference_contact(g_next, hit.point, params.radius);
  const Vec nu_world = table_inward_normal(table, hit.point);
  const TangentInvolution ti = field.evaluate(hit.face, nu_world, b_ref, g_next.A, rng);

  auto [z_out, lin_out] = collide(xi_pre.Z, xi_pre.z, b_ref, ti.T, params.lambda, params.radius);
  return StepOutcome{{g_next, {z_out, lin_out}, hit.point, hit.face, state.t + hit.tau},
                     hit.tau, ti.rank};
}

TrajectoryRecord simulate(const BilliardState& initial, const Table& table,
                          const BoundaryField& field, const BilliardParams& params, int count,
                          Rng& rng) {
  if (count < 1) throw std::invalid_argument("simulate: need at least one step");
  TrajectoryRecord record;
  record.states.reserve(count + 1);
  record.states.push_back(initial);
  record.flight_times.reserve(count);
  record.rough_ranks.reserve(count);

  for (int i = 0; i < count; ++i) {
    auto outcome = step(record.states.back(), table, field, params, rng);
    if (const auto* fail = std::get_if<StepFailure>(&outcome)) {
      record.failure = *fail;
      break;
    }
    auto& ok = std::get<StepOutcome>(outcome);
    record.states.push_back(std::move(ok.state));
    record.flight_times.push_back(ok.tau);
    record.rough_ranks.push_back(ok.rough_rank);
  }
  return record;
}

BilliardState contact_state(const Table& table, const BilliardParams& params, const Vec& b,
                            const SkewMatrix& z_angular, const Vec& v_world,
                            const Mat& rotation) {
  const Vec nu = table_inward_normal(table, b);
  if (v_world.dot(nu) < 0.0)
    throw std::invalid_argument("contact_state: center velocity points out of the free region");
  BilliardState state;
  state.g = {rotation, b + params.radius * nu};
  state.xi = {z_angular, rotation.transpose() * v_world};
  state.contact = b;
  state.face = table_face_at(table, b);
  state.t = 0.0;
  return state;
}

BilliardState contact_state(const Table& table, const BilliardParams& params, const Vec& b,
                            const SkewMatrix& z_angular, const Vec& v_world) {
  const int n = table_dim(table);
  return contact_state(table, params, b, z_angular, v_world, Mat::Identity(n, n));
}

}  // namespace rough

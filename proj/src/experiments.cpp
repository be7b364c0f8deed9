#include "rough/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rough {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Mat rotation2(double theta) {
  Mat a(2, 2);
  a << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return a;
}

SkewMatrix spin2(double rate) {
  Mat z(2, 2);
  z << 0.0, -rate, rate, 0.0;
  return SkewMatrix(z);
}

double clamp01(double x) { return std::min(1.0, std::max(-1.0, x)); }

}  // namespace

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - f));
  }
  return d;
}

void Histogram::add(double x) {
  if (counts.empty()) return;
  const int bins = static_cast<int>(counts.size());
  int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
  b = std::max(0, std::min(bins - 1, b));
  ++counts[b];
  ++total;
}

double ExperimentReport::stat(const std::string& key) const {
  for (const auto& [k, v] : stats)
    if (k == key) return v;
  throw std::out_of_range("ExperimentReport: no stat named " + key);
}

void assert_energy_invariant(const TrajectoryRecord& record, const BilliardParams& params) {
  if (record.states.empty()) return;
  const double e0 = billiard_energy(params, record.states.front().xi);
  for (const auto& s : record.states)
    if (std::abs(billiard_energy(params, s.xi) - e0) > 1e-9 * e0)
      throw std::logic_error("energy drifted along an experiment trajectory");
}

double sample_polar_angle_3d(Rng& rng) { return std::asin(std::sqrt(rng.uniform())); }

double sample_polar_angle_2d(Rng& rng) { return std::asin(2.0 * rng.uniform() - 1.0); }

std::vector<MeasureSample> sample_billiard_measure(const BoxTable& box,
                                                   const BilliardParams& params, double energy,
                                                   int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_billiard_measure: count must be >= 1");
  if (energy <= 0.0) throw std::invalid_argument("sample_billiard_measure: energy must be positive");
  // directions are unit vectors; the energy fixes the launch speed downstream
  const double angular_period = 2.0 * kPi * params.radius / std::sqrt(2.0);

  std::vector<MeasureSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    MeasureSample s;
    s.position = vec2(rng.uniform(0.0, angular_period),
                      rng.uniform(params.radius, box.width - params.radius));
    const double phi = sample_polar_angle_3d(rng);
    const double psi = rng.uniform(0.0, 2.0 * kPi);
    Vec dir(3);
    dir << std::sin(phi) * std::cos(psi), std::sin(phi) * std::sin(psi), std::cos(phi);
    s.direction = dir;
    s.polar_angle = phi;
    out.push_back(std::move(s));
  }
  return out;
}

ExperimentReport return_angle_experiment(const BoxTable& box, const BilliardParams& params,
                                         const ReturnAngleOptions& opts) {
  validate_table(Table{box}, params.radius);
  const double r = params.radius;
  const BoundaryField field{opts.specular ? BoundaryCondition{SpecularBC{}}
                                          : BoundaryCondition{ConstantRoughBC{1, {}}}};
  const double angular_period = 2.0 * kPi * r / std::sqrt(2.0);

  std::vector<double> return_angles;
  return_angles.reserve(opts.count);
  long dropped = 0;

  for (int i = 0; i < opts.count; ++i) {
    Rng rng = Rng::stream(opts.seed, static_cast<std::uint64_t>(i));

    const double x1 = rng.uniform(r, box.width - r);
    const double x0 = rng.uniform(0.0, angular_period);
    const double theta = std::sqrt(2.0) * x0 / r;
    const double phi =
        opts.uniform_control ? rng.uniform(0.0, 0.5 * kPi) : sample_polar_angle_3d(rng);
    const double psi = rng.uniform(0.0, 2.0 * kPi);

    const double v0 = std::sin(phi) * std::cos(psi);
    const Vec v_world = vec2(std::sin(phi) * std::sin(psi), std::cos(phi));
    const SkewMatrix z = spin2(std::sqrt(2.0) * v0 / r);

    BilliardState state =
        contact_state(Table{box}, params, vec2(x1, 0.0), z, v_world, rotation2(theta));
    const double energy0 = billiard_energy(params, state.xi);

    bool returned = false;
    for (int s = 0; s < opts.step_cap; ++s) {
      auto outcome = step(state, Table{box}, field, params, rng);
      if (std::holds_alternative<StepFailure>(outcome)) break;
      state = std::get<StepOutcome>(outcome).state;

      const double energy = billiard_energy(params, state.xi);
      if (std::abs(energy - energy0) > 1e-9 * energy0)
        throw std::logic_error("return_angle_experiment: energy drifted along a trajectory");

      if (state.face == 0) {
        const double vret0 = r * state.xi.Z.matrix()(1, 0) / std::sqrt(2.0);
        const Vec vret = state.g.A * state.xi.z;
        const double speed = std::sqrt(vret0 * vret0 + vret.squaredNorm());
        return_angles.push_back(std::acos(clamp01(vret[1] / speed)));
        returned = true;
        break;
      }
    }
    if (!returned) ++dropped;
  }

  ExperimentReport rep;
  rep.name = opts.uniform_control ? "return-angle-uniform-control"
             : opts.specular      ? "return-angle-specular"
                                  : "return-angle";
  rep.histogram = Histogram::make(0.0, 0.5 * kPi, opts.bins);
  for (double a : return_angles) rep.histogram.add(a);

  const double ks = ks_statistic(return_angles, [](double phi) {
    const double s = std::sin(std::min(std::max(phi, 0.0), 0.5 * kPi));
    return s * s;
  });
  const double dropped_fraction = static_cast<double>(dropped) / opts.count;
  rep.set("ks_distance", ks);
  rep.set("returned", static_cast<double>(return_angles.size()));
  rep.set("dropped_fraction", dropped_fraction);
  rep.set("threshold", opts.uniform_control ? opts.control_threshold : opts.ks_threshold);
  rep.pass = opts.uniform_control
                 ? ks > opts.control_threshold
                 : (ks < opts.ks_threshold && dropped_fraction < opts.max_dropped_fraction);
  return rep;
}

ExperimentReport caustic_analysis(const TrajectoryRecord& record, const CausticTolerances& tol) {
  const auto& states = record.states;
  const int segments = static_cast<int>(states.size()) - 1;
  if (segments < 3) throw std::invalid_argument("caustic_analysis: need at least 3 segments");

  double angle_min = kPi, angle_max = 0.0;
  for (int i = 1; i + 1 < static_cast<int>(states.size()); ++i) {
    const Vec u = states[i - 1].g.a - states[i].g.a;
    const Vec w = states[i + 1].g.a - states[i].g.a;
    const double angle = std::acos(clamp01(u.dot(w) / (u.norm() * w.norm())));
    angle_min = std::min(angle_min, angle);
    angle_max = std::max(angle_max, angle);
  }

  // Midpoint distances to the center, split by segment parity.
  std::vector<double> mid[2];
  std::vector<double> line[2];
  for (int i = 0; i < segments; ++i) {
    const Vec a = states[i].g.a, b = states[i + 1].g.a;
    const Vec m = 0.5 * (a + b);
    const Vec d = b - a;
    mid[i % 2].push_back(m.norm());
    line[i % 2].push_back(std::abs(a[0] * b[1] - a[1] * b[0]) / d.norm());
  }

  double radius[2] = {0.0, 0.0}, radius_dev = 0.0, tangency = 0.0;
  for (int p = 0; p < 2; ++p) {
    radius[p] = std::accumulate(mid[p].begin(), mid[p].end(), 0.0) / mid[p].size();
    for (double d : mid[p]) radius_dev = std::max(radius_dev, std::abs(d - radius[p]));
    for (double d : line[p]) tangency = std::max(tangency, std::abs(d - radius[p]));
  }

  ExperimentReport rep;
  rep.name = "caustics";
  rep.set("segments", segments);
  rep.set("vertex_angle_mean", 0.5 * (angle_min + angle_max));
  rep.set("vertex_angle_spread", angle_max - angle_min);
  rep.set("radius_even", radius[0]);
  rep.set("radius_odd", radius[1]);
  rep.set("radius_spread", radius_dev);
  rep.set("tangency_residual", tangency);
  rep.pass = (angle_max - angle_min) < tol.vertex_spread && radius_dev < tol.radius_spread &&
             tangency < tol.tangency;
  return rep;
}

ExperimentReport boundedness_report(const TrajectoryRecord& record,
                                    const std::vector<int>& projection_axes) {
  const auto& states = record.states;
  if (states.size() < 2) throw std::invalid_argument("boundedness_report: empty trajectory");

  const auto excursion = [&](int k) {
    double sum = 0.0;
    for (int axis : projection_axes) {
      const double d = states[k].g.a[axis] - states[0].g.a[axis];
      sum += d * d;
    }
    return std::sqrt(sum);
  };

  const int count = static_cast<int>(states.size());
  const int half = count / 2;
  double first = 0.0, second = 0.0;
  for (int k = 0; k < count; ++k) {
    const double e = excursion(k);
    if (k <= half)
      first = std::max(first, e);
    if (k >= half)
      second = std::max(second, e);
  }

  ExperimentReport rep;
  rep.name = "boundedness";
  rep.set("excursion_first_half", first);
  rep.set("excursion_second_half", second);
  rep.set("bounded", second <= 1.05 * first ? 1.0 : 0.0);
  rep.pass = second <= 1.05 * first;
  return rep;
}

LongitudinalTrace longitudinal_trace(const TrajectoryRecord& record, int axis) {
  LongitudinalTrace trace;
  trace.positions.reserve(record.states.size());
  for (const auto& s : record.states) trace.positions.push_back(s.g.a[axis]);
  trace.flight_times = record.flight_times;
  for (size_t i = 2; i < trace.flight_times.size(); ++i)
    trace.flight_time_spread = std::max(
        trace.flight_time_spread, std::abs(trace.flight_times[i] - trace.flight_times[1]));
  return trace;
}

ExperimentReport strip_diffusion(const StripTable& strip, const BilliardParams& params,
                                 const BoundaryCondition& bc, const DiffusionOptions& opts) {
  validate_table(Table{strip}, params.radius);
  const BoundaryField field{bc};

  std::vector<std::vector<double>> tracks;
  tracks.reserve(opts.seeds);
  int dropped = 0;
  for (int s = 0; s < opts.seeds; ++s) {
    Rng rng = Rng::stream(opts.seed, static_cast<std::uint64_t>(s));
    const double phi = sample_polar_angle_3d(rng);
    const double psi = rng.uniform(0.0, 2.0 * kPi);
    const double v0 = std::sin(phi) * std::cos(psi);
    const Vec v_world = vec2(std::sin(phi) * std::sin(psi), std::cos(phi));
    const BilliardState initial =
        contact_state(Table{strip}, params, vec2(0.0, 0.0),
                      spin2(std::sqrt(2.0) * v0 / params.radius), v_world);

    const TrajectoryRecord record = simulate(initial, Table{strip}, field, params, opts.steps, rng);
    if (record.failure || record.steps() < opts.steps) {
      ++dropped;
      continue;
    }
    assert_energy_invariant(record, params);
    tracks.push_back(longitudinal_trace(record).positions);
  }
  if (tracks.empty()) throw std::runtime_error("strip_diffusion: no complete trajectories");

  // Mean-square displacement on a geometric index grid, log-log slope.
  std::vector<int> grid;
  for (int k = opts.fit_start; k <= opts.steps; k *= 2) grid.push_back(k);
  if (grid.back() != opts.steps) grid.push_back(opts.steps);

  std::vector<double> log_k, log_msd;
  for (int k : grid) {
    double msd = 0.0;
    for (const auto& track : tracks) {
      const double d = track[k] - track[0];
      msd += d * d;
    }
    msd /= static_cast<double>(tracks.size());
    log_k.push_back(std::log(static_cast<double>(k)));
    log_msd.push_back(std::log(std::max(msd, 1e-300)));
  }
  const double m = static_cast<double>(log_k.size());
  const double mean_x = std::accumulate(log_k.begin(), log_k.end(), 0.0) / m;
  const double mean_y = std::accumulate(log_msd.begin(), log_msd.end(), 0.0) / m;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < log_k.size(); ++i) {
    sxy += (log_k[i] - mean_x) * (log_msd[i] - mean_y);
    sxx += (log_k[i] - mean_x) * (log_k[i] - mean_x);
  }
  const double exponent = sxy / sxx;

  ExperimentReport rep;
  rep.name = "strip-diffusion";
  rep.set("exponent", exponent);
  rep.set("seeds_used", static_cast<double>(tracks.size()));
  rep.set("dropped", static_cast<double>(dropped));
  rep.pass = exponent >= opts.exponent_lo && exponent <= opts.exponent_hi;
  return rep;
}

namespace {

// Boundary sample point on a given face.
Vec face_point(const Table& table, int face, Rng& rng) {
  if (const auto* c = std::get_if<CircleTable>(&table)) {
    const double gamma = rng.uniform(0.0, 2.0 * kPi);
    return vec2(c->r * std::cos(gamma), c->r * std::sin(gamma));
  }
  if (const auto* w = std::get_if<WedgeTable>(&table)) {
    const double s = rng.uniform(0.5, 4.0);
    const double sa = std::sin(w->half_angle), ca = std::cos(w->half_angle);
    return face == 0 ? vec2(s * sa, s * ca) : vec2(-s * sa, s * ca);
  }
  if (const auto* st = std::get_if<StripTable>(&table))
    return vec2(rng.uniform(-5.0, 5.0), face == 0 ? 0.0 : st->width);
  if (const auto* p = std::get_if<Plates3dTable>(&table)) {
    Vec b(3);
    b << rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), face == 0 ? 0.0 : p->gap;
    return b;
  }
  const auto& box = std::get<BoxTable>(table);
  const double tx = rng.uniform(0.1, 0.9);
  switch (face) {
    case 0: return vec2(tx * box.width, 0.0);
    case 1: return vec2(box.width, tx * box.height);
    case 2: return vec2(tx * box.width, box.height);
    default: return vec2(0.0, tx * box.height);
  }
}

Mat random_orientation(int n, Rng& rng) {
  if (n == 2) return rotation2(rng.uniform(0.0, 2.0 * kPi));
  // n == 3: compose plane rotations with random angles.
  Mat a = Mat::Identity(3, 3);
  for (int i = 0; i < 3; ++i) {
    const double t = rng.uniform(0.0, 2.0 * kPi);
    Mat r = Mat::Identity(3, 3);
    const int p = i, q = (i + 1) % 3;
    r(p, p) = std::cos(t);
    r(q, q) = std::cos(t);
    r(p, q) = -std::sin(t);
    r(q, p) = std::sin(t);
    a = a * r;
  }
  return a;
}

}  // namespace

ExperimentReport parallelism_check(const Table& table, const BoundaryField& field,
                                   const BilliardParams& params, int samples_per_face,
                                   std::uint64_t seed) {
  const int n = table_dim(table);
  Rng rng(seed);
  double max_angle = 0.0;
  bool parallel = true;

  for (int face = 0; face < table_face_count(table); ++face) {
    std::vector<Mat> minus_spaces;  // -1 eigenspace in the face tangent frame
    for (int s = 0; s < samples_per_face; ++s) {
      const Vec b = face_point(table, face, rng);
      const Vec nu = table_inward_normal(table, b);
      const Mat orient = random_orientation(n, rng);
      const Vec b_ref = orient.transpose() * (-params.radius * nu);
      const TangentInvolution ti = field.evaluate(face, nu, b_ref, orient, rng);

      // World form of the involution, restricted to the face tangent frame.
      const Mat t_world = orient * ti.T * orient.transpose();
      const Mat frame_t = adapted_frame(nu, 1).leftCols(n - 1);
      const Mat t_local = frame_t.transpose() * t_world * frame_t;

      Eigen::SelfAdjointEigenSolver<Mat> es(t_local);
      int k = 0;
      for (int i = 0; i < n - 1; ++i)
        if (es.eigenvalues()[i] < 0.0) ++k;
      minus_spaces.push_back(es.eigenvectors().leftCols(k));
    }
    for (size_t s = 1; s < minus_spaces.size(); ++s) {
      if (minus_spaces[s].cols() != minus_spaces[0].cols()) {
        parallel = false;
        max_angle = 0.5 * kPi;
        continue;
      }
      if (minus_spaces[0].cols() == 0) continue;
      Eigen::JacobiSVD<Mat> svd(minus_spaces[0].transpose() * minus_spaces[s]);
      const double angle = std::acos(clamp01(svd.singularValues().minCoeff()));
      max_angle = std::max(max_angle, angle);
    }
  }
  parallel = parallel && max_angle < 1e-9;

  ExperimentReport rep;
  rep.name = "parallelism";
  rep.set("max_angle", max_angle);
  rep.set("parallel", parallel ? 1.0 : 0.0);
  rep.pass = parallel;
  return rep;
}

}  // namespace rough

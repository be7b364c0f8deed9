#pragma once

#include "rough/billiard.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace rough {

/// Two-sided Kolmogorov-Smirnov distance between samples and a CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<long> counts;
  long total = 0;

  static Histogram make(double lo, double hi, int bins) { return {lo, hi, std::vector<long>(bins, 0), 0}; }
  void add(double x);
  bool empty() const { return counts.empty(); }
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, double>> stats;
  Histogram histogram;
  bool pass = false;

  void set(const std::string& key, double value) { stats.emplace_back(key, value); }
  double stat(const std::string& key) const;
};

/// Polar angle with CDF sin^2(phi) on [0, pi/2] (boundary-flux density for a
/// 3-dimensional configuration space): phi = arcsin(sqrt(u)).
double sample_polar_angle_3d(Rng& rng);

/// 2-dimensional analog with density cos(phi)/2 on [-pi/2, pi/2]:
/// phi = arcsin(2u - 1).
double sample_polar_angle_2d(Rng& rng);

/// Initial state on the bottom face of a box with flux-density direction.
struct MeasureSample {
  Vec position;       // (x0, x1): scaled disc angle and center abscissa
  Vec direction;      // unit (v0, v1, v2), inward: direction[2] > 0
  double polar_angle; // angle to the face normal
};

/// Positions uniform over the face (x0 over one angular period, x1 over the
/// admissible center range), direction drawn with density proportional to
/// cos(phi) on the inward unit hemisphere of the scaled velocity space.
std::vector<MeasureSample> sample_billiard_measure(const BoxTable& box,
                                                   const BilliardParams& params, double energy,
                                                   int count, Rng& rng);

struct ReturnAngleOptions {
  int count = 100000;
  int step_cap = 10000;
  bool uniform_control = false;  // inject uniform launch angles instead of the flux density
  bool specular = false;         // classical mirror reflection instead of rough collisions
  double ks_threshold = 0.01;
  double control_threshold = 0.1;
  double max_dropped_fraction = 1e-3;
  int bins = 50;
  std::uint64_t seed = 1;
};

/// Launches samples from the bottom face of the box with rough collisions
/// (or specular ones, which preserve the measure classically), runs each
/// trajectory to its first return to that face, and compares the return-angle
/// distribution against the CDF sin^2(phi).
ExperimentReport return_angle_experiment(const BoxTable& box, const BilliardParams& params,
                                         const ReturnAngleOptions& opts);

/// Throws std::logic_error when kinetic energy drifted by more than 1e-9
/// relative anywhere along the record.
void assert_energy_invariant(const TrajectoryRecord& record, const BilliardParams& params);

struct CausticTolerances {
  double vertex_spread = 1e-9;
  double radius_spread = 1e-9;
  double tangency = 1e-7;
};

/// Vertex-angle constancy and the two alternating tangent circles of a
/// circular-table trajectory: fits one radius per segment parity from the
/// midpoint distances and reports spreads and midpoint-tangency residuals.
ExperimentReport caustic_analysis(const TrajectoryRecord& record,
                                  const CausticTolerances& tol = {});

/// Maximum excursion of selected center coordinates from the start;
/// bounded when the max over the second half of the trajectory does not
/// exceed 1.05 x the max over the first half.
ExperimentReport boundedness_report(const TrajectoryRecord& record,
                                    const std::vector<int>& projection_axes);

struct LongitudinalTrace {
  std::vector<double> positions;     // longitudinal center coordinate per collision
  std::vector<double> flight_times;
  double flight_time_spread = 0.0;   // max deviation after the first collision
};

LongitudinalTrace longitudinal_trace(const TrajectoryRecord& record, int axis = 0);

struct DiffusionOptions {
  int seeds = 100;
  int steps = 10000;
  int fit_start = 64;      // first collision index entering the log-log fit
  double exponent_lo = 0.8;
  double exponent_hi = 1.2;
  std::uint64_t seed = 1;
};

/// Ensemble mean-square longitudinal displacement in a strip under the given
/// boundary condition; reports the log-log growth-exponent fit.
ExperimentReport strip_diffusion(const StripTable& strip, const BilliardParams& params,
                                 const BoundaryCondition& bc, const DiffusionOptions& opts);

/// Samples boundary points per face and checks that the -1 eigenspace of the
/// boundary condition, expressed in the deterministic tangent frame of the
/// face normal, is the same subspace at every sampled point (max principal
/// angle below 1e-9).
ExperimentReport parallelism_check(const Table& table, const BoundaryField& field,
                                   const BilliardParams& params, int samples_per_face,
                                   std::uint64_t seed);

}  // namespace rough

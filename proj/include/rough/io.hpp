#pragma once

#include "rough/billiard.hpp"
#include "rough/experiments.hpp"

#include <ostream>
#include <string>

namespace rough {

/// 17 significant digits, enough to reproduce the double exactly.
std::string format_double(double x);

/// One row per completed step: step index, collision time, flight time,
/// contact point, center, world center velocity, angular velocity (v0 for
/// n=2, wx,wy,wz for n=3, z_ij entries otherwise), energy, rough rank.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& record,
                          const BilliardParams& params);

/// Polyline of the center of mass (horizontal projection in 3d) with the
/// table outline where drawable.
void write_trajectory_svg(std::ostream& os, const TrajectoryRecord& record, const Table& table);

void write_histogram_csv(std::ostream& os, const Histogram& h);

void write_histogram_svg(std::ostream& os, const Histogram& h);

/// key=value lines; pass prints as 0/1.
void write_report(std::ostream& os, const ExperimentReport& report);

}  // namespace rough

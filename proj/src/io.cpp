#include "rough/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rough {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::string angular_header(int n) {
  if (n == 2) return "v0";
  if (n == 3) return "wx,wy,wz";
  std::string h;
  for (const auto& [i, j] : so_index_pairs(n)) {
    if (!h.empty()) h += ",";
    h += "z" + std::to_string(i) + std::to_string(j);
  }
  return h;
}

std::string angular_values(const BilliardState& s, const BilliardParams& p) {
  const int n = s.g.dim();
  const Mat& z = s.xi.Z.matrix();
  if (n == 2) return format_double(p.radius * z(1, 0) / std::sqrt(2.0));
  if (n == 3)
    return format_double(z(2, 1)) + "," + format_double(z(0, 2)) + "," + format_double(z(1, 0));
  std::string out;
  for (const auto& [i, j] : so_index_pairs(n)) {
    if (!out.empty()) out += ",";
    out += format_double(z(j, i));
  }
  return out;
}

std::string axis_names(const char* prefix, int n) {
  const char* axes = "xyzw";
  std::string h;
  for (int i = 0; i < n; ++i) {
    if (!h.empty()) h += ",";
    h += std::string(prefix) + axes[i];
  }
  return h;
}

std::string vec_values(const Vec& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (!out.empty()) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& record,
                          const BilliardParams& params) {
  if (record.states.empty()) return;
  const int n = record.states.front().g.dim();
  os << "step,t,tau," << axis_names("b", n) << "," << axis_names("a", n) << ","
     << axis_names("v", n) << "," << angular_header(n) << ",energy,rough_rank\n";

  for (int k = 0; k < record.steps(); ++k) {
    const BilliardState& s = record.states[k + 1];
    const Vec v_world = s.g.A * s.xi.z;
    os << (k + 1) << "," << format_double(s.t) << "," << format_double(record.flight_times[k])
       << "," << vec_values(s.contact) << "," << vec_values(s.g.a) << "," << vec_values(v_world)
       << "," << angular_values(s, params) << ","
       << format_double(billiard_energy(params, s.xi)) << "," << record.rough_ranks[k] << "\n";
  }
}

void write_trajectory_svg(std::ostream& os, const TrajectoryRecord& record, const Table& table) {
  // center-of-mass path; for 3d tables this is the horizontal projection
  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : record.states) {
    xmin = std::min(xmin, s.g.a[0]);
    xmax = std::max(xmax, s.g.a[0]);
    ymin = std::min(ymin, s.g.a[1]);
    ymax = std::max(ymax, s.g.a[1]);
  }
  if (const auto* c = std::get_if<CircleTable>(&table)) {
    xmin = std::min(xmin, -c->r);
    xmax = std::max(xmax, c->r);
    ymin = std::min(ymin, -c->r);
    ymax = std::max(ymax, c->r);
  }
  const double margin = 0.05 * std::max(xmax - xmin, ymax - ymin) + 1e-6;
  xmin -= margin;
  xmax += margin;
  ymin -= margin;
  ymax += margin;

  const double w = xmax - xmin, h = ymax - ymin;
  const double stroke = 0.002 * std::max(w, h);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\""
     << static_cast<int>(640.0 * h / w) << "\" viewBox=\"" << xmin << " " << -ymax << " " << w
     << " " << h << "\">\n";
  os << "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"" << stroke << "\">\n";

  if (const auto* c = std::get_if<CircleTable>(&table)) {
    os << "<circle cx=\"0\" cy=\"0\" r=\"" << c->r << "\" stroke=\"#888\"/>\n";
  } else if (const auto* wt = std::get_if<WedgeTable>(&table)) {
    const double s = std::sin(wt->half_angle), c2 = std::cos(wt->half_angle);
    const double len = 2.0 * std::max({std::abs(xmin), std::abs(xmax), std::abs(ymax), 1.0});
    os << "<path d=\"M " << len * s << " " << len * c2 << " L 0 0 L " << -len * s << " "
       << len * c2 << "\" stroke=\"#888\"/>\n";
  } else if (const auto* st = std::get_if<StripTable>(&table)) {
    os << "<path d=\"M " << xmin << " 0 H " << xmax << "\" stroke=\"#888\"/>\n";
    os << "<path d=\"M " << xmin << " " << st->width << " H " << xmax << "\" stroke=\"#888\"/>\n";
  } else if (const auto* bx = std::get_if<BoxTable>(&table)) {
    os << "<rect x=\"0\" y=\"0\" width=\"" << bx->width << "\" height=\"" << bx->height
       << "\" stroke=\"#888\"/>\n";
  }

  os << "<polyline stroke=\"#1f6fb2\" points=\"";
  for (const auto& s : record.states) os << s.g.a[0] << "," << s.g.a[1] << " ";
  os << "\"/>\n</g>\n</svg>\n";
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_lo,bin_hi,count\n";
  const int bins = static_cast<int>(h.counts.size());
  for (int b = 0; b < bins; ++b) {
    const double lo = h.lo + (h.hi - h.lo) * b / bins;
    const double hi = h.lo + (h.hi - h.lo) * (b + 1) / bins;
    os << format_double(lo) << "," << format_double(hi) << "," << h.counts[b] << "\n";
  }
}

void write_histogram_svg(std::ostream& os, const Histogram& h) {
  const int bins = static_cast<int>(h.counts.size());
  const long peak = h.counts.empty() ? 1 : std::max(1L, *std::max_element(h.counts.begin(), h.counts.end()));
  const double bw = 640.0 / std::max(bins, 1);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" "
        "viewBox=\"0 0 640 360\">\n";
  for (int b = 0; b < bins; ++b) {
    const double bh = 340.0 * static_cast<double>(h.counts[b]) / static_cast<double>(peak);
    os << "<rect x=\"" << b * bw << "\" y=\"" << 350.0 - bh << "\" width=\"" << bw * 0.92
       << "\" height=\"" << bh << "\" fill=\"#1f6fb2\"/>\n";
  }
  os << "</svg>\n";
}

void write_report(std::ostream& os, const ExperimentReport& report) {
  os << "name=" << report.name << "\n";
  os << "pass=" << (report.pass ? 1 : 0) << "\n";
  for (const auto& [key, value] : report.stats) os << key << "=" << format_double(value) << "\n";
}

}  // namespace rough

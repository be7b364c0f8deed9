#pragma once

#include "rough/billiard.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rough {

/// Everything a run needs, parseable from flat key=value text with CLI flag
/// overrides (flags win).  All keys are serialized back by serialize_config,
/// and a serialized config re-parses to an identical one.
struct RunConfig {
  std::string command = "simulate";  // simulate | experiment | verify
  std::string experiment = "return-angle";
  std::string verify_kind = "strict";

  int n = 2;
  std::string table = "circle";
  double r = 2.0;          // circle radius
  double half_angle = 0.6; // wedge
  double width = 2.0;      // strip / box width
  double height = 1.0;     // box height
  double gap = 1.0;        // plates3d
  double R = 0.5;          // ball radius
  double mass = 1.0;
  double lambda = 0.0;     // 0 = derive R^2/(n+2)

  std::string rough = "none";
  std::string rough_top;   // optional override for face 1 (strip / plates3d)

  long steps = 1000;
  long count = 100000;
  int trials = 500;
  int k = -1;              // roughness rank for verify; -1 = random per trial
  std::uint64_t seed = 20240101;

  std::string out;
  std::string svg;

  std::vector<double> init_b;      // contact point on the table boundary
  std::vector<double> init_v;      // world center velocity
  double init_v0 = 0.0;            // scaled angular velocity (n = 2)
  std::vector<double> init_omega;  // angular velocity vector (n = 3)

  double effective_lambda() const { return lambda > 0.0 ? lambda : R * R / (n + 2); }
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;  // every validation failure, not just the first

  bool ok() const { return errors.empty(); }
};

/// Parses key=value lines ('#' starts a comment), applies overrides on top,
/// then validates.  Returns either a config or the full error list.
ParseResult parse_config(const std::string& text,
                         const std::vector<std::pair<std::string, std::string>>& overrides = {});

std::string serialize_config(const RunConfig& cfg);

Table make_table(const RunConfig& cfg);
BoundaryCondition parse_rough_spec(const std::string& spec, int n);
BoundaryField make_boundary_field(const RunConfig& cfg);
BilliardParams make_params(const RunConfig& cfg);
BilliardState make_initial_state(const RunConfig& cfg, const Table& table);

/// Executes the configured command, writing artifacts to the configured
/// paths.  Returns the process exit status: 0 on success, 2 when a
/// trajectory terminates early (reason on err), 1 on usage or I/O errors.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace rough

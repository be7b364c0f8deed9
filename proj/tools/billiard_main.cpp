#include "rough/config.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

// Records every flag the user actually set, as key=value overrides applied
// on top of the optional config file (flags win).
struct FlagSet {
  CLI::App* cmd;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(const std::string& key, const std::string& flag, const std::string& desc) {
    options.emplace_back(key, cmd->add_option(flag, values[key], desc));
  }

  void collect(std::vector<std::pair<std::string, std::string>>& overrides) const {
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) overrides.emplace_back(key, values.at(key));
  }
};

void add_common_flags(FlagSet& fs) {
  fs.add("n", "--n", "ambient dimension (2, 3, or 4)");
  fs.add("table", "--table", "table variant: circle|wedge|strip|plates3d|box");
  fs.add("r", "--r", "circle table radius");
  fs.add("half_angle", "--half-angle", "wedge half-angle (radians)");
  fs.add("width", "--width", "strip/box width");
  fs.add("height", "--height", "box height");
  fs.add("gap", "--gap", "plates3d gap");
  fs.add("R", "--R", "ball radius");
  fs.add("mass", "--mass", "ball mass");
  fs.add("lambda", "--lambda", "inertia coefficient (default R^2/(n+2))");
  fs.add("rough", "--rough",
         "boundary condition: none|full|rank:k[:angles]|random:p|random:dir:angles|hemisphere:axis");
  fs.add("rough_top", "--rough-top", "override for the top face (strip/plates3d)");
  fs.add("steps", "--steps", "number of billiard steps");
  fs.add("count", "--count", "sample count for ensemble experiments");
  fs.add("trials", "--trials", "random configurations for verify");
  fs.add("k", "--k", "roughness rank for verify (-1 = random)");
  fs.add("seed", "--seed", "random seed");
  fs.add("out", "--out", "output path (CSV or report)");
  fs.add("svg", "--svg", "SVG output path");
  fs.add("init_b", "--init-b", "initial contact point, comma separated");
  fs.add("init_v", "--init-v", "initial world center velocity, comma separated");
  fs.add("init_v0", "--init-v0", "initial scaled angular velocity (n=2)");
  fs.add("init_omega", "--init-omega", "initial angular velocity vector (n=3)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid-ball billiards on SE(n) with non-specular boundary conditions"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key=value config file; flags override")
      ->expected(1);

  CLI::App* sim = app.add_subcommand("simulate", "run one trajectory and write CSV/SVG");
  CLI::App* exp = app.add_subcommand("experiment", "run a reproducible experiment");
  CLI::App* ver = app.add_subcommand("verify", "check collision-map and subspace properties");

  std::string experiment_kind = "return-angle";
  exp->add_option("kind", experiment_kind, "return-angle|caustics|bounded|strip");
  std::string verify_kind = "strict";
  ver->add_option("kind", verify_kind, "strict|orthogonality|dims");

  FlagSet sim_flags{sim}, exp_flags{exp}, ver_flags{ver};
  add_common_flags(sim_flags);
  add_common_flags(exp_flags);
  add_common_flags(ver_flags);

  CLI11_PARSE(app, argc, argv);

  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read config file " << config_path << "\n";
      return 1;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  std::vector<std::pair<std::string, std::string>> overrides;
  if (sim->parsed()) {
    overrides.emplace_back("command", "simulate");
    sim_flags.collect(overrides);
  } else if (exp->parsed()) {
    overrides.emplace_back("command", "experiment");
    overrides.emplace_back("experiment", experiment_kind);
    exp_flags.collect(overrides);
  } else {
    overrides.emplace_back("command", "verify");
    overrides.emplace_back("verify", verify_kind);
    ver_flags.collect(overrides);
  }

  const rough::ParseResult parsed = rough::parse_config(text, overrides);
  if (!parsed.ok()) {
    for (const std::string& e : parsed.errors) std::cerr << "config error: " << e << "\n";
    return 1;
  }
  return rough::run(*parsed.config, std::cout, std::cerr);
}

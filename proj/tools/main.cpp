#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "report.hpp"

namespace {

using namespace nilcube::cli;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nilcube::Error(nilcube::ErrorKind::Parse, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nilcube: cube spaces, translation groups and cocycle solvers on finite examples"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string spec_path, cocycle_path, out_path;
  std::optional<int> max_dim;
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--spec", spec_path, "space specification file")->required();
    sub->add_option("--max-dim", max_dim, "largest cube dimension considered")->check(CLI::Range(0, 8));
    sub->add_option("--seed", opt.seed, "seed for sampled checks")->capture_default_str();
    sub->add_option("--out", out_path, "write the JSON report here instead of stdout");
    sub->add_flag("--timings", opt.timings, "include wall-clock timings in the report");
  };

  auto* check = app.add_subcommand("check", "check the cube space axioms");
  common(check);
  auto* trans = app.add_subcommand("translations", "enumerate the translation groups");
  common(trans);
  trans->add_option("--k", opt.k_range, "levels, e.g. 1-3 or 1,2 (default 1..degree+1)");
  auto* solve = app.add_subcommand("solve", "write a cocycle as a coboundary");
  common(solve);
  solve->add_option("--cocycle", cocycle_path, "cocycle table")->required();
  solve->add_option("--method", opt.method, "averaging, linear or both")
      ->check(CLI::IsMember({"averaging", "linear", "both"}))
      ->capture_default_str();
  auto* lift = app.add_subcommand("lift", "lift a translation of the canonical factor");
  common(lift);
  lift->add_option("--map", opt.map, "images of the factor points, or 'identity'")->required();
  lift->add_option("--k", opt.k, "translation level")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  Inputs in;
  in.spec_path = spec_path;
  Outcome result;
  try {
    in.spec_text = read_file(spec_path);
    // precedence: flags > [caps] in the spec > NILCUBE_CAPS > built-in defaults
    const Caps env = caps_from_env(std::getenv("NILCUBE_CAPS"));
    SpaceSpec spec = parse_space_spec(in.spec_text, spec_path, env);
    if (max_dim) spec.caps.max_dim = *max_dim;
    if (*solve) {
      in.cocycle_path = cocycle_path;
      in.cocycle_text = read_file(cocycle_path);
    }
    if (*check) result = run_check(spec, in, opt);
    else if (*trans) result = run_translations(spec, in, opt);
    else if (*solve) result = run_solve(spec, in, opt);
    else result = run_lift(spec, in, opt);
  } catch (const ParseError& e) {
    std::cerr << e.diagnostic() << "\n";
    return kExitUsage;
  } catch (const nilcube::Error& e) {
    std::cerr << "nilcube: error: " << e.what() << " [" << nilcube::to_string(e.kind()) << "]\n";
    return e.kind() == nilcube::ErrorKind::CapExceeded ? kExitCap : kExitUsage;
  }

  result.report["exit_code"] = result.exit_code;
  const std::string text = render(result.report);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!(out << text)) {
      std::cerr << "nilcube: error: cannot write '" << out_path << "'\n";
      return kExitUsage;
    }
  }
  return result.exit_code;
}
